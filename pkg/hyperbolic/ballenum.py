"""
Group Ball Enumeration
Breadth-first closure of a surface group under right multiplication by generators,
pruned by displacement of the origin, deduplicated with a k-d tree on orbit
coordinates and emitted in canonical (displacement, fingerprint) order.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

import config
from errors import BudgetExceededError, DegenerateInputError
from hyperbolic.geometry import (
    FINGERPRINT_QUANTUM,
    Isometry,
    canonical_sign,
    compose_all,
    compose_coefficients,
    fingerprint,
    hyperboloid_coordinates,
    isometry_distance,
    normalize_coefficients,
)

logger = logging.getLogger(__name__)

# Distinct orbit points sit at least a systole apart on the hyperboloid, far above this.
DEDUP_TOL = 1e-6
DISPLACEMENT_TOL = 1e-9


# =========================
# 1. ELEMENTS AND BALLS
# =========================

@dataclass(frozen=True)
class GroupElement:
    word: tuple
    isometry: Isometry
    displacement: float
    fingerprint: tuple


@dataclass(frozen=True, eq=False)
class GroupBall:
    """
    Elements of the group moving the origin by at most R, in canonical order.
    Coefficient arrays are the primary storage; `elements` materializes records.
    """

    R: float
    slack: float
    words: tuple
    a: np.ndarray
    b: np.ndarray
    displacements: np.ndarray
    dedup_quantum: float = FINGERPRINT_QUANTUM

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.elements)

    @cached_property
    def fingerprints(self) -> np.ndarray:
        return fingerprint(self.a, self.b, self.dedup_quantum).reshape(-1, 4)

    @cached_property
    def elements(self) -> list:
        return [self.element(i) for i in range(len(self))]

    @cached_property
    def orbit_points(self) -> np.ndarray:
        return self.b / np.conj(self.a)

    @cached_property
    def word_lengths(self) -> np.ndarray:
        return np.array([len(w) for w in self.words], dtype=int)

    def element(self, index) -> GroupElement:
        return GroupElement(
            word=self.words[index],
            isometry=self.isometry(index),
            displacement=float(self.displacements[index]),
            fingerprint=tuple(int(v) for v in self.fingerprints[index]),
        )

    def isometry(self, index) -> Isometry:
        return Isometry(complex(self.a[index]), complex(self.b[index]))

    def fingerprint_set(self) -> set:
        return {tuple(int(v) for v in row) for row in self.fingerprints}

    def restrict(self, R):
        """Sub-ball of radius R <= self.R, order preserved."""
        keep = np.flatnonzero(self.displacements <= R + DISPLACEMENT_TOL)
        return self.subset(keep, R=min(R, self.R))

    def subset(self, indices, R=None):
        indices = np.asarray(indices, dtype=int)
        return GroupBall(
            R=self.R if R is None else R,
            slack=self.slack,
            words=tuple(self.words[i] for i in indices),
            a=self.a[indices],
            b=self.b[indices],
            displacements=self.displacements[indices],
            dedup_quantum=self.dedup_quantum,
        )

    def index_of(self, isometry, tol=1e-8):
        """Index of the element matching `isometry`, or None."""
        dist = np.minimum(
            np.abs(self.a - isometry.a) + np.abs(self.b - isometry.b),
            np.abs(self.a + isometry.a) + np.abs(self.b + isometry.b),
        )
        best = int(np.argmin(dist))
        return best if dist[best] <= tol * max(1.0, abs(isometry.a)) else None


# =========================
# 2. BREADTH-FIRST CLOSURE
# =========================

def _generator_arrays(group):
    labels = tuple(group.labels)
    gen_a = np.array([group.generators[x].a for x in labels])
    gen_b = np.array([group.generators[x].b for x in labels])
    return labels, gen_a, gen_b


def _breadth_first(group, limit, max_layers, budget):
    """
    Layered closure: every element with displacement <= limit reachable through
    such elements, up to `max_layers` letters. Returns coefficient, parent and
    letter arrays plus the layer each element was found in, or raises with the
    completed radius when the element count passes `budget`.
    """
    labels, gen_a, gen_b = _generator_arrays(group)
    G = len(labels)

    a_all = np.array([1.0 + 0j])
    b_all = np.array([0j])
    parent = np.array([-1])
    letter = np.array([-1])
    layer = np.array([0])
    coords = hyperboloid_coordinates(a_all, b_all).reshape(1, 3)
    frontier = np.array([0])
    depth = 0

    while frontier.size and depth < max_layers:
        depth += 1
        fa = a_all[frontier]
        fb = b_all[frontier]
        cand_a, cand_b = compose_coefficients(fa[:, None], fb[:, None], gen_a[None, :], gen_b[None, :])
        cand_a, cand_b = canonical_sign(*normalize_coefficients(cand_a.ravel(), cand_b.ravel()))
        cand_parent = np.repeat(frontier, G)
        cand_letter = np.tile(np.arange(G), frontier.size)

        within = 2.0 * np.arcsinh(np.abs(cand_b)) <= limit + DISPLACEMENT_TOL
        cand_a, cand_b = cand_a[within], cand_b[within]
        cand_parent, cand_letter = cand_parent[within], cand_letter[within]
        if cand_a.size == 0:
            break

        cand_coords = hyperboloid_coordinates(cand_a, cand_b)
        known, _ = cKDTree(coords).query(cand_coords, k=1, distance_upper_bound=DEDUP_TOL)
        fresh = np.flatnonzero(~np.isfinite(known))
        cand_coords = cand_coords[fresh]
        duplicate = np.zeros(fresh.size, dtype=bool)
        pairs = cKDTree(cand_coords).query_pairs(DEDUP_TOL, output_type="ndarray")
        if len(pairs):
            duplicate[pairs.max(axis=1)] = True
        fresh = fresh[~duplicate]

        start = a_all.size
        a_all = np.concatenate([a_all, cand_a[fresh]])
        b_all = np.concatenate([b_all, cand_b[fresh]])
        parent = np.concatenate([parent, cand_parent[fresh]])
        letter = np.concatenate([letter, cand_letter[fresh]])
        layer = np.concatenate([layer, np.full(fresh.size, depth)])
        coords = np.concatenate([coords, cand_coords[~duplicate]])
        frontier = np.arange(start, a_all.size)
        logger.debug("layer %d: %d new elements, %d total", depth, fresh.size, a_all.size)

        if a_all.size > budget:
            pending = 2.0 * np.arcsinh(np.abs(b_all[frontier]))
            raise _BudgetHit(a_all, b_all, parent, letter, layer, float(pending.min()))

    return labels, a_all, b_all, parent, letter, layer


class _BudgetHit(Exception):
    def __init__(self, a, b, parent, letter, layer, frontier_min):
        super().__init__("budget")
        self.arrays = (a, b, parent, letter, layer)
        self.frontier_min = frontier_min


def _words(labels, parent, letter, indices):
    cache = {0: ()}

    def word_of(i):
        chain = []
        while i not in cache:
            chain.append(i)
            i = int(parent[i])
        word = cache[i]
        for j in reversed(chain):
            word = word + (labels[letter[j]],)
            cache[j] = word
        return word

    return tuple(word_of(int(i)) for i in indices)


def _assemble(labels, a, b, parent, letter, R, slack, keep):
    disp = 2.0 * np.arcsinh(np.abs(b[keep]))
    fp = fingerprint(a[keep], b[keep]).reshape(-1, 4)
    order = np.lexsort((fp[:, 3], fp[:, 2], fp[:, 1], fp[:, 0], np.round(disp, 9)))
    chosen = keep[order]
    return GroupBall(
        R=float(R),
        slack=float(slack),
        words=_words(labels, parent, letter, chosen),
        a=a[chosen],
        b=b[chosen],
        displacements=disp[order],
    )


def enumerate_ball(group, R, slack=None, budget=None) -> GroupBall:
    """
    All group elements with d_P(0, g(0)) <= R.

    Intermediates are pruned at R + slack. The default slack is the polygon's
    circumradius: the tiles met by the segment [0, g(0)] give a generator path
    whose intermediates stay within R + circumradius.
    """
    if R < 0:
        raise DegenerateInputError(f"radius must be nonnegative, got {R}")
    slack = group.polygon.circumradius if slack is None else slack
    budget = config.BALL_BUDGET if budget is None else budget

    try:
        labels, a, b, parent, letter, _ = _breadth_first(group, R + slack, np.inf, budget)
    except _BudgetHit as hit:
        a, b, parent, letter, _ = hit.arrays
        completed = max(0.0, min(R, hit.frontier_min - slack))
        disp = 2.0 * np.arcsinh(np.abs(b))
        keep = np.flatnonzero(disp <= completed + DISPLACEMENT_TOL)
        partial = _assemble(tuple(group.labels), a, b, parent, letter, completed, slack, keep)
        raise BudgetExceededError(
            f"ball of radius {R} exceeded the budget of {budget} elements; exact up to {completed:.4f}",
            partial=partial,
            completed_radius=completed,
        ) from None

    disp = 2.0 * np.arcsinh(np.abs(b))
    keep = np.flatnonzero(disp <= R + DISPLACEMENT_TOL)
    ball = _assemble(labels, a, b, parent, letter, R, slack, keep)
    logger.info("enumerated ball R=%.4g slack=%.4g: %d elements (%d visited)", R, slack, len(ball), a.size)
    return ball


def enumerate_word_ball(group, depth, budget=None) -> GroupBall:
    """
    All elements expressible by words of length <= depth, with shortest words.
    Layers are added whole, so on a budget hit every layer found so far is
    complete; the partial ball and its depth ride on the error.
    """
    budget = config.BALL_BUDGET if budget is None else budget
    try:
        labels, a, b, parent, letter, _ = _breadth_first(group, np.inf, depth, budget)
    except _BudgetHit as hit:
        a, b, parent, letter, layer = hit.arrays
        reached = int(layer.max())
        disp = 2.0 * np.arcsinh(np.abs(b))
        partial = _assemble(tuple(group.labels), a, b, parent, letter, float(disp.max()), 0.0, np.arange(a.size))
        raise BudgetExceededError(
            f"word ball of depth {depth} exceeded the budget of {budget}; complete to depth {reached}",
            partial=partial,
            completed_radius=reached,
        ) from None
    disp = 2.0 * np.arcsinh(np.abs(b))
    return _assemble(labels, a, b, parent, letter, float(disp.max()), 0.0, np.arange(a.size))


# =========================
# 3. DIAGNOSTICS
# =========================

@dataclass(frozen=True)
class GrowthProfile:
    table: pd.DataFrame
    log_slope: float


def growth_profile(group, R_grid, slack=None, budget=None) -> GrowthProfile:
    """Element counts over an increasing radius grid and the log-count slope over its top half."""
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.size < 2 or np.any(np.diff(R_grid) <= 0):
        raise DegenerateInputError("R_grid must be strictly increasing with at least two points")
    ball = enumerate_ball(group, float(R_grid[-1]), slack, budget)
    counts = np.searchsorted(ball.displacements, R_grid + DISPLACEMENT_TOL, side="right")
    table = pd.DataFrame({"R": R_grid, "count": counts})
    top = table.iloc[len(table) // 2:]
    slope = float(np.polyfit(top["R"], np.log(top["count"]), 1)[0])
    return GrowthProfile(table=table, log_slope=slope)


def word_residual(group, ball) -> float:
    """Max distance between each element and the product of its word."""
    worst = 0.0
    for i, word in enumerate(ball.words):
        product = compose_all(group.generators[x] for x in word)
        worst = max(worst, isometry_distance(product, ball.isometry(i)) / max(1.0, abs(ball.a[i])))
    return worst


def inverse_word(word):
    return tuple(x.swapcase() for x in reversed(word))


def free_reduce(word):
    stack = []
    for x in word:
        if stack and stack[-1] == x.swapcase():
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def dehn_reduce(word, relator):
    """
    Dehn's algorithm: repeatedly replace a subword that is more than half of a
    cyclic conjugate of the relator (or its inverse) by the inverse of the rest.
    A word is trivial in a surface group iff this reduces it to ().
    """
    L = len(relator)
    rotations = [r[i:] + r[:i] for r in (tuple(relator), inverse_word(relator)) for i in range(L)]
    word = free_reduce(word)
    changed = True
    while changed:
        changed = False
        for k in range(L, L // 2, -1):
            for rot in rotations:
                piece, rest = rot[:k], rot[k:]
                for i in range(len(word) - k + 1):
                    if word[i:i + k] == piece:
                        word = free_reduce(word[:i] + inverse_word(rest) + word[i + k:])
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return word


def dehn_cross_check(group, ball, tol=1e-6) -> int:
    """
    Count dedup failures on a small ball: nonidentity elements whose word is
    trivial, and pairs of near-equal displacement whose quotient word is trivial.
    """
    violations = sum(1 for w in ball.words[1:] if not dehn_reduce(w, group.relator))
    buckets = {}
    for i, d in enumerate(ball.displacements):
        buckets.setdefault(round(float(d) / tol), []).append(i)
    for members in buckets.values():
        for p, i in enumerate(members):
            for j in members[p + 1:]:
                if not dehn_reduce(ball.words[i] + inverse_word(ball.words[j]), group.relator):
                    violations += 1
    return violations
