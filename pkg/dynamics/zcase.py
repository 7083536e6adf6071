"""
Single-Generator (Z-case) Theory
Powers realized inside group balls, the growth constant K0, exact cylinder
counts and measures on full shifts, and the entropy formula 2 + 2·K0·h.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from errors import DegenerateInputError, InvalidSystemError
from dynamics.entropy import BowenFamily, greedy_separated
from dynamics.transversal import CatMap, CircleRotation, FinitePermutation, FullShift

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-9
K0_COLUMNS = ["R", "n_R", "ratio", "running_sup", "lower_bound", "upper_bound"]
BK_COLUMNS = ["sample", "n", "m", "neg_log_measure", "paper_value", "corrected_value"]


# =========================
# 1. POWERS INSIDE BALLS
# =========================

def _label_exponent(label, exponents):
    n = int(exponents.get(label.lower(), 0))
    return n if label.islower() else -n


def element_exponents(ball, exponents) -> np.ndarray:
    """Exponent sum of every element's word."""
    return np.array([sum(_label_exponent(x, exponents) for x in word) for word in ball.words], dtype=np.int64)


def n_of_R(ball, exponents) -> int:
    """Largest |exponent sum| over the ball."""
    return int(np.abs(element_exponents(ball, exponents)).max())


@dataclass(frozen=True)
class ExponentSet:
    values: np.ndarray
    max_gap: int


def exponent_set(ball, exponents) -> ExponentSet:
    """The set of powers realized in the ball and its largest gap."""
    values = np.unique(element_exponents(ball, exponents))
    gap = int(np.diff(values).max()) if values.size > 1 else 0
    return ExponentSet(values=values, max_gap=gap)


def k0_bounds(R, exponents, weights, K):
    """
    Two-sided bracket on n(R): max over generators of floor(R / w)·|n| from
    below, ceil(2·K·R)·max |n| from above.
    """
    active = {x: abs(_label_exponent(x, exponents)) for x in weights if _label_exponent(x, exponents)}
    if not active:
        return 0, 0
    lower = max(math.floor(R / weights[x] + 1e-9) * n for x, n in active.items())
    upper = math.ceil(2 * K * R) * max(active.values()) if K else None
    return lower, upper


@dataclass(frozen=True)
class K0Estimate:
    table: pd.DataFrame
    generator_bound: float
    superadditivity_violations: int
    bound_violations: int

    @property
    def certified(self) -> float:
        """Largest n(R)/R seen: a lower bound for K0."""
        return float(self.table["running_sup"].iloc[-1])

    @property
    def stability(self) -> float:
        """Relative change of the running sup between the last two grid points."""
        sups = self.table["running_sup"].to_numpy()
        return float(abs(sups[-1] - sups[-2]) / sups[-1]) if len(sups) > 1 and sups[-1] > 0 else float("nan")

    @property
    def stable(self) -> bool:
        return self.stability <= 0.10


def k0_estimate(group, exponents, R_grid, ball=None, table=None) -> K0Estimate:
    """n(R) along the grid, running sup of n(R)/R and the checks that back it."""
    R_grid = np.asarray(sorted(R_grid), dtype=float)
    if not any(exponents.get(x, 0) for x in exponents):
        raise DegenerateInputError("all exponents are zero; n(R) vanishes and K0 is undefined")
    if ball is None:
        from hyperbolic.ballenum import enumerate_ball

        ball = enumerate_ball(group, float(R_grid[-1]))
    values = element_exponents(ball, exponents)
    n_values = np.array([
        int(np.abs(values[ball.displacements <= R + 1e-9]).max()) for R in R_grid
    ])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(R_grid > 0, n_values / R_grid, 0.0)
    running = np.maximum.accumulate(ratios)

    K = table.K if table is not None else None
    bounds = [k0_bounds(R, exponents, group.weights, K) for R in R_grid]
    frame = pd.DataFrame({
        "R": R_grid,
        "n_R": n_values,
        "ratio": ratios,
        "running_sup": running,
        "lower_bound": [lo for lo, _ in bounds],
        "upper_bound": [hi for _, hi in bounds],
    }, columns=K0_COLUMNS)

    violations = 0
    for i, R in enumerate(R_grid):
        for j in range(i, len(R_grid)):
            match = np.flatnonzero(np.isclose(R_grid, R + R_grid[j], atol=1e-9))
            if match.size and n_values[match[0]] < n_values[i] + n_values[j]:
                violations += 1
    bound_violations = int(sum(
        n < lo or (hi is not None and n > hi) for n, (lo, hi) in zip(n_values, bounds)
    ))
    generator_bound = max(
        abs(_label_exponent(x, exponents)) / w for x, w in group.weights.items()
    )
    estimate = K0Estimate(frame, generator_bound, violations, bound_violations)
    logger.info("K0 >= %.6f (generator bound %.6f, stability %.3f)", estimate.certified, generator_bound,
                estimate.stability)
    return estimate


def casz_formula(K0, htop) -> float:
    """2 + 2·K0·h."""
    return 2.0 + 2.0 * K0 * htop


# =========================
# 2. EXACT SHIFT COUNTS
# =========================

def shift_bowen_count_exact(k, n, m, two_sided=False) -> int:
    """Cylinder count for the window of the (n, 2^-m) Bowen ball."""
    if k < 2 or n < 0 or m < 0:
        raise InvalidSystemError(f"need k >= 2 and n, m >= 0, got k={k}, n={n}, m={m}")
    return k ** (2 * (n + m) + 1) if two_sided else k ** (n + 2 * m + 1)


def window_positions(exponents, m):
    return sorted({i for e in exponents for i in range(int(e) - m, int(e) + m + 1)})


def shift_window_count(k, exponents, m) -> int:
    """k to the size of the union of [e - m, e + m] over the exponent set."""
    return k ** len(window_positions(exponents, m))


@dataclass(frozen=True)
class IdentityCheck:
    two_sided: int
    one_sided: int
    exact: bool
    matched: bool

    @property
    def equal(self) -> bool:
        return self.two_sided == self.one_sided if self.exact else abs(self.two_sided - self.one_sided) <= 1


def _pulled_back_order(system, map_name, centers, n, order):
    """Positions of f^-n(c) in the centers, visited in `order`; None unless the centers are invariant."""
    size = system.size(centers)
    positions = {system.key(system.take(centers, i)): i for i in range(size)}
    pulled = system.act(map_name, centers, -n) if n else centers
    found = [positions.get(system.key(system.take(pulled, int(i)))) for i in order]
    return None if None in found else np.array(found, dtype=int)


def two_sided_identity_check(system, n, eps, centers, map_name=None, seed=None) -> IdentityCheck:
    """
    Greedy counts on one common set of centers: powers -n..n against powers 0..2n.
    When the centers are invariant under the map, the one-sided net visits f^-n(c)
    in the order the two-sided net visits c; otherwise both walk the same order.
    """
    map_name = map_name or system.primary_map
    two = BowenFamily.two_sided(system, map_name).cloud(n, centers)
    one = BowenFamily.one_sided(system, map_name).cloud(2 * n, centers)
    size = system.size(centers)
    order = np.arange(size) if seed is None else np.random.default_rng(seed).permutation(size)
    pulled = _pulled_back_order(system, map_name, centers, n, order)
    return IdentityCheck(
        two_sided=len(greedy_separated(two, eps, order=order)),
        one_sided=len(greedy_separated(one, eps, order=order if pulled is None else pulled)),
        exact=system.exact,
        matched=pulled is not None,
    )


# =========================
# 3. MEASURES AND ENTROPIES
# =========================

def _distribution(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise InvalidSystemError(f"{p.tolist()} is not a probability vector")
    return p


def bernoulli_entropy(p) -> float:
    p = _distribution(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def reference_htop(system) -> float:
    if isinstance(system, FullShift):
        return math.log(system.k)
    if isinstance(system, (CircleRotation, FinitePermutation)):
        return 0.0
    if isinstance(system, CatMap):
        return math.log((3.0 + math.sqrt(5.0)) / 2.0)
    raise InvalidSystemError(f"no reference entropy for {system!r}")


def _neg_log_cylinder(p, t, positions):
    probs = p[t.symbol_at(np.asarray(positions)).astype(int)]
    if np.any(probs == 0):
        raise InvalidSystemError("point carries a zero-probability symbol inside the window")
    return math.fsum(-math.log(q) for q in probs)


@dataclass(frozen=True)
class BrinKatokValue:
    n: int
    m: int
    neg_log_measure: float

    @property
    def paper_value(self):
        """Normalized by n; tends to twice the measure entropy."""
        return self.neg_log_measure / self.n

    @property
    def corrected_value(self):
        """Normalized by the window size 2(n + m) + 1; tends to the measure entropy."""
        return self.neg_log_measure / (2 * (self.n + self.m) + 1)


def brin_katok_two_sided(p, t, n, m) -> BrinKatokValue:
    """-log of the Bernoulli measure of the two-sided (n, 2^-m) Bowen ball around t."""
    if n < 1 or m < 0:
        raise DegenerateInputError(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    p = _distribution(p)
    positions = np.arange(-(n + m), n + m + 1)
    return BrinKatokValue(n=n, m=m, neg_log_measure=_neg_log_cylinder(p, t, positions))


def cylinder_measure(p, t, n, m) -> float:
    """Product of symbol probabilities over the two-sided window."""
    p = _distribution(p)
    symbols = t.symbol_at(np.arange(-(n + m), n + m + 1)).astype(int)
    return float(np.prod(p[symbols]))


def brin_katok_gamma(p, t, exponents, m) -> float:
    """-log measure of the Bowen ball indexed by an arbitrary exponent set."""
    return _neg_log_cylinder(_distribution(p), t, window_positions(exponents, m))


def brin_katok_table(p, n, m, samples, seed, W=None) -> pd.DataFrame:
    p = _distribution(p)
    W = W or n + m + 1
    system = FullShift(len(p), W, depth=min(8, W))
    points = system.sample(samples, seed, p=p)
    rows = []
    for i in range(samples):
        value = brin_katok_two_sided(p, points[i], n, m)
        rows.append({"sample": i, "n": n, "m": m, "neg_log_measure": value.neg_log_measure,
                     "paper_value": value.paper_value, "corrected_value": value.corrected_value})
    return pd.DataFrame(rows, columns=BK_COLUMNS)


@dataclass(frozen=True)
class VariationalCheck:
    htop: float
    best_entropy: float
    best_vector: tuple

    @property
    def holds(self):
        return self.best_entropy <= self.htop + 1e-12

    @property
    def attained(self):
        return abs(self.best_entropy - self.htop) <= 1e-12


def variational_check(k, p_grid=None, seed=0) -> VariationalCheck:
    """Bernoulli entropies never exceed log k, and the uniform vector reaches it."""
    if p_grid is None:
        rng = np.random.default_rng(seed)
        p_grid = list(rng.dirichlet(np.ones(k), size=200)) + [np.full(k, 1.0 / k)]
    entropies = [bernoulli_entropy(p) for p in p_grid]
    best = int(np.argmax(entropies))
    return VariationalCheck(htop=math.log(k), best_entropy=entropies[best], best_vector=tuple(p_grid[best]))


# =========================
# 4. END-TO-END CHECKS
# =========================

@dataclass(frozen=True)
class NonInvarianceReport:
    eps: float
    weight_regular: float
    weight_degenerate: float
    K_prime: float
    upper: float
    lower: float

    @property
    def holds(self):
        return self.upper < self.lower


def noninvariance_check(regular, table, degenerate=None, htop=math.log(2.0), eps_factor=0.5):
    """
    Entropy bounds for the same representation (first generator -> f, others
    trivial) over two groups: 2 + 2h·K'/w1 for the regular group against
    2 + 2h/w2 for a degenerate group whose distinguished weight w2 < w1/K'.
    """
    from hyperbolic.fuchsian import build_degenerate

    w1 = regular.weights["a1"]
    eps = eps_factor * w1 / table.K_prime
    degenerate = degenerate or build_degenerate(regular.genus, eps)
    w2 = degenerate.weights[degenerate.distinguished_label]
    return NonInvarianceReport(
        eps=eps,
        weight_regular=w1,
        weight_degenerate=w2,
        K_prime=table.K_prime,
        upper=2.0 + 2.0 * htop * table.K_prime / w1,
        lower=2.0 + 2.0 * htop / w2,
    )
