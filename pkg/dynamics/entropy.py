"""
Bowen Distances, Nets and Entropy Estimates
Families of Bowen distances on a transversal (weighted word balls, group balls
and single-map windows), greedy separated and covering nets, slope fits of log
counts, and the suspension entropy report.
"""

import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

import config
from errors import BudgetExceededError, DegenerateInputError
from dynamics.transversal import FullShift, apply_word

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9
WITNESS_COUNT = 64
TRANSFORMATION_BUDGET = 100_000
MAX_COVER_POINTS = 4096
COUNT_COLUMNS = ["system", "rep", "R", "eps", "M", "Ncover", "seed"]


# =========================
# 1. TRANSFORMATION SETS
# =========================

@dataclass(frozen=True, order=True)
class Transformation:
    """A word of generator labels, or a bare power of one map when `word` is empty."""

    power: int = 0
    word: tuple = ()


IDENTITY = Transformation()


def _zcase_reachable(rep, weights, R):
    steps = [(rep.exponent(x), weights[x], x) for x in sorted(weights) if rep.exponent(x)]
    best = {0: (0.0, ())}
    heap = [(0.0, 0, ())]
    while heap:
        cost, e, word = heapq.heappop(heap)
        if cost > best[e][0]:
            continue
        for n, w, label in steps:
            nxt, total = e + n, cost + w
            if total <= R + WEIGHT_TOL and (nxt not in best or total < best[nxt][0]):
                best[nxt] = (total, word + (label,))
                heapq.heappush(heap, (total, nxt, word + (label,)))
    return sorted(Transformation(e, word) for e, (_, word) in best.items())


def reachable_transformations(rep, weights, R, system=None, witnesses=None, budget=TRANSFORMATION_BUDGET):
    """
    Distinct transformations rho(g1...gk) over words with sum of weights <= R.
    Z-case: exponents by Dijkstra on the integers. General case: Dijkstra on
    words, merging those acting identically on a fixed witness sample.
    """
    if R < 0:
        raise DegenerateInputError(f"weight budget must be nonnegative, got {R}")
    if rep.is_zcase:
        return _zcase_reachable(rep, weights, R)
    if system is None:
        raise DegenerateInputError("a general representation needs its system to compare transformations")
    witnesses = system.sample(WITNESS_COUNT, config.SEED) if witnesses is None else witnesses

    active = [x for x in sorted(weights) if rep.map_for(x)[0] is not None]
    settled = set()
    found = []
    heap = [(0.0, (), system.key(witnesses))]
    while heap:
        cost, word, key = heapq.heappop(heap)
        if key in settled:
            continue
        settled.add(key)
        found.append(Transformation(0, word))
        if len(found) > budget or len(heap) > 16 * budget:
            raise BudgetExceededError(f"more than {budget} transformations within weight {R}")
        for label in active:
            total = cost + weights[label]
            if total > R + WEIGHT_TOL:
                continue
            nxt = word + (label,)
            nxt_key = system.key(apply_word(rep, system, nxt, witnesses))
            if nxt_key not in settled:
                heapq.heappush(heap, (total, nxt, nxt_key))
    return found


def gamma_transformations(rep, ball, system=None, witnesses=None):
    """Distinct transformations rho(alpha) over the elements of a group ball."""
    if rep.is_zcase:
        first = {}
        for word in ball.words:
            first.setdefault(rep.word_exponent(word), word)
        return sorted(Transformation(e, w) for e, w in first.items())
    witnesses = system.sample(WITNESS_COUNT, config.SEED) if witnesses is None else witnesses
    seen, found = set(), []
    for word in ball.words:
        key = system.key(apply_word(rep, system, word, witnesses))
        if key not in seen:
            seen.add(key)
            found.append(Transformation(0, word))
    return found


# =========================
# 2. BOWEN FAMILIES
# =========================

class BowenCloud:
    """Images of one point batch under a list of transformations; distance is the max over images."""

    def __init__(self, system, images):
        self.system = system
        self.images = images

    def __len__(self):
        return self.system.size(self.images[0])

    def distance_from(self, i, indices):
        take = self.system.take
        d = np.zeros(len(indices))
        for image in self.images:
            d = np.maximum(d, self.system.metric(take(image, i), take(image, indices)))
        return d


@dataclass(frozen=True, eq=False)
class BowenFamily:
    """
    kind is one of 'weighted', 'gamma', 'one_sided', 'two_sided'. The scale is a
    weight budget R, a ball radius R, or an integer n for the single-map kinds.
    """

    kind: str
    system: object
    rep: object = None
    weights: dict = None
    ball: object = None
    map_name: str = None
    witnesses: object = None
    budget: int = TRANSFORMATION_BUDGET

    @classmethod
    def weighted(cls, rep, weights, system, budget=TRANSFORMATION_BUDGET):
        return cls("weighted", system, rep=rep, weights=dict(weights), budget=budget)

    @classmethod
    def unit(cls, rep, labels, system, budget=TRANSFORMATION_BUDGET):
        return cls("weighted", system, rep=rep, weights={x: 1.0 for x in labels}, budget=budget)

    @classmethod
    def gamma(cls, rep, ball, system):
        return cls("gamma", system, rep=rep, ball=ball)

    @classmethod
    def one_sided(cls, system, map_name=None):
        return cls("one_sided", system, map_name=map_name or system.primary_map)

    @classmethod
    def two_sided(cls, system, map_name=None):
        return cls("two_sided", system, map_name=map_name or system.primary_map)

    @property
    def rep_name(self):
        return self.rep.name if self.rep is not None else f"{self.kind}:{self.map_name}"

    def transformations(self, scale):
        if self.kind == "weighted":
            return reachable_transformations(self.rep, self.weights, scale, self.system, self.witnesses, self.budget)
        if self.kind == "gamma":
            return gamma_transformations(self.rep, self.ball.restrict(scale), self.system, self.witnesses)
        n = int(scale)
        lo = 0 if self.kind == "one_sided" else -n
        return [Transformation(e) for e in range(lo, n + 1)]

    def apply(self, transformation, points):
        if self.kind in ("one_sided", "two_sided"):
            if transformation.power == 0:
                return points
            return self.system.act(self.map_name, points, transformation.power)
        return apply_word(self.rep, self.system, transformation.word, points)

    def cloud(self, scale, points) -> BowenCloud:
        return BowenCloud(self.system, [self.apply(tr, points) for tr in self.transformations(scale)])

    def distance(self, scale, t, s):
        """Max of the base metric over the family's images of t and s."""
        return float(max(
            np.max(self.system.metric(self.apply(tr, t), self.apply(tr, s)))
            for tr in self.transformations(scale)
        ))


def bowen_distance_weighted(rep, weights, R, t, s, system):
    return BowenFamily.weighted(rep, weights, system).distance(R, t, s)


def bowen_distance_gamma(rep, ball, t, s, system):
    return BowenFamily.gamma(rep, ball, system).distance(ball.R, t, s)


# =========================
# 3. GREEDY NETS
# =========================

def _order(n, seed):
    return np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)


def greedy_separated(cloud, eps, seed=None, order=None) -> np.ndarray:
    """
    Maximal eps-separated subset in a fixed (seeded, or explicitly given) order.
    Every point is within < eps of a chosen one, so the result is also an eps-cover.
    """
    if eps <= 0:
        raise DegenerateInputError(f"eps must be positive, got {eps}")
    alive = np.ones(len(cloud), dtype=bool)
    chosen = []
    for i in (_order(len(cloud), seed) if order is None else order):
        if not alive[i]:
            continue
        chosen.append(i)
        idx = np.flatnonzero(alive)
        alive[idx[cloud.distance_from(i, idx) < eps]] = False
    return np.array(chosen, dtype=int)


def greedy_cover(cloud, eps, seed=None, max_points=MAX_COVER_POINTS) -> np.ndarray:
    """
    Centers whose open eps-balls cover every point: greedy max-coverage, or the
    separated net when that is smaller (or when the cloud is too big for the
    adjacency matrix).
    """
    separated = greedy_separated(cloud, eps, seed)
    n = len(cloud)
    if n > max_points:
        logger.warning("cover on %d points exceeds %d; using the separated net", n, max_points)
        return separated
    everything = np.arange(n)
    adjacency = np.zeros((n, n), dtype=bool)
    for i in range(n):
        adjacency[i] = cloud.distance_from(i, everything) < eps
    gains = adjacency.sum(axis=1)
    uncovered = np.ones(n, dtype=bool)
    chosen = []
    while uncovered.any():
        i = int(np.argmax(gains))
        chosen.append(i)
        newly = adjacency[i] & uncovered
        uncovered &= ~newly
        gains -= adjacency[:, newly].sum(axis=1)
    chosen = np.array(chosen, dtype=int)
    return chosen if len(chosen) < len(separated) else separated


@dataclass(frozen=True)
class CoveringSandwich:
    eps: float
    separated: int
    cover: int
    separated_double: int

    @property
    def holds(self):
        """M(2 eps) <= N'(eps) <= M(eps)."""
        return self.separated_double <= self.cover <= self.separated


def covering_sandwich(cloud, eps, seed=None) -> CoveringSandwich:
    return CoveringSandwich(
        eps=eps,
        separated=len(greedy_separated(cloud, eps, seed)),
        cover=len(greedy_cover(cloud, eps, seed)),
        separated_double=len(greedy_separated(cloud, 2.0 * eps, seed)),
    )


def net_counts(family, scales, eps_sweep, points, seed=None, with_cover=True, threads=None) -> pd.DataFrame:
    """Counts table over (scale, eps), one greedy net per cell; rows sorted by (R, eps)."""
    if isinstance(family.system, FullShift) and min(eps_sweep) < 2.0 ** -family.system.depth:
        logger.warning("eps %.3g is below the shift metric resolution 2^-%d", min(eps_sweep), family.system.depth)
    clouds = {R: family.cloud(R, points) for R in scales}

    def cell(R, eps):
        cloud = clouds[R]
        M = len(greedy_separated(cloud, eps, seed))
        N = len(greedy_cover(cloud, eps, seed)) if with_cover else M
        return {"system": family.system.spec, "rep": family.rep_name, "R": float(R), "eps": float(eps),
                "M": M, "Ncover": N, "seed": seed}

    cells = [(R, eps) for R in scales for eps in eps_sweep]
    with ThreadPoolExecutor(max_workers=threads or config.THREADS) as pool:
        rows = list(pool.map(lambda c: cell(*c), cells))
    table = pd.DataFrame(rows, columns=COUNT_COLUMNS)
    return table.sort_values(["R", "eps"], kind="mergesort").reset_index(drop=True)


def oracle_counts(family, scales, eps_sweep, seed=None) -> pd.DataFrame:
    """
    Exact counts for Z-case representations of the full shift: the cylinder
    count over the union of the windows [e - m, e + m] for eps = 2^-m.
    """
    from dynamics.zcase import shift_window_count

    if not isinstance(family.system, FullShift) or (family.rep is not None and not family.rep.is_zcase):
        raise DegenerateInputError("exact counts exist only for Z-case actions on the full shift")
    rows = []
    for R in scales:
        exponents = [tr.power for tr in family.transformations(R)]
        for eps in eps_sweep:
            m = int(np.floor(np.log2(1.0 / eps) + 1e-12))
            count = shift_window_count(family.system.k, exponents, m)
            rows.append({"system": family.system.spec, "rep": family.rep_name, "R": float(R), "eps": float(eps),
                         "M": count, "Ncover": count, "seed": seed})
    return pd.DataFrame(rows, columns=COUNT_COLUMNS)


# =========================
# 4. SLOPE ESTIMATES
# =========================

@dataclass(frozen=True)
class EntropyEstimate:
    R_grid: tuple
    eps_sweep: tuple
    counts: pd.DataFrame
    slopes: dict
    residuals: dict
    sample_size: int
    seed: object
    monotone_in_R: bool
    monotone_in_eps: bool
    lower_bounds: pd.DataFrame = field(repr=False, default=None)

    @property
    def lower_bound_monotone(self) -> bool:
        return bool(np.all(np.diff(self.lower_bounds["lower_bound"].to_numpy()) >= 0))

    @property
    def summary(self) -> float:
        """Sup over eps of the fitted slopes, clamped at 0."""
        return max(0.0, max(self.slopes.values()))


def running_lower_bounds(counts: pd.DataFrame, column="M", scale=1.0) -> pd.DataFrame:
    """
    Per-R entropy lower bounds: log growth of the count since the first grid
    radius over R, maximized across eps, and its running max along the grid.
    """
    wide = counts.pivot_table(index="R", columns="eps", values=column, aggfunc="max").sort_index()
    values = wide.to_numpy(dtype=float)
    R = wide.index.to_numpy(dtype=float) / scale
    ratio = np.max(np.log(values / values[:1]), axis=1) / np.where(R > 0, R, np.inf)
    return pd.DataFrame({
        "R": wide.index.to_numpy(dtype=float),
        "ratio": ratio,
        "lower_bound": np.maximum.accumulate(ratio),
    })


def entropy_estimate(counts: pd.DataFrame, column="M", scale=1.0) -> EntropyEstimate:
    """
    Least-squares slope of log count against R over the top half of the grid,
    for each eps. `scale` divides the R column first (GLW grids).
    """
    slopes, residuals = {}, {}
    monotone_R = True
    for eps, cell in counts.groupby("eps", sort=True):
        cell = cell.sort_values("R")
        if len(cell) < 4:
            raise DegenerateInputError(f"need at least 4 grid points per eps, got {len(cell)} at eps={eps}")
        top = cell.iloc[len(cell) // 2:]
        R = top["R"].to_numpy(dtype=float) / scale
        if np.ptp(R) == 0:
            raise DegenerateInputError("top half of the R grid is a single point")
        logs = np.log(top[column].to_numpy(dtype=float))
        slope, intercept = np.polyfit(R, logs, 1)
        slopes[float(eps)] = float(slope)
        residuals[float(eps)] = (logs - (slope * R + intercept)).tolist()
        monotone_R &= bool(np.all(np.diff(cell[column].to_numpy()) >= 0))

    wide = counts.pivot_table(index="R", columns="eps", values=column, aggfunc="max").sort_index(axis=1)
    monotone_eps = bool(np.all(np.diff(wide.to_numpy(), axis=1) <= 0))
    seeds = counts["seed"].dropna().unique() if "seed" in counts else []
    return EntropyEstimate(
        R_grid=tuple(sorted(counts["R"].unique())),
        eps_sweep=tuple(sorted(counts["eps"].unique())),
        counts=counts,
        slopes=slopes,
        residuals=residuals,
        sample_size=int(counts[column].max()),
        seed=seeds[0] if len(seeds) else None,
        monotone_in_R=monotone_R,
        monotone_in_eps=monotone_eps,
        lower_bounds=running_lower_bounds(counts, column, scale),
    )


# =========================
# 5. SUSPENSION ENTROPY
# =========================

@dataclass(frozen=True)
class SuspensionReport:
    transversal: EntropyEstimate
    weighted: EntropyEstimate
    glw: EntropyEstimate
    K_prime: float
    c1: float
    c2: float
    tolerance: float
    counts: pd.DataFrame = field(repr=False, default=None)

    @property
    def h_transversal(self):
        return self.transversal.summary

    @property
    def h_weighted(self):
        return self.weighted.summary

    @property
    def h_glw(self):
        return self.glw.summary

    @property
    def h_foliation(self):
        """Leafwise contribution 2 plus the transversal entropy."""
        return 2.0 + self.h_transversal

    @property
    def sandwich_ok(self):
        tol = self.tolerance
        return self.h_weighted <= self.h_transversal + tol and self.h_transversal <= self.K_prime * self.h_weighted + tol

    @property
    def bracket_ok(self):
        tol = self.tolerance
        return self.h_glw / self.c2 - tol <= self.h_weighted <= self.h_glw / self.c1 + tol


def suspension_entropy(rep, group, table, ball, system, R_grid, eps_sweep, points=None, seed=None,
                       method="greedy", with_cover=False, tolerance=0.05,
                       transformation_budget=TRANSFORMATION_BUDGET) -> SuspensionReport:
    """
    Transversal entropy from group-ball Bowen nets, the weighted entropy and the
    unit-weight (GLW) entropy on the grid R / max weight, and their comparisons.
    `method='oracle'` uses exact cylinder counts (Z-case on the full shift).
    """
    if ball.R < max(R_grid) - 1e-9:
        raise DegenerateInputError(f"ball radius {ball.R} is below the largest grid radius {max(R_grid)}")
    c1, c2 = group.systole, group.R0
    glw_grid = [R / c2 for R in R_grid]
    families = {
        "gamma": (BowenFamily.gamma(rep, ball, system), list(R_grid)),
        "weighted": (BowenFamily.weighted(rep, group.weights, system, transformation_budget), list(R_grid)),
        "glw": (BowenFamily.unit(rep, group.labels, system, transformation_budget), glw_grid),
    }
    tables = {}
    for name, (family, scales) in families.items():
        if method == "oracle":
            counts = oracle_counts(family, scales, eps_sweep, seed)
        else:
            counts = net_counts(family, scales, eps_sweep, points, seed, with_cover)
        tables[name] = counts.assign(family=name)
        logger.info("%s counts done: %d cells", name, len(counts))

    return SuspensionReport(
        transversal=entropy_estimate(tables["gamma"]),
        weighted=entropy_estimate(tables["weighted"]),
        glw=entropy_estimate(tables["glw"]),
        K_prime=table.K_prime,
        c1=c1,
        c2=c2,
        tolerance=tolerance,
        counts=pd.concat(tables.values(), ignore_index=True),
    )
