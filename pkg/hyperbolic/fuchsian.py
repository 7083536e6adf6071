"""
Surface Groups From Geodesic Polygons
Regular and degenerate 4g-gons, side-pairing generators with the standard
relator, the reduction table used to walk points back toward the origin, and
tile point location.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from errors import BudgetExceededError, ConstructionError, DegenerateInputError, ReductionError
from hyperbolic.ballenum import DISPLACEMENT_TOL, GroupElement, enumerate_word_ball
from hyperbolic.geometry import (
    IDENTITY,
    Isometry,
    apply,
    compose,
    compose_all,
    distance_from_origin,
    image_distance_from_origin,
    invert,
    isometry_distance,
    point_at_distance,
    poincare_distance,
    rotation,
    translation_to,
)

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-10
ANGLE_TOL = 1e-9
PAIRING_TOL = 1e-9
RELATOR_TOL = 1e-6
MAX_BISECTION_STEPS = 200
# Half the hyperbolic radius of the outermost vertex circle allowed by the boundary guard.
MAX_HALF_RADIUS = 13.5
MAX_SCHEDULE_STEPS = 45
MAX_REDUCTION_STEPS = 10_000
TILE_BUDGET = 20_000
WEIGHTED_TOL = 1e-9


# =========================
# 1. POLYGONS
# =========================

def _to_vertex_frame(v, z):
    """The Möbius map sending v to 0, applied to z (broadcasting)."""
    return (z - v) / (1.0 - np.conj(v) * z)


def interior_angles(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=complex)
    before = _to_vertex_frame(v, np.roll(v, 1))
    after = _to_vertex_frame(v, np.roll(v, -1))
    return np.abs(np.angle(before / after))


@dataclass(frozen=True, eq=False)
class GeodesicPolygon:
    """Convex geodesic polygon, vertices counterclockwise; side k joins vertex k to vertex k+1."""

    vertices: np.ndarray

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def angles(self) -> np.ndarray:
        return interior_angles(self.vertices)

    @cached_property
    def angle_sum(self) -> float:
        return float(self.angles.sum())

    @cached_property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(poincare_distance(v[:, None], v[None, :])))

    @cached_property
    def circumradius(self) -> float:
        """Largest vertex distance from 0, which bounds d(0, z) over the polygon."""
        return float(np.max(distance_from_origin(self.vertices)))

    def side(self, k):
        n = len(self.vertices)
        return complex(self.vertices[k % n]), complex(self.vertices[(k + 1) % n])

    def side_midpoint(self, k):
        p, q = self.side(k)
        w = _to_vertex_frame(p, q)
        mid = np.tanh(np.arctanh(abs(w)) / 2.0) * w / abs(w)
        return complex(apply(translation_to(p), mid))

    def signed_side_distances(self, z) -> np.ndarray:
        """
        Hyperbolic signed distance from each point to each side's geodesic,
        positive on the interior side. Shape (..., n_sides).
        """
        z = np.asarray(z, dtype=complex)[..., None]
        p = self.vertices
        q = np.roll(self.vertices, -1)
        u = _to_vertex_frame(p, q)
        u = u / np.abs(u)
        w = _to_vertex_frame(p, z)
        abs_z = np.abs(z)
        abs_p = np.abs(p)
        one_minus = (1.0 - abs_z) * (1.0 + abs_z) * (1.0 - abs_p) * (1.0 + abs_p) / np.abs(1.0 - np.conj(p) * z) ** 2
        return np.arcsinh(2.0 * np.imag(w * np.conj(u)) / one_minus)

    @property
    def area(self) -> float:
        return polygon_area(self)


def contains(polygon: GeodesicPolygon, xi, tol=MEMBERSHIP_TOL):
    """Closed membership with boundary tolerance; vectorized over xi."""
    inside = np.all(polygon.signed_side_distances(xi) >= -tol, axis=-1)
    return bool(inside) if inside.ndim == 0 else inside


def polygon_area(polygon: GeodesicPolygon) -> float:
    """Gauss-Bonnet: (n - 2) pi minus the angle sum."""
    return float((len(polygon) - 2) * np.pi - polygon.angle_sum)


def _polygon_at(half_radius, thetas):
    return GeodesicPolygon(point_at_distance(2.0 * half_radius, thetas))


def solve_radius(thetas) -> GeodesicPolygon:
    """
    Bisect the vertex radius so that the angle sum is 2 pi. The angle sum
    decreases from (n - 2) pi near the origin to 0 near the boundary.
    """
    thetas = np.asarray(thetas, dtype=float)
    lo, hi = 1e-6, MAX_HALF_RADIUS
    if _polygon_at(hi, thetas).angle_sum > 2.0 * np.pi:
        raise ConstructionError("angle sum stays above 2π inside the guarded disk")
    for _ in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if _polygon_at(mid, thetas).angle_sum > 2.0 * np.pi:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * hi:
            break
    polygon = _polygon_at(0.5 * (lo + hi), thetas)
    if abs(polygon.angle_sum - 2.0 * np.pi) > ANGLE_TOL:
        raise ConstructionError(f"angle-sum bisection did not converge: residual {polygon.angle_sum - 2.0 * np.pi:.3e}")
    return polygon


# =========================
# 2. SURFACE GROUPS
# =========================

def base_labels(genus):
    return tuple(f"{x}{i}" for i in range(1, genus + 1) for x in ("a", "b"))


def generator_labels(genus):
    """a1, A1, b1, B1, ...; capitals are inverses."""
    return tuple(y for x in base_labels(genus) for y in (x, x.upper()))


def standard_relator(genus):
    return tuple(y for i in range(1, genus + 1) for y in (f"a{i}", f"b{i}", f"A{i}", f"B{i}"))


def side_labels(genus, first_side=0):
    """Counterclockwise blocks a_i, B_i, A_i, b_i starting at side `first_side`."""
    n = 4 * genus
    labels = [None] * n
    for i in range(1, genus + 1):
        for p, label in enumerate((f"a{i}", f"B{i}", f"A{i}", f"b{i}")):
            labels[(first_side + 4 * (i - 1) + p) % n] = label
    return tuple(labels)


def pairing_isometry(source, target) -> Isometry:
    """
    The orientation-preserving isometry taking source side [P1, P2] onto
    target side [Q1, Q2] with P1 -> Q2 and P2 -> Q1.
    """
    (p1, p2), (q1, q2) = source, target
    to_p = translation_to(p1)
    to_q = translation_to(q2)
    w_p = apply(invert(to_p), p2)
    w_q = apply(invert(to_q), q1)
    turn = rotation(float(np.angle(w_q) - np.angle(w_p)))
    return compose(to_q, compose(turn, invert(to_p)))


@dataclass(frozen=True, eq=False)
class SurfaceGroup:
    genus: int
    mode: str
    polygon: GeodesicPolygon
    side_labels: tuple
    generators: dict
    eps: float = None
    params: dict = field(default_factory=dict)

    @property
    def labels(self):
        return generator_labels(self.genus)

    @property
    def relator(self):
        return standard_relator(self.genus)

    @cached_property
    def weights(self) -> dict:
        return {x: g.displacement for x, g in self.generators.items()}

    @property
    def R0(self) -> float:
        return max(self.weights.values())

    @property
    def systole(self) -> float:
        return min(self.weights.values())

    @property
    def delta0(self) -> float:
        return self.polygon.diameter

    @property
    def conservative_slack(self) -> float:
        return 2.0 * self.delta0 + 1.0

    @property
    def distinguished_label(self) -> str:
        """Generator carrying the degenerate polygon's long side onto its partner."""
        return "A1" if self.mode == "degenerate" else "a1"

    def word_isometry(self, word) -> Isometry:
        return compose_all(self.generators[x] for x in word)

    @cached_property
    def relator_residual(self) -> float:
        return isometry_distance(self.word_isometry(self.relator), IDENTITY)

    def pairing_residual(self) -> float:
        """Endpoint mismatch of every generator on its side pair."""
        worst = 0.0
        index = {label: k for k, label in enumerate(self.side_labels)}
        for label, g in self.generators.items():
            p1, p2 = self.polygon.side(index[label.swapcase()])
            q1, q2 = self.polygon.side(index[label])
            worst = max(worst, abs(apply(g, p1) - q2), abs(apply(g, p2) - q1))
        return worst

    def check(self):
        """Raise ConstructionError unless every structural invariant holds."""
        if abs(self.polygon.angle_sum - 2.0 * np.pi) > ANGLE_TOL:
            raise ConstructionError(f"angle sum {self.polygon.angle_sum} differs from 2π")
        if self.pairing_residual() > PAIRING_TOL:
            raise ConstructionError(f"side pairing residual {self.pairing_residual():.3e}")
        if self.relator_residual > RELATOR_TOL:
            raise ConstructionError(f"relator residual {self.relator_residual:.3e}")
        if self.systole < 1e-3:
            raise ConstructionError(f"generator weight {self.systole} too small for a free action")
        for x, w in self.weights.items():
            if abs(w - self.weights[x.swapcase()]) > 1e-10:
                raise ConstructionError(f"weights of {x} and its inverse differ")
        return self

    # ── Interchange ──

    def to_document(self, table=None) -> dict:
        doc = {
            "genus": self.genus,
            "mode": self.mode,
            "eps": self.eps,
            "params": self.params,
            "vertices": [[float(z.real), float(z.imag)] for z in self.polygon.vertices],
            "side_labels": list(self.side_labels),
            "generators": {
                x: [g.a.real, g.a.imag, g.b.real, g.b.imag] for x, g in self.generators.items()
            },
            "weights": self.weights,
            "delta0": self.delta0,
            "R0": self.R0,
            "circumradius": self.polygon.circumradius,
            "relator_residual": self.relator_residual,
            "group_hash": group_hash(self),
        }
        if table is not None:
            doc.update({"K": table.K, "K_prime": table.K_prime, "N0": table.N0})
        return doc

    @classmethod
    def from_document(cls, doc):
        group = cls(
            genus=int(doc["genus"]),
            mode=doc["mode"],
            polygon=GeodesicPolygon(np.array([complex(x, y) for x, y in doc["vertices"]])),
            side_labels=tuple(doc["side_labels"]),
            generators={
                x: Isometry(complex(c[0], c[1]), complex(c[2], c[3])) for x, c in doc["generators"].items()
            },
            eps=doc.get("eps"),
            params=dict(doc.get("params", {})),
        )
        return group.check()


def group_hash(group) -> str:
    payload = {
        "genus": group.genus,
        "mode": group.mode,
        "eps": group.eps,
        "vertices": [[round(float(z.real), 12), round(float(z.imag), 12)] for z in group.polygon.vertices],
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _group_from_polygon(genus, mode, polygon, first_side, eps=None, params=None):
    labels = side_labels(genus, first_side)
    index = {label: k for k, label in enumerate(labels)}
    generators = {}
    for label in generator_labels(genus):
        source = polygon.side(index[label.swapcase()])
        target = polygon.side(index[label])
        generators[label] = pairing_isometry(source, target)
    return SurfaceGroup(
        genus=genus,
        mode=mode,
        polygon=polygon,
        side_labels=labels,
        generators=generators,
        eps=eps,
        params=params or {},
    )


def build_regular(genus) -> SurfaceGroup:
    """Regular 4g-gon with all interior angles 2π/4g and the standard side pairing."""
    if genus < 2:
        raise DegenerateInputError(f"genus must be at least 2, got {genus}")
    n = 4 * genus
    thetas = (2 * np.arange(n) + 1) * np.pi / n
    group = _group_from_polygon(genus, "regular", solve_radius(thetas), first_side=0).check()
    logger.info("built regular genus-%d group: weight %.6f, diameter %.6f", genus, group.R0, group.delta0)
    return group


def degenerate_angles(genus, nu):
    """
    Vertex angles with two long gaps nu separated by one short gap:
    theta_1 = mu/2, theta_2 = mu/2 + nu, steps of mu, then a final step of nu.
    """
    n = 4 * genus
    mu = (2.0 * np.pi - 2.0 * nu) / (n - 2)
    steps = np.full(n - 1, mu)
    steps[0] = nu
    steps[-1] = nu
    thetas = mu / 2.0 + np.concatenate([[0.0], np.cumsum(steps)])
    return thetas, mu


def build_degenerate(genus, eps) -> SurfaceGroup:
    """
    Polygon whose two long sides are paired by a generator moving 0 by at most eps.
    Walks nu_j = π - 2^-j until the distinguished weight drops below eps.
    """
    if genus < 2:
        raise DegenerateInputError(f"genus must be at least 2, got {genus}")
    if not 0 < eps < 1:
        raise DegenerateInputError(f"eps must lie in (0, 1), got {eps}")
    n = 4 * genus
    best = None
    for j in range(1, MAX_SCHEDULE_STEPS + 1):
        nu = np.pi - 2.0 ** -j
        thetas, mu = degenerate_angles(genus, nu)
        try:
            polygon = solve_radius(thetas)
        except ConstructionError:
            break
        group = _group_from_polygon(
            genus, "degenerate", polygon, first_side=n - 2, eps=eps,
            params={"nu": float(nu), "mu": float(mu), "schedule_step": j},
        )
        weight = group.weights[group.distinguished_label]
        best = weight if best is None else min(best, weight)
        logger.debug("degenerate schedule j=%d: nu=%.12f weight=%.6g", j, nu, weight)
        if weight <= eps:
            group.check()
            logger.info("built degenerate genus-%d group at j=%d: weight %.6g <= %g", genus, j, weight, eps)
            return group
    raise ConstructionError(
        f"degenerate schedule exhausted before reaching weight {eps}; best {best}", best_weight=best
    )


# =========================
# 3. REDUCTION AND LOCATION
# =========================

@dataclass(frozen=True, eq=False)
class ReductionTable:
    """
    Elements B of the ball of radius 2·delta0 + 1 with their words.
    K is the longest word, K' = R0·K and N0 the longest word among the
    elements whose tile can meet the base disk of radius delta0 + 1.
    """

    radius: float
    words: tuple
    a: np.ndarray
    b: np.ndarray
    displacements: np.ndarray
    K: int
    K_prime: float
    N0: int
    base_radius: float
    base_count: int

    def __len__(self):
        return len(self.words)

    @cached_property
    def orbit_points(self):
        return self.b / np.conj(self.a)

    def element(self, index) -> GroupElement:
        m = Isometry(complex(self.a[index]), complex(self.b[index]))
        return GroupElement(self.words[index], m, float(self.displacements[index]), m.fingerprint)

    def pull_back(self, indices, xi):
        """beta^-1(xi) for the selected table elements."""
        a, b = self.a[indices], self.b[indices]
        return (np.conj(a) * xi - b) / (a - np.conj(b) * xi)


def build_reduction_table(group, ball) -> ReductionTable:
    radius = group.conservative_slack
    if ball.R < radius - DISPLACEMENT_TOL:
        raise DegenerateInputError(f"ball radius {ball.R} is below 2·delta0 + 1 = {radius}")
    B = ball.restrict(radius)
    for i, word in enumerate(B.words):
        if isometry_distance(group.word_isometry(word), B.isometry(i)) > 1e-8 * max(1.0, abs(B.a[i])):
            raise ConstructionError(f"word {''.join(word)} does not reproduce its element")
    lengths = B.word_lengths
    bound = 4.0 * radius / group.systole
    if lengths.max() > bound:
        raise ConstructionError(f"word length {lengths.max()} exceeds {bound:.1f}; dedup is suspect")
    base_radius = group.delta0 + 1.0 + group.polygon.circumradius
    base = B.displacements <= base_radius + DISPLACEMENT_TOL
    K = int(lengths.max())
    table = ReductionTable(
        radius=radius,
        words=B.words,
        a=B.a,
        b=B.b,
        displacements=B.displacements,
        K=K,
        K_prime=group.R0 * K,
        N0=int(lengths[base].max()),
        base_radius=base_radius,
        base_count=int(base.sum()),
    )
    logger.info("reduction table: %d elements, K=%d, K'=%.4f, N0=%d", len(table), K, table.K_prime, table.N0)
    return table


def reduce_step(group, table, xi):
    """Lowest-index beta with d(beta(0), xi) <= d(0, xi) - 1, and beta^-1(xi)."""
    d = distance_from_origin(xi)
    if d <= group.delta0 + 1.0:
        raise DegenerateInputError(f"point at distance {d:.4f} is already within delta0 + 1")
    ok = poincare_distance(table.orbit_points, xi) <= d - 1.0 + DISPLACEMENT_TOL
    if not ok.any():
        raise ReductionError(f"no table element reduces the point {xi} at distance {d:.4f}")
    index = int(np.argmax(ok))
    return table.element(index), complex(table.pull_back(index, xi))


def locate(group, table, xi):
    """
    Word w and zeta in D with xi = w(zeta). Reduction steps bring xi within
    delta0 + 1, then the lowest-index base tile containing it is chosen.
    """
    word = []
    xi = complex(xi)
    for _ in range(MAX_REDUCTION_STEPS):
        if distance_from_origin(xi) <= group.delta0 + 1.0:
            break
        beta, xi = reduce_step(group, table, xi)
        word.extend(beta.word)
    else:
        raise ReductionError("reduction did not reach the base disk")

    candidates = np.arange(table.base_count)
    pulled = table.pull_back(candidates, xi)
    hits = np.flatnonzero(contains(group.polygon, pulled))
    if hits.size == 0:
        raise ReductionError(f"no base tile contains {xi}")
    first = int(hits[0])
    word.extend(table.words[first])
    return tuple(word), complex(pulled[first])


def locate_depth_bound(group, table, xi) -> int:
    """K·ceil(d(0, xi) - (delta0 + 1))_+ + N0."""
    excess = max(0.0, distance_from_origin(xi) - (group.delta0 + 1.0))
    return table.K * int(np.ceil(excess)) + table.N0


def net_base_depth(group, table, count=1000, seed=0) -> int:
    """Longest located word over a random net of the base disk (diagnostic for N0)."""
    return max(len(locate(group, table, xi)[0]) for xi in sample_disk(group.delta0 + 1.0, count, seed))


def sample_disk(R, count, seed):
    """Points distributed by hyperbolic area in the closed disk of radius R."""
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    radii = 2.0 * np.arcsinh(np.sqrt(u) * np.sinh(R / 2.0))
    return point_at_distance(radii, 2.0 * np.pi * rng.random(count))


# =========================
# 4. COVERING INCLUSIONS
# =========================

@dataclass(frozen=True)
class InclusionReport:
    N: int
    delta: float
    inner_radius: float
    outer_radius: float
    located: int
    inner_violations: int
    tile_depth: int
    tiles_capped: bool
    tiles_checked: int
    max_tile_reach: float
    outer_violations: int
    weighted_violations: int

    @property
    def ok(self):
        return self.inner_violations == 0 and self.outer_violations == 0 and self.weighted_violations == 0


def verify_inclusions(group, table, N, delta=0.1, samples=1000, seed=0, tile_budget=TILE_BUDGET,
                      outer_radius=None) -> InclusionReport:
    """
    Covering sandwich at word length N. Samples of the disk of radius
    max(0, (1/K - delta)·N) must locate with at most N letters. Every tile of word
    length <= N must keep its vertices inside the disk of radius N(R0 + delta)
    (or `outer_radius` when given) and within its weighted bound, the sum of its
    letter weights plus delta0. Tiles are enumerated to depth N unless the budget
    stops the enumeration first; the depth reached is reported.
    """
    if not (np.isfinite(delta) and delta > 0):
        raise DegenerateInputError(f"delta must be positive and finite, got {delta}")
    if N < 0:
        raise DegenerateInputError(f"N must be nonnegative, got {N}")
    inner = max(0.0, (1.0 / table.K - delta) * N)
    outer = N * (group.R0 + delta) if outer_radius is None else float(outer_radius)

    inner_violations = 0
    located = samples if inner > 0 else 0
    for xi in sample_disk(inner, located, seed):
        word, _ = locate(group, table, xi)
        if len(word) > N:
            inner_violations += 1

    try:
        tiles, depth, capped = enumerate_word_ball(group, N, tile_budget), N, False
    except BudgetExceededError as exc:
        tiles, depth, capped = exc.partial, int(exc.completed_radius), True
        logger.warning("tile enumeration stopped at word length %d of %d by the budget %d", depth, N, tile_budget)

    vertices = group.polygon.vertices[None, :]
    reach = np.max(image_distance_from_origin(tiles.a[:, None], tiles.b[:, None], vertices), axis=1)
    weights = group.weights
    weighted = np.array([sum(weights[x] for x in word) for word in tiles.words]) + group.delta0

    return InclusionReport(
        N=N,
        delta=delta,
        inner_radius=inner,
        outer_radius=outer,
        located=located,
        inner_violations=inner_violations,
        tile_depth=depth,
        tiles_capped=capped,
        tiles_checked=len(tiles),
        max_tile_reach=float(reach.max()),
        outer_violations=int(np.sum(reach > outer)),
        weighted_violations=int(np.sum(reach > weighted + WEIGHTED_TOL)),
    )
