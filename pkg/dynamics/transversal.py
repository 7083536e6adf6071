"""
Transversal Systems
Compact metric dynamical systems used as transversals of a suspension, and
representations sending generator labels to their homeomorphisms.
"""

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from errors import InvalidSystemError, WindowExhaustedError

logger = logging.getLogger(__name__)

DYADIC_BITS = 30


# =========================
# 1. SYSTEMS
# =========================

class TransversalSystem(ABC):
    """Points are numpy arrays (or ShiftPoint batches); every map is invertible."""

    kind = ""
    exact = False
    maps = ()

    @property
    def primary_map(self):
        return self.maps[0]

    @abstractmethod
    def act(self, name, points, power=1):
        ...

    @abstractmethod
    def metric(self, x, y):
        """Distance in [0, 1], broadcasting a single point against a batch."""

    @abstractmethod
    def sample(self, count, seed):
        ...

    @property
    @abstractmethod
    def spec(self) -> str:
        ...

    def take(self, points, indices):
        return points[indices]

    def size(self, points):
        return len(points)

    def key(self, points) -> bytes:
        """Byte key identifying a batch of points, used to tell transformations apart."""
        return np.round(np.asarray(points) * 1e9).astype(np.int64).tobytes()

    def _check_map(self, name):
        if name not in self.maps:
            raise InvalidSystemError(f"{self.kind} has no map {name!r}; available: {self.maps}")

    def __repr__(self):
        return self.spec


@dataclass(frozen=True, eq=False)
class ShiftPoint:
    """
    Symbols at positions [-W, W] plus the net shift applied so far. Position i
    of the current point is stored at column W + offset + i. Batched when
    `symbols` is two-dimensional.
    """

    symbols: np.ndarray
    offset: int = 0

    @property
    def W(self):
        return (self.symbols.shape[-1] - 1) // 2

    @property
    def valid_window(self):
        return self.W - abs(self.offset)

    def __len__(self):
        return self.symbols.shape[0] if self.symbols.ndim == 2 else 1

    def __getitem__(self, index):
        return ShiftPoint(self.symbols[index], self.offset)

    def symbol_at(self, positions):
        positions = np.asarray(positions)
        if np.any(np.abs(positions) > self.valid_window):
            raise WindowExhaustedError(
                f"read at positions up to {np.abs(positions).max()} but only {self.valid_window} remain valid"
            )
        return self.symbols[..., self.W + self.offset + positions]

    def equals(self, other) -> bool:
        """Exact equality of the points, as infinite sequences restricted to the common window."""
        window = min(self.valid_window, other.valid_window)
        positions = np.arange(-window, window + 1)
        return bool(np.array_equal(self.symbol_at(positions), other.symbol_at(positions)))


def _metric_positions(depth):
    """Positions 0, -1, 1, -2, 2, ... up to depth, ordered by |i|."""
    order = [0]
    for j in range(1, depth + 1):
        order += [-j, j]
    return np.array(order)


@dataclass(frozen=True, eq=False)
class FullShift(TransversalSystem):
    """
    Full shift on k symbols with finite windows. d(x, y) = 2^-j for the least
    |i| <= depth with x_i != y_i, and 0 if they agree there.

    The metric reads only |i| <= depth, so it is a pseudometric on sequences:
    points that differ only beyond the depth are at distance 0, and every
    distance is 0 or at least 2^-depth. Scales eps must stay above 2^-depth
    for nets to see the whole cylinder structure. Images at net offset p stay
    measurable while |p| + depth <= W; past that the metric raises
    WindowExhaustedError.
    """

    k: int
    W: int
    depth: int = 8

    kind = "shift"
    exact = True
    maps = ("shift", "flip")

    def __post_init__(self):
        if self.k < 2:
            raise InvalidSystemError(f"shift needs k >= 2 symbols, got {self.k}")
        if self.W < 1 or self.depth < 0 or self.depth > self.W:
            raise InvalidSystemError(f"invalid window W={self.W}, depth={self.depth}")

    @property
    def spec(self):
        return f"shift:k={self.k},W={self.W},depth={self.depth}"

    def act(self, name, points, power=1):
        self._check_map(name)
        if name == "shift":
            offset = points.offset + int(power)
            if abs(offset) > self.W:
                raise WindowExhaustedError(f"net shift {offset} exceeds the window W={self.W}")
            return ShiftPoint(points.symbols, offset)
        if power % 2 == 0:
            return points
        return ShiftPoint((self.k - 1 - points.symbols).astype(np.int8), points.offset)

    def metric(self, x, y):
        positions = _metric_positions(self.depth)
        differ = x.symbol_at(positions) != y.symbol_at(positions)
        first = np.argmax(differ, axis=-1)
        d = np.where(differ.any(axis=-1), 2.0 ** -np.abs(positions[first]), 0.0)
        return float(d) if d.ndim == 0 else d

    def sample(self, count, seed, p=None):
        rng = np.random.default_rng(seed)
        symbols = rng.choice(self.k, size=(count, 2 * self.W + 1), p=p).astype(np.int8)
        return ShiftPoint(symbols)

    def exhaustive(self, lo, hi):
        """All k^(hi - lo + 1) points varying on positions [lo, hi], zero elsewhere."""
        if lo > hi or max(abs(lo), abs(hi)) > self.W:
            raise WindowExhaustedError(f"exhaustive window [{lo}, {hi}] does not fit in W={self.W}")
        L = hi - lo + 1
        digits = (np.arange(self.k ** L)[:, None] // self.k ** np.arange(L - 1, -1, -1)[None, :]) % self.k
        symbols = np.zeros((self.k ** L, 2 * self.W + 1), dtype=np.int8)
        symbols[:, self.W + lo:self.W + hi + 1] = digits
        return ShiftPoint(symbols)

    def take(self, points, indices):
        return points[indices]

    def size(self, points):
        return len(points)

    def key(self, points):
        return np.int64(points.offset).tobytes() + points.symbols.tobytes()


@dataclass(frozen=True, eq=False)
class CircleRotation(TransversalSystem):
    alpha: float

    kind = "rotation"
    exact = False
    maps = ("rotation",)

    @property
    def spec(self):
        return f"rotation:alpha={self.alpha}"

    def act(self, name, points, power=1):
        self._check_map(name)
        return np.mod(np.asarray(points) + power * self.alpha, 1.0)

    def metric(self, x, y):
        c = np.mod(np.abs(np.asarray(x) - np.asarray(y)), 1.0)
        return np.minimum(c, 1.0 - c)

    def sample(self, count, seed):
        return np.random.default_rng(seed).random(count)

    def key(self, points):
        return (np.round(np.asarray(points) * 1e9).astype(np.int64) % 10**9).tobytes()


@dataclass(frozen=True, eq=False)
class CatMap(TransversalSystem):
    """The automorphism [[2, 1], [1, 1]] of the 2-torus; exact on dyadic points."""

    kind = "catmap"
    exact = True
    maps = ("cat",)

    @property
    def spec(self):
        return "catmap"

    def act(self, name, points, power=1):
        self._check_map(name)
        pts = np.asarray(points, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        for _ in range(abs(int(power))):
            if power > 0:
                x, y = np.mod(2.0 * x + y, 1.0), np.mod(x + y, 1.0)
            else:
                x, y = np.mod(x - y, 1.0), np.mod(2.0 * y - x, 1.0)
        return np.stack([x, y], axis=-1)

    def metric(self, x, y):
        c = np.mod(np.abs(np.asarray(x) - np.asarray(y)), 1.0)
        return np.max(np.minimum(c, 1.0 - c), axis=-1)

    def sample(self, count, seed):
        rng = np.random.default_rng(seed)
        return rng.integers(0, 2**DYADIC_BITS, size=(count, 2)) / float(2**DYADIC_BITS)

    def grid(self, bits):
        """Every dyadic point with denominator 2^bits; the cat map permutes them."""
        ticks = np.arange(2**bits) / float(2**bits)
        x, y = np.meshgrid(ticks, ticks, indexing="ij")
        return np.stack([x.ravel(), y.ravel()], axis=-1)

    def key(self, points):
        return np.round(np.asarray(points) * 2**DYADIC_BITS).astype(np.int64).tobytes()


@dataclass(frozen=True, eq=False)
class FinitePermutation(TransversalSystem):
    """Cyclic permutation of n points with the discrete metric."""

    n: int

    kind = "perm"
    exact = True
    maps = ("cycle",)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSystemError(f"permutation needs n >= 1, got {self.n}")

    @property
    def spec(self):
        return f"perm:n={self.n}"

    def act(self, name, points, power=1):
        self._check_map(name)
        return np.mod(np.asarray(points) + int(power), self.n)

    def metric(self, x, y):
        return (np.asarray(x) != np.asarray(y)).astype(float)

    def sample(self, count, seed):
        return np.random.default_rng(seed).integers(0, self.n, size=count)

    def key(self, points):
        return np.asarray(points, dtype=np.int64).tobytes()


_SPEC = re.compile(r"^(?P<kind>[a-z]+)(?::(?P<params>.*))?$")


def make_system(spec: str) -> TransversalSystem:
    """Parse 'shift:k=2,W=64', 'rotation:alpha=0.381966', 'catmap' or 'perm:n=5'."""
    match = _SPEC.match(spec.strip())
    if not match:
        raise InvalidSystemError(f"cannot parse system spec {spec!r}")
    params = {}
    for item in filter(None, (match.group("params") or "").split(",")):
        key, _, value = item.partition("=")
        if not value:
            raise InvalidSystemError(f"parameter {item!r} in {spec!r} is not key=value")
        params[key.strip()] = value.strip()
    kind = match.group("kind")
    try:
        if kind == "shift":
            return FullShift(int(params.pop("k", 2)), int(params.pop("W", 64)), int(params.pop("depth", 8)))
        if kind == "rotation":
            return CircleRotation(float(params.pop("alpha")))
        if kind == "catmap":
            return CatMap()
        if kind == "perm":
            return FinitePermutation(int(params.pop("n")))
    except (KeyError, ValueError) as exc:
        raise InvalidSystemError(f"bad parameters in {spec!r}: {exc}") from exc
    finally:
        if params and kind in ("shift", "rotation", "catmap", "perm"):
            logger.warning("ignoring unknown parameters %s in %r", sorted(params), spec)
    raise InvalidSystemError(f"unknown system kind {kind!r}")


def sample_points(system, count, seed, exhaustive_window=None, p=None):
    """Deterministic samples; FullShift can instead return every cylinder on a window."""
    if count < 1:
        raise InvalidSystemError(f"count must be positive, got {count}")
    if exhaustive_window is not None:
        if not isinstance(system, FullShift):
            raise InvalidSystemError("exhaustive centers exist only for the full shift")
        return system.exhaustive(*exhaustive_window)
    if p is not None:
        if not isinstance(system, FullShift):
            raise InvalidSystemError("Bernoulli sampling applies to the full shift only")
        return system.sample(count, seed, p=p)
    return system.sample(count, seed)


# =========================
# 2. REPRESENTATIONS
# =========================

@dataclass(frozen=True)
class Representation:
    """
    Base generator label (a1, b1, ...) -> map name or None for the identity.
    In the Z-case every label acts by a power of one map, stored in `exponents`.
    Capital labels act by the inverse.
    """

    genus: int
    assignment: dict = field(default_factory=dict)
    exponents: dict = None
    map_name: str = None

    @classmethod
    def identity(cls, genus):
        return cls(genus, {})

    @classmethod
    def zcase(cls, genus, exponents, map_name):
        exponents = {label.lower(): int(n) for label, n in exponents.items()}
        _check_labels(genus, exponents)
        return cls(genus, {x: map_name for x, n in exponents.items() if n}, exponents, map_name)

    @classmethod
    def from_assignment(cls, genus, assignment):
        assignment = {label.lower(): name for label, name in assignment.items()}
        _check_labels(genus, assignment)
        return cls(genus, assignment)

    @property
    def is_zcase(self):
        return self.exponents is not None

    @property
    def name(self):
        if self.is_zcase:
            items = [f"{x}={n}" for x, n in sorted(self.exponents.items()) if n]
        else:
            items = [f"{x}={m}" for x, m in sorted(self.assignment.items()) if m]
        return ";".join(items) or "identity"

    def exponent(self, label) -> int:
        n = self.exponents.get(label.lower(), 0)
        return n if label.islower() else -n

    def word_exponent(self, word) -> int:
        return sum(self.exponent(x) for x in word)

    def map_for(self, label):
        """(map name or None, power) for a generator label."""
        if self.is_zcase:
            n = self.exponent(label)
            return (self.map_name if n else None), n
        return self.assignment.get(label.lower()), (1 if label.islower() else -1)


def _check_labels(genus, mapping):
    valid = {f"{x}{i}" for i in range(1, genus + 1) for x in ("a", "b")}
    unknown = set(mapping) - valid
    if unknown:
        raise InvalidSystemError(f"unknown generator labels {sorted(unknown)} for genus {genus}")


def parse_assignment(genus, text, system):
    """'a1=1,b2=-1' gives a Z-case representation of the system's primary map; 'a1=shift,b1=flip' a general one."""
    pairs = {}
    for item in filter(None, text.split(",")):
        label, _, value = item.partition("=")
        pairs[label.strip()] = value.strip()
    if all(re.fullmatch(r"[+-]?\d+", v) for v in pairs.values()):
        return Representation.zcase(genus, {x: int(v) for x, v in pairs.items()}, system.primary_map)
    for value in pairs.values():
        if value not in system.maps and value != "id":
            raise InvalidSystemError(f"{system.kind} has no map {value!r}")
    return Representation.from_assignment(genus, {x: (None if v == "id" else v) for x, v in pairs.items()})


def apply_word(rep, system, word, t):
    """rho(g1 ... gk)(t) = rho(g1)(...rho(gk)(t)); Z-case applies the summed power once."""
    if rep.is_zcase:
        power = rep.word_exponent(word)
        return system.act(rep.map_name, t, power) if power else t
    for label in reversed(tuple(word)):
        name, power = rep.map_for(label)
        if name is not None:
            t = system.act(name, t, power)
    return t


def is_homomorphism(rep, system, relator, witnesses, tol=1e-9) -> bool:
    """The relator must act trivially on every witness point."""
    image = apply_word(rep, system, relator, witnesses)
    return bool(np.max(system.metric(image, witnesses)) <= (0.0 if system.exact else tol))
