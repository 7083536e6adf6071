"""
Poincaré Disk Kernel
Points are complex numbers (or complex numpy arrays) in the open unit disk;
isometries are unit-determinant Möbius maps z -> (a z + b) / (conj(b) z + conj(a)).
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import GeometryError

logger = logging.getLogger(__name__)

BOUNDARY_GUARD = 1.0 - 1e-12
DETERMINANT_TOL = 1e-10
FINGERPRINT_QUANTUM = 1e-8

DiskPoint = complex


# =========================
# 1. POINTS AND DISTANCES
# =========================

def disk_point(z) -> DiskPoint:
    """Validate a single point against the boundary guard."""
    z = complex(z)
    if abs(z) > BOUNDARY_GUARD:
        raise GeometryError(f"point {z} is outside the guarded disk |z| <= {BOUNDARY_GUARD}")
    return z


def poincare_distance(p, q):
    """
    Hyperbolic distance, vectorized over numpy arrays.

    Uses sinh(d/2) = |p - q| / sqrt((1 - |p|^2)(1 - |q|^2)), which stays accurate
    both for nearby points and for points far from the origin.
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    abs_p = np.abs(p)
    abs_q = np.abs(q)
    denom = np.sqrt((1.0 - abs_p) * (1.0 + abs_p) * (1.0 - abs_q) * (1.0 + abs_q))
    d = 2.0 * np.arcsinh(np.abs(p - q) / denom)
    return float(d) if d.ndim == 0 else d


def distance_from_origin(z):
    """d_P(0, z) = ln((1 + |z|) / (1 - |z|))."""
    return poincare_distance(0.0, z)


def point_at_distance(radius, angle=0.0):
    """The disk point at hyperbolic distance `radius` from 0 in direction `angle`."""
    return np.tanh(np.asarray(radius) / 2.0) * np.exp(1j * np.asarray(angle))


def rotation_displacement(xi, theta):
    """
    d_P(xi, e^{i theta} xi) in closed form:
    sinh(d/2) = 2 |xi| |sin(theta/2)| / (1 - |xi|^2).
    """
    r = np.abs(np.asarray(xi, dtype=complex))
    s = np.abs(np.sin(np.asarray(theta, dtype=float) / 2.0))
    d = 2.0 * np.arcsinh(2.0 * r * s / ((1.0 - r) * (1.0 + r)))
    return float(d) if d.ndim == 0 else d


# =========================
# 2. ISOMETRIES
# =========================

@dataclass(frozen=True)
class Isometry:
    """z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1, canonical sign."""

    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(det - 1.0) > DETERMINANT_TOL * max(1.0, abs(self.a) ** 2):
            raise GeometryError(f"isometry determinant {det} is not 1")

    @classmethod
    def from_coefficients(cls, a, b, normalize=True):
        a, b = complex(a), complex(b)
        if normalize:
            a, b = normalize_coefficients(a, b)
        return cls(*canonical_sign(a, b))

    def __call__(self, z):
        return apply(self, z)

    @property
    def orbit_point(self) -> complex:
        """Image of the origin, b / conj(a)."""
        return self.b / self.a.conjugate()

    @property
    def displacement(self) -> float:
        """d_P(0, m(0)) = 2 asinh(|b|)."""
        return float(2.0 * np.arcsinh(abs(self.b)))

    @property
    def fingerprint(self) -> tuple:
        return fingerprint(self.a, self.b)

    def canonical(self):
        return Isometry(*canonical_sign(self.a, self.b))


def canonical_sign(a, b):
    """Fix the +-1 ambiguity: Re(a) > 0, or Re(a) = 0 and Im(a) >= 0. Vectorized."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    flip = (a.real < 0) | ((a.real == 0) & (a.imag < 0))
    a = np.where(flip, -a, a)
    b = np.where(flip, -b, b)
    if a.ndim == 0:
        return complex(a), complex(b)
    return a, b


def normalize_coefficients(a, b):
    """Rescale (a, b) to |a|^2 - |b|^2 = 1. Vectorized."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    det = (np.abs(a) - np.abs(b)) * (np.abs(a) + np.abs(b))
    if np.any(det <= 0):
        raise GeometryError("coefficients do not define a disk isometry (|a| <= |b|)")
    scale = np.sqrt(det)
    a, b = a / scale, b / scale
    if a.ndim == 0:
        return complex(a), complex(b)
    return a, b


def fingerprint(a, b, quantum=FINGERPRINT_QUANTUM):
    """Quantized canonical coefficients (Re a, Im a, Re b, Im b) as int64."""
    a, b = canonical_sign(a, b)
    coords = np.stack([np.real(a), np.imag(a), np.real(b), np.imag(b)], axis=-1)
    quantized = np.round(coords / quantum).astype(np.int64)
    if quantized.ndim == 1:
        return tuple(int(v) for v in quantized)
    return quantized


IDENTITY = Isometry(1.0 + 0j, 0j)


def apply(m: Isometry, z):
    """Apply m to a point or an array of points."""
    z = np.asarray(z, dtype=complex)
    w = (m.a * z + m.b) / (np.conj(m.b) * z + np.conj(m.a))
    if np.any(np.abs(w) > BOUNDARY_GUARD):
        raise GeometryError("isometry image left the guarded disk (numeric overflow in a composed word)")
    return complex(w) if w.ndim == 0 else w


def compose_coefficients(a1, b1, a2, b2):
    """Coefficients of m1 o m2, vectorized and uncanonicalized."""
    return a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2)


def compose(m1: Isometry, m2: Isometry) -> Isometry:
    a, b = compose_coefficients(m1.a, m1.b, m2.a, m2.b)
    return Isometry(*canonical_sign(*normalize_coefficients(a, b)))


def invert(m: Isometry) -> Isometry:
    return Isometry(*canonical_sign(m.a.conjugate(), -m.b))


def compose_all(isometries) -> Isometry:
    result = IDENTITY
    for m in isometries:
        result = compose(result, m)
    return result


def rotation(theta: float) -> Isometry:
    """z -> e^{i theta} z."""
    return Isometry(*canonical_sign(np.exp(0.5j * theta), 0j))


def translation_to(a) -> Isometry:
    """z -> (z + a) / (1 + conj(a) z), the translation along the geodesic through 0 and a."""
    a = disk_point(a)
    scale = np.sqrt((1.0 - abs(a)) * (1.0 + abs(a)))
    return Isometry(*canonical_sign(1.0 / scale, a / scale))


def isometry_distance(m1: Isometry, m2: Isometry) -> float:
    """Coefficient distance modulo sign; 0 iff the maps agree."""
    same = abs(m1.a - m2.a) + abs(m1.b - m2.b)
    opposite = abs(m1.a + m2.a) + abs(m1.b + m2.b)
    return float(min(same, opposite))


def isclose(m1: Isometry, m2: Isometry, tol=1e-10) -> bool:
    return isometry_distance(m1, m2) <= tol * max(1.0, abs(m1.a))


def image_distance_from_origin(a, b, z):
    """
    d_P(0, m(z)) for m with coefficients (a, b), without forming m(z):
    sinh(d/2) = |a z + b| / sqrt(1 - |z|^2). Broadcasts; stays finite past the boundary guard.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    z = np.asarray(z, dtype=complex)
    abs_z = np.abs(z)
    d = 2.0 * np.arcsinh(np.abs(a * z + b) / np.sqrt((1.0 - abs_z) * (1.0 + abs_z)))
    return float(d) if d.ndim == 0 else d


def hyperboloid_coordinates(a, b):
    """Sign-invariant coordinates (|a|^2 + |b|^2, Re 2ab, Im 2ab) of the orbit point on the hyperboloid."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    x0 = np.abs(a) ** 2 + np.abs(b) ** 2
    w = 2.0 * a * b
    return np.stack([x0, w.real, w.imag], axis=-1)


# =========================
# 3. SUP OVER DISKS
# =========================

def disk_samples(R, samples=512, rings=8):
    """Origin plus `rings` circles at hyperbolic radii kR/rings, `samples` points each."""
    angles = 2.0 * np.pi * np.arange(samples) / samples
    radii = R * np.arange(1, rings + 1) / rings
    grid = point_at_distance(radii[:, None], angles[None, :]).ravel()
    return np.concatenate([[0j], grid])


def sup_orbit_distance(m1: Isometry, m2: Isometry, R: float, samples=512, rings=8) -> float:
    """
    Lower-bound estimate of sup over the closed disk of radius R of d_P(m1 xi, m2 xi).

    The origin is always sampled; with convexity of the displacement along rays
    this makes the estimate nondecreasing in R.
    """
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    if samples < 64:
        raise ValueError(f"need at least 64 boundary samples, got {samples}")
    xi = disk_samples(R, samples, rings)
    return float(np.max(poincare_distance(apply(m1, xi), apply(m2, xi))))


# =========================
# 4. AUTOMORPHISM PROXIMITY CALIBRATION
# =========================

def divergence_threshold(a, direction, R, eps, samples=256, rings=8, iterations=80):
    """
    Bracket (lo, hi) of the distance delta* at which translations to `a` and to the
    point b at distance delta from `a` (in tangent direction `direction`) stop
    being eps-close on the closed disk of radius R.

    sup_orbit_distance(tau_a, tau_b, R) <= eps at lo and > eps at hi.
    """
    tau_a = translation_to(a)

    def spread(delta):
        b = apply(tau_a, point_at_distance(delta, direction))
        return sup_orbit_distance(tau_a, translation_to(b), R, samples, rings)

    lo, hi = 0.0, 2.0 * eps * np.exp(-R)
    while spread(hi) <= eps:
        lo, hi = hi, 2.0 * hi
    for _ in range(iterations):
        mid = np.sqrt(lo * hi) if lo > 0 else hi / 2.0
        if spread(mid) <= eps:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass(frozen=True)
class AutomorphismCalibration:
    eps: float
    constant: float
    thresholds: tuple  # (R, a, direction, lo, hi)


DEFAULT_CALIBRATION_BASES = (0j, 0.3 + 0j, 0.5j, -0.6 + 0.2j)
DEFAULT_CALIBRATION_DIRECTIONS = (0.0, np.pi / 3, np.pi / 2, 2.0)


def calibrate_automorphism_constant(eps, R_grid=(5.0, 6.0, 7.0, 8.0), bases=DEFAULT_CALIBRATION_BASES,
                                    directions=DEFAULT_CALIBRATION_DIRECTIONS, samples=256, rings=8):
    """
    Empirical constant A(eps) for the proximity of translations:

        A = max over the grid of max(e^{-R} / lo, hi * e^{R})

    so that d_P(a, b) <= A^{-1} e^{-R} keeps tau_a, tau_b eps-close on the R-disk and
    d_P(a, b) >= A e^{-R} separates them, for every grid configuration.
    """
    records = []
    constant = 0.0
    for R in R_grid:
        for a in bases:
            for direction in directions:
                lo, hi = divergence_threshold(a, direction, R, eps, samples, rings)
                records.append((R, a, direction, lo, hi))
                constant = max(constant, np.exp(-R) / lo, hi * np.exp(R))
    logger.debug("calibrated A(%s) = %.6g over %d configurations", eps, constant, len(records))
    return AutomorphismCalibration(eps=eps, constant=float(constant), thresholds=tuple(records))
