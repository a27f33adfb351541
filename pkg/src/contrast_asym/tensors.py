"""Exact symmetric-matrix algebra for derived conductivity tensors.

All conductivities are symmetric positive definite d x d matrices with
d in {2, 3}.  The derived objects computed here are

* the contrast matrix  d = gamma_n + gamma_0 gamma_n^-1 gamma_0  on the
  inclusion set (zero outside), whose L1 norm is the small parameter of
  every expansion in the toolkit,
* its centred version  d' = (gamma_n - gamma_0) gamma_n^-1 (gamma_n - gamma_0)
  which satisfies d = d' + 2 gamma_0 identically,
* the rotated dual conductivity  sigma = J^T gamma^-1 J  in 2D and the
  dual contrast matrix Sigma.

Inverses use the explicit cofactor formula and eigenvalues use closed
forms (quadratic for 2x2, trigonometric Cardano for 3x3) so that every
operation is deterministic and free of iterative linear algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConductivityError, OrderingViolationError, UnsupportedDimensionError

# Conductivity eigenvalues outside this range make gamma^-1 untrustworthy
# in double precision; construction refuses them.
CONTRAST_MIN = 1e-8
CONTRAST_MAX = 1e8

# Relative tolerance for positive-semidefiniteness checks, scaled by the
# largest eigenvalue magnitude of the matrix under test.
TOL_PSD = 1e-10

# Fixed 2D rotation by +90 degrees; J^T = J^-1 = -J.
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
        raise UnsupportedDimensionError(f"expected a 2x2 or 3x3 matrix, got shape {m.shape}")
    return m


def sym_eigvals(a) -> np.ndarray:
    """Eigenvalues of a symmetric 2x2 or 3x3 matrix, ascending, by closed form."""
    m = _as_matrix(a)
    d = m.shape[0]
    if d == 2:
        tr = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
        return np.array([tr / 2.0 - disc, tr / 2.0 + disc])
    # Trigonometric Cardano for the symmetric 3x3 case.
    p1 = m[0, 1] ** 2 + m[0, 2] ** 2 + m[1, 2] ** 2
    q = (m[0, 0] + m[1, 1] + m[2, 2]) / 3.0
    p2 = (m[0, 0] - q) ** 2 + (m[1, 1] - q) ** 2 + (m[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(max(p2, 0.0) / 6.0)
    if p < 1e-300:
        return np.array([q, q, q])
    b = (m - q * np.eye(3)) / p
    detb = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = min(1.0, max(-1.0, detb / 2.0))
    phi = math.acos(r) / 3.0
    lam1 = q + 2.0 * p * math.cos(phi)
    lam3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    lam2 = 3.0 * q - lam1 - lam3
    return np.array(sorted((lam1, lam2, lam3)))


def cofactor_inverse(a) -> np.ndarray:
    """Inverse of a 2x2 or 3x3 matrix via the adjugate formula."""
    m = _as_matrix(a)
    d = m.shape[0]
    if d == 2:
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0.0:
            raise InvalidConductivityError("singular matrix has no inverse")
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    c = np.empty((3, 3))
    c[0, 0] = m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    c[0, 1] = -(m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
    c[0, 2] = m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]
    c[1, 0] = -(m[0, 1] * m[2, 2] - m[0, 2] * m[2, 1])
    c[1, 1] = m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
    c[1, 2] = -(m[0, 0] * m[2, 1] - m[0, 1] * m[2, 0])
    c[2, 0] = m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]
    c[2, 1] = -(m[0, 0] * m[1, 2] - m[0, 2] * m[1, 0])
    c[2, 2] = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    det = m[0, 0] * c[0, 0] + m[0, 1] * c[0, 1] + m[0, 2] * c[0, 2]
    if det == 0.0:
        raise InvalidConductivityError("singular matrix has no inverse")
    return c.T / det


@dataclass(frozen=True)
class SymMat:
    """Symmetric d x d matrix stored as a full array, symmetric by construction.

    Only the upper triangle of the input is read; the stored array is the
    symmetrized full matrix and is immutable.
    """

    mat: np.ndarray

    def __init__(self, entries, dim: int | None = None):
        m = np.asarray(entries, dtype=float)
        if m.ndim == 1:
            if dim is None:
                dim = {3: 2, 6: 3}.get(m.size)
                if dim is None:
                    raise UnsupportedDimensionError(
                        f"cannot infer dimension from {m.size} packed entries"
                    )
            full = np.zeros((dim, dim))
            iu = np.triu_indices(dim)
            full[iu] = m
            full = full + full.T - np.diag(np.diag(full))
            m = full
        else:
            m = _as_matrix(m)
            m = 0.5 * (m + m.T)
        if not np.all(np.isfinite(m)):
            raise InvalidConductivityError("matrix entries must be finite")
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @staticmethod
    def identity(dim: int = 2) -> "SymMat":
        return SymMat(np.eye(dim))

    @staticmethod
    def iso(value: float, dim: int = 2) -> "SymMat":
        return SymMat(value * np.eye(dim))

    @staticmethod
    def diag(*values: float) -> "SymMat":
        return SymMat(np.diag(values))

    def eigvals(self) -> np.ndarray:
        return sym_eigvals(self.mat)

    def inv(self) -> "SymMat":
        return SymMat(cofactor_inverse(self.mat))

    def __matmul__(self, other):
        o = other.mat if isinstance(other, SymMat) else other
        return self.mat @ o

    def __add__(self, other: "SymMat") -> "SymMat":
        return SymMat(self.mat + other.mat)

    def __sub__(self, other: "SymMat") -> "SymMat":
        return SymMat(self.mat - other.mat)

    def __mul__(self, scalar: float) -> "SymMat":
        return SymMat(self.mat * scalar)

    __rmul__ = __mul__

    def is_spd(self) -> bool:
        ev = self.eigvals()
        return bool(ev[0] > 0.0)

    def validate_conductivity(self, name: str = "conductivity") -> "SymMat":
        """Raise unless SPD with eigenvalues inside the contrast cap."""
        ev = self.eigvals()
        if ev[0] <= 0.0:
            raise InvalidConductivityError(f"{name} is not positive definite (eigenvalues {ev})")
        if ev[0] < CONTRAST_MIN or ev[-1] > CONTRAST_MAX:
            raise InvalidConductivityError(
                f"{name} eigenvalues {ev} outside supported range "
                f"[{CONTRAST_MIN:g}, {CONTRAST_MAX:g}]"
            )
        return self


def frobenius(a) -> float:
    """Frobenius norm (Euclidean norm of the entries)."""
    m = a.mat if isinstance(a, SymMat) else np.asarray(a, dtype=float)
    return float(np.sqrt(np.sum(m * m)))


def psd_leq(a: SymMat, b: SymMat, tol: float | None = None) -> bool:
    """True iff a <= b in the quadratic-form sense, within a scaled tolerance.

    The tolerance is TOL_PSD times the largest eigenvalue magnitude of the
    difference's context (the two operands), which keeps the check
    scale-invariant up to contrasts of 1e8.
    """
    diff = b.mat - a.mat
    ev = sym_eigvals(diff)
    if tol is None:
        scale = max(
            abs(sym_eigvals(a.mat)).max(),
            abs(sym_eigvals(b.mat)).max(),
            1.0,
        )
        tol = TOL_PSD * scale
    return bool(ev[0] >= -tol)


def dn_at(gamma0: SymMat, gamman: SymMat, inside_inclusion: bool = True) -> SymMat:
    """Contrast matrix gamma_n + gamma_0 gamma_n^-1 gamma_0 on the inclusion.

    Returns the zero matrix outside the inclusion set.  The result is
    symmetric positive semidefinite whenever the inputs are SPD.
    """
    gamma0.validate_conductivity("gamma0")
    gamman.validate_conductivity("gamman")
    if gamma0.dim != gamman.dim:
        raise UnsupportedDimensionError("gamma0 and gamman must share a dimension")
    if not inside_inclusion:
        return SymMat(np.zeros((gamma0.dim, gamma0.dim)))
    return SymMat(gamman.mat + gamma0.mat @ cofactor_inverse(gamman.mat) @ gamma0.mat)


def dn_prime_at(gamma0: SymMat, gamman: SymMat) -> SymMat:
    """Centred contrast (gamma_n - gamma_0) gamma_n^-1 (gamma_n - gamma_0).

    Positive semidefinite, and equal to dn_at(...) - 2 gamma_0 up to
    rounding.
    """
    gamma0.validate_conductivity("gamma0")
    gamman.validate_conductivity("gamman")
    delta = gamman.mat - gamma0.mat
    return SymMat(delta @ cofactor_inverse(gamman.mat) @ delta)


def check_notlowalpha(gamma0: SymMat, gamman: SymMat, region: str) -> dict:
    """Pointwise dominance of the contrast matrix over its ingredients.

    On a conductive region ("A") requires gamma_n >= gamma_0, on an
    insulating one ("B") gamma_n <= gamma_0, then verifies the four
    Frobenius inequalities

        |d|_F >= |gamma_0|_F, |gamma_n|_F, |gamma_n - gamma_0|_F, |d'|_F.
    """
    if region not in ("A", "B"):
        raise ValueError("region must be 'A' or 'B'")
    if region == "A" and not psd_leq(gamma0, gamman):
        raise OrderingViolationError("gamma_n >= gamma_0 fails on a conductive region")
    if region == "B" and not psd_leq(gamman, gamma0):
        raise OrderingViolationError("gamma_n <= gamma_0 fails on an insulating region")
    d = dn_at(gamma0, gamman, True)
    dprime = dn_prime_at(gamma0, gamman)
    fd = frobenius(d)
    report = {
        "dominates_gamma0": fd >= frobenius(gamma0) * (1.0 - 1e-12),
        "dominates_gamman": fd >= frobenius(gamman) * (1.0 - 1e-12),
        "dominates_difference": fd >= frobenius(gamman - gamma0) * (1.0 - 1e-12),
        "dominates_dn_prime": fd >= frobenius(dprime) * (1.0 - 1e-12),
    }
    report["all"] = all(report.values())
    return report


def frobenius_sandwich(a: SymMat) -> tuple[float, float, float]:
    """(|A^2|_F, |A|_F^2, sqrt(d) |A^2|_F) for PSD A; the middle value is
    squeezed between the outer two."""
    ev = a.eigvals()
    if ev[0] < -TOL_PSD * max(1.0, abs(ev).max()):
        raise InvalidConductivityError("frobenius_sandwich requires a PSD matrix")
    a2 = a.mat @ a.mat
    lo = frobenius(a2)
    mid = frobenius(a) ** 2
    return lo, mid, math.sqrt(a.dim) * lo


def sigma_of(gamma: SymMat) -> SymMat:
    """Dual conductivity J^T gamma^-1 J of a 2x2 SPD matrix.

    Equals gamma / det(gamma); applying the map twice returns gamma.
    """
    if gamma.dim != 2:
        raise UnsupportedDimensionError("sigma_of is a 2D construction")
    gamma.validate_conductivity("gamma")
    return SymMat(J2.T @ cofactor_inverse(gamma.mat) @ J2)


def sigma_n_two_ways(gamma0: SymMat, gamman: SymMat) -> tuple[SymMat, SymMat, float]:
    """Dual contrast matrix computed two independent ways.

    Way one builds Sigma = sigma_n + sigma_0 sigma_n^-1 sigma_0 from the
    dual conductivities; way two conjugates the primal contrast matrix,
    J^T gamma_0^-1 d gamma_0^-1 J.  Returns both with their max absolute
    entry deviation.
    """
    if gamma0.dim != 2 or gamman.dim != 2:
        raise UnsupportedDimensionError("dual contrast is a 2D construction")
    s0 = sigma_of(gamma0)
    sn = sigma_of(gamman)
    direct = SymMat(sn.mat + s0.mat @ cofactor_inverse(sn.mat) @ s0.mat)
    g0inv = cofactor_inverse(gamma0.mat)
    d = dn_at(gamma0, gamman, True)
    conjugated = SymMat(J2.T @ g0inv @ d.mat @ g0inv @ J2)
    dev = float(np.max(np.abs(direct.mat - conjugated.mat)))
    return direct, conjugated, dev


def sigma_equivalence_bounds(gamma0: SymMat, gamman: SymMat) -> tuple[float, float, float]:
    """(lower bound, |Sigma|_F, upper bound) where the bounds are
    |d|_F times the squared extreme eigenvalues of gamma_0^-1."""
    d = dn_at(gamma0, gamman, True)
    sigma, _, _ = sigma_n_two_ways(gamma0, gamman)
    ev0inv = sym_eigvals(cofactor_inverse(gamma0.mat))
    fd = frobenius(d)
    return fd * ev0inv[0] ** 2, frobenius(sigma), fd * ev0inv[-1] ** 2


def random_spd(rng: np.random.Generator, dim: int = 2, log_contrast: float = 3.0) -> SymMat:
    """Random SPD matrix with eigenvalues log-uniform in 10^[-c, c]."""
    lam = 10.0 ** rng.uniform(-log_contrast, log_contrast, size=dim)
    if dim == 2:
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        q = np.array([[c, -s], [s, c]])
    else:
        # Rotation from three Euler angles keeps the module free of
        # iterative factorizations.
        a, b, g = rng.uniform(0.0, 2.0 * math.pi, size=3)
        rz = np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])
        ry = np.array([[math.cos(b), 0, math.sin(b)], [0, 1, 0], [-math.sin(b), 0, math.cos(b)]])
        rx = np.array([[1, 0, 0], [0, math.cos(g), -math.sin(g)], [0, math.sin(g), math.cos(g)]])
        q = rz @ ry @ rx
    return SymMat(q @ np.diag(lam) @ q.T)


@dataclass(frozen=True)
class MatrixField:
    """Region-wise conductivity: a background matrix valid everywhere plus
    overrides on tagged regions.

    ``background`` and region values may be constant SymMat or callables
    mapping a point (2-vector) to SymMat, for smoothly varying media.
    Region tags follow the mesh convention (0 background, positive tags
    for inclusion parts).
    """

    background: object
    regions: dict

    def at(self, x, region_tag: int = 0) -> SymMat:
        src = self.regions.get(region_tag, self.background) if region_tag else self.background
        return src(np.asarray(x, dtype=float)) if callable(src) else src

    def is_constant(self) -> bool:
        if callable(self.background):
            return False
        return not any(callable(v) for v in self.regions.values())
