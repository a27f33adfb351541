"""Closed-form transmission solutions used as ground truth.

Two exactly solvable configurations:

* radial layered annuli in the ball of radius 2 with boundary data x_1:
  the solution is a combination of the harmonics x_1 and x_1 |x|^-d on
  each layer, fixed by a 7x7 linear system of interface conditions;

* a confocal elliptic inclusion xi <= 1/n inside the confocal ellipse
  xi = 2 (foci at +-1) with boundary data x_1 or x_2: one elliptic
  harmonic per branch is exact, and the interior gradient is constant.

Both expose residuals of all interface/boundary conditions so tests can
certify exactness rather than trust the derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConductivityError
from .tensors import CONTRAST_MAX, CONTRAST_MIN, SymMat

# ---------------------------------------------------------------------------
# Radial layered annuli


@dataclass(frozen=True)
class RadialSolution:
    """Coefficients of u = (A_i + B_i |x|^-d) x_1 on the four radial layers.

    Layers: (0, 1-1/n), (1-1/n, 1), (1, 1+1/n), (1+1/n, 2) with isotropic
    conductivities 1, n^alpha, n^beta, 1 and outer data x_1.
    """

    d: int
    n: int
    alpha: float
    beta: float
    coeff_a: tuple  # A_1..A_4
    coeff_b: tuple  # B_1(=0), B_2..B_4

    @property
    def radii(self) -> tuple:
        return (1.0 - 1.0 / self.n, 1.0, 1.0 + 1.0 / self.n, 2.0)

    @property
    def conductivities(self) -> tuple:
        return (1.0, float(self.n) ** self.alpha, float(self.n) ** self.beta, 1.0)

    def layer_of(self, r):
        r = np.asarray(r, dtype=float)
        r1, r2, r3, _ = self.radii
        return np.select([r <= r1, r <= r2, r <= r3], [0, 1, 2], default=3)

    def profile(self, r):
        """g(r) with u = g(r) x_1 / r, i.e. g(r) = A r + B r^(1-d)."""
        r = np.asarray(r, dtype=float)
        lay = self.layer_of(r)
        a = np.take(self.coeff_a, lay)
        b = np.take(self.coeff_b, lay)
        rs = np.where(r == 0.0, 1.0, r)
        return np.where(r == 0.0, 0.0, a * r + b * rs ** (1 - self.d))

    def __call__(self, pts):
        """u at 2D points (d=2 evaluation)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.where(r > 0.0, self.profile(r) * pts[:, 0] / np.where(r == 0, 1, r), 0.0)
        return vals

    def gradient(self, pts):
        """Gradient of u at 2D points away from interfaces."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        r = np.hypot(x, y)
        lay = self.layer_of(r)
        a = np.take(self.coeff_a, lay)
        b = np.take(self.coeff_b, lay)
        d = self.d
        rs = np.where(r == 0.0, 1.0, r)
        # u = a x + b x r^-d ; du/dx = a + b r^-d - d b x^2 r^-(d+2)
        ux = a + b * rs**-d - d * b * x**2 * rs ** -(d + 2)
        uy = -d * b * x * y * rs ** -(d + 2)
        ux = np.where(r == 0.0, a, ux)
        uy = np.where(r == 0.0, 0.0, uy)
        return np.column_stack([ux, uy])

    def condition_residuals(self) -> np.ndarray:
        """Relative residuals of the seven interface/boundary conditions."""
        mat, rhs = radial_system(self.d, self.n, self.alpha, self.beta)
        x = np.array(
            [
                self.coeff_a[0],
                self.coeff_a[1],
                self.coeff_b[1],
                self.coeff_a[2],
                self.coeff_b[2],
                self.coeff_a[3],
                self.coeff_b[3],
            ]
        )
        scale = np.abs(mat) @ np.abs(x) + np.abs(rhs) + 1e-300
        return np.abs(mat @ x - rhs) / scale


def radial_system(d: int, n: int, alpha: float, beta: float):
    """Assemble the 7x7 interface system for the layered radial problem.

    Unknown order: A1, A2, B2, A3, B3, A4, B4.  Rows: continuity and flux
    continuity at the three interfaces, then the outer Dirichlet condition.
    """
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    gam = [1.0, float(n) ** alpha, float(n) ** beta, 1.0]
    for g in gam:
        if not (CONTRAST_MIN <= g <= CONTRAST_MAX):
            raise InvalidConductivityError(f"layer conductivity {g:g} outside contrast cap")
    r1, r2, r3 = 1.0 - 1.0 / n, 1.0, 1.0 + 1.0 / n
    mat = np.zeros((7, 7))
    rhs = np.zeros(7)
    # index helpers: a_i at (0,1,3,5), b_i at (-,2,4,6)
    ia = [0, 1, 3, 5]
    ib = [None, 2, 4, 6]

    def cont(row, r, i):
        # g_i(r) - g_{i+1}(r) = 0 with g = A r + B r^{1-d}
        mat[row, ia[i]] += r
        if ib[i] is not None:
            mat[row, ib[i]] += r ** (1 - d)
        mat[row, ia[i + 1]] -= r
        mat[row, ib[i + 1]] -= r ** (1 - d)

    def flux(row, r, i):
        # gamma_i g_i'(r) - gamma_{i+1} g_{i+1}'(r) = 0, g' = A + (1-d) B r^-d
        mat[row, ia[i]] += gam[i]
        if ib[i] is not None:
            mat[row, ib[i]] += gam[i] * (1 - d) * r**-d
        mat[row, ia[i + 1]] -= gam[i + 1]
        mat[row, ib[i + 1]] -= gam[i + 1] * (1 - d) * r**-d

    cont(0, r1, 0)
    flux(1, r1, 0)
    cont(2, r2, 1)
    flux(3, r2, 1)
    cont(4, r3, 2)
    flux(5, r3, 2)
    mat[6, ia[3]] = 2.0
    mat[6, ib[3]] = 2.0 ** (1 - d)
    rhs[6] = 2.0
    return mat, rhs


def radial_solution(d: int, n: int, alpha: float, beta: float) -> RadialSolution:
    mat, rhs = radial_system(d, n, alpha, beta)
    x = np.linalg.solve(mat, rhs)
    return RadialSolution(
        d=d,
        n=n,
        alpha=alpha,
        beta=beta,
        coeff_a=(x[0], x[1], x[3], x[5]),
        coeff_b=(0.0, x[2], x[4], x[6]),
    )


def radial_perturbation(sol: RadialSolution) -> tuple[float, float]:
    """Exact sup and L1 norms of u - x_1 over the ball of radius 2.

    With u = g(r) x_1 / r the deviation is (g(r) - r) cos(angle); the sup
    is max_r |g(r) - r| and the L1 integral reduces to a 1D piecewise
    polynomial integral times the angular factor 2 vol(B^{d-1}).
    """
    d = sol.d
    edges = (0.0,) + sol.radii
    sup = 0.0
    integral = 0.0
    for i in range(4):
        a = sol.coeff_a[i] - 1.0
        b = sol.coeff_b[i]
        lo, hi = edges[i], edges[i + 1]
        # sup of |a r + b r^{1-d}| on [lo, hi]
        candidates = [lo, hi] if lo > 0.0 else [hi]
        if a != 0.0 and b != 0.0:
            rc = ((d - 1) * b / a) ** (1.0 / d) if (d - 1) * b / a > 0 else None
            if rc is not None and lo < rc < hi:
                candidates.append(rc)
        for r in candidates:
            if r > 0.0:
                sup = max(sup, abs(a * r + b * r ** (1 - d)))
        # integral of |a r^d + b| dr on [lo, hi]  (the r^{d-1} weight folded in)
        integral += _abs_poly_integral(a, b, d, lo, hi)
    angular = 2.0 * math.pi ** ((d - 1) / 2.0) / math.gamma((d - 1) / 2.0 + 1.0)
    return sup, angular * integral


def _abs_poly_integral(a: float, b: float, d: int, lo: float, hi: float) -> float:
    def anti(r):
        return a * r ** (d + 1) / (d + 1) + b * r

    pieces = [lo, hi]
    if a != 0.0:
        root_pow = -b / a
        if root_pow > 0.0:
            root = root_pow ** (1.0 / d)
            if lo < root < hi:
                pieces = [lo, root, hi]
    total = 0.0
    for left, right in zip(pieces[:-1], pieces[1:]):
        mid = 0.5 * (left + right)
        sign = 1.0 if a * mid**d + b >= 0.0 else -1.0
        total += sign * (anti(right) - anti(left))
    return abs(total) if len(pieces) == 2 else total


# ---------------------------------------------------------------------------
# Confocal elliptic inclusion


@dataclass(frozen=True)
class EllipticSolution:
    """First-harmonic transmission solution for the collapsing confocal
    ellipse xi <= 1/n with isotropic contrast lam, outer data x_i on xi=2.

    Interior gradients are exactly constant: grad u1 = (a_in, 0),
    grad u2 = (0, b_in).  The derived scalars ell1, ell2 are the diagonal
    entries of the flux-corrector density of the inclusion.
    """

    n: int
    lam: float
    a_in: float  # interior coefficient, cos branch (u1 = a_in * x1 inside)
    p1: float
    q1: float
    b_in: float  # interior coefficient, sin branch
    p2: float
    q2: float

    @property
    def xi0(self) -> float:
        return 1.0 / self.n

    @property
    def ell(self) -> tuple[float, float]:
        lam = self.lam
        factor = (1.0 / math.sqrt(2.0)) * lam * (1.0 - lam) / (1.0 + lam * lam)
        return factor * (self.a_in - 1.0), factor * (self.b_in - 1.0)

    def densities(self) -> tuple[SymMat, SymMat, SymMat]:
        """(D, W, M) densities of the inclusion relative to its normalized
        contrast measure; constant over the inclusion."""
        lam = self.lam
        dval = (lam - 1.0) / (math.sqrt(2.0) * (lam + 1.0 / lam))
        l1, l2 = self.ell
        d_mat = SymMat.iso(dval, 2)
        w_mat = SymMat.diag(l1, l2)
        return d_mat, w_mat, SymMat(d_mat.mat - w_mat.mat)

    def value(self, pts, branch: int):
        """u^branch at 2D points, branch 1 for data x1, 2 for x2."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        z = pts[:, 0] + 1j * pts[:, 1]
        w = np.arccosh(z.astype(complex))
        xi = np.abs(w.real)
        eta = np.where(w.real >= 0, w.imag, -w.imag)
        inside = xi <= self.xi0
        if branch == 1:
            inner = self.a_in * pts[:, 0]
            outer = (self.p1 * np.cosh(xi) + self.q1 * np.sinh(xi)) * np.cos(eta)
        else:
            inner = self.b_in * pts[:, 1]
            outer = (self.p2 * np.sinh(xi) + self.q2 * np.cosh(xi)) * np.sin(eta)
        return np.where(inside, inner, outer)

    def condition_residuals(self) -> np.ndarray:
        """Relative residuals of the six transmission/boundary conditions."""
        s0, c0 = math.sinh(self.xi0), math.cosh(self.xi0)
        s2, c2 = math.sinh(2.0), math.cosh(2.0)
        lam = self.lam
        eqs = [
            (self.a_in * c0 - self.p1 * c0 - self.q1 * s0, abs(self.a_in * c0) + abs(self.p1 * c0) + abs(self.q1 * s0)),
            (lam * self.a_in * s0 - self.p1 * s0 - self.q1 * c0, abs(lam * self.a_in * s0) + abs(self.p1 * s0) + abs(self.q1 * c0)),
            (self.p1 * c2 + self.q1 * s2 - c2, abs(self.p1 * c2) + abs(self.q1 * s2) + c2),
            (self.b_in * s0 - self.p2 * s0 - self.q2 * c0, abs(self.b_in * s0) + abs(self.p2 * s0) + abs(self.q2 * c0)),
            (lam * self.b_in * c0 - self.p2 * c0 - self.q2 * s0, abs(lam * self.b_in * c0) + abs(self.p2 * c0) + abs(self.q2 * s0)),
            (self.p2 * s2 + self.q2 * c2 - s2, abs(self.p2 * s2) + abs(self.q2 * c2) + s2),
        ]
        return np.array([abs(r) / (s + 1e-300) for r, s in eqs])


def elliptic_solution(n: int, lam: float) -> EllipticSolution:
    """Two-branch transmission solve on confocal ellipses, closed form."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not (CONTRAST_MIN <= lam <= CONTRAST_MAX):
        raise InvalidConductivityError(f"contrast {lam:g} outside supported range")
    s0, c0 = math.sinh(1.0 / n), math.cosh(1.0 / n)
    s2, c2 = math.sinh(2.0), math.cosh(2.0)
    # cos branch: interior a cosh(xi) cos(eta); exterior p cosh + q sinh.
    # Solving continuity and flux at xi0 for p, q in terms of a:
    #   p = a (c0^2 - lam s0^2),  q = a s0 c0 (lam - 1)
    denom1 = (c0**2 - lam * s0**2) * c2 + s0 * c0 * (lam - 1.0) * s2
    a_in = c2 / denom1
    p1 = a_in * (c0**2 - lam * s0**2)
    q1 = a_in * s0 * c0 * (lam - 1.0)
    # sin branch: interior b sinh(xi) sin(eta); exterior p sinh + q cosh.
    #   p = b (lam c0^2 - s0^2),  q = b s0 c0 (1 - lam)
    denom2 = (lam * c0**2 - s0**2) * s2 + s0 * c0 * (1.0 - lam) * c2
    b_in = s2 / denom2
    p2 = b_in * (lam * c0**2 - s0**2)
    q2 = b_in * s0 * c0 * (1.0 - lam)
    return EllipticSolution(n=n, lam=lam, a_in=a_in, p1=p1, q1=q1, b_in=b_in, p2=p2, q2=q2)


def elliptic_limit_tensors(case: str) -> tuple[SymMat, SymMat, SymMat]:
    """Published limiting (W, D, M) for the collapsing elliptic inclusion.

    "conductive": contrast growing with vanishing contrast mass;
    "insulating": contrast vanishing.  Returned as stated in the source
    example; the acceptance suite measures finite-n values against them.
    """
    r = 1.0 / math.sqrt(2.0)
    if case == "conductive":
        return SymMat.diag(0.0, r), SymMat.iso(r, 2), SymMat.diag(r, 0.0)
    if case == "insulating":
        return SymMat.iso(0.0, 2), SymMat.iso(-r, 2), SymMat.iso(-r, 2)
    raise ValueError("case must be 'conductive' or 'insulating'")


def coefficient_csv_rows(solutions) -> list[str]:
    """CSV rows `n,alpha,beta,A1,A2,A3,A4,B2,B3,B4` for radial solutions."""
    rows = ["n,alpha,beta,A1,A2,A3,A4,B2,B3,B4"]
    for s in solutions:
        a = s.coeff_a
        b = s.coeff_b
        rows.append(
            f"{s.n},{s.alpha:.17g},{s.beta:.17g},"
            + ",".join(f"{v:.17g}" for v in (a[0], a[1], a[2], a[3], b[1], b[2], b[3]))
        )
    return rows
