"""P1 finite elements for the conductivity equation div(gamma grad u) = 0.

Assembly uses exact per-triangle quadrature: basis gradients are constant
and the conductivity is evaluated at centroids, which is exact for
piecewise-constant inclusion coefficients.  Systems are SPD and solved by
Jacobi-preconditioned conjugate gradients to a 1e-12 relative residual;
Dirichlet conditions are imposed by elimination so boundary values are
exact, and Neumann/periodic solves pin one degree of freedom and restore
the declared mean-zero normalization afterwards.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ContrastAsymError,
    MismatchedMeshError,
    SolverDivergenceError,
)
from .mesh import Mesh
from .tensors import MatrixField, SymMat, sym_eigvals

CG_RTOL = 1e-12
ITER_CAP_FACTOR = 50.0


class ProbePlacementError(ContrastAsymError):
    """Green-function source point violates its placement preconditions."""


@dataclass
class ScalarField:
    """P1 nodal field on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.num_vertices,):
            raise MismatchedMeshError("field length does not match vertex count")

    def gradient(self) -> np.ndarray:
        """Per-triangle constant gradient, shape (T, 2)."""
        _, grads, _ = self.mesh.geometry()
        vals = self.values[self.mesh.triangles]  # (T, 3)
        return np.einsum("ti,tix->tx", vals, grads)

    def at_vertex(self, point) -> float:
        return float(self.values[self.mesh.nearest_vertex(point)])

    def mean(self) -> float:
        w = lumped_mass(self.mesh)
        return float(w @ self.values / w.sum())

    def boundary_mean(self) -> float:
        w = boundary_mass(self.mesh)
        total = w.sum()
        return float(w @ self.values / total) if total > 0 else 0.0


def gamma_per_triangle(mesh: Mesh, gamma: MatrixField) -> np.ndarray:
    """Conductivity evaluated at triangle centroids, shape (T, 2, 2)."""
    _, _, centroids = mesh.geometry()
    out = np.empty((mesh.num_triangles, 2, 2))
    tags = mesh.region_tag
    unique = np.unique(tags)
    for tag in unique:
        sel = tags == tag
        src = gamma.regions.get(int(tag), gamma.background) if tag else gamma.background
        if callable(src):
            for i in np.nonzero(sel)[0]:
                out[i] = gamma.at(centroids[i], int(tag)).mat
        else:
            out[sel] = src.mat
    return out


def assemble_stiffness(mesh: Mesh, gam_tri: np.ndarray) -> sp.csr_matrix:
    """Full stiffness matrix (no boundary conditions applied)."""
    areas, grads, _ = mesh.geometry()
    # K_loc[t, i, j] = area_t * grad_i . gamma_t grad_j
    ggrad = np.einsum("txy,tiy->tix", gam_tri, grads)
    kloc = np.einsum("tix,tjx->tij", grads, ggrad) * areas[:, None, None]
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.num_vertices
    a = sp.coo_matrix((kloc.ravel(), (rows, cols)), shape=(n, n))
    return a.tocsr()


def rhs_from_gradient_source(mesh: Mesh, coeff_tri: np.ndarray, source_grad: np.ndarray) -> np.ndarray:
    """Load vector b_i = sum_T area_T (coeff_T source_T) . grad phi_i.

    coeff_tri has shape (T, 2, 2); source_grad is either a constant
    2-vector or a per-triangle (T, 2) array.
    """
    areas, grads, _ = mesh.geometry()
    src = np.broadcast_to(np.asarray(source_grad, dtype=float), (mesh.num_triangles, 2))
    flux = np.einsum("txy,ty->tx", coeff_tri, src)
    contrib = np.einsum("tix,tx->ti", grads, flux) * areas[:, None]
    b = np.zeros(mesh.num_vertices)
    np.add.at(b, mesh.triangles.ravel(), contrib.ravel())
    return b


def lumped_mass(mesh: Mesh) -> np.ndarray:
    areas, _, _ = mesh.geometry()
    w = np.zeros(mesh.num_vertices)
    np.add.at(w, mesh.triangles.ravel(), np.repeat(areas / 3.0, 3))
    return w


def boundary_mass(mesh: Mesh) -> np.ndarray:
    w = np.zeros(mesh.num_vertices)
    v = mesh.vertices
    e = mesh.boundary_edges
    if len(e):
        lengths = np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1)
        np.add.at(w, e[:, 0], 0.5 * lengths)
        np.add.at(w, e[:, 1], 0.5 * lengths)
    return w


def _cg_solve(a: sp.csr_matrix, b: np.ndarray, label: str) -> np.ndarray:
    n = a.shape[0]
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n)
    diag = a.diagonal()
    diag = np.where(diag > 0, diag, 1.0)
    precond = spla.LinearOperator((n, n), matvec=lambda x: x / diag)
    maxiter = int(math.ceil(ITER_CAP_FACTOR * math.sqrt(n)))
    try:
        x, info = spla.cg(a, b, rtol=CG_RTOL, atol=0.0, maxiter=maxiter, M=precond)
    except TypeError:  # older scipy spells the tolerance 'tol'
        x, info = spla.cg(a, b, tol=CG_RTOL, atol=0.0, maxiter=maxiter, M=precond)
    if info != 0:
        res = float(np.linalg.norm(a @ x - b)) / bnorm
        raise SolverDivergenceError(
            f"{label}: PCG hit the iteration cap {maxiter} (relative residual {res:.2e})"
        )
    return x


def _warn_on_contrast(gam_tri: np.ndarray) -> None:
    lo, hi = math.inf, 0.0
    for g in (gam_tri[_] for _ in range(0, len(gam_tri), max(1, len(gam_tri) // 256))):
        ev = sym_eigvals(g)
        lo = min(lo, ev[0])
        hi = max(hi, ev[-1])
    if lo > 0 and hi / lo > 1e8:
        warnings.warn(
            f"conductivity contrast across the mesh is {hi / lo:.2e}; "
            "conditioning may degrade",
            RuntimeWarning,
            stacklevel=3,
        )


@dataclass
class BoundaryData:
    """Boundary condition: kind in {"dirichlet", "neumann"}.

    Dirichlet data is a callable g(x) -> value (vectorized over points).
    Neumann data is either a callable flux density with zero total
    integral, or a precomputed nodal functional vector (key "functional"),
    which is how consistent fluxes from a previous solve are fed back in.
    """

    kind: str
    data: object = None
    functional: np.ndarray | None = None

    @staticmethod
    def dirichlet(g) -> "BoundaryData":
        return BoundaryData("dirichlet", data=g)

    @staticmethod
    def neumann(h) -> "BoundaryData":
        return BoundaryData("neumann", data=h)

    @staticmethod
    def neumann_functional(vec) -> "BoundaryData":
        return BoundaryData("neumann", functional=np.asarray(vec, dtype=float))

    @staticmethod
    def periodic(load=None) -> "BoundaryData":
        """Periodic cell problem; ``load`` is an optional nodal functional
        driving the right-hand side (zero load gives the zero field)."""
        return BoundaryData("periodic", functional=None if load is None else np.asarray(load, dtype=float))


def _eval_on(points: np.ndarray, fn) -> np.ndarray:
    vals = fn(points)
    return np.asarray(vals, dtype=float).reshape(len(points))


def solve(mesh: Mesh, gamma: MatrixField, bc: BoundaryData) -> ScalarField:
    """Discrete solution of div(gamma grad u) = 0 under the given boundary
    condition.  Neumann solutions are normalized to zero boundary mean."""
    gam_tri = gamma_per_triangle(mesh, gamma)
    _warn_on_contrast(gam_tri)
    a = assemble_stiffness(mesh, gam_tri)
    n = mesh.num_vertices

    if bc.kind == "dirichlet":
        bverts = np.unique(mesh.boundary_edges)
        gvals = _eval_on(mesh.vertices[bverts], bc.data)
        u = np.zeros(n)
        u[bverts] = gvals
        free = np.ones(n, dtype=bool)
        free[bverts] = False
        rhs = -(a @ u)[free]
        aff = a[free][:, free]
        u[free] = _cg_solve(aff, rhs, "dirichlet solve")
        return ScalarField(mesh, u)

    if bc.kind == "neumann":
        if bc.functional is not None:
            b = bc.functional.copy()
        else:
            bm = boundary_mass(mesh)
            bverts = np.nonzero(bm)[0]
            hv = _eval_on(mesh.vertices[bverts], bc.data)
            b = np.zeros(n)
            b[bverts] = bm[bverts] * hv
            scale = np.abs(b).sum()
            if scale > 0 and abs(b.sum()) > 1e-10 * scale:
                raise ContrastAsymError(
                    "Neumann data does not integrate to zero over the boundary"
                )
        u = _solve_singular(a, b, "neumann solve")
        w = boundary_mass(mesh)
        u -= (w @ u) / w.sum()
        return ScalarField(mesh, u)

    if bc.kind == "periodic":
        if not mesh.periodic_pairs:
            raise MismatchedMeshError("periodic condition requires a periodic cell mesh")
        b = bc.functional if bc.functional is not None else np.zeros(n)
        p = _reduce_periodic(mesh)
        u = p @ _solve_singular((p.T @ a @ p).tocsr(), p.T @ b, "periodic solve")
        mass = lumped_mass(mesh)
        u -= (mass @ u) / mass.sum()
        return ScalarField(mesh, u)

    raise ValueError(f"unsupported boundary condition kind {bc.kind!r}")


def _solve_singular(a: sp.csr_matrix, b: np.ndarray, label: str) -> np.ndarray:
    """Solve the compatible singular system (kernel = constants) by pinning
    one degree of freedom; the caller fixes the additive constant."""
    n = a.shape[0]
    keep = np.ones(n, dtype=bool)
    keep[0] = False
    sub = a[keep][:, keep]
    x = np.zeros(n)
    x[keep] = _cg_solve(sub.tocsr(), b[keep], label)
    return x


def _reduce_periodic(mesh: Mesh):
    """Projection matrix folding slave vertices onto their masters."""
    n = mesh.num_vertices
    master = np.arange(n)
    for s, m in mesh.periodic_pairs.items():
        master[s] = m
    # path-compress one level (pairs map directly to final masters)
    keep = np.nonzero(master == np.arange(n))[0]
    index_of = -np.ones(n, dtype=np.int64)
    index_of[keep] = np.arange(len(keep))
    cols = index_of[master]
    p = sp.coo_matrix((np.ones(n), (np.arange(n), cols)), shape=(n, len(keep))).tocsr()
    return p


def solve_perturbation(
    mesh: Mesh,
    gamma0: MatrixField,
    gamman: MatrixField,
    u0: ScalarField | None = None,
    space: str = "dirichlet",
    grad0=None,
) -> ScalarField:
    """Perturbation field w solving

        int gamma_n grad w . grad phi = int (gamma_0 - gamma_n) grad u0 . grad phi

    over the discrete space selected by ``space``: "dirichlet" (zero trace),
    "mean_zero" (natural condition, zero domain mean) or "periodic" (cell
    mesh with identified sides, zero domain mean).  Either a solved u0 or a
    constant background gradient ``grad0`` drives the right-hand side.
    """
    g0 = gamma_per_triangle(mesh, gamma0)
    gn = gamma_per_triangle(mesh, gamman)
    if u0 is not None:
        if not u0.mesh.compatible_with(mesh):
            raise MismatchedMeshError("u0 lives on a different mesh")
        source = u0.gradient()
    elif grad0 is not None:
        source = np.asarray(grad0, dtype=float)
    else:
        raise ValueError("either u0 or grad0 is required")
    _warn_on_contrast(gn)
    a = assemble_stiffness(mesh, gn)
    b = rhs_from_gradient_source(mesh, g0 - gn, source)
    n = mesh.num_vertices

    if space == "dirichlet":
        free = mesh.interior_mask()
        w = np.zeros(n)
        w[free] = _cg_solve(a[free][:, free], b[free], "perturbation solve")
        return ScalarField(mesh, w)
    if space == "mean_zero":
        w = _solve_singular(a, b, "perturbation solve (mean-zero)")
        mass = lumped_mass(mesh)
        w -= (mass @ w) / mass.sum()
        return ScalarField(mesh, w)
    if space == "periodic":
        if not mesh.periodic_pairs:
            raise MismatchedMeshError("periodic space requires a periodic cell mesh")
        p = _reduce_periodic(mesh)
        ared = (p.T @ a @ p).tocsr()
        bred = p.T @ b
        wred = _solve_singular(ared, bred, "perturbation solve (periodic)")
        w = p @ wred
        mass = lumped_mass(mesh)
        w -= (mass @ w) / mass.sum()
        return ScalarField(mesh, w)
    raise ValueError(f"unsupported space {space!r}")


def energy(mesh: Mesh, gamma: MatrixField, w: ScalarField) -> float:
    """Quadratic form int gamma grad w . grad w, exact for P1 fields."""
    if not w.mesh.compatible_with(mesh):
        raise MismatchedMeshError("field lives on a different mesh")
    areas, _, _ = mesh.geometry()
    gam_tri = gamma_per_triangle(mesh, gamma)
    g = w.gradient()
    return float(np.einsum("t,tx,txy,ty->", areas, g, gam_tri, g))


def energy_functional(mesh: Mesh, gamma0: MatrixField, gamman: MatrixField, u0: ScalarField, w: ScalarField) -> float:
    """The functional whose unique minimizer over the zero-trace space is
    the perturbation field: int gamma_n |grad w + gamma_n^-1 (gamma_n - gamma_0) grad u0|^2."""
    areas, _, _ = mesh.geometry()
    g0 = gamma_per_triangle(mesh, gamma0)
    gn = gamma_per_triangle(mesh, gamman)
    gw = w.gradient()
    gu = u0.gradient()
    shift = np.einsum("txy,ty->tx", gn - g0, gu)
    total = np.einsum("txy,ty->tx", gn, gw) + shift
    # gamma_n (grad w + gamma_n^-1 (gamma_n - gamma_0) grad u0) . (same)
    inv_gn = np.linalg.inv(gn)
    vec = gw + np.einsum("txy,ty->tx", inv_gn, shift)
    return float(np.einsum("t,tx,tx->", areas, total, vec))


def flux_l1(mesh: Mesh, coeff_tri: np.ndarray, w: ScalarField) -> float:
    """L1 norm of coeff grad w (Euclidean norm cellwise, exact for P1)."""
    areas, _, _ = mesh.geometry()
    g = w.gradient()
    flux = np.einsum("txy,ty->tx", coeff_tri, g)
    return float(np.sum(areas * np.linalg.norm(flux, axis=1)))


def l2_norm(field: ScalarField, exact=None) -> float:
    """L2 norm of (field - exact) by mid-edge quadrature, which integrates
    quadratics exactly; ``exact`` is a callable on points or None."""
    mesh = field.mesh
    areas, _, _ = mesh.geometry()
    mids = mesh.edge_midpoints()  # (T, 3, 2)
    vals = field.values[mesh.triangles]  # (T, 3)
    # P1 value at the midpoint opposite vertex i is the mean of the other two
    fmid = np.stack(
        [
            0.5 * (vals[:, 1] + vals[:, 2]),
            0.5 * (vals[:, 2] + vals[:, 0]),
            0.5 * (vals[:, 0] + vals[:, 1]),
        ],
        axis=1,
    )
    if exact is not None:
        pts = mids.reshape(-1, 2)
        fmid = fmid - np.asarray(exact(pts), dtype=float).reshape(fmid.shape)
    return float(np.sqrt(np.sum(areas[:, None] / 3.0 * fmid**2)))


def sup_gradient(mesh: Mesh, field: ScalarField, mask=None) -> float:
    """Max Euclidean gradient norm over triangles (all, or a boolean mask).

    Exact for P1 fields, hence a faithful stand-in for the essential sup
    of |grad u| over the masked region."""
    g = field.gradient()
    norms = np.linalg.norm(g, axis=1)
    if mask is not None:
        norms = norms[mask]
    return float(norms.max())


def galerkin_residual(mesh: Mesh, gamma: MatrixField, u: ScalarField, rhs: np.ndarray | None = None) -> float:
    """Relative residual of the discrete weak form at interior vertices."""
    a = assemble_stiffness(mesh, gamma_per_triangle(mesh, gamma))
    r = a @ u.values - (rhs if rhs is not None else 0.0)
    interior = mesh.interior_mask()
    scale = float(np.abs(a).dot(np.abs(u.values))[interior].max()) + 1e-300
    return float(np.abs(r[interior]).max()) / scale


def consistent_boundary_functional(mesh: Mesh, gamma: MatrixField, u: ScalarField) -> np.ndarray:
    """Nodal boundary flux functional t = A u of a discrete solution.

    Interior entries vanish up to solver tolerance; the boundary rows carry
    the variationally consistent flux of u through the boundary."""
    a = assemble_stiffness(mesh, gamma_per_triangle(mesh, gamma))
    return a @ u.values


def greens_function(
    mesh: Mesh,
    gamma0: MatrixField,
    y,
    kind: str = "dirichlet",
    k_contains=None,
) -> ScalarField:
    """Discrete Green (or Neumann) field for the background operator with a
    unit nodal load at the vertex nearest y.

    The continuous counterpart solves -div(gamma_0 grad G) = delta_y with a
    zero Dirichlet trace, so G grows like -log|x - y| / (2 pi) near y for
    the 2D Laplacian.  The Neumann variant balances the load with a uniform
    boundary flux and is normalized to zero boundary mean.
    """
    y = np.asarray(y, dtype=float)
    if k_contains is not None and bool(k_contains(y.reshape(1, 2))[0]):
        raise ProbePlacementError(f"source point {y} lies inside the safety region K")
    v = mesh.nearest_vertex(y)
    _, _, centroids = mesh.geometry()
    tagged = mesh.region_tag > 0
    if tagged.any():
        dmin = float(np.min(np.linalg.norm(centroids[tagged] - y, axis=1)))
        if dmin < 2.0 * mesh.h:
            raise ProbePlacementError(
                f"source point {y} is {dmin:.3g} from an inclusion triangle (< 2h)"
            )
    gam_tri = gamma_per_triangle(mesh, gamma0)
    a = assemble_stiffness(mesh, gam_tri)
    n = mesh.num_vertices
    e = np.zeros(n)
    e[v] = 1.0

    if kind == "dirichlet":
        free = mesh.interior_mask()
        if not free[v]:
            raise ProbePlacementError("source vertex lies on the boundary")
        g = np.zeros(n)
        g[free] = _cg_solve(a[free][:, free], e[free], "green solve")
        return ScalarField(mesh, g)
    if kind == "neumann":
        bm = boundary_mass(mesh)
        b = e - bm / bm.sum()
        g = _solve_singular(a, b, "neumann green solve")
        g -= (bm @ g) / bm.sum()
        return ScalarField(mesh, g)
    raise ValueError(f"unsupported green function kind {kind!r}")


def solve_neumann_from_dirichlet(mesh: Mesh, gamma: MatrixField, u_dirichlet: ScalarField) -> ScalarField:
    """Re-solve the same problem under Neumann data taken as the consistent
    discrete flux of the Dirichlet solution; agrees with it up to a constant
    and the solver tolerance."""
    t = consistent_boundary_functional(mesh, gamma, u_dirichlet)
    return solve(mesh, gamma, BoundaryData.neumann_functional(t))
