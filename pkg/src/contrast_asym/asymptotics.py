"""First-order representation of the boundary-voltage perturbation and
log-log rate fits for every decay the toolkit certifies.

On one mesh the discrete fields satisfy the exact reciprocity identity

    w_n(y) = int (gamma_0 - gamma_n)(grad u_0 + grad w_n) . grad G_y dx,

where G_y is the discrete Green field with a positive unit nodal load (so
G_y grows like -log|x-y|/(2 pi) near its source).  Splitting the right
side through the density tensors gives the computable first-order term

    leading(y) = -||d_n|| sum_T mu_T  M_ij(T) d_i u_0(T) d_j G_y(T),

and the remainder w_n(y) - leading(y) is the quantity whose decay the
rate harness fits against the contrast mass ||d_n||_L1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchedMeshError, NonpositiveSampleError
from .fem import (
    BoundaryData,
    ScalarField,
    energy,
    flux_l1,
    gamma_per_triangle,
    greens_function,
    l2_norm,
    solve,
    solve_perturbation,
)
from .geometry import InclusionFamily
from .mesh import Mesh, build_mesh_multi, retag
from .polarization import PolarizationRecord, bc_independence, correctors, tensor_densities

BOUNDARY_DATA = {
    "x1": lambda p: p[:, 0],
    "x2": lambda p: p[:, 1],
    "x1x2": lambda p: p[:, 0] * p[:, 1],
    "harmonic2": lambda p: p[:, 0] ** 2 - p[:, 1] ** 2,
}


def reciprocity_value(
    mesh: Mesh,
    gamma0,
    gamman,
    u0: ScalarField,
    wn: ScalarField,
    g_y: ScalarField,
) -> float:
    """Exact same-mesh duality integral reproducing the nodal perturbation.

    Integrand supported on inclusion triangles since the conductivities
    agree elsewhere."""
    for f in (u0, wn, g_y):
        if not f.mesh.compatible_with(mesh):
            raise MismatchedMeshError("all fields must share one mesh")
    idx = mesh.region_tag > 0
    areas, _, _ = mesh.geometry()
    g0 = gamma_per_triangle(mesh, gamma0)[idx]
    gn = gamma_per_triangle(mesh, gamman)[idx]
    total = (u0.gradient() + wn.gradient())[idx]
    gg = g_y.gradient()[idx]
    integrand = np.einsum("kxy,ky,kx->k", g0 - gn, total, gg)
    return float(np.sum(areas[idx] * integrand))


def leading_order(record: PolarizationRecord, u0: ScalarField, g_y: ScalarField, l1_dn: float) -> float:
    """First-order term of the perturbation at the source point of g_y."""
    idx = record.tri_index
    gu = u0.gradient()[idx]
    gg = g_y.gradient()[idx]
    m = record.m_density
    return -l1_dn * float(np.einsum("k,kx,kxy,ky->", record.weights, gu, m, gg))


@dataclass
class RepresentationCheck:
    """One probe point: exact perturbation, duality integral, first-order
    value and remainder."""

    y: tuple
    exact: float
    reciprocity: float
    leading: float

    @property
    def remainder(self) -> float:
        return self.exact - self.leading

    def scaled_remainder(self, l1_dn: float) -> float:
        return abs(self.remainder) / l1_dn

    @property
    def identity_defect(self) -> float:
        return abs(self.exact - self.reciprocity)


def representation_check(
    mesh: Mesh,
    gamma0,
    gamman,
    u0: ScalarField,
    wn: ScalarField,
    record: PolarizationRecord,
    g_y: ScalarField,
    y,
) -> RepresentationCheck:
    exact = wn.at_vertex(y)
    recip = reciprocity_value(mesh, gamma0, gamman, u0, wn, g_y)
    lead = leading_order(record, u0, g_y, record.l1_dn)
    return RepresentationCheck(y=tuple(np.asarray(y, float)), exact=exact, reciprocity=recip, leading=lead)


def fit_rate(samples) -> tuple[float, float, float]:
    """Least-squares line through (log x, log y); returns (slope,
    intercept, max absolute log deviation)."""
    pts = [(float(x), float(y)) for x, y in samples]
    if len(pts) < 3:
        raise NonpositiveSampleError("need at least 3 samples for a rate fit")
    if any(x <= 0.0 or y <= 0.0 for x, y in pts):
        raise NonpositiveSampleError("rate fits need positive samples")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.abs(ly - (slope * lx + intercept)).max())
    return float(slope), float(intercept), residual


@dataclass
class RateTable:
    """Samples of one decaying quantity against the contrast mass."""

    quantity: str
    rows: list  # (n, l1_dn, value)
    slope: float = math.nan
    intercept: float = math.nan
    residual: float = math.nan
    claimed_exponent: float | None = None
    meta: dict = field(default_factory=dict)

    def fit(self) -> "RateTable":
        self.slope, self.intercept, self.residual = fit_rate(
            [(l1, v) for _, l1, v in self.rows if v > 0.0]
        )
        return self

    def values(self):
        return [v for _, _, v in self.rows]

    def decreasing(self, inversions_allowed: int = 1, floor: float = 0.0) -> bool:
        vals = [v for v in self.values() if v > floor]
        bad = sum(1 for a, b in zip(vals[:-1], vals[1:]) if b >= a)
        return bad <= inversions_allowed


QUANTITIES = ("energy", "l2", "linf_remainder", "flux_l1", "bc_gap")


def rate_harness(
    family: InclusionFamily,
    n_list,
    quantity: str,
    h: float,
    g_name: str = "x1",
    probe=(1.7, 0.0),
    claimed_exponent: float | None = None,
    mesh: Mesh | None = None,
) -> RateTable:
    """Compute one decaying quantity along the family and fit its rate
    against the contrast mass.

    The mesh conforms to every n at once and only the region tags change
    with n, so discretization error stays fixed across the study.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    n_list = sorted(int(n) for n in n_list)
    if mesh is None:
        mesh = build_mesh_multi(
            family.domain, family, n_list, h,
            probe_radius=float(np.hypot(*probe)) if quantity == "linf_remainder" else None,
        )
    g = BOUNDARY_DATA[g_name]
    gamma0 = family.background_field()
    base = retag(mesh, family, n_list[0])
    u0 = solve(base, gamma0, BoundaryData.dirichlet(g))
    g_y = None
    if quantity == "linf_remainder":
        g_y = greens_function(base, gamma0, probe, kind="dirichlet")

    rows = []
    for n in n_list:
        tagged = retag(mesh, family, n)
        gamman = family.matrix_field(n)
        l1 = family.l1_dn(n)
        if quantity == "bc_gap":
            val = bc_independence(tagged, gamma0, gamman)
        else:
            wn = solve_perturbation(tagged, gamma0, gamman, u0=ScalarField(tagged, u0.values))
            if quantity == "energy":
                val = energy(tagged, gamman, wn)
            elif quantity == "l2":
                val = l2_norm(wn)
            elif quantity == "flux_l1":
                gn = gamma_per_triangle(tagged, gamman)
                g0t = gamma_per_triangle(tagged, gamma0)
                val = flux_l1(tagged, gn - g0t, wn)
            else:  # linf_remainder
                u0n = ScalarField(tagged, u0.values)
                corr = correctors(tagged, gamma0, gamman)
                record = tensor_densities(tagged, gamma0, gamman, corr, wn=wn)
                gyn = ScalarField(tagged, g_y.values)
                chk = representation_check(tagged, gamma0, gamman, u0n, wn, record, gyn, probe)
                val = abs(chk.remainder)
        rows.append((n, l1, float(val)))

    table = RateTable(quantity=quantity, rows=rows, claimed_exponent=claimed_exponent,
                      meta={"family": family.name, "g": g_name, "h": h})
    try:
        table.fit()
    except NonpositiveSampleError:
        pass  # all-zero quantities (e.g. no contrast) leave nan slopes
    return table
