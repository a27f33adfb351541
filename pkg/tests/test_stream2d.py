import math

import numpy as np
import pytest

from contrast_asym.errors import NonzeroFluxError
from contrast_asym.fem import BoundaryData, ScalarField, greens_function, solve, solve_perturbation
from contrast_asym.geometry import DiskInclusion, RadialAnnuli
from contrast_asym.mesh import build_mesh, build_mesh_multi, retag
from contrast_asym.stream2d import (
    boundary_flux,
    dual_gap,
    dual_problem_gap,
    duality_residual,
    flux_through_enclosure,
    outer_boundary_flux,
    stream_function,
)
from contrast_asym.tensors import J2, MatrixField, SymMat, sym_eigvals

G0 = MatrixField(SymMat.identity(2), {})
X1 = BoundaryData.dirichlet(lambda p: p[:, 0])


@pytest.fixture(scope="module")
def disk_case():
    fam = DiskInclusion(rho=0.2, lam0=10.0, lam_exponent=0.0)
    mesh = build_mesh(fam.domain, fam, 2, 0.01)
    gamman = fam.matrix_field(2)
    un = solve(mesh, gamman, X1)
    return fam, mesh, gamman, un


class TestBoundaryFlux:
    def test_outer_flux_of_solution_vanishes(self, disk_case):
        _, mesh, gamman, un = disk_case
        assert abs(outer_boundary_flux(mesh, gamman, un)) < 1e-9

    def test_symmetric_linear_data(self):
        fam = RadialAnnuli()
        mesh = build_mesh(fam.domain, None, 2, 0.08)
        u = solve(mesh, G0, X1)
        assert abs(boundary_flux(mesh, G0, u, "outer")) < 1e-9

    def test_interior_curve_conservation(self, disk_case):
        # flux through any closed interior curve of a source-free solution
        # vanishes exactly; perturbed and unperturbed solves agree there
        _, mesh, gamman, un = disk_case
        r = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
        enclosed = r <= 0.5 + 1e-12
        u0 = solve(mesh, G0, X1)
        fn = flux_through_enclosure(mesh, gamman, un, enclosed)
        f0 = flux_through_enclosure(mesh, G0, u0, enclosed)
        assert abs(fn) < 1e-9 and abs(f0) < 1e-9
        assert abs(fn - f0) < 1e-8

    def test_unit_source_flux(self):
        fam = RadialAnnuli()
        mesh = build_mesh(fam.domain, None, 2, 0.05)
        y = (1.0, 0.0)
        g = greens_function(mesh, G0, y)
        r = np.hypot(mesh.vertices[:, 0] - y[0], mesh.vertices[:, 1] - y[1])
        enclosed = r <= 0.4
        # outward field flux of the unit-load Green field is -1
        assert flux_through_enclosure(mesh, G0, g, enclosed) == pytest.approx(-1.0, abs=1e-9)


class TestStreamFunction:
    def test_harmonic_conjugate_of_x1(self):
        fam = RadialAnnuli()
        mesh = build_mesh(fam.domain, None, 2, 0.08)
        u = solve(mesh, G0, X1)
        psi = stream_function(mesh, G0, u)
        # J grad psi = e1 forces psi = -x2 up to a constant
        target = -mesh.vertices[:, 1]
        target -= target.mean()
        shift = psi.values - target
        assert np.max(np.abs(shift - shift.mean())) < 1e-8
        res, ref = duality_residual(mesh, G0, u, psi)
        assert res / ref < 1e-8

    def test_disk_inclusion_residual(self, disk_case):
        _, mesh, gamman, un = disk_case
        psi = stream_function(mesh, gamman, un)
        res, ref = duality_residual(mesh, gamman, un, psi)
        assert res / ref < 0.03

    def test_solves_dual_problem(self, disk_case):
        _, mesh, gamman, un = disk_case
        psi = stream_function(mesh, gamman, un)
        assert dual_problem_gap(mesh, gamman, psi) < 0.05

    def test_nonzero_flux_rejected(self):
        fam = RadialAnnuli()
        mesh = build_mesh(fam.domain, None, 2, 0.08)
        bad = ScalarField(mesh, mesh.vertices[:, 0] ** 2 + mesh.vertices[:, 1] ** 2)
        with pytest.raises(NonzeroFluxError):
            stream_function(mesh, G0, bad)


class TestRoleSwap:
    def test_dual_contrast_swaps_roles(self):
        # sigma = J^T gamma^-1 J: conductive cells become insulating in the
        # dual problem and vice versa
        from contrast_asym.stream2d import sigma_per_triangle

        gam = np.array([[[100.0, 0.0], [0.0, 100.0]], [[0.01, 0.0], [0.0, 0.01]]])
        sig = sigma_per_triangle(gam)
        assert sym_eigvals(sig[0])[-1] == pytest.approx(0.01)
        assert sym_eigvals(sig[1])[0] == pytest.approx(100.0)


class TestDualGap:
    def test_zero_without_contrast(self):
        fam = RadialAnnuli(alpha=0.0, beta=0.0)
        mesh = build_mesh(fam.domain, fam, 8, 0.05)
        u = solve(mesh, G0, X1)
        psi = stream_function(mesh, G0, u)
        out = dual_gap(mesh, G0, G0_with_tags(fam), psi, psi)
        assert out["gap"] == 0.0

    def test_insulating_annuli_flux_decay_and_mass_ratio(self):
        fam = RadialAnnuli(alpha=0.0, beta=-0.5)
        ns = [8, 16, 32]
        mesh = build_mesh_multi(fam.domain, fam, ns, 0.03)
        m0 = retag(mesh, fam, ns[0])
        u0 = solve(m0, G0, X1)
        psi0 = stream_function(m0, G0, u0)
        _, _, cents = mesh.geometry()
        collar = ~fam.domain.contains(cents, "K") & fam.domain.contains(cents, "domain", margin=0.15)
        fluxes = []
        for n in ns:
            m = retag(mesh, fam, n)
            gamman = fam.matrix_field(n)
            un = solve(m, gamman, X1)
            psin = stream_function(m, gamman, un)
            out = dual_gap(m, G0, gamman, psi0, psin, collar_mask=collar)
            # gamma_0 = I makes the dual and primal contrast masses equal
            assert out["mass_ratio"] == pytest.approx(1.0, abs=1e-10)
            fluxes.append(out["perturbation_flux"])
        assert all(b < a for a, b in zip(fluxes[:-1], fluxes[1:]))


def G0_with_tags(fam):
    # background-everywhere matrix field that still knows the region ids
    return MatrixField(SymMat.identity(2), {1: SymMat.identity(2), 2: SymMat.identity(2)})
