import math

import numpy as np
import pytest

from contrast_asym.errors import AssumptionViolationError
from contrast_asym.geometry import (
    ConfocalEllipse,
    CustomPolygons,
    DiskInclusion,
    RadialAnnuli,
    Region,
    Strips,
    assumption_report,
    l1_dn,
    polygon_quadrature_l1,
    separation,
    shoelace_area,
    strip_domain,
)
from contrast_asym.tensors import SymMat


class TestContrastMass:
    def test_annuli_no_contrast(self):
        fam = RadialAnnuli(alpha=0.0, beta=0.0)
        n = 8
        shells = math.pi * ((1 - (1 - 1 / n) ** 2) + ((1 + 1 / n) ** 2 - 1))
        assert l1_dn(fam, n) == pytest.approx(2.0 * math.sqrt(2.0) * shells)

    def test_annuli_proportional_to_power_form(self):
        # mass ~ sqrt(d)(n^(a-1) + n^(-a-1) + n^(b-1) + n^(-b-1)) up to the
        # shell-volume constant: the ratio must stabilize
        fam = RadialAnnuli(alpha=0.5, beta=-0.5)
        ratios = []
        for n in (64, 128, 256, 512):
            power = math.sqrt(2) * sum(n**e for e in (-0.5, -1.5, -1.5, -0.5))
            ratios.append(l1_dn(fam, n) / power)
        assert max(ratios) / min(ratios) < 1.01

    def test_disk_value(self):
        fam = DiskInclusion(rho=0.2, lam_exponent=1.0)
        assert l1_dn(fam, 5) == pytest.approx((5 + 0.2) * math.sqrt(2.0) * math.pi * 0.04)

    def test_dimension_3_uses_ball_volumes(self):
        fam = RadialAnnuli(alpha=0.0, beta=0.0, d=3)
        n = 10
        ball = 4.0 * math.pi / 3.0
        vol = ball * ((1 + 1 / n) ** 3 - (1 - 1 / n) ** 3)
        assert fam.l1_dn(n) == pytest.approx(2.0 * math.sqrt(3.0) * vol)

    def test_decreasing_in_n(self):
        for fam in (
            RadialAnnuli(alpha=0.5, beta=-0.5),
            Strips(eps=0.5),
            ConfocalEllipse(q=0.5),
        ):
            vals = [l1_dn(fam, n) for n in (8, 16, 32, 64, 128)]
            assert all(b < a for a, b in zip(vals[:-1], vals[1:]))


class TestSeparation:
    def test_strips_window(self):
        fam = Strips(eps=0.5)
        for n in (4, 8, 16, 64):
            s = separation(fam, n)
            assert 1.0 / (4 * n) <= s <= 1.0 / (2 * n)

    def test_annuli_touching(self):
        assert separation(RadialAnnuli(alpha=0.5, beta=-0.5), 8) == 0.0

    def test_empty_part_vacuous(self):
        assert separation(DiskInclusion(lam_exponent=1.0), 4) == math.inf

    def test_strips_scalings(self):
        fam = Strips(eps=0.5)
        ns = [8, 16, 32, 64]
        seps = [separation(fam, n) for n in ns]
        l1a = [fam.l1_dn_part(n, "A") for n in ns]
        s_slope = np.polyfit(np.log(ns), np.log(seps), 1)[0]
        a_slope = np.polyfit(np.log(ns), np.log(l1a), 1)[0]
        assert s_slope == pytest.approx(-1.0, abs=0.1)
        assert a_slope == pytest.approx(-1.5, abs=0.1)

    def test_strips_intertwining_exponent(self):
        # log(separation)/log(mass on conductive strips) < 1/(d-1) = 1;
        # at n = 4 the finite-n constants push the witness to 1.15, so the
        # separation alternative only engages from n = 8 on
        fam = Strips(eps=0.5)
        for n in range(8, 65, 8):
            wit = math.log(separation(fam, n)) / math.log(fam.l1_dn_part(n, "A"))
            assert wit < 1.0


class TestAssumptionReport:
    def test_strips_pass_with_4c(self):
        rep = assumption_report(Strips(eps=0.5), [16, 32, 64], p=2.0, tau=0.9)
        assert rep.a1_pass and rep.a2_pass and rep.a3_pass
        assert "4c" in rep.a4_satisfied_by
        assert rep.all_pass()

    def test_strips_small_n_separation_margin_negative(self):
        # at n <= 8 the 4c inequality fails on constants: the report says so
        rep = assumption_report(Strips(eps=0.5), [4, 8, 16], p=2.0, tau=0.9)
        assert rep.a4c_margin[0] < 0
        assert not rep.a4c_pass

    def test_growing_mass_fails(self):
        rep = assumption_report(RadialAnnuli(alpha=1.5, beta=0.0), [8, 16, 32], p=2.0, tau=0.9)
        assert not rep.a2_pass

    def test_annuli_window_exceeds_unit_mass(self):
        rep = assumption_report(RadialAnnuli(alpha=0.5, beta=-0.5), [8, 16, 32], p=2.0, tau=0.9)
        assert not all(rep.a2_per_n_small)
        assert rep.a2_decreasing

    def test_overlap_raises_or_reports(self):
        ann = Region("A", "annulus", (0.9, 1.1), SymMat.iso(4.0, 2), 1)
        same = Region("B", "annulus", (0.9, 1.1), SymMat.iso(0.2, 2), 2)

        class Bad(RadialAnnuli):
            def regions(self, n):
                return [ann, same]

        bad = Bad(alpha=0.5, beta=-0.5)
        with pytest.raises(AssumptionViolationError):
            assumption_report(bad, [8], p=2.0, tau=0.9)
        rep = assumption_report(bad, [8], p=2.0, tau=0.9, audit=True)
        assert not rep.a3_pass and rep.violations

    def test_containment_margin_positive(self):
        rep = assumption_report(RadialAnnuli(alpha=0.5, beta=-0.5), [8, 16], p=2.0, tau=0.9)
        assert rep.a1_pass and rep.dist_to_k > 0.05
        assert rep.dist_to_boundary > 0.5

    def test_monotone_per_n_verdicts(self):
        fam = Strips(eps=0.5)
        small = assumption_report(fam, [16, 32], p=2.0, tau=0.9)
        big = assumption_report(fam, [16, 32, 64], p=2.0, tau=0.9)
        assert small.a2_per_n_small == big.a2_per_n_small[:2]
        assert small.a4c_margin == big.a4c_margin[:2]
        assert small.separations == big.separations[:2]


class TestCustomPolygons:
    def _square(self, cx, cy, s):
        return np.array([[cx - s, cy - s], [cx + s, cy - s], [cx + s, cy + s], [cx - s, cy + s]])

    def test_area_and_mass(self):
        sq = self._square(0.0, 0.0, 0.1)
        fam = CustomPolygons(
            {4: [("A", sq, SymMat.iso(3.0, 2))]},
            domain=strip_domain(),
        )
        assert shoelace_area(sq) == pytest.approx(0.04)
        assert l1_dn(fam, 4) == pytest.approx(math.sqrt(2) * (3 + 1 / 3) * 0.04)

    def test_quadrature_matches_constant(self):
        sq = self._square(0.2, 0.3, 0.05)
        reg = Region("A", "polygon", (sq,), SymMat.iso(2.0, 2), 1)
        exact = reg.l1_dn(SymMat.identity(2))
        quad = polygon_quadrature_l1(reg, SymMat.identity(2), lambda x: SymMat.iso(2.0, 2))
        assert quad == pytest.approx(exact, rel=1e-12)

    def test_quadrature_smooth_coefficient(self):
        sq = self._square(0.0, 0.0, 0.5)
        reg = Region("A", "polygon", (sq,), SymMat.iso(2.0, 2), 1)
        # gamma_n = (2 + x^2) I: d = (g + 1/g) I, integrate numerically vs
        # a fine reference grid
        gam = lambda x: SymMat.iso(2.0 + x[0] ** 2, 2)
        approx = polygon_quadrature_l1(reg, SymMat.identity(2), gam, levels=4)
        xs = np.linspace(-0.5, 0.5, 801)
        vals = math.sqrt(2) * ((2 + xs**2) + 1.0 / (2 + xs**2))
        ref = np.trapezoid(vals, xs) * 1.0
        assert approx == pytest.approx(ref, rel=1e-4)

    def test_missing_n(self):
        fam = CustomPolygons({2: []}, domain=strip_domain())
        with pytest.raises(AssumptionViolationError):
            fam.regions(3)
