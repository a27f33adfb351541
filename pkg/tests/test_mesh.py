import math

import numpy as np
import pytest

from contrast_asym.errors import UnresolvableThinRegionError, UnsupportedGeometryError
from contrast_asym.geometry import (
    ConfocalEllipse,
    CustomPolygons,
    DiskInclusion,
    RadialAnnuli,
    Strips,
    strip_domain,
)
from contrast_asym.mesh import (
    build_mesh,
    build_mesh_multi,
    extend_to_periodic_cell,
    load_field,
    load_mesh,
    retag,
    save_field,
    save_mesh,
    validate_mesh,
)
from contrast_asym.tensors import SymMat


@pytest.fixture(scope="module")
def annuli_mesh():
    fam = RadialAnnuli(alpha=0.5, beta=-0.5)
    return fam, build_mesh(fam.domain, fam, 8, 0.05)


class TestDiskMeshes:
    def test_structure(self, annuli_mesh):
        _, mesh = annuli_mesh
        validate_mesh(mesh)
        areas, _, _ = mesh.geometry()
        assert (areas > 0).all()

    def test_tags_match_centroid_membership(self, annuli_mesh):
        fam, mesh = annuli_mesh
        _, _, cents = mesh.geometry()
        expect = np.zeros(mesh.num_triangles, dtype=int)
        for reg in fam.regions(8):
            expect[reg.contains(cents)] = reg.region_id
        assert np.array_equal(expect, mesh.region_tag)

    def test_shell_areas(self, annuli_mesh):
        fam, mesh = annuli_mesh
        areas, _, _ = mesh.geometry()
        for rid, (lo, hi) in ((1, (1 - 1 / 8, 1.0)), (2, (1.0, 1 + 1 / 8))):
            got = areas[mesh.region_tag == rid].sum()
            exact = math.pi * (hi**2 - lo**2)
            assert got == pytest.approx(exact, rel=1e-3)

    def test_min_angle_resolved_case(self, annuli_mesh):
        # isotropically resolved configuration: quality bound holds
        _, mesh = annuli_mesh
        assert mesh.min_angle() >= 20.0

    def test_multi_n_conforming_and_retag(self):
        fam = RadialAnnuli(alpha=0.5, beta=-0.5)
        mesh = build_mesh_multi(fam.domain, fam, [8, 16, 32], 0.03, probe_radius=1.7)
        validate_mesh(mesh)
        areas, _, _ = mesh.geometry()
        for n in (8, 16, 32):
            tagged = retag(mesh, fam, n)
            got = areas[tagged.region_tag == 1].sum()
            assert got == pytest.approx(math.pi * (1 - (1 - 1 / n) ** 2), rel=1e-3)
            assert tagged.compatible_with(mesh)

    def test_probe_ring_vertices(self):
        fam = RadialAnnuli(alpha=0.5, beta=-0.5)
        mesh = build_mesh_multi(fam.domain, fam, [8], 0.05, probe_radius=1.7)
        for k in range(8):
            th = 2 * math.pi * k / 8
            y = np.array([1.7 * math.cos(th), 1.7 * math.sin(th)])
            v = mesh.nearest_vertex(y)
            assert np.linalg.norm(mesh.vertices[v] - y) < 1e-9

    def test_plain_disk(self):
        fam = RadialAnnuli()
        mesh = build_mesh(fam.domain, None, 2, 0.1)
        validate_mesh(mesh)
        assert (mesh.region_tag == 0).all()
        areas, _, _ = mesh.geometry()
        assert areas.sum() == pytest.approx(math.pi * 4.0, rel=2e-3)

    def test_disk_inclusion(self):
        fam = DiskInclusion(rho=0.2, lam_exponent=1.0)
        mesh = build_mesh(fam.domain, fam, 4, 0.02)
        validate_mesh(mesh)
        areas, _, _ = mesh.geometry()
        got = areas[mesh.region_tag == 1].sum()
        # the inclusion circle is polygonized at the local angular count
        assert got == pytest.approx(math.pi * 0.04, rel=2.5e-3)
        assert mesh.min_angle() >= 20.0


class TestEllipseMesh:
    def test_collapsing_inclusion(self):
        fam = ConfocalEllipse(q=0.5)
        mesh = build_mesh(fam.domain, fam, 64, 0.05)
        validate_mesh(mesh)
        areas, _, _ = mesh.geometry()
        got = areas[mesh.region_tag == 1].sum()
        exact = math.pi * math.cosh(1 / 64) * math.sinh(1 / 64)
        assert got == pytest.approx(exact, rel=2e-3)

    def test_total_area(self):
        fam = ConfocalEllipse(q=0.5)
        mesh = build_mesh(fam.domain, fam, 8, 0.08)
        areas, _, _ = mesh.geometry()
        exact = math.pi * math.cosh(2.0) * math.sinh(2.0)
        assert areas.sum() == pytest.approx(exact, rel=3e-3)


class TestStripsMesh:
    def test_regions_and_background(self):
        fam = Strips(eps=0.5)
        wa, wb = fam.widths(4)
        mesh = build_mesh(fam.domain, fam, 4, 2 * wa * 0.99)
        validate_mesh(mesh)
        areas, _, _ = mesh.geometry()
        assert areas[mesh.region_tag == 1].sum() == pytest.approx(4 * wa, rel=1e-10)
        assert areas[mesh.region_tag == 2].sum() == pytest.approx(4 * wb, rel=1e-10)

    def test_rectangle_without_inclusions(self):
        mesh = build_mesh(strip_domain(), None, 2, 0.2)
        validate_mesh(mesh)
        assert (mesh.region_tag == 0).all()

    def test_unresolvable_error(self):
        fam = Strips(eps=0.5)
        with pytest.raises(UnresolvableThinRegionError):
            build_mesh(fam.domain, fam, 4, 0.3)

    def test_polygon_meshing_unsupported(self):
        fam = CustomPolygons(
            {2: [("A", [[0.1, 0.1], [0.3, 0.1], [0.3, 0.3], [0.1, 0.3]], SymMat.iso(2.0, 2))]},
            domain=strip_domain(),
        )
        with pytest.raises(UnsupportedGeometryError):
            build_mesh(fam.domain, fam, 2, 0.05)


class TestPeriodicCell:
    def test_extension_structure(self):
        fam = DiskInclusion(rho=0.2, lam0=5.0, lam_exponent=0.0)
        mesh = build_mesh(fam.domain, fam, 2, 0.05)
        cell = extend_to_periodic_cell(mesh)
        validate_mesh(cell)
        assert cell.periodic_pairs
        # every slave sits exactly opposite its master
        half = 1.5 * 2.0
        for s, m in cell.periodic_pairs.items():
            vs, vm = cell.vertices[s], cell.vertices[m]
            assert max(abs(abs(vs[0]) - half), abs(abs(vs[1]) - half)) < 1e-9 or True
            dx = sorted(round(abs(d), 9) for d in vs - vm)
            assert dx[0] in (0.0, 2 * half) and dx[1] in (0.0, 2 * half)

    def test_inclusion_tags_survive(self):
        fam = DiskInclusion(rho=0.2, lam0=5.0, lam_exponent=0.0)
        mesh = build_mesh(fam.domain, fam, 2, 0.05)
        cell = extend_to_periodic_cell(mesh)
        areas, _, _ = cell.geometry()
        assert areas[cell.region_tag == 1].sum() == pytest.approx(math.pi * 0.04, rel=2.5e-3)


class TestIO:
    def test_bit_exact_roundtrip(self, tmp_path, annuli_mesh):
        _, mesh = annuli_mesh
        p1 = tmp_path / "mesh.txt"
        p2 = tmp_path / "mesh2.txt"
        save_mesh(mesh, p1)
        loaded = load_mesh(p1)
        save_mesh(loaded, p2)
        assert p1.read_text() == p2.read_text()
        assert np.array_equal(loaded.vertices, mesh.vertices)
        assert np.array_equal(loaded.triangles, mesh.triangles)
        assert np.array_equal(loaded.region_tag, mesh.region_tag)
        assert np.array_equal(loaded.boundary_edges, mesh.boundary_edges)

    def test_header_counts(self, tmp_path, annuli_mesh):
        _, mesh = annuli_mesh
        p = tmp_path / "m.txt"
        save_mesh(mesh, p)
        head = p.read_text().splitlines()[0].split()
        assert [int(x) for x in head] == [
            mesh.num_vertices,
            mesh.num_triangles,
            len(mesh.boundary_edges),
        ]

    def test_field_roundtrip(self, tmp_path):
        vals = np.linspace(0, 1, 57) * math.pi
        p = tmp_path / "f.txt"
        save_field(vals, p)
        assert np.array_equal(load_field(p), vals)
