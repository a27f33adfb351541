"""Interface-conforming triangulations for the toolkit's domains.

Generators are mapped structured grids:

* disks: a tan-spaced square core patch surrounded by circular rings, so
  no small-apex fan appears at the centre; ring radii conform to every
  requested interface radius;
* confocal ellipses: tensor grids in elliptic coordinates whose xi = 0
  line (the focal segment) is merged vertex-by-vertex, giving a conforming
  mesh of the full ellipse with the collapsing inclusion resolved;
* rectangles: graded tensor grids whose x-lines snap to strip boundaries.

Cells inside collapsing inclusion bands are anisotropic by construction
(thin in the collapsing direction); elsewhere the generators keep cells
near-isotropic.  Meshes are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnresolvableThinRegionError, UnsupportedGeometryError
from .geometry import (
    ConfocalEllipse,
    DiskInclusion,
    Domain2D,
    InclusionFamily,
    RadialAnnuli,
    Strips,
)


@dataclass
class Mesh:
    """Conforming triangulation with region and boundary tags.

    region_tag: 0 for background, otherwise the region id of the inclusion
    part covering the triangle.  boundary_tag indexes the boundary
    component (0 for the single outer component of our domains).
    periodic_pairs maps slave vertex -> master vertex for periodic cell
    meshes, empty otherwise.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    region_tag: np.ndarray
    boundary_edges: np.ndarray
    boundary_tag: np.ndarray
    h: float
    periodic_pairs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.region_tag = np.ascontiguousarray(self.region_tag, dtype=np.int64)
        self.boundary_edges = np.ascontiguousarray(self.boundary_edges, dtype=np.int64)
        self.boundary_tag = np.ascontiguousarray(self.boundary_tag, dtype=np.int64)
        self._fix_orientation()
        for arr in (self.vertices, self.triangles, self.region_tag, self.boundary_edges, self.boundary_tag):
            arr.flags.writeable = False
        self._geometry_cache = None

    def _fix_orientation(self):
        v = self.vertices
        t = self.triangles
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        flip = det < 0
        if flip.any():
            t = t.copy()
            t[flip] = t[flip][:, [0, 2, 1]]
            self.triangles = t

    # -- cached geometry -------------------------------------------------
    def geometry(self):
        """(areas, grads, centroids): P1 basis gradients are constant per
        triangle; grads has shape (T, 3, 2)."""
        if self._geometry_cache is None:
            v = self.vertices
            t = self.triangles
            p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
            e1 = p1 - p0
            e2 = p2 - p0
            det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
            areas = 0.5 * det
            # grad of barycentric basis: rotate opposite edges
            g = np.empty((len(t), 3, 2))
            for i, (a, b) in enumerate(((1, 2), (2, 0), (0, 1))):
                edge = v[t[:, b]] - v[t[:, a]]
                g[:, i, 0] = -edge[:, 1]
                g[:, i, 1] = edge[:, 0]
            g /= det[:, None, None]
            centroids = (p0 + p1 + p2) / 3.0
            self._geometry_cache = (areas, g, centroids)
        return self._geometry_cache

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.num_vertices, dtype=bool)
        mask[np.unique(self.boundary_edges)] = False
        return mask

    def edge_midpoints(self):
        """Midpoints of the three edges of each triangle, shape (T, 3, 2)."""
        v = self.vertices
        t = self.triangles
        return np.stack(
            [
                0.5 * (v[t[:, 1]] + v[t[:, 2]]),
                0.5 * (v[t[:, 2]] + v[t[:, 0]]),
                0.5 * (v[t[:, 0]] + v[t[:, 1]]),
            ],
            axis=1,
        )

    def min_angle(self) -> float:
        v = self.vertices
        t = self.triangles
        worst = math.inf
        p = [v[t[:, i]] for i in range(3)]
        for i in range(3):
            a = p[(i + 1) % 3] - p[i]
            b = p[(i + 2) % 3] - p[i]
            cosang = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
            worst = min(worst, float(ang.min()))
        return worst

    def nearest_vertex(self, point) -> int:
        p = np.asarray(point, dtype=float)
        return int(np.argmin(np.sum((self.vertices - p) ** 2, axis=1)))

    def compatible_with(self, other: "Mesh") -> bool:
        """True when both meshes share the same geometry arrays (retagging
        preserves compatibility; fields transfer verbatim)."""
        return self is other or (
            self.vertices is other.vertices and self.triangles is other.triangles
        )


def validate_mesh(mesh: Mesh) -> None:
    """Structural audit: positive areas, two triangles per interior edge,
    boundary edges matching single-triangle edges."""
    areas, _, _ = mesh.geometry()
    if not (areas > 0).all():
        raise AssertionError("non-positive triangle area")
    from collections import defaultdict

    count = defaultdict(int)
    for tri in mesh.triangles:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            count[frozenset((int(tri[a]), int(tri[b])))] += 1
    bad = [k for k, c in count.items() if c > 2]
    if bad:
        raise AssertionError(f"{len(bad)} edges shared by >2 triangles")
    boundary = {k for k, c in count.items() if c == 1}
    declared = {frozenset((int(a), int(b))) for a, b in mesh.boundary_edges}
    if boundary != declared:
        raise AssertionError(
            f"boundary mismatch: {len(boundary)} single-triangle edges vs "
            f"{len(declared)} declared"
        )


# ---------------------------------------------------------------------------
# Disk meshes: square core + circular rings


def _round_mult(x: float, mult: int, lo: int, hi: int) -> int:
    n = int(mult * max(1, round(x / mult)))
    return max(lo, min(hi, n))


FAN_POINTS = 16  # 2 pi / 16 = 22.5 deg apex angle at the centre fan


def disk_mesh(
    outer_radius: float,
    conforming_radii,
    h: float,
    min_layers: dict | None = None,
) -> Mesh:
    """Disk triangulation whose rings include every conforming radius.

    A 16-point fan sits at the centre; the per-ring angular count doubles
    outward whenever the arc length outgrows the local radial spacing, up
    to the count needed for arc ~ h near the unit circle.  Between
    conforming radii the radial spacing grows geometrically but never
    beyond h (and never beyond a third of the radius, which keeps cells
    shape-regular through the doublings).  min_layers maps a band
    (r_lo, r_hi) between consecutive conforming radii to a minimum
    subdivision count, used to put >= 2 layers inside inclusion shells.
    """
    R = float(outer_radius)
    conf = sorted({float(r) for r in conforming_radii if 0.0 < r < R} | {R})
    min_layers = min_layers or {}

    n_target = FAN_POINTS
    while n_target * h < 2.0 * math.pi * 1.0 and n_target < 2048:
        n_target *= 2

    # ring radii: graded fill between conforming radii
    r_fan = min(0.35 * conf[0], 0.2 * R)
    radii = [r_fan]
    prev = r_fan
    for target in conf:
        forced = None
        for (lo, hi), k in min_layers.items():
            if abs(lo - prev) < 1e-12 and abs(hi - target) < 1e-12:
                forced = k
        if forced is not None:
            nsub = max(forced, int(math.ceil((target - prev) / h)))
            radii.extend(prev + (target - prev) * s / nsub for s in range(1, nsub + 1))
        else:
            pos = prev
            while True:
                step = min(h, 0.30 * pos)
                if pos + 1.5 * step >= target:
                    break
                pos += step
                radii.append(pos)
            # even out the final stretch
            rest = target - pos
            k = max(1, int(math.ceil(rest / min(h, 0.30 * pos))))
            radii.extend(pos + rest * s / k for s in range(1, k + 1))
        prev = target

    # per-ring angular counts: at most one doubling per ring, none on the
    # fan ring itself
    counts = [FAN_POINTS]
    n_cur = FAN_POINTS
    for i, r in enumerate(radii[1:], start=1):
        step_here = radii[min(i + 1, len(radii) - 1)] - radii[max(i - 1, 0)]
        step_here = max(step_here / 2.0, 1e-12)
        if n_cur < n_target and 2.0 * math.pi * r / n_cur > 1.4 * min(step_here, h):
            n_cur *= 2
        counts.append(n_cur)

    def ring_points(r, n):
        t = 2.0 * math.pi * np.arange(n) / n
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    verts = [(0.0, 0.0)]
    tris = []
    first = ring_points(radii[0], counts[0])
    ring_prev = list(range(1, 1 + counts[0]))
    verts.extend(map(tuple, first))
    for k in range(counts[0]):
        tris.append((0, ring_prev[k], ring_prev[(k + 1) % counts[0]]))

    for r, n in zip(radii[1:], counts[1:]):
        n_prev = len(ring_prev)
        start = len(verts)
        verts.extend(map(tuple, ring_points(r, n)))
        ring_new = list(range(start, start + n))
        if n == n_prev:
            for k in range(n):
                k2 = (k + 1) % n
                tris.append((ring_prev[k], ring_new[k], ring_new[k2]))
                tris.append((ring_prev[k], ring_new[k2], ring_prev[k2]))
        elif n == 2 * n_prev:
            for k in range(n_prev):
                k2 = (k + 1) % n_prev
                tris.append((ring_prev[k], ring_new[2 * k], ring_new[2 * k + 1]))
                tris.append((ring_prev[k], ring_new[2 * k + 1], ring_prev[k2]))
                tris.append((ring_prev[k2], ring_new[2 * k + 1], ring_new[(2 * k + 2) % n]))
        else:  # unreachable by construction
            raise AssertionError("ring counts may only double")
        ring_prev = ring_new

    ntheta = len(ring_prev)
    boundary_edges = [(ring_prev[k], ring_prev[(k + 1) % ntheta]) for k in range(ntheta)]
    vertices = np.asarray(verts, dtype=float)
    triangles = np.asarray(tris, dtype=np.int64)
    region = np.zeros(len(triangles), dtype=np.int64)
    mesh = Mesh(
        vertices,
        triangles,
        region,
        np.asarray(boundary_edges, dtype=np.int64),
        np.zeros(len(boundary_edges), dtype=np.int64),
        h,
    )
    return mesh


# ---------------------------------------------------------------------------
# Confocal ellipse meshes


def ellipse_mesh(xi_outer: float, conforming_xi, h: float, inner_layers: int = 2) -> Mesh:
    """Triangulation of the confocal ellipse xi <= xi_outer (foci +-1).

    The xi = 0 coordinate line degenerates to the focal segment; grid
    vertices on it are merged pairwise (eta and 2 pi - eta give the same
    point), which yields a conforming mesh across the segment.  Every
    conforming xi value becomes a grid line.
    """
    conf = sorted({float(x) for x in conforming_xi if 0.0 < x < xi_outer} | {xi_outer})
    finest = min(conf[0] / inner_layers, h)
    neta = _round_mult(2.0 * math.pi / max(finest, h / 4.0), 4, 32, 1024)

    # xi levels: uniformly split [0, first interface], then geometric growth
    # capped near 2.5 angular steps so cells stay shape-regular (elliptic
    # coordinates are conformal, so the (xi, eta) aspect is the physical one)
    step_cap = 2.5 * (2.0 * math.pi / neta)
    levels = [conf[0] * i / inner_layers for i in range(inner_layers + 1)]
    prev = conf[0]
    for target in conf[1:]:
        step = levels[-1] - levels[-2]
        pos = prev
        while pos + step * 1.6 < target:
            step = min(step * 1.6, step_cap)
            pos += step
            levels.append(pos)
        levels.append(target)
        prev = target

    eta = 2.0 * math.pi * np.arange(neta) / neta
    verts = []
    vid_of = {}

    def add_level(xi):
        ids = np.empty(neta, dtype=np.int64)
        if xi == 0.0:
            for k in range(neta):
                kk = min(k, neta - k)  # merge eta and 2pi - eta
                key = (0, kk)
                if key not in vid_of:
                    vid_of[key] = len(verts)
                    verts.append((math.cos(2.0 * math.pi * kk / neta), 0.0))
                ids[k] = vid_of[key]
            return ids
        cxi, sxi = math.cosh(xi), math.sinh(xi)
        base = len(verts)
        verts.extend(zip(cxi * np.cos(eta), sxi * np.sin(eta)))
        return np.arange(base, base + neta, dtype=np.int64)

    ring_prev = add_level(0.0)
    tris = []

    def tri_area(i, j, k):
        (x0, y0), (x1, y1), (x2, y2) = verts[i], verts[j], verts[k]
        return abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))

    for xi in levels[1:]:
        ring_new = add_level(xi)
        for k in range(neta):
            k2 = (k + 1) % neta
            quad = (ring_prev[k], ring_new[k], ring_new[k2], ring_prev[k2])
            # pick the diagonal that avoids degenerate splits (quads next
            # to the focal segment have three collinear corners one way)
            a_first = min(tri_area(quad[0], quad[1], quad[2]), tri_area(quad[0], quad[2], quad[3]))
            a_second = min(tri_area(quad[1], quad[2], quad[3]), tri_area(quad[1], quad[3], quad[0]))
            if a_first >= a_second:
                tris.append((quad[0], quad[1], quad[2]))
                tris.append((quad[0], quad[2], quad[3]))
            else:
                tris.append((quad[1], quad[2], quad[3]))
                tris.append((quad[1], quad[3], quad[0]))
        ring_prev = ring_new

    boundary_edges = [(int(ring_prev[k]), int(ring_prev[(k + 1) % neta])) for k in range(neta)]
    vertices = np.asarray(verts, dtype=float)
    triangles = np.asarray(tris, dtype=np.int64)
    region = np.zeros(len(triangles), dtype=np.int64)
    return Mesh(
        vertices,
        triangles,
        region,
        np.asarray(boundary_edges, dtype=np.int64),
        np.zeros(len(boundary_edges), dtype=np.int64),
        h,
    )


# ---------------------------------------------------------------------------
# Rectangle / strips meshes


def _fill_lines(breaks, spans_fine, h, h_coarse):
    """1D grid: mandatory break coordinates, spacing <= h inside fine spans
    and <= h_coarse elsewhere."""
    breaks = sorted(set(breaks))
    out = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (a + b)
        local = h if any(lo <= mid <= hi for lo, hi in spans_fine) else h_coarse
        nsub = max(1, int(math.ceil((b - a) / local - 1e-9)))
        out.extend(a + (b - a) * i / nsub for i in range(nsub))
    out.append(breaks[-1])
    return np.asarray(out)


def rect_mesh(x_lines, y_lines) -> Mesh:
    xs = np.asarray(sorted(set(float(x) for x in x_lines)))
    ys = np.asarray(sorted(set(float(y) for y in y_lines)))
    nx, ny = len(xs), len(ys)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return i * ny + j

    tris = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    edges = []
    for i in range(nx - 1):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        edges.append((vid(i, ny - 1), vid(i + 1, ny - 1)))
    for j in range(ny - 1):
        edges.append((vid(0, j), vid(0, j + 1)))
        edges.append((vid(nx - 1, j), vid(nx - 1, j + 1)))
    triangles = np.asarray(tris, dtype=np.int64)
    return Mesh(
        verts,
        triangles,
        np.zeros(len(triangles), dtype=np.int64),
        np.asarray(edges, dtype=np.int64),
        np.zeros(len(edges), dtype=np.int64),
        float(np.diff(xs).max()),
    )


# ---------------------------------------------------------------------------
# Family dispatch


def retag(mesh: Mesh, family: InclusionFamily, n: int) -> Mesh:
    """New mesh object sharing geometry, with region tags recomputed for
    parameter n by centroid membership (interfaces must be mesh lines)."""
    _, _, centroids = mesh.geometry()
    tags = np.zeros(mesh.num_triangles, dtype=np.int64)
    for reg in family.regions(n):
        inside = reg.contains(centroids)
        tags[inside] = reg.region_id
    out = Mesh(
        mesh.vertices,
        mesh.triangles,
        tags,
        mesh.boundary_edges,
        mesh.boundary_tag,
        mesh.h,
        dict(mesh.periodic_pairs),
    )
    return out


def build_mesh(domain: Domain2D, family: InclusionFamily | None, n: int, h: float) -> Mesh:
    """Interface-conforming mesh for one family parameter n."""
    return build_mesh_multi(domain, family, [n] if family is not None else [], h, tag_n=n)


def build_mesh_multi(
    domain: Domain2D,
    family: InclusionFamily | None,
    n_list,
    h: float,
    tag_n: int | None = None,
    probe_radius: float | None = None,
) -> Mesh:
    """Mesh conforming to the interfaces of every n in n_list at once,
    tagged for tag_n (default: the largest n).

    Keeping one mesh across a rate study separates discretization error
    from the asymptotic trend.
    """
    n_list = sorted(int(n) for n in n_list)
    tag_n = tag_n if tag_n is not None else (n_list[-1] if n_list else None)

    if family is None:
        if domain.kind == "disk":
            conf = {probe_radius} if probe_radius else set()
            mesh = disk_mesh(domain.params[2], conf, h)
        elif domain.kind == "rectangle":
            x0, y0, x1, y1 = domain.params
            xs = _fill_lines([x0, x1], [(x0, x1)], h, h)
            ys = _fill_lines([y0, y1], [(y0, y1)], h, h)
            mesh = rect_mesh(xs, ys)
        else:
            raise UnsupportedGeometryError(f"no plain mesh generator for {domain.kind}")
        return mesh

    if isinstance(family, (RadialAnnuli, DiskInclusion)):
        if domain.kind != "disk":
            raise UnsupportedGeometryError("radial families need a disk domain")
        R = domain.params[2]
        conf = set()
        min_layers = {}
        if isinstance(family, RadialAnnuli):
            for n in n_list:
                conf |= {1.0 - 1.0 / n, 1.0, 1.0 + 1.0 / n}
            if 1.0 / max(n_list) < h / 2.0:
                raise UnresolvableThinRegionError(
                    f"shell width {1.0 / max(n_list):g} thinner than h/2 = {h / 2:g}"
                )
            # at least 2 layers inside every band of the finest shells
            band = sorted(conf)
            lo0, hi0 = 1.0 - 1.0 / min(n_list), 1.0 + 1.0 / min(n_list)
            for lo, hi in zip(band[:-1], band[1:]):
                if lo >= lo0 - 1e-12 and hi <= hi0 + 1e-12:
                    min_layers[(lo, hi)] = 2
        else:
            if family.center != (0.0, 0.0):
                raise UnsupportedGeometryError("disk inclusion meshes require a centred inclusion")
            for n in n_list:
                rho = family.radius(n)
                if rho < h / 2.0:
                    raise UnresolvableThinRegionError(f"inclusion radius {rho:g} thinner than h/2")
                conf.add(rho)
        if probe_radius:
            conf.add(probe_radius)
        mesh = disk_mesh(R, conf, h, min_layers)
    elif isinstance(family, ConfocalEllipse):
        mesh = ellipse_mesh(2.0, {1.0 / n for n in n_list}, h)
    elif isinstance(family, Strips):
        wa, wb = family.widths(tag_n)
        if min(wa, wb) < h / 2.0:
            raise UnresolvableThinRegionError(
                f"strip width {min(wa, wb):g} thinner than h/2 = {h / 2:g}"
            )
        x0, y0, x1, y1 = domain.params
        breaks = {x0, 0.0, 1.0, x1}
        for reg in family.regions(tag_n):
            breaks |= {reg.params[0], 0.5 * (reg.params[0] + reg.params[1]), reg.params[1]}
        xs = _fill_lines(sorted(breaks), [(0.0, 1.0)], h, 4.0 * h)
        ys = _fill_lines([y0, 0.0, 1.0, y1], [(0.0, 1.0)], 2.0 * h, 4.0 * h)
        mesh = rect_mesh(xs, ys)
    else:
        raise UnsupportedGeometryError(
            f"no mesh generator for family {type(family).__name__} on {domain.kind}"
        )

    if family is not None and tag_n is not None:
        mesh = retag(mesh, family, tag_n)
    return mesh


# ---------------------------------------------------------------------------
# Periodic cell extension


def extend_to_periodic_cell(mesh: Mesh, scale: float = 1.5) -> Mesh:
    """Embed a disk mesh into its bounding square scaled by ``scale`` and
    identify opposite sides, producing a periodic cell mesh.

    The outer boundary ring must be a circle sampled at angles 2 pi k / N
    with N a multiple of 8 (disk_mesh guarantees this); blended rings
    interpolate from the circle to the square so corners land on grid
    vertices.
    """
    bidx = _ordered_boundary_loop(mesh)
    pts = mesh.vertices[bidx]
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if radii.std() > 1e-9 * radii.mean():
        raise UnsupportedGeometryError("periodic extension expects a circular outer boundary")
    R = float(radii.mean())
    N = len(bidx)
    if N % 8 != 0:
        raise UnsupportedGeometryError("outer ring size must be a multiple of 8")
    # order by angle
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    order = np.argsort(np.mod(ang, 2.0 * math.pi))
    ring = [int(bidx[i]) for i in order]
    half = scale * R

    thetas = 2.0 * math.pi * np.arange(N) / N
    rsq = half / np.maximum(np.abs(np.cos(thetas)), np.abs(np.sin(thetas)))
    nblend = max(3, int(math.ceil((half * math.sqrt(2.0) - R) / (0.25 * R))))
    verts = [tuple(v) for v in mesh.vertices]
    tris = [tuple(t) for t in mesh.triangles]
    ring_prev = ring
    for j in range(1, nblend + 1):
        t = j / nblend
        rr = (1.0 - t) * R + t * rsq
        start = len(verts)
        verts.extend(zip(rr * np.cos(thetas), rr * np.sin(thetas)))
        ring_new = list(range(start, start + N))
        for k in range(N):
            k2 = (k + 1) % N
            tris.append((ring_prev[k], ring_new[k], ring_new[k2]))
            tris.append((ring_prev[k], ring_new[k2], ring_prev[k2]))
        ring_prev = ring_new

    # periodic identification on the final square ring
    pairs = {}
    corner = {N // 8, 3 * N // 8, 5 * N // 8, 7 * N // 8}
    parent = list(range(N))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for c in corner:
        union(N // 8, c)
    for k in range(N):
        if k in corner:
            continue
        th = thetas[k]
        if math.cos(th) > abs(math.sin(th)):  # right side -> pair with left
            union(k, (N // 2 - k) % N)
        elif math.sin(th) > abs(math.cos(th)):  # top -> bottom
            union(k, (N - k) % N)
    for k in range(N):
        r = find(k)
        if r != k:
            pairs[ring_prev[k]] = ring_prev[r]

    boundary_edges = [(ring_prev[k], ring_prev[(k + 1) % N]) for k in range(N)]
    triangles = np.asarray(tris, dtype=np.int64)
    region = np.zeros(len(triangles), dtype=np.int64)
    region[: mesh.num_triangles] = mesh.region_tag
    return Mesh(
        np.asarray(verts, dtype=float),
        triangles,
        region,
        np.asarray(boundary_edges, dtype=np.int64),
        np.zeros(len(boundary_edges), dtype=np.int64),
        mesh.h,
        pairs,
    )


def _ordered_boundary_loop(mesh: Mesh):
    return np.unique(mesh.boundary_edges)


# ---------------------------------------------------------------------------
# Text I/O (round-trips bit-exactly via repr)


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as f:
        f.write(f"{mesh.num_vertices} {mesh.num_triangles} {len(mesh.boundary_edges)}\n")
        for x, y in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        for (a, b, c), tag in zip(mesh.triangles, mesh.region_tag):
            f.write(f"{int(a)} {int(b)} {int(c)} {int(tag)}\n")
        for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tag):
            f.write(f"{int(a)} {int(b)} {int(tag)}\n")


def load_mesh(path) -> Mesh:
    with open(path) as f:
        nv, nt, nb = (int(x) for x in f.readline().split())
        verts = np.array([[float(v) for v in f.readline().split()] for _ in range(nv)])
        tris = np.empty((nt, 3), dtype=np.int64)
        tags = np.empty(nt, dtype=np.int64)
        for i in range(nt):
            a, b, c, tag = f.readline().split()
            tris[i] = (int(a), int(b), int(c))
            tags[i] = int(tag)
        edges = np.empty((nb, 2), dtype=np.int64)
        btags = np.empty(nb, dtype=np.int64)
        for i in range(nb):
            a, b, tag = f.readline().split()
            edges[i] = (int(a), int(b))
            btags[i] = int(tag)
    return Mesh(verts, tris, tags, edges, btags, h=0.0)


def save_field(values, path) -> None:
    with open(path, "w") as f:
        for i, v in enumerate(values):
            f.write(f"{i} {float(v)!r}\n")


def load_field(path) -> np.ndarray:
    vals = []
    with open(path) as f:
        for line in f:
            _, v = line.split()
            vals.append(float(v))
    return np.asarray(vals)
