"""Parameterized inclusion sequences and quantitative hypothesis checks.

Each family describes, for every index n, a conductive part A_n, an
insulating part B_n and the perturbed conductivity on them.  The module
computes exact L1/Lp norms of the contrast matrix, separations, and a
quantitative report on the structural hypotheses:

1. all inclusions stay inside a fixed safety region K well inside the
   domain;
2. the contrast L1 norm is at most one and vanishes along the sequence;
3. A_n and B_n are disjoint and the conductivity ordering matches the
   region type;
4. one of three integrability/separation alternatives holds (4a, 4b, 4c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolationError
from .tensors import MatrixField, SymMat, dn_at, frobenius, psd_leq

# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class Domain2D:
    """Computational domain with an inner safety region K.

    kind is one of "disk", "ellipse", "rectangle".  For disks params is
    (cx, cy, radius); for ellipses (semi_x, semi_y) centred at the origin;
    for rectangles (x0, y0, x1, y1).  K uses the same encoding.
    """

    kind: str
    params: tuple
    k_kind: str
    k_params: tuple

    def contains(self, pts: np.ndarray, which: str = "domain", margin: float = 0.0) -> np.ndarray:
        kind, params = (self.kind, self.params) if which == "domain" else (self.k_kind, self.k_params)
        pts = np.atleast_2d(pts)
        if kind == "disk":
            cx, cy, r = params
            return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= r - margin
        if kind == "ellipse":
            a, b = params
            # Margin applied on the smaller semi-axis scale.
            s = 1.0 - margin / min(a, b)
            return (pts[:, 0] / a) ** 2 + (pts[:, 1] / b) ** 2 <= s**2
        x0, y0, x1, y1 = params
        return (
            (pts[:, 0] >= x0 + margin)
            & (pts[:, 0] <= x1 - margin)
            & (pts[:, 1] >= y0 + margin)
            & (pts[:, 1] <= y1 - margin)
        )

    def boundary_polyline(self, which: str = "domain", nseg: int = 256) -> np.ndarray:
        kind, params = (self.kind, self.params) if which == "domain" else (self.k_kind, self.k_params)
        if kind == "disk":
            cx, cy, r = params
            t = np.linspace(0.0, 2.0 * math.pi, nseg, endpoint=False)
            return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])
        if kind == "ellipse":
            a, b = params
            t = np.linspace(0.0, 2.0 * math.pi, nseg, endpoint=False)
            return np.column_stack([a * np.cos(t), b * np.sin(t)])
        x0, y0, x1, y1 = params
        m = nseg // 4
        xs = np.linspace(x0, x1, m, endpoint=False)
        ys = np.linspace(y0, y1, m, endpoint=False)
        return np.vstack(
            [
                np.column_stack([xs, np.full(m, y0)]),
                np.column_stack([np.full(m, x1), ys]),
                np.column_stack([xs[::-1] + (x1 - xs[-1] - x0), np.full(m, y1)]),
                np.column_stack([np.full(m, x0), ys[::-1]]),
            ]
        )


def disk_domain(radius: float = 2.0, k_radius: float = 1.25) -> Domain2D:
    return Domain2D("disk", (0.0, 0.0, radius), "disk", (0.0, 0.0, k_radius))


def confocal_domain(xi_outer: float = 2.0, xi_k: float = 1.2) -> Domain2D:
    return Domain2D(
        "ellipse",
        (math.cosh(xi_outer), math.sinh(xi_outer)),
        "ellipse",
        (math.cosh(xi_k), math.sinh(xi_k)),
    )


def strip_domain() -> Domain2D:
    return Domain2D("rectangle", (-0.5, -0.5, 1.5, 1.5), "rectangle", (-0.25, -0.25, 1.25, 1.25))


# ---------------------------------------------------------------------------
# Regions


def shoelace_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def point_in_polygon(pts: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd rule point-in-polygon test, vectorized over pts."""
    pts = np.atleast_2d(pts)
    v = np.asarray(vertices, dtype=float)
    inside = np.zeros(len(pts), dtype=bool)
    j = len(v) - 1
    for i in range(len(v)):
        xi, yi = v[i]
        xj, yj = v[j]
        cross = (yi > pts[:, 1]) != (yj > pts[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            xcut = (xj - xi) * (pts[:, 1] - yi) / (yj - yi) + xi
        inside ^= cross & (pts[:, 0] < xcut)
        j = i
    return inside


def polyline_min_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Min distance between two point clouds sampled on region boundaries."""
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.min()))


@dataclass(frozen=True)
class Region:
    """One tagged inclusion component at a fixed n.

    geometry kinds: "annulus" (r0, r1, centred at origin), "strip"
    (x0, x1, y0, y1), "confocal" (xi0, xi1 in elliptic coordinates with
    foci +-1), "disk" (cx, cy, rho), "polygon" (vertex array).
    """

    tag: str  # "A" or "B"
    kind: str
    params: tuple
    gamma: SymMat
    region_id: int = 1  # mesh region tag (1 for A parts, 2 for B parts)

    def area(self) -> float:
        if self.kind == "annulus":
            r0, r1 = self.params
            return math.pi * (r1**2 - r0**2)
        if self.kind == "strip":
            x0, x1, y0, y1 = self.params
            return (x1 - x0) * (y1 - y0)
        if self.kind == "confocal":
            xi0, xi1 = self.params
            def half(x):
                return math.cosh(x) * math.sinh(x)
            return math.pi * (half(xi1) - half(xi0))
        if self.kind == "disk":
            _, _, rho = self.params
            return math.pi * rho**2
        return shoelace_area(self.params[0])

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.kind == "annulus":
            r0, r1 = self.params
            r = np.hypot(pts[:, 0], pts[:, 1])
            return (r > r0) & (r <= r1)
        if self.kind == "strip":
            x0, x1, y0, y1 = self.params
            return (pts[:, 0] > x0) & (pts[:, 0] <= x1) & (pts[:, 1] > y0) & (pts[:, 1] <= y1)
        if self.kind == "confocal":
            xi0, xi1 = self.params
            xi = confocal_xi(pts)
            return (xi > xi0) & (xi <= xi1)
        if self.kind == "disk":
            cx, cy, rho = self.params
            return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= rho
        return point_in_polygon(pts, self.params[0])

    def boundary_polyline(self, nseg: int = 256) -> np.ndarray:
        t = np.linspace(0.0, 2.0 * math.pi, nseg, endpoint=False)
        if self.kind == "annulus":
            r0, r1 = self.params
            rings = [r for r in (r0, r1) if r > 0.0]
            return np.vstack([np.column_stack([r * np.cos(t), r * np.sin(t)]) for r in rings])
        if self.kind == "strip":
            x0, x1, y0, y1 = self.params
            m = max(nseg // 4, 2)
            xs = np.linspace(x0, x1, max(2, int(m * (x1 - x0) / max(y1 - y0, x1 - x0)) + 2))
            ys = np.linspace(y0, y1, m)
            return np.vstack(
                [
                    np.column_stack([xs, np.full_like(xs, y0)]),
                    np.column_stack([xs, np.full_like(xs, y1)]),
                    np.column_stack([np.full_like(ys, x0), ys]),
                    np.column_stack([np.full_like(ys, x1), ys]),
                ]
            )
        if self.kind == "confocal":
            xi0, xi1 = self.params
            out = []
            for xi in (xi0, xi1):
                if xi > 0.0:
                    out.append(np.column_stack([math.cosh(xi) * np.cos(t), math.sinh(xi) * np.sin(t)]))
            if not out:  # degenerate segment
                s = np.linspace(-1.0, 1.0, nseg)
                out.append(np.column_stack([s, np.zeros_like(s)]))
            return np.vstack(out)
        if self.kind == "disk":
            cx, cy, rho = self.params
            return np.column_stack([cx + rho * np.cos(t), cy + rho * np.sin(t)])
        return np.asarray(self.params[0], dtype=float)

    def dn_frobenius(self, gamma0: SymMat) -> float:
        return frobenius(dn_at(gamma0, self.gamma, True))

    def l1_dn(self, gamma0: SymMat) -> float:
        return self.dn_frobenius(gamma0) * self.area()

    def lp_dn(self, gamma0: SymMat, p: float) -> float:
        return self.dn_frobenius(gamma0) * self.area() ** (1.0 / p)


def confocal_xi(pts: np.ndarray) -> np.ndarray:
    """Elliptic radial coordinate xi for foci at (+-1, 0)."""
    pts = np.atleast_2d(pts)
    z = pts[:, 0] + 1j * pts[:, 1]
    w = np.arccosh(z.astype(complex))
    return np.abs(w.real)


# ---------------------------------------------------------------------------
# Families


@dataclass(frozen=True)
class InclusionFamily:
    """Sequence n -> (A_n, B_n, gamma_n) over a fixed domain.

    Subclass hooks: _regions(n) builds the tagged region list; closed-form
    norms fall out of constant per-region contrast matrices.
    """

    domain: Domain2D
    gamma0: SymMat = field(default_factory=lambda: SymMat.identity(2))
    name: str = "family"

    dim = 2

    def regions(self, n: int) -> list[Region]:
        raise NotImplementedError

    def matrix_field(self, n: int) -> MatrixField:
        regs = self.regions(n)
        return MatrixField(self.gamma0, {r.region_id: r.gamma for r in regs})

    def background_field(self) -> MatrixField:
        return MatrixField(self.gamma0, {})

    def region_matrices(self, n: int) -> dict:
        return {r.region_id: r.gamma for r in self.regions(n)}

    def l1_dn(self, n: int) -> float:
        return sum(r.l1_dn(self.gamma0) for r in self.regions(n))

    def l1_dn_part(self, n: int, tag: str) -> float:
        return sum(r.l1_dn(self.gamma0) for r in self.regions(n) if r.tag == tag)

    def lp_dn_part(self, n: int, p: float, tag: str) -> float:
        total = sum(
            r.dn_frobenius(self.gamma0) ** p * r.area() for r in self.regions(n) if r.tag == tag
        )
        return total ** (1.0 / p)

    def separation(self, n: int) -> float:
        """Distance between the conductive and insulating parts.

        Vacuously +inf when either part is empty.
        """
        regs = self.regions(n)
        a = [r for r in regs if r.tag == "A"]
        b = [r for r in regs if r.tag == "B"]
        if not a or not b:
            return math.inf
        return min(
            polyline_min_distance(ra.boundary_polyline(), rb.boundary_polyline())
            for ra in a
            for rb in b
        )


def _tag_for(lam_min: float, lam_max: float) -> str:
    # Conductive when gamma_n >= gamma_0 = I, insulating when <=.
    return "A" if lam_min >= 1.0 else "B"


@dataclass(frozen=True)
class RadialAnnuli(InclusionFamily):
    """Two touching spherical shells around |x| = 1 in the disk of radius 2.

    The inner shell (1 - 1/n, 1) carries the isotropic value n^alpha, the
    outer (1, 1 + 1/n) carries n^beta.  ``d`` only affects the closed-form
    volume factors used by the analytic norms; meshes are 2D.
    """

    alpha: float = 0.5
    beta: float = -0.5
    d: int = 2

    def __init__(self, alpha=0.5, beta=-0.5, d=2, domain=None, gamma0=None):
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "beta", float(beta))
        object.__setattr__(self, "d", int(d))
        InclusionFamily.__init__(
            self,
            domain or disk_domain(),
            gamma0 if gamma0 is not None else SymMat.identity(2),
            name="radial_annuli",
        )

    def shell_values(self, n: int) -> tuple[float, float]:
        return float(n) ** self.alpha, float(n) ** self.beta

    def regions(self, n: int) -> list[Region]:
        va, vb = self.shell_values(n)
        inner = Region(
            _tag_for(va, va), "annulus", (1.0 - 1.0 / n, 1.0), SymMat.iso(va, 2),
            region_id=1,
        )
        outer = Region(
            _tag_for(vb, vb), "annulus", (1.0, 1.0 + 1.0 / n), SymMat.iso(vb, 2),
            region_id=2,
        )
        return [inner, outer]

    def l1_dn(self, n: int) -> float:
        # General-dimension closed form: shell volume times the constant
        # Frobenius value sqrt(d) (v + 1/v) on each shell.
        d = self.d
        if d == 2:
            return super().l1_dn(n)
        va, vb = self.shell_values(n)
        ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        vol_in = ball * (1.0 - (1.0 - 1.0 / n) ** d)
        vol_out = ball * ((1.0 + 1.0 / n) ** d - 1.0)
        return math.sqrt(d) * ((va + 1.0 / va) * vol_in + (vb + 1.0 / vb) * vol_out)

    def separation(self, n: int) -> float:
        regs = self.regions(n)
        tags = {r.tag for r in regs}
        return 0.0 if {"A", "B"} <= tags else math.inf


@dataclass(frozen=True)
class Strips(InclusionFamily):
    """Alternating thin conductive and insulating vertical strips in (0,1)^2.

    Conductive strips of width n^-(3+eps) carry diag(1, n); insulating
    strips of width 1/(4 n^2) carry (ln n / n) I.  The insulating width
    shrinks like n^-2 so that the total contrast mass decays like 1/ln n;
    separations stay proportional to 1/n.
    """

    eps: float = 0.5

    def __init__(self, eps=0.5, domain=None, gamma0=None):
        object.__setattr__(self, "eps", float(eps))
        InclusionFamily.__init__(
            self,
            domain or strip_domain(),
            gamma0 if gamma0 is not None else SymMat.identity(2),
            name="strips",
        )

    def widths(self, n: int) -> tuple[float, float]:
        return float(n) ** -(3.0 + self.eps), 1.0 / (4.0 * n * n)

    def regions(self, n: int) -> list[Region]:
        if n < 2:
            raise AssumptionViolationError("strips family needs n >= 2")
        wa, wb = self.widths(n)
        ga = SymMat.diag(1.0, float(n))
        gb = SymMat.iso(math.log(n) / n, 2)
        regs = []
        for k in range(n):
            x = k / n
            regs.append(Region("A", "strip", (x, x + wa, 0.0, 1.0), ga, region_id=1))
            regs.append(Region("B", "strip", (x + 0.5 / n, x + 0.5 / n + wb, 0.0, 1.0), gb, region_id=2))
        return regs

    def separation(self, n: int) -> float:
        wa, wb = self.widths(n)
        return min(0.5 / n - wa, 0.5 / n - wb)


@dataclass(frozen=True)
class ConfocalEllipse(InclusionFamily):
    """Confocal elliptic inclusion xi <= 1/n collapsing onto the segment
    (-1, 1) x {0}, with isotropic conductivity lam_n = n^q."""

    q: float = 0.5

    def __init__(self, q=0.5, domain=None, gamma0=None):
        object.__setattr__(self, "q", float(q))
        InclusionFamily.__init__(
            self,
            domain or confocal_domain(),
            gamma0 if gamma0 is not None else SymMat.identity(2),
            name="confocal_ellipse",
        )

    def contrast(self, n: int) -> float:
        return float(n) ** self.q

    def regions(self, n: int) -> list[Region]:
        lam = self.contrast(n)
        tag = _tag_for(lam, lam)
        return [Region(tag, "confocal", (0.0, 1.0 / n), SymMat.iso(lam, 2), region_id=1)]


@dataclass(frozen=True)
class DiskInclusion(InclusionFamily):
    """Single disk with radius law rho n^-rho_exponent and isotropic
    contrast law n^lam_exponent.

    The default laws (fixed radius, contrast n) give the bounded-geometry
    test case; a positive rho_exponent gives a genuinely low-volume-
    fraction sequence whose contrast mass vanishes even with growing
    contrast.
    """

    center: tuple = (0.0, 0.0)
    rho: float = 0.2
    lam_exponent: float = 1.0
    rho_exponent: float = 0.0
    lam0: float = 1.0

    def __init__(self, center=(0.0, 0.0), rho=0.2, lam_exponent=1.0, rho_exponent=0.0,
                 lam0=1.0, domain=None, gamma0=None):
        object.__setattr__(self, "center", tuple(center))
        object.__setattr__(self, "rho", float(rho))
        object.__setattr__(self, "lam_exponent", float(lam_exponent))
        object.__setattr__(self, "rho_exponent", float(rho_exponent))
        object.__setattr__(self, "lam0", float(lam0))
        InclusionFamily.__init__(
            self,
            domain or disk_domain(2.0, 1.0),
            gamma0 if gamma0 is not None else SymMat.identity(2),
            name="disk_inclusion",
        )

    def contrast(self, n: int) -> float:
        return self.lam0 * float(n) ** self.lam_exponent

    def radius(self, n: int) -> float:
        return self.rho * float(n) ** -self.rho_exponent

    def regions(self, n: int) -> list[Region]:
        lam = self.contrast(n)
        tag = _tag_for(lam, lam)
        cx, cy = self.center
        return [Region(tag, "disk", (cx, cy, self.radius(n)), SymMat.iso(lam, 2), region_id=1)]


@dataclass(frozen=True)
class CustomPolygons(InclusionFamily):
    """Explicit per-n polygon lists: {n: [(tag, vertices, SymMat), ...]}."""

    table: dict = field(default_factory=dict)

    def __init__(self, table, domain, gamma0=None):
        object.__setattr__(self, "table", dict(table))
        InclusionFamily.__init__(
            self,
            domain,
            gamma0 if gamma0 is not None else SymMat.identity(2),
            name="custom_polygons",
        )

    def regions(self, n: int) -> list[Region]:
        if n not in self.table:
            raise AssumptionViolationError(f"no polygons registered for n={n}")
        out = []
        for tag, verts, gamma in self.table[n]:
            rid = 1 if tag == "A" else 2
            out.append(Region(tag, "polygon", (np.asarray(verts, dtype=float),), gamma, region_id=rid))
        return out


def polygon_quadrature_l1(region: Region, gamma0: SymMat, gamma_fn, levels: int = 3) -> float:
    """Midpoint-rule integral of |d|_F over a polygon for non-constant
    conductivity, refined by triangle subdivision ``levels`` times."""
    verts = np.asarray(region.params[0], dtype=float)
    centroid = verts.mean(axis=0)
    tris = [np.array([centroid, verts[i], verts[(i + 1) % len(verts)]]) for i in range(len(verts))]
    for _ in range(levels):
        nxt = []
        for t in tris:
            m01, m12, m20 = (t[0] + t[1]) / 2, (t[1] + t[2]) / 2, (t[2] + t[0]) / 2
            nxt += [
                np.array([t[0], m01, m20]),
                np.array([m01, t[1], m12]),
                np.array([m20, m12, t[2]]),
                np.array([m01, m12, m20]),
            ]
        tris = nxt
    total = 0.0
    for t in tris:
        c = t.mean(axis=0)
        area = shoelace_area(t)
        total += frobenius(dn_at(gamma0, gamma_fn(c), True)) * area
    return total


# ---------------------------------------------------------------------------
# Assumption report


@dataclass
class AssumptionReport:
    """Quantitative verdicts for the four structural hypotheses."""

    n_list: list
    p: float
    tau: float
    dim: int
    l1: list
    l1_a: list
    l1_b: list
    lp_a: list
    lp_b: list
    separations: list
    dist_to_k: float
    dist_to_boundary: float
    a1_containment: bool
    a2_per_n_small: list
    a2_decreasing: bool
    a2_slope: float
    a2_strong_decay: bool
    a2_pass: bool
    a3_disjoint: bool
    a3_ordering: bool
    a3_pass: bool
    a4a_pass: bool
    a4b_pass: bool
    a4c_pass: bool
    a4c_margin: list
    a4_satisfied_by: list
    violations: list

    @property
    def a1_pass(self) -> bool:
        return self.a1_containment

    @property
    def a4_pass(self) -> bool:
        return bool(self.a4_satisfied_by)

    def all_pass(self) -> bool:
        return self.a1_pass and self.a2_pass and self.a3_pass and self.a4_pass


def _loglog_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    good = (xs > 0) & (ys > 0)
    if good.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(xs[good]), np.log(ys[good]), 1)[0])


def _bounded_trend(values) -> bool:
    vals = [v for v in values if math.isfinite(v)]
    if len(vals) != len(values) or not vals:
        return False
    if len(vals) < 3:
        return vals[-1] <= vals[0] * 1.05
    # Bounded at desk scale: the tail does not grow.
    return vals[-1] <= max(vals[0], vals[1]) * 1.05


def assumption_report(
    family: InclusionFamily,
    n_list,
    p: float,
    tau: float,
    audit: bool = False,
) -> AssumptionReport:
    """Evaluate hypotheses 1-4 for every n in ``n_list``.

    Per-n quantities depend only on their own n, so enlarging the list
    never flips an existing per-n verdict; list-level trend verdicts
    (decay of the L1 norm, boundedness of Lp norms) are recomputed.
    With ``audit=True`` structural violations are recorded in the report
    instead of raising.
    """
    n_list = sorted(int(n) for n in n_list)
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if p <= 1.0 or tau <= 0.0:
        raise ValueError("need p > 1 and tau > 0")
    d = family.dim
    violations = []

    l1, l1a, l1b, lpa, lpb, seps = [], [], [], [], [], []
    disjoint_ok = True
    ordering_ok = True
    min_dist_k = math.inf
    min_dist_bdy = math.inf
    for n in n_list:
        regs = family.regions(n)
        l1.append(family.l1_dn(n))
        l1a.append(family.l1_dn_part(n, "A"))
        l1b.append(family.l1_dn_part(n, "B"))
        lpa.append(family.lp_dn_part(n, p, "A") if l1a[-1] > 0 else 0.0)
        lpb.append(family.lp_dn_part(n, p, "B") if l1b[-1] > 0 else 0.0)
        seps.append(family.separation(n))

        # Assumption 3: pairwise disjointness and quadratic-form ordering.
        for i in range(len(regs)):
            for j in range(i + 1, len(regs)):
                if _regions_overlap(regs[i], regs[j]):
                    disjoint_ok = False
                    violations.append(f"n={n}: regions {i} and {j} overlap")
        for r in regs:
            if r.tag == "A" and not psd_leq(family.gamma0, r.gamma):
                ordering_ok = False
                violations.append(f"n={n}: conductive region not >= background")
            if r.tag == "B" and not psd_leq(r.gamma, family.gamma0):
                ordering_ok = False
                violations.append(f"n={n}: insulating region not <= background")

        # Assumption 1: containment in K with positive margin.
        kb = family.domain.boundary_polyline("K")
        ob = family.domain.boundary_polyline("domain")
        for r in regs:
            rb = r.boundary_polyline()
            inside = family.domain.contains(rb, "K")
            if not inside.all():
                violations.append(f"n={n}: region leaves the safety set K")
                min_dist_k = 0.0
            else:
                min_dist_k = min(min_dist_k, polyline_min_distance(rb, kb))
            min_dist_bdy = min(min_dist_bdy, polyline_min_distance(rb, ob))

    if not disjoint_ok and not audit:
        raise AssumptionViolationError("; ".join(v for v in violations if "overlap" in v))

    a1 = min_dist_k > 0.0 and math.isfinite(min_dist_k)
    per_n_small = [v <= 1.0 for v in l1]
    decreasing = all(l1[i + 1] < l1[i] for i in range(len(l1) - 1)) if len(l1) > 1 else True
    slope = _loglog_slope(n_list, l1)
    strong = len(l1) > 1 and l1[-1] < 0.1 * l1[0]
    a2 = all(per_n_small) and decreasing and (math.isnan(slope) or slope < 0.0)

    a_empty = all(v == 0.0 for v in l1a)
    b_empty = all(v == 0.0 for v in l1b)
    a4a = a_empty or (p > d and _bounded_trend(lpa))
    a4b = a_empty or (d == 2 and p > 2 and (b_empty or _bounded_trend(lpb)))
    margins = []
    a4c_sep_ok = True
    for n, s, la in zip(n_list, seps, l1a):
        if la <= 0.0:
            margins.append(math.inf)
            continue
        rhs = la**tau
        margins.append(s - rhs)
        if not s > rhs:
            a4c_sep_ok = False
    a4c = a_empty or (p > d / 2.0 and tau < 1.0 / (d - 1) and _bounded_trend(lpa) and a4c_sep_ok)
    satisfied = [name for name, ok in (("4a", a4a), ("4b", a4b), ("4c", a4c)) if ok]

    return AssumptionReport(
        n_list=n_list,
        p=p,
        tau=tau,
        dim=d,
        l1=l1,
        l1_a=l1a,
        l1_b=l1b,
        lp_a=lpa,
        lp_b=lpb,
        separations=seps,
        dist_to_k=min_dist_k,
        dist_to_boundary=min_dist_bdy,
        a1_containment=a1,
        a2_per_n_small=per_n_small,
        a2_decreasing=decreasing,
        a2_slope=slope,
        a2_strong_decay=strong,
        a2_pass=a2,
        a3_disjoint=disjoint_ok,
        a3_ordering=ordering_ok,
        a3_pass=disjoint_ok and ordering_ok,
        a4a_pass=a4a,
        a4b_pass=a4b,
        a4c_pass=a4c,
        a4c_margin=margins,
        a4_satisfied_by=satisfied,
        violations=violations,
    )


def _regions_overlap(r1: Region, r2: Region) -> bool:
    if r1.kind == "annulus" and r2.kind == "annulus":
        a0, a1 = r1.params
        b0, b1 = r2.params
        return a0 < b1 and b0 < a1
    if r1.kind == "strip" and r2.kind == "strip":
        return (
            r1.params[0] < r2.params[1]
            and r2.params[0] < r1.params[1]
            and r1.params[2] < r2.params[3]
            and r2.params[2] < r1.params[3]
        )
    # Generic sampled check: any boundary-or-interior sample of one inside
    # the other.
    pts = r1.boundary_polyline(64)
    if bool(r2.contains(pts).any()):
        return True
    pts = r2.boundary_polyline(64)
    return bool(r1.contains(pts).any())


def l1_dn(family: InclusionFamily, n: int) -> float:
    """Exact integral of the contrast Frobenius field over the domain."""
    return family.l1_dn(n)


def separation(family: InclusionFamily, n: int) -> float:
    return family.separation(n)
