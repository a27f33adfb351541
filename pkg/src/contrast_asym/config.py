"""Line-oriented run-configuration parser.

Format: `key = value` pairs under one level of `[section]` headers.
Lists are comma-separated inside brackets.  Comments start with `#`.
Errors carry the 1-based line number and the offending field path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .geometry import ConfocalEllipse, DiskInclusion, InclusionFamily, RadialAnnuli, Strips

FAMILY_KINDS = ("radial_annuli", "strips", "confocal_ellipse", "disk_inclusion")
CHECK_NAMES = (
    "assumptions",
    "energy",
    "l2",
    "representation",
    "polarization",
    "bounds",
    "stream",
    "bc_independence",
)
BOUNDARY_NAMES = ("x1", "x2", "x1x2", "harmonic2")

DEFAULT_TOLERANCES = {
    "energy_ratio": 1.05,
    "flux_ratio": 1.05,
    "l2_slope": 0.55,
    "reciprocity": 1e-8,
    "remainder_slope": 0.2,
    "bc_slope": 0.2,
    "polarization_entry": 0.1,
    "w_eig": 0.05,
    "stream_residual": 0.03,
    "boundary_flux": 1e-9,
    "assumption_p": 2.0,
    "assumption_tau": 0.9,
}


@dataclass
class RunConfig:
    family_kind: str
    family_params: dict
    n_list: list
    h: float
    boundary_data: str
    checks: list
    output: str
    probe_count: int = 8
    probe_radius_factor: float = 0.85
    tolerances: dict = field(default_factory=dict)

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def build_family(self) -> InclusionFamily:
        p = self.family_params
        if self.family_kind == "radial_annuli":
            return RadialAnnuli(alpha=p.get("alpha", 0.5), beta=p.get("beta", -0.5))
        if self.family_kind == "strips":
            return Strips(eps=p.get("eps", 0.5))
        if self.family_kind == "confocal_ellipse":
            return ConfocalEllipse(q=p.get("q", 0.5))
        if self.family_kind == "disk_inclusion":
            return DiskInclusion(
                rho=p.get("rho", 0.2),
                lam_exponent=p.get("lam_exponent", 1.0),
                rho_exponent=p.get("rho_exponent", 0.0),
                lam0=p.get("lam0", 1.0),
            )
        raise ConfigError(f"unknown family kind {self.family_kind!r}", field="family.kind")


def _parse_scalar(text: str, line: int, path: str):
    t = text.strip()
    if t.startswith("[") and t.endswith("]"):
        inner = t[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(x, line, path) for x in inner.split(",")]
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    sections: dict = {}
    section = None
    key_lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError("empty section name", line=lineno)
            sections.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError("expected `key = value`", line=lineno)
        if section is None:
            raise ConfigError("key outside any [section]", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        sections[section][key] = _parse_scalar(value, lineno, f"{section}.{key}")
        key_lines[f"{section}.{key}"] = lineno

    def need(sec, key, path=None):
        path = path or f"{sec}.{key}"
        if sec not in sections or key not in sections[sec]:
            raise ConfigError("missing required field", field=path)
        return sections[sec][key]

    fam = need("family", "kind")
    if fam not in FAMILY_KINDS:
        raise ConfigError(
            f"unknown family kind {fam!r}; supported kinds: {', '.join(FAMILY_KINDS)}",
            line=key_lines.get("family.kind"),
            field="family.kind",
        )
    params = {k: v for k, v in sections.get("family", {}).items() if k != "kind"}

    n_list = need("run", "n_list")
    if not isinstance(n_list, list) or not n_list:
        raise ConfigError("n_list must be a nonempty list", line=key_lines.get("run.n_list"), field="run.n_list")
    if any(not isinstance(n, int) or n < 2 for n in n_list):
        raise ConfigError("n_list entries must be integers >= 2", line=key_lines.get("run.n_list"), field="run.n_list")
    if any(b <= a for a, b in zip(n_list[:-1], n_list[1:])):
        raise ConfigError("n_list must be strictly ascending", line=key_lines.get("run.n_list"), field="run.n_list")

    h = need("run", "h")
    if not isinstance(h, (int, float)) or h <= 0:
        raise ConfigError("h must be a positive number", line=key_lines.get("run.h"), field="run.h")

    checks = need("run", "checks")
    if not isinstance(checks, list) or not checks:
        raise ConfigError("checks must list at least one check", line=key_lines.get("run.checks"), field="run.checks")
    for c in checks:
        if c not in CHECK_NAMES:
            raise ConfigError(
                f"unknown check {c!r}; supported: {', '.join(CHECK_NAMES)}",
                line=key_lines.get("run.checks"),
                field="run.checks",
            )

    boundary = sections.get("run", {}).get("boundary_data", "x1")
    if boundary not in BOUNDARY_NAMES:
        raise ConfigError(
            f"unknown boundary data {boundary!r}; supported: {', '.join(BOUNDARY_NAMES)}",
            line=key_lines.get("run.boundary_data"),
            field="run.boundary_data",
        )

    probes = sections.get("probes", {})
    tol = dict(sections.get("tolerances", {}))
    for k in tol:
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}", line=key_lines.get(f"tolerances.{k}"), field=f"tolerances.{k}")

    return RunConfig(
        family_kind=fam,
        family_params=params,
        n_list=list(n_list),
        h=float(h),
        boundary_data=boundary,
        checks=list(checks),
        output=str(sections.get("run", {}).get("output", "out")),
        probe_count=int(probes.get("count", 8)),
        probe_radius_factor=float(probes.get("radius_factor", 0.85)),
        tolerances=tol,
    )
