"""CSV writers and the dependency-free SVG rate plot."""

from __future__ import annotations

import math

from .asymptotics import RateTable


def rate_csv(table: RateTable) -> str:
    """`n,l1_dn,quantity,value` rows plus a fit summary comment line."""
    lines = ["n,l1_dn,quantity,value"]
    for n, l1, v in table.rows:
        lines.append(f"{n},{l1:.17g},{table.quantity},{v:.17g}")
    claimed = "" if table.claimed_exponent is None else f" claimed_exponent={table.claimed_exponent:g}"
    lines.append(f"# slope={table.slope:.6g} residual={table.residual:.6g}{claimed}")
    return "\n".join(lines) + "\n"


def parse_rate_csv(text: str):
    """Rows and summary of a rate CSV produced by rate_csv."""
    rows = []
    summary = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    summary[k] = float(v)
            continue
        if line.startswith("n,"):
            continue
        n, l1, quantity, value = line.split(",")
        rows.append((int(n), float(l1), quantity, float(value)))
    return rows, summary


def svg_rate_plot(rows, summary, title: str = "") -> str:
    """Log-log scatter of value vs l1_dn with the fitted line, rendered
    into a fixed 640x480 viewBox."""
    width, height = 640, 480
    margin = 60
    pts = [(l1, v) for _, l1, _, v in rows if l1 > 0 and v > 0]
    if not pts:
        body = '<text x="320" y="240" text-anchor="middle">no positive data</text>'
        return _svg_document(body, width, height)
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]

    def expand(lo, hi):
        pad = 0.05 * (hi - lo if hi > lo else 1.0)
        return lo - pad, hi + pad

    x0, x1 = expand(min(lx), max(lx))
    y0, y1 = expand(min(ly), max(ly))

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>'
    ]
    for x, y in zip(lx, ly):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="steelblue"/>')
    slope = summary.get("slope")
    if slope is not None and all(math.isfinite(v) for v in (slope,)):
        # fitted line through the data centroid
        cx = sum(lx) / len(lx)
        cy = sum(ly) / len(ly)
        ya = cy + slope * (x0 - cx)
        yb = cy + slope * (x1 - cx)
        parts.append(
            f'<line x1="{sx(x0):.2f}" y1="{sy(ya):.2f}" x2="{sx(x1):.2f}" y2="{sy(yb):.2f}" '
            'stroke="crimson" stroke-dasharray="6 3"/>'
        )
        parts.append(
            f'<text x="{width - margin}" y="{margin - 10}" text-anchor="end">slope {slope:.3f}</text>'
        )
    if title:
        parts.append(f'<text x="{margin}" y="{margin - 10}">{title}</text>')
    parts.append(
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">log10 contrast mass</text>'
    )
    parts.append(
        f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
        'text-anchor="middle">log10 value</text>'
    )
    return _svg_document("\n".join(parts), width, height)


def _svg_document(body: str, width: int, height: int) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )
