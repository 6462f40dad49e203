"""Hand-rolled SVG rendering of a 2-D verification run.

Draws the domain box, every valid region clipped to it, the zero-level
slice segments, marching-squares contours of the initial/unsafe set
functions, and any falsification witnesses.  Output is plain SVG 1.1 text
with deterministic coordinates and colors.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT_CONFIG
from .errors import UnsupportedDimension
from .expressions import evaluate
from .linprog import LpProblem, lp_solve

_SIZE = 640.0
_MARGIN = 48.0
_GRID = 256  # marching-squares sample resolution per axis


def _region_color(index: int) -> str:
    hue = (index * 137.508) % 360.0
    return f"hsl({hue:.1f}, 62%, 82%)"


def _region_edge(index: int) -> str:
    hue = (index * 137.508) % 360.0
    return f"hsl({hue:.1f}, 55%, 42%)"


class _Frame:
    """Domain-box-to-pixels mapping with a flipped y axis."""

    def __init__(self, domain):
        self.x0, self.x1 = float(domain[0, 0]), float(domain[0, 1])
        self.y0, self.y1 = float(domain[1, 0]), float(domain[1, 1])
        self.inner = _SIZE - 2 * _MARGIN

    def px(self, x, y):
        u = _MARGIN + (x - self.x0) / (self.x1 - self.x0) * self.inner
        v = _MARGIN + (self.y1 - y) / (self.y1 - self.y0) * self.inner
        return u, v

    def pt(self, x, y):
        u, v = self.px(x, y)
        return f"{u:.2f},{v:.2f}"


def _clip_vertices(A, d, tol=1e-7):
    """Vertices of {A x <= d} in the plane by pairwise row intersection."""
    m = A.shape[0]
    pts = []
    for i in range(m):
        for j in range(i + 1, m):
            mat = np.array([A[i], A[j]])
            det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
            if abs(det) < 1e-12:
                continue
            p = np.linalg.solve(mat, np.array([d[i], d[j]]))
            scale = max(1.0, float(np.max(np.abs(p))))
            if np.all(A @ p <= d + tol * scale * 10):
                pts.append(p)
    if not pts:
        return []
    uniq = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < 1e-9 for q in uniq):
            uniq.append(p)
    if len(uniq) < 3:
        return uniq
    center = np.mean(uniq, axis=0)
    uniq.sort(key=lambda p: np.arctan2(p[1] - center[1], p[0] - center[0]))
    return uniq


def _box_rows(domain):
    a = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    d = np.array([domain[0, 1], -domain[0, 0], domain[1, 1], -domain[1, 0]])
    return a, d


def _slice_segment(region, domain, tol=1e-7):
    """Endpoints of the level-set segment inside the domain box (LP pair)."""
    w, b = region.affine.w, region.affine.b
    t = np.array([-w[1], w[0]])
    if not t.any():
        return None
    box_a, box_d = _box_rows(domain)
    a_ub = np.vstack([region.constraints.A, box_a])
    b_ub = np.concatenate([region.constraints.d, box_d])
    ends = []
    for sense in ("min", "max"):
        out = lp_solve(LpProblem(t, a_ub, b_ub, w[None, :], np.array([-b]),
                                 sense=sense), tol_feas=tol)
        if not out.optimal:
            return None
        ends.append(out.point)
    return ends


def _marching_squares(expr, domain, grid=_GRID):
    """Zero-level segments of expr over the domain box."""
    xs = np.linspace(domain[0, 0], domain[0, 1], grid)
    ys = np.linspace(domain[1, 0], domain[1, 1], grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    try:
        vals = np.asarray(evaluate(expr, pts), dtype=float).reshape(grid, grid)
    except Exception:
        vals = np.full((grid, grid), np.nan)
        for i in range(grid):
            for j in range(grid):
                try:
                    vals[i, j] = evaluate(expr, np.array([xs[i], ys[j]]))
                except Exception:
                    pass

    segments = []

    def interp(pa, va, pb, vb):
        t = va / (va - vb)
        return pa + t * (pb - pa)

    for i in range(grid - 1):
        for j in range(grid - 1):
            corner_vals = (vals[i, j], vals[i + 1, j], vals[i + 1, j + 1], vals[i, j + 1])
            if any(np.isnan(v) for v in corner_vals):
                continue
            corners = (np.array([xs[i], ys[j]]), np.array([xs[i + 1], ys[j]]),
                       np.array([xs[i + 1], ys[j + 1]]), np.array([xs[i], ys[j + 1]]))
            crossings = []
            for k in range(4):
                va, vb = corner_vals[k], corner_vals[(k + 1) % 4]
                if (va > 0) != (vb > 0):
                    crossings.append(interp(corners[k], va, corners[(k + 1) % 4], vb))
            if len(crossings) >= 2:
                segments.append((crossings[0], crossings[1]))
            if len(crossings) == 4:  # saddle cell: join the second pair too
                segments.append((crossings[2], crossings[3]))
    return segments


def render_plot(network, regions, h_init, h_unsafe, witnesses,
                domain=None) -> str:
    """SVG text for one run; regions in canonical order fix the palette."""
    if network.input_dim != 2:
        raise UnsupportedDimension(f"plotting needs a 2-D input space, "
                                   f"got {network.input_dim}")
    if domain is None:
        domain = DEFAULT_CONFIG.domain(2)
    domain = np.asarray(domain, dtype=float)
    frame = _Frame(domain)
    box_a, box_d = _box_rows(domain)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SIZE:.0f}" height="{_SIZE:.0f}" '
        f'viewBox="0 0 {_SIZE:.0f} {_SIZE:.0f}">',
        f'<rect x="0" y="0" width="{_SIZE:.0f}" height="{_SIZE:.0f}" fill="white"/>',
    ]

    # region polygons clipped to the domain box
    for idx, region in enumerate(regions):
        A = np.vstack([region.constraints.A, box_a])
        d = np.concatenate([region.constraints.d, box_d])
        verts = _clip_vertices(A, d)
        if len(verts) < 3:
            continue
        points = " ".join(frame.pt(p[0], p[1]) for p in verts)
        parts.append(f'<polygon class="region" points="{points}" '
                     f'fill="{_region_color(idx)}" stroke="{_region_edge(idx)}" '
                     f'stroke-width="1"/>')

    # zero-level segments
    for region in regions:
        seg = _slice_segment(region, domain)
        if seg is None:
            continue
        (xa, ya), (xb, yb) = seg[0], seg[1]
        ax, ay = frame.px(xa, ya)
        bx, by = frame.px(xb, yb)
        parts.append(f'<line class="level-set" x1="{ax:.2f}" y1="{ay:.2f}" '
                     f'x2="{bx:.2f}" y2="{by:.2f}" stroke="#1a1a1a" stroke-width="2.2"/>')

    # initial / unsafe contours
    for expr, klass, color in ((h_init, "initial-contour", "#1f8a4c"),
                               (h_unsafe, "unsafe-contour", "#c0392b")):
        if expr is None:
            continue
        for pa, pb in _marching_squares(expr, domain):
            ax, ay = frame.px(pa[0], pa[1])
            bx, by = frame.px(pb[0], pb[1])
            parts.append(f'<line class="{klass}" x1="{ax:.2f}" y1="{ay:.2f}" '
                         f'x2="{bx:.2f}" y2="{by:.2f}" stroke="{color}" '
                         f'stroke-width="1.4" stroke-dasharray="5,3"/>')

    # domain box on top
    corners = [(domain[0, 0], domain[1, 0]), (domain[0, 1], domain[1, 0]),
               (domain[0, 1], domain[1, 1]), (domain[0, 0], domain[1, 1])]
    points = " ".join(frame.pt(x, y) for x, y in corners)
    parts.append(f'<polygon class="domain" points="{points}" fill="none" '
                 f'stroke="#444" stroke-width="1.5"/>')

    # witnesses
    for wit in witnesses or []:
        p = wit.get("point")
        if p is None or len(p) != 2:
            continue
        ux, uy = frame.px(float(p[0]), float(p[1]))
        parts.append(f'<circle class="witness-marker" cx="{ux:.2f}" cy="{uy:.2f}" '
                     f'r="5" fill="#c0392b" stroke="white" stroke-width="1.5"/>')

    parts.append(f'<text x="{_MARGIN:.0f}" y="{_SIZE - 14:.0f}" '
                 f'font-family="sans-serif" font-size="13" fill="#333">'
                 f'regions: {len(regions)}; level set in black; initial set dashed '
                 f'green; unsafe set dashed red</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
