"""Minimal self-contained SVG figures (no external assets)."""

from __future__ import annotations

import numpy as np

W, H, PAD = 640, 480, 40


def _scale(xs, ys, w=W, h=H, pad=PAD):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0
    px = pad + (xs - x0) / (x1 - x0) * (w - 2 * pad)
    py = h - pad - (ys - y0) / (y1 - y0) * (h - 2 * pad)
    return px, py


def _doc(body: list[str], meta: str = "") -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">'
    )
    comment = f"<!-- {meta} -->" if meta else ""
    frame = (
        f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" '
        f'fill="none" stroke="#999"/>'
    )
    return "\n".join([head, comment, frame] + body + ["</svg>"]) + "\n"


def _poly(px, py, color, width=1.2):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def line_plot(xs, series: dict[str, np.ndarray], meta: str = "") -> str:
    """Several named series over shared x values (shared y scale)."""
    colors = ["#1f5fa8", "#c23b22", "#2a8c4a", "#8247a8", "#b8860b"]
    xs = np.asarray(xs, dtype=float)
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    y0, y1 = float(all_y.min()), float(all_y.max())
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0
    body = []
    for i, (name, ys) in enumerate(series.items()):
        px, _ = _scale(xs, np.zeros_like(xs))
        py = H - PAD - (np.asarray(ys, dtype=float) - y0) / (y1 - y0) * (H - 2 * PAD)
        body.append(_poly(px, py, colors[i % len(colors)]))
        body.append(
            f'<text x="{W - PAD - 150}" y="{PAD + 16 + 14 * i}" font-size="11" '
            f'fill="{colors[i % len(colors)]}">{name}</text>'
        )
    return _doc(body, meta)


def cobweb(pmap, orbit: np.ndarray, meta: str = "") -> str:
    """Map graph, the diagonal and the cobweb path of an orbit."""
    xs = np.linspace(0.0, 1.0, 800)
    ys = []
    for x in xs:
        try:
            ys.append(pmap.evaluate(float(x)))
        except Exception:
            ys.append(np.nan)
    ys = np.asarray(ys)
    grid = np.linspace(0.0, 1.0, 2)
    body = []
    ok = ~np.isnan(ys)
    px, py = _scale(np.concatenate([xs[ok], grid]), np.concatenate([ys[ok], grid]))
    body.append(_poly(px[: ok.sum()], py[: ok.sum()], "#1f5fa8"))
    dx, dy = _scale(grid, grid)
    body.append(_poly(dx, dy, "#999", 0.8))
    cx, cy = [], []
    orbit = np.asarray(orbit, dtype=float)[:200]
    for a, b in zip(orbit, orbit[1:]):
        cx += [a, a]
        cy += [a, b]
        cx += [a, b]
        cy += [b, b]
    if cx:
        px, py = _scale(np.clip(cx, 0, 1), np.clip(cy, 0, 1))
        body.append(_poly(px, py, "#c23b22", 0.8))
    return _doc(body, meta)


def strip_chart(attractors: list, meta: str = "") -> str:
    """One horizontal strip per attractor estimate: support over [0,1]."""
    body = []
    n = max(1, len(attractors))
    for i, est in enumerate(attractors):
        y0 = PAD + (H - 2 * PAD) * i / n + 6
        hh = max(8.0, (H - 2 * PAD) / n - 12)
        color = {"cycle": "#2a8c4a", "cantor": "#8247a8", "periodic_like": "#c23b22"}.get(
            est.kind, "#777"
        )
        if est.kind == "periodic_like" and est.points is not None:
            for p in est.points:
                x = PAD + p * (W - 2 * PAD)
                body.append(
                    f'<circle cx="{x:.2f}" cy="{y0 + hh / 2:.2f}" r="3" fill="{color}"/>'
                )
        else:
            for lo, hi in est.intervals or [
                (c * est.eps, (c + 1) * est.eps) for c in (est.cells if est.cells is not None else [])
            ]:
                x = PAD + lo * (W - 2 * PAD)
                w = max(0.8, (hi - lo) * (W - 2 * PAD))
                body.append(
                    f'<rect x="{x:.2f}" y="{y0:.2f}" width="{w:.2f}" height="{hh:.2f}" fill="{color}"/>'
                )
        body.append(
            f'<text x="{PAD}" y="{y0 - 2:.2f}" font-size="11" fill="#333">{est.kind}</text>'
        )
    return _doc(body, meta)


def cell_classes(est, meta: str = "") -> str:
    """Merged component classes as colored cell rows."""
    colors = ["#1f5fa8", "#c23b22", "#2a8c4a", "#8247a8", "#b8860b"]
    body = []
    n = max(1, len(est.classes))
    for i, cl in enumerate(est.classes):
        y0 = PAD + (H - 2 * PAD) * i / n + 6
        hh = max(8.0, (H - 2 * PAD) / n - 12)
        for c in cl["cells"]:
            x = PAD + c * est.eps * (W - 2 * PAD)
            w = max(0.8, est.eps * (W - 2 * PAD))
            body.append(
                f'<rect x="{x:.2f}" y="{y0:.2f}" width="{w:.2f}" height="{hh:.2f}" '
                f'fill="{colors[i % len(colors)]}"/>'
            )
        body.append(
            f'<text x="{PAD}" y="{y0 - 2:.2f}" font-size="11" fill="#333">'
            f'class {i}: c = {", ".join(f"{m:.4g}" for m in cl["members"])}</text>'
        )
    return _doc(body, meta)


def branch_plot(rm, meta: str = "") -> str:
    """First-return branches: domain vs image boxes over the base interval."""
    a, b = rm.base
    body = []
    for br in rm.branches[:400]:
        x0 = PAD + (br.domain[0] - a) / (b - a) * (W - 2 * PAD)
        x1 = PAD + (br.domain[1] - a) / (b - a) * (W - 2 * PAD)
        y0 = H - PAD - (br.image[1] - a) / (b - a) * (H - 2 * PAD)
        y1 = H - PAD - (br.image[0] - a) / (b - a) * (H - 2 * PAD)
        body.append(
            f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{max(x1 - x0, 0.6):.2f}" '
            f'height="{max(y1 - y0, 0.6):.2f}" fill="none" stroke="#1f5fa8" stroke-width="0.8"/>'
        )
        body.append(
            f'<text x="{x0:.2f}" y="{(y0 + y1) / 2:.2f}" font-size="9" fill="#c23b22">t={br.time}</text>'
        )
    return _doc(body, meta)
