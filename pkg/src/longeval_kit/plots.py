"""Small deterministic SVG charts with no external assets."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .corpus import EvolutionStats

__all__ = ["er_delta_ri_svg", "evolution_svg", "drift_svg"]

WIDTH, HEIGHT = 480, 360
MARGIN = 50
PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7")


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str, width: int = WIDTH, height: int = HEIGHT) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]


def _span(values: Sequence[float], must_include: float, pad: float = 0.1) -> tuple[float, float]:
    lo = min([*values, must_include])
    hi = max([*values, must_include])
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    extra = (hi - lo) * pad
    return lo - extra, hi + extra


def er_delta_ri_svg(points: Sequence[tuple[str, float | None, float | None]], title: str = "ER vs. ΔRI") -> str:
    """Scatter of ``(label, ER, ΔRI)`` with reference lines at ER = 1 and ΔRI = 0.

    Points with an undefined coordinate are listed in a footnote instead of drawn.
    """
    drawn = [(lbl, er, dri) for lbl, er, dri in points if er is not None and dri is not None]
    skipped = [lbl for lbl, er, dri in points if er is None or dri is None]
    x_lo, x_hi = _span([p[1] for p in drawn], 1.0)
    y_lo, y_hi = _span([p[2] for p in drawn], 0.0)
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(v: float) -> float:
        return MARGIN + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * plot_h

    out = _header(title)
    out.append(
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>'
    )
    out.append(
        f'<line x1="{_f(sx(1.0))}" y1="{MARGIN}" x2="{_f(sx(1.0))}" y2="{HEIGHT - MARGIN}" '
        'stroke="#999" stroke-dasharray="4 3"/>'
    )
    out.append(
        f'<line x1="{MARGIN}" y1="{_f(sy(0.0))}" x2="{WIDTH - MARGIN}" y2="{_f(sy(0.0))}" '
        'stroke="#999" stroke-dasharray="4 3"/>'
    )
    for v in (x_lo, 1.0, x_hi):
        out.append(f'<text x="{_f(sx(v))}" y="{HEIGHT - MARGIN + 15}" text-anchor="middle">{v:.2f}</text>')
    for v in (y_lo, 0.0, y_hi):
        out.append(f'<text x="{MARGIN - 5}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.3f}</text>')
    out.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">ER</text>')
    out.append(
        f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2:.0f})">ΔRI</text>'
    )
    for i, (label, er, dri) in enumerate(drawn):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<circle cx="{_f(sx(er))}" cy="{_f(sy(dri))}" r="4" fill="{color}"/>')
        out.append(f'<text x="{_f(sx(er) + 6)}" y="{_f(sy(dri) - 6)}">{escape(label)}</text>')
    if skipped:
        out.append(
            f'<text x="{MARGIN}" y="{HEIGHT - 2}" font-size="9">undefined: {escape(", ".join(skipped))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


_EVOLUTION_CATEGORIES = ("removed", "decreased", "unchanged", "increased", "added")


def evolution_svg(transitions: Sequence[tuple[str, EvolutionStats]], title: str = "Corpus evolution") -> str:
    """Stacked bars, one per snapshot transition, split into removed/decreased/unchanged/increased/added."""
    out = _header(title)
    plot_h = HEIGHT - 2 * MARGIN - 20
    totals = [sum(getattr(s, c) for c in _EVOLUTION_CATEGORIES) for _, s in transitions]
    top = max(totals, default=0) or 1
    n = max(len(transitions), 1)
    slot = (WIDTH - 2 * MARGIN) / n
    bar_w = slot * 0.6
    for i, (label, stats) in enumerate(transitions):
        x = MARGIN + i * slot + (slot - bar_w) / 2
        y = HEIGHT - MARGIN
        for j, cat in enumerate(_EVOLUTION_CATEGORIES):
            h = getattr(stats, cat) / top * plot_h
            y -= h
            out.append(
                f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(bar_w)}" height="{_f(h)}" '
                f'fill="{PALETTE[j]}"><title>{cat}: {getattr(stats, cat)}</title></rect>'
            )
        out.append(f'<text x="{_f(x + bar_w / 2)}" y="{HEIGHT - MARGIN + 15}" text-anchor="middle">{escape(label)}</text>')
    for j, cat in enumerate(_EVOLUTION_CATEGORIES):
        lx = MARGIN + j * 80
        out.append(f'<rect x="{lx}" y="30" width="10" height="10" fill="{PALETTE[j]}"/>')
        out.append(f'<text x="{lx + 14}" y="39">{cat}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def drift_svg(deltas: Sequence[tuple[str, float]], title: str = "Per-topic delta") -> str:
    """Bar per topic, in the given order, centred on zero."""
    out = _header(title)
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    extent = max((abs(d) for _, d in deltas), default=0.0) or 1.0
    zero_y = MARGIN + plot_h / 2
    out.append(f'<line x1="{MARGIN}" y1="{_f(zero_y)}" x2="{WIDTH - MARGIN}" y2="{_f(zero_y)}" stroke="#333"/>')
    out.append(f'<text x="{MARGIN - 5}" y="{MARGIN + 4}" text-anchor="end">{extent:.2f}</text>')
    out.append(f'<text x="{MARGIN - 5}" y="{HEIGHT - MARGIN + 4}" text-anchor="end">{-extent:.2f}</text>')
    n = max(len(deltas), 1)
    bar_w = plot_w / n
    for i, (topic, d) in enumerate(deltas):
        h = abs(d) / extent * (plot_h / 2)
        y = zero_y - h if d >= 0 else zero_y
        color = PALETTE[0] if d >= 0 else PALETTE[2]
        out.append(
            f'<rect x="{_f(MARGIN + i * bar_w)}" y="{_f(y)}" width="{_f(bar_w)}" height="{_f(h)}" '
            f'fill="{color}"><title>{escape(topic)}: {d:.4f}</title></rect>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
