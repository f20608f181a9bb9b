"""Deterministic log-log SVG rendering of aggregated sweep series."""

import math
from typing import Dict, List, Sequence, Tuple

from jinja2 import Environment, PackageLoader, select_autoescape

from qmcd.models.experiment import AggregatedCell
from qmcd.utils.series_analyzer import SeriesAnalyzer

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 40, 50
LEGEND_ROW = 16

_env = Environment(
    loader=PackageLoader("qmcd", "templates"),
    autoescape=select_autoescape(["svg", "xml", "j2"]),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _range(values: List[float]) -> Tuple[float, float]:
    low, high = min(values), max(values)
    if high - low < 1e-12:
        return low - 0.5, high + 0.5
    return low, high


def render_loglog(series: Dict[str, Sequence[AggregatedCell]], title: str = "") -> str:
    """SVG text for mean lines (log2 n vs log10 error) with min/max whiskers."""
    log_n = [math.log2(c.n) for cells in series.values() for c in cells]
    positive = [v for cells in series.values() for c in cells for v in (c.mean, c.min, c.max) if v > 0]
    if not positive:
        positive = [1.0]
    x_lo, x_hi = _range(log_n)
    y_lo, y_hi = _range([math.log10(v) for v in positive])
    x_lo, x_hi = math.floor(x_lo), math.ceil(x_hi)
    y_lo, y_hi = math.floor(y_lo), math.ceil(y_hi)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def x_of(n: int) -> float:
        return MARGIN_LEFT + (math.log2(n) - x_lo) / (x_hi - x_lo) * plot_w

    def y_of(value: float) -> float:
        clipped = max(value, 10.0 ** y_lo)
        return MARGIN_TOP + (y_hi - math.log10(clipped)) / (y_hi - y_lo) * plot_h

    rendered = []
    for index, (label, cells) in enumerate(series.items()):
        drawn = [c for c in cells if c.mean > 0]
        rendered.append(
            {
                "label": label,
                "color": SeriesAnalyzer.series_color(cells, index),
                "points": " ".join(f"{_fmt(x_of(c.n))},{_fmt(y_of(c.mean))}" for c in drawn),
                "whiskers": [
                    {"x": _fmt(x_of(c.n)), "y1": _fmt(y_of(c.min)), "y2": _fmt(y_of(c.max))} for c in drawn
                ],
                "legend_y": _fmt(MARGIN_TOP + 12 + index * LEGEND_ROW),
            }
        )

    x_ticks = [{"pos": _fmt(MARGIN_LEFT + (k - x_lo) / (x_hi - x_lo) * plot_w), "label": f"2^{k}"} for k in range(x_lo, x_hi + 1)]
    y_ticks = [{"pos": _fmt(MARGIN_TOP + (y_hi - k) / (y_hi - y_lo) * plot_h), "label": f"1e{k}"} for k in range(y_lo, y_hi + 1)]

    return _env.get_template("loglog.svg.j2").render(
        width=WIDTH,
        height=HEIGHT,
        title=title,
        left=MARGIN_LEFT,
        right=WIDTH - MARGIN_RIGHT,
        top=MARGIN_TOP,
        bottom=HEIGHT - MARGIN_BOTTOM,
        legend_x=WIDTH - MARGIN_RIGHT - 230,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        series=rendered,
    )
