"""Static SVG line charts of running averages"""
import logging
import math
from pathlib import Path

from jinja2 import Environment, PackageLoader, StrictUndefined

from ergodiff.models.ergodic import EnsembleSummary

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 800, 600
MARGINS = {"left": 80, "right": 20, "top": 40, "bottom": 60}
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
)

_env = Environment(
    loader=PackageLoader("ergodiff", "templates"),
    undefined=StrictUndefined,
    autoescape=True,
    keep_trailing_newline=True,
)


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions (1, 2, 5 times a power of ten) covering [lo, hi]"""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    power = 10.0 ** math.floor(math.log10(raw))
    step = next(m * power for m in (1.0, 2.0, 5.0, 10.0) if m * power >= raw)
    first = math.floor(lo / step + 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(round(first + k * step, 12))
        k += 1
    if ticks[-1] < hi:
        ticks.append(round(first + k * step, 12))
    return ticks


def _label(value: float) -> str:
    return f"{value:g}"


def render_series_svg(summary: EnsembleSummary, title: str | None = None) -> str:
    """One polyline per trajectory of f_T against T, linear axes"""
    left = MARGINS["left"]
    right = WIDTH - MARGINS["right"]
    top = MARGINS["top"]
    bottom = HEIGHT - MARGINS["bottom"]

    drawn = [s for s in summary.series if len(s)]
    t_max = max((float(s.times[-1]) for s in drawn), default=1.0)
    f_max = max((float(s.averages.max()) for s in drawn), default=1.0)
    x_ticks = nice_ticks(0.0, t_max)
    y_ticks = nice_ticks(0.0, max(f_max, 1e-3))
    x_span, y_span = x_ticks[-1], y_ticks[-1]

    def px(t: float) -> float:
        return left + (right - left) * t / x_span

    def py(f: float) -> float:
        return bottom - (bottom - top) * f / y_span

    lines = []
    for i, item in enumerate(drawn):
        points = " ".join(
            f"{px(t):.2f},{py(f):.2f}" for t, f in zip(item.times, item.averages)
        )
        lines.append({"color": PALETTE[i % len(PALETTE)], "points": points})

    center = ", ".join(f"{c:g}" for c in summary.ball.center)
    return _env.get_template("ergodic_series.svg.j2").render(
        width=WIDTH,
        height=HEIGHT,
        left=left,
        right=right,
        top=top,
        bottom=bottom,
        title=title or f"f_T for the ball of radius {summary.ball.radius:g} at ({center})",
        x_label="T",
        y_label="f_T",
        x_ticks=[{"pos": f"{px(t):.2f}", "label": _label(t)} for t in x_ticks],
        y_ticks=[{"pos": f"{py(f):.2f}", "label": _label(f)} for f in y_ticks],
        lines=lines,
    )


def write_series_svg(summary: EnsembleSummary, path: Path, title: str | None = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_series_svg(summary, title), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path
