"""Deterministic SVG emission: mean curves with +/-1 std bands per method."""

from __future__ import annotations

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
)


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (count - 1) for i in range(count)]


def _fmt(v: float) -> str:
    return format(v, ".3f").rstrip("0").rstrip(".") or "0"


def emit_plot(aggregates: dict, path: str, metric: str = "success_rate",
              title: str = "", x_label: str = "environment steps"):
    """Write an SVG comparing one metric across labeled aggregates.

    `aggregates` maps label -> aggregate dict from `harness.aggregate`.
    Output bytes are a pure function of the inputs.
    """
    if not aggregates:
        raise ValueError("nothing to plot")
    xs_all, lo_all, hi_all = [], [], []
    series = []
    for label, agg in aggregates.items():
        x = agg["env_steps"]
        mean, std = agg[metric]
        series.append((label, x, mean, std))
        xs_all.extend([float(x[0]), float(x[-1])])
        lo_all.append(float((mean - std).min()))
        hi_all.append(float((mean + std).max()))
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(lo_all + [0.0]), max(hi_all + [1e-9])
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    # axes
    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}" '
        f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="black"/>'
    )
    for tx in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{px(tx):.1f}" y="{HEIGHT - MARGIN_B + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{py(ty) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.1f}" y="{HEIGHT - 12}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(MARGIN_T + HEIGHT - MARGIN_B) / 2:.1f})">{metric}</text>'
    )

    for i, (label, x, mean, std) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        upper = [(px(a), py(b)) for a, b in zip(x, mean + std)]
        lower = [(px(a), py(b)) for a, b in zip(x, mean - std)]
        band = " ".join(f"{a:.2f},{b:.2f}" for a, b in upper + lower[::-1])
        parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.18"/>')
        line = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, mean))
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.6"/>'
        )
        ly = MARGIN_T + 16 + 16 * i
        parts.append(
            f'<line x1="{WIDTH - MARGIN_R - 130}" y1="{ly}" '
            f'x2="{WIDTH - MARGIN_R - 105}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_R - 100}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
