"""Per-point evaluation, sweeps, and CSV/SVG output."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from html import escape

from .baselines import helstrom_bound, homodyne_limit
from .config import ConfigError, RunConfig
from .decision import DegenerateChannelError, RuleKind, default_rule, figures_of_merit
from .montecarlo import McProtocol, run_protocol

CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "p_err_analytic",
    "mi_analytic",
    "p_err_mc",
    "p_err_mc_err",
    "mi_mc",
    "mi_mc_err",
    "p_err_helstrom",
    "p_err_homodyne",
    "delta_th",
)


def evaluate_point(cfg: RunConfig, value: float | None = None, index: int = 0) -> dict:
    """One CSV row for the configuration with the swept parameter set to ``value``."""
    point = cfg.at(value)
    source, receiver = point.source(), point.receiver()
    kind = point.rule_kind(receiver.tau)
    try:
        rule = default_rule(source, receiver, kind)
    except DegenerateChannelError as exc:
        raise ConfigError("rule", f"map rule undefined here ({exc}); use --rule sign") from None
    except ValueError as exc:
        raise ConfigError("rule", str(exc)) from None
    fom = figures_of_merit(rule, source, receiver)
    row = {
        "sweep_param": cfg.sweep or "",
        "sweep_value": value if value is not None else "",
        "p_err_analytic": fom.p_err,
        "mi_analytic": fom.mi_bits,
        "p_err_mc": "",
        "p_err_mc_err": "",
        "mi_mc": "",
        "mi_mc_err": "",
        "p_err_helstrom": helstrom_bound(source.alpha_sq, source.q0),
        "p_err_homodyne": homodyne_limit(source.alpha_sq, source.q0),
        "delta_th": rule.delta_th if kind is RuleKind.MAP_THRESHOLD else "",
    }
    if cfg.mc:
        protocol = McProtocol(cfg.set_size, cfg.n_sets, cfg.resolved_seed())
        pe, mi = run_protocol(source, receiver, rule, protocol, point_index=index)
        row.update(p_err_mc=pe.mean, p_err_mc_err=pe.error_bar, mi_mc=mi.mean, mi_mc_err=mi.error_bar)
    return row


def run_sweep(cfg: RunConfig) -> list[dict]:
    grid = cfg.resolved_grid()
    tasks = list(enumerate(grid))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda t: evaluate_point(cfg, t[1], t[0]), tasks))
    return [evaluate_point(cfg, v, i) for i, v in tasks]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def render_svg(rows: list[dict], xlabel: str) -> str:
    """Two stacked panels: error probability and mutual information against the swept value."""
    width, panel_h, margin = 640, 240, 60
    height = 2 * panel_h + 2 * margin
    xs = [float(r["sweep_value"]) for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    panels = (("p_err_analytic", "p_err_mc", "P_err", "#1f4e9c"), ("mi_analytic", "mi_mc", "MI (bits)", "#b22222"))
    for i, (key, mc_key, label, color) in enumerate(panels):
        top = margin / 2 + i * (panel_h + margin)
        bottom = top + panel_h
        ys = [float(r[key]) for r in rows] + [float(r[mc_key]) for r in rows if r[mc_key] != ""]
        y_lo, y_hi = min(ys), max(ys)
        pad = (y_hi - y_lo) * 0.05 or abs(y_hi) * 0.05 or 0.05
        y_lo, y_hi = y_lo - pad, y_hi + pad

        def sy(y, top=top, y_lo=y_lo, y_hi=y_hi):
            return top + (y_hi - y) / (y_hi - y_lo) * panel_h

        left, right = margin, width - margin
        parts.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
        parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')
        for t in _ticks(y_lo, y_hi):
            y = sy(t)
            parts.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
            parts.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">{t:.3g}</text>')
        for t in _ticks(x_lo, x_hi):
            x = sx(t)
            parts.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 4}" stroke="black"/>')
            parts.append(f'<text x="{x:.2f}" y="{bottom + 16}" text-anchor="middle">{t:.3g}</text>')
        parts.append(
            f'<text x="{left + 8}" y="{top + 12}" fill="{color}">{escape(label)}</text>'
        )
        pts = " ".join(f"{sx(x):.2f},{sy(float(r[key])):.2f}" for x, r in zip(xs, rows))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, r in zip(xs, rows):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(float(r[key])):.2f}" r="2.5" fill="{color}"/>')
            if r[mc_key] != "":
                parts.append(
                    f'<rect x="{sx(x) - 3:.2f}" y="{sy(float(r[mc_key])) - 3:.2f}" width="6" height="6" '
                    f'fill="none" stroke="black"/>'
                )
    parts.append(
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
