"""Command line: ``wfh point``, ``wfh sweep``, ``wfh validate``.

Exit codes: 0 success, 1 a validation check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import sys

from .checks import perturbed_pmf, run_checks
from .config import SWEEPABLE, ConfigError, RunConfig, parse_grid
from .report import evaluate_point, format_csv, render_svg, run_sweep
from .skellam import skellam_pmf

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

# flag dest -> RunConfig field
_OVERRIDES = {
    "alpha_sq": "alpha_sq",
    "q0": "q0",
    "z_sq": "z_sq",
    "tau": "tau",
    "xi": "xi",
    "dark_mean": "dark_mean",
    "sweep": "sweep",
    "grid": "grid",
    "rule": "rule",
    "mc": "mc",
    "sets": "n_sets",
    "set_size": "set_size",
    "seed": "seed",
    "csv": "csv",
    "svg": "svg",
    "workers": "workers",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields")
    g = p.add_argument_group("parameters")
    g.add_argument("--alpha-sq", dest="alpha_sq", type=float, help="signal mean photon number")
    g.add_argument("--q0", type=float, help="prior probability of symbol 0")
    g.add_argument("--z-sq", dest="z_sq", type=float, help="local-oscillator mean photon number")
    g.add_argument("--tau", type=float, help="beam-splitter transmissivity")
    g.add_argument("--xi", type=float, help="interference visibility")
    g.add_argument("--dark-mean", dest="dark_mean", type=float, help="dark-count mean per port")
    g.add_argument("--rule", choices=("sign", "map"), help="decision rule (default: sign at tau=0.5, else map)")
    mc = p.add_argument_group("monte carlo")
    mc.add_argument("--mc", action="store_true", default=None, help="add Monte Carlo columns")
    mc.add_argument("--sets", type=int, help="number of sets (default 3)")
    mc.add_argument("--set-size", dest="set_size", type=int, help="shots per set (default 50000)")
    mc.add_argument("--seed", type=int, help="master seed (falls back to $WFH_SEED, then 0)")
    out = p.add_argument_group("output")
    out.add_argument("--csv", help="write CSV here instead of stdout")
    out.add_argument("--svg", help="also write an SVG plot (sweep only)")
    out.add_argument("--workers", type=int, help="concurrent sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfh", description="BPSK discrimination with a weak-field homodyne receiver."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    point = sub.add_parser("point", help="analytic (and optional Monte Carlo) figures at one point")
    _add_common(point)

    sweep = sub.add_parser("sweep", help="figures of merit along one parameter")
    _add_common(sweep)
    sweep.add_argument("--sweep", choices=SWEEPABLE, help="parameter to sweep")
    sweep.add_argument("--grid", help="start:stop:n or comma-separated values")

    validate = sub.add_parser("validate", help="run the invariant suite")
    validate.add_argument("--config", help="JSON file (only seed is used)")
    validate.add_argument("--seed", type=int, help="master seed for the Monte Carlo check")
    validate.add_argument("--inject-perturbation", action="store_true", help=argparse.SUPPRESS)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    for dest, name in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[name] = parse_grid(value) if dest == "grid" else value
    return cfg.updated(overrides)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_point(cfg: RunConfig) -> int:
    cfg.validate(require_sweep=False)
    row = evaluate_point(cfg)
    _emit(format_csv([row]), cfg.csv)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    cfg.validate(require_sweep=True)
    rows = run_sweep(cfg)
    _emit(format_csv(rows), cfg.csv)
    if cfg.svg:
        with open(cfg.svg, "w") as fh:
            fh.write(render_svg(rows, cfg.sweep))
    return EXIT_OK


def cmd_validate(cfg: RunConfig, perturb: bool = False) -> int:
    seed = cfg.resolved_seed()
    pmf = perturbed_pmf() if perturb else skellam_pmf
    results = run_checks(seed=seed, pmf=pmf)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = [r.name for r in results if not r.ok]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "point":
            return cmd_point(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        return cmd_validate(cfg, perturb=args.inject_perturbation)
    except ConfigError as exc:
        print(f"wfh: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"wfh: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
