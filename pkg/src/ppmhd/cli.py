"""Command-line entry point: ``ppmhd run|converge|compare``."""

from __future__ import annotations

import argparse
import sys

from .harness import (EXIT_ABORT, EXIT_CONFIG, EXIT_OK, ConfigError, RunConfig, compare_schemes,
                      convergence_study, execute, format_comparison, format_convergence, load_config)
from .problems import PROBLEMS

RUN_KEYS = ("problem", "nx", "ny", "nz", "cfl", "t_final", "gamma", "limiter", "ct", "energy_option",
            "per_stage_limiting", "eps0", "dump_interval", "out", "resistivity_coeff")


def _meshes(text: str):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mesh list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppmhd", description="Positivity-preserving WENO solver for ideal MHD.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one problem")
    run.add_argument("--config", help="key = value settings file; flags override it")
    run.add_argument("--problem", choices=sorted(PROBLEMS))
    for ax in ("nx", "ny", "nz"):
        run.add_argument(f"--{ax}", type=int)
    run.add_argument("--cfl", type=float)
    run.add_argument("--t-final", type=float)
    run.add_argument("--gamma", type=float)
    run.add_argument("--limiter", choices=("on", "off"))
    run.add_argument("--ct", choices=("on", "off"))
    run.add_argument("--energy-option", type=int, choices=(1, 2))
    run.add_argument("--per-stage-limiting", choices=("on", "off"))
    run.add_argument("--eps0", type=float)
    run.add_argument("--dump-interval", type=float)
    run.add_argument("--resistivity-coeff", type=float)
    run.add_argument("--out", default=None)

    conv = sub.add_parser("converge", help="smooth-vortex convergence table")
    conv.add_argument("--meshes", type=_meshes, default=[40, 80, 160])
    conv.add_argument("--t-final", type=float, default=0.05)
    conv.add_argument("--limiter", choices=("on", "off"), default="on")

    cmp_ = sub.add_parser("compare", help="scheme comparison on the 2D blast")
    cmp_.add_argument("--meshes", type=_meshes, default=[150])
    cmp_.add_argument("--t-final", type=float)
    return p


def _run(args) -> int:
    overrides = {k: getattr(args, k) for k in RUN_KEYS if getattr(args, k, None) is not None}
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = RunConfig().update(overrides).validate()
    outcome = execute(cfg)
    res = outcome.result
    if res.aborted:
        print(f"solver abort at t={res.t:.6g}: {res.reason}", file=sys.stderr)
        return EXIT_ABORT
    last = res.records[-1] if res.records else None
    msg = f"{cfg.problem}: reached t={res.t:.6g} in {res.steps} steps"
    if last is not None:
        msg += f"; min rho {last.min_rho:.3e}, min p {last.min_p:.3e}"
    if not res.positive:
        msg += f"; negative state first seen at t={res.first_negative_time:.6g}"
    print(msg)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "converge":
            base = RunConfig(problem="smooth-vortex", limiter=args.limiter == "on")
            print(format_convergence(convergence_study(args.meshes, args.t_final, base)))
            return EXIT_OK
        if args.command == "compare":
            print(format_comparison(compare_schemes(args.meshes, args.t_final)))
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
