"""Command-line entry point: ``deepnqs <subcommand> [--config FILE] [overrides]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import config as hconfig
from .harness import output, sweeps

COMMANDS = {
    "meanfield-sweep": (hconfig.Experiment.MEANFIELD, sweeps.run_meanfield_sweep),
    "entanglement-sweep": (hconfig.Experiment.ENTANGLEMENT, sweeps.run_entanglement_sweep),
    "scaling-sweep": (hconfig.Experiment.SCALING, sweeps.run_scaling_sweep),
    "energy-sweep": (hconfig.Experiment.ENERGY, sweeps.run_energy_sweep),
    "correlation-check": (hconfig.Experiment.CORRELATION, sweeps.empirical_correlation_check),
}


def _int_list(text):
    return [int(v) for v in hconfig.parse_grid(text)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepnqs", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--sigma-w", dest="sigma_w_grid", type=hconfig.parse_grid,
                       help="comma list or start:stop:step")
        p.add_argument("--L", dest="L_list", type=_int_list)
        p.add_argument("--mu", dest="mu_list", type=_int_list)
        p.add_argument("--alpha", type=float)
        p.add_argument("--realizations", dest="n_realizations", type=int)
        p.add_argument("--seed", dest="master_seed", type=int)
        p.add_argument("--sigma-b", dest="sigma_b", type=float)
        p.add_argument("--workers", type=int)
        p.add_argument("--activation", dest="network_activation")
        p.add_argument("--boundary")
        p.add_argument("--width", type=int)
        p.add_argument("--stderr", dest="with_stderr", action="store_const", const=True)
        p.add_argument("--dump-values", dest="dump_values", action="store_const", const=True)
        p.add_argument("--reference-ensemble", action="store_true",
                       help=f"use {hconfig.REFERENCE_REALIZATIONS} realizations per point")
        p.add_argument("--out", dest="output_path", help="CSV path (stdout if omitted)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    experiment, runner = COMMANDS[args.command]
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "verbose", "reference_ensemble")}
    if args.reference_ensemble:
        overrides["n_realizations"] = hconfig.REFERENCE_REALIZATIONS
    overrides["experiment"] = experiment
    try:
        cfg = hconfig.load_config(args.config, **overrides).validate()
    except ValueError as exc:
        print(f"deepnqs: invalid configuration: {exc}", file=sys.stderr)
        return 2
    text = output.emit(cfg, runner(cfg))
    if not cfg.output_path:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
