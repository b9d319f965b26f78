"""Command line entry point: ``szegoscat <stage> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import STAGES, ExperimentConfig
from .errors import SzegoscatError
from .runner import package_version, run

log = logging.getLogger("szegoscat")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--grid", metavar="M", type=int, help="circle grid size (power of two)")
    common.add_argument("--seed", metavar="S", type=int, help="seed for random families and weights")
    common.add_argument("--strict-l2", action="store_true", help="reject ||gamma||_2 > 1/2")
    common.add_argument("--allow-large-kappa", action="store_true",
                        help="permit kappa above the default ceiling")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="szegoscat",
                                description="Scattering experiments for Jacobi operators "
                                            "built from Verblunsky coefficients.")
    p.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        sub.add_parser(name, parents=[common], help=f"run the {name} stage" if name != "all"
                       else "run every stage")
    return p


def config_from_args(args):
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.seed is not None and cfg.family.get("kind") == "random":
        fam = dict(cfg.family, seed=args.seed)
    else:
        fam = None
    return ExperimentConfig.from_dict({
        **cfg.to_dict(),
        **({"family": fam} if fam else {}),
        **({"out_dir": args.out} if args.out else {}),
        **({"grid_M": args.grid} if args.grid is not None else {}),
        **({"seed": args.seed} if args.seed is not None else {}),
        "strict_l2": cfg.strict_l2 or args.strict_l2,
        "allow_large_kappa": cfg.allow_large_kappa or args.allow_large_kappa,
    })


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        stages = cfg.stages if args.command == "all" else (args.command,)
        result = run(cfg, stages)
    except SzegoscatError as exc:
        print(f"szegoscat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    m = result.manifest
    for stage, flags in m.flags.items():
        for name, ok in flags.items():
            print(f"{stage}.{name}: {'pass' if ok else 'FAIL'}")
        log.info("%s took %.2f s", stage, m.timings[stage])
    for stage, err in m.errors.items():
        print(f"{stage}: error: {err}", file=sys.stderr)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
