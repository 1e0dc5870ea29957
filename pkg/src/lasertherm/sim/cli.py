"""Command line entry point: ``lasertherm {run,validate,compare,preset}``.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..stepper import SolverError
from .config import ConfigError, load_config
from .driver import compare, run
from .io import read_probe_csv
from .materials import preset

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("lasertherm")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lasertherm", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "execute a simulation"), ("validate", "check a config only")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config entry, e.g. laser.power=2.0")
        if name == "run":
            s.add_argument("--output-dir", help="overrides output.directory")

    c = sub.add_parser("compare", help="RMSE between two probe CSV files")
    c.add_argument("series_a")
    c.add_argument("series_b")

    t = sub.add_parser("preset", help="print tissue parameters")
    t.add_argument("tissue")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = getattr(logging, args.log_level)
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(console)
    log.setLevel(level)
    log.propagate = False
    try:
        return _main(args)
    finally:
        log.removeHandler(console)
        log.propagate = True
        log.setLevel(logging.NOTSET)


def _main(args) -> int:
    try:
        return _dispatch(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


def _dispatch(args) -> int:
    if args.command == "preset":
        m = preset(args.tissue)
        print(f"tissue = {args.tissue.lower()}")
        print(f"mu_a   = {m.mu_a!r}  1/cm")
        print(f"c_v    = {m.c_v!r}  J/(cm^3 degC)")
        print(f"kappa  = {m.kappa!r}  W/(cm degC)")
        print(f"h      = {m.h!r}  W/(cm^2 degC)")
        print(f"T_inf  = {m.T_inf!r}  degC")
        return EXIT_OK

    if args.command == "compare":
        a_all, b_all = read_probe_csv(args.series_a), read_probe_csv(args.series_b)
        b_by_name = {s.name: s for s in b_all}
        shared = [a for a in a_all if a.name in b_by_name]
        if not shared:
            raise ValueError("the two files share no probe columns")
        for a in shared:
            print(f"{a.name}: RMSE = {compare(a, b_by_name[a.name]):.6g} degC")
        return EXIT_OK

    config = load_config(args.config, args.overrides)
    if args.command == "validate":
        print(f"{args.config}: ok ({config.n_steps} steps, {len(config.probes)} probes)")
        return EXIT_OK
    result = run(config, output_dir=args.output_dir)
    print(result.probe_csv)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
