"""Command line: run experiments or scripted scenarios and emit reports.

Exit codes: 0 success, 2 bad configuration, 3 unreadable trace,
4 an architecture verdict disagreed with the oracle.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ARCHITECTURES, RunConfig, load_config
from .errors import ConfigError, TraceError, UnknownScenario
from .metrics import emit_audit, emit_reports
from .runner import run
from .scenarios import SCENARIOS, scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRACE = 3
EXIT_ORACLE = 4

log = logging.getLogger("fogcert")


def build_parser():
    ap = argparse.ArgumentParser(prog="fogcert", description="Location-certification simulator for mobile producers.")
    ap.add_argument("--config", help="key=value config file (default: $FOGCERT_CONFIG if set)")
    ap.add_argument("--arch", choices=ARCHITECTURES + ("assigned",))
    ap.add_argument("--pf", type=float, help="probability that a publication carries a false location")
    ap.add_argument("--seeds", help="e.g. 1..5 or 1,2,7")
    ap.add_argument("--trace", help="ns-2 movement file; {seed} is replaced by the seed")
    ap.add_argument("--duration-s", type=float, help="simulated duration in seconds")
    ap.add_argument("--producers", type=int)
    ap.add_argument("--workers", type=int, help="parallel seed workers")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    ap.add_argument("--out", help="write the report here (and the effective config to OUT.config)")
    ap.add_argument("--format", choices=("csv", "json", "table"), default="csv")
    ap.add_argument("--scenario", help=f"run a scripted scenario: {', '.join(SCENARIOS)}")
    ap.add_argument("--audit", help="write one CSV row per delivered, lost or queued notification to this path")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def effective_config(args, environ=os.environ) -> RunConfig:
    cfg = RunConfig()
    path = args.config or environ.get("FOGCERT_CONFIG")
    if path:
        try:
            cfg = load_config(path)
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e.strerror}") from None
    overrides = {
        "architecture": args.arch,
        "pf": args.pf,
        "seeds": args.seeds,
        "trace": args.trace,
        "producers": args.producers,
        "workers": args.workers,
    }
    if args.duration_s is not None:
        overrides["duration_ms"] = int(round(args.duration_s * 1000))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    return cfg.with_overrides(overrides).resolved()


def _write(path, data: bytes):
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def main(argv=None, environ=os.environ) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.scenario:
            res = scenario(args.scenario)
            _write(args.out, emit_reports([res.report], args.format))
            if args.audit:
                _write(args.audit, emit_audit(res.audit))
            failures = res.sim.oracle_failures
        else:
            cfg = effective_config(args, environ)
            result = run(cfg, with_audit=bool(args.audit))
            reports = result.reports
            if len(reports) > 1:
                reports = reports + [result.aggregate]
            _write(args.out, emit_reports(reports, args.format))
            if args.out and args.out != "-":
                _write(args.out + ".config", cfg.dump().encode())
            if args.audit:
                _write(args.audit, emit_audit(result.audit))
            failures = result.oracle_failures
    except (ConfigError, UnknownScenario) as e:
        print(f"fogcert: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceError as e:
        print(f"fogcert: trace error: {e}", file=sys.stderr)
        return EXIT_TRACE
    if failures:
        print(f"fogcert: {len(failures)} verdicts disagreed with the oracle", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
