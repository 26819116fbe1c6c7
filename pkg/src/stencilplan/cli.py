"""Command line front end; a thin client over the planner library.

Exit codes: 0 success, 1 parity or oracle failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import planner
from .hardware import ConfigError, get_hardware
from .shapes import catalog_document


def _bool_flag(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stencilplan",
        description="Temporal-blocking planner and desk-scale stencil simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--hardware", default="a100", help="preset name or config path")
        p.add_argument("--suite", default=None, help="suite config file (JSON)")
        p.add_argument("--out", default=None, help="report output directory")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument(
            "--two-sided-halo", type=_bool_flag, default=True,
            help="count both halo sides in valid-proportion formulas",
        )
        p.add_argument(
            "--paper-parity", action="store_true",
            help="use the published one-sided valid-proportion text form",
        )

    for name in ("plan", "simulate", "validate", "report"):
        common(sub.add_parser(name))
    sub.add_parser("catalog")
    serve = sub.add_parser("serve")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _suite_from_args(args) -> planner.SuiteConfig:
    if args.suite:
        suite = planner.SuiteConfig.from_file(args.suite)
    else:
        suite = planner.SuiteConfig()
    suite.hardware = args.hardware
    suite.seed = args.seed
    suite.workers = args.workers
    suite.two_sided = args.two_sided_halo and not args.paper_parity
    return suite


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "catalog":
        sys.stdout.write(catalog_document())
        return 0
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "report":
        out = Path(args.out or ".")
        path = out / "report.json"
        if not path.exists():
            raise ConfigError(f"no report.json under {out}")
        payload = json.loads(path.read_text())
        sys.stdout.write(planner.render_table(payload))
        return 0

    suite = _suite_from_args(args)
    hw = get_hardware(args.hardware)
    if args.command == "plan":
        payload = planner.cmd_plan(suite, hw)
        ok = True
    elif args.command == "simulate":
        payload = planner.cmd_simulate(suite, hw)
        ok = payload["ok"]
        if not ok:
            for rec in payload["runs"]:
                if rec["oracle"] == "fail":
                    print(
                        f"oracle mismatch: {rec['stencil']} first differing "
                        f"cell index {rec['first_mismatch_index']}",
                        file=sys.stderr,
                    )
    else:  # validate
        payload = planner.cmd_validate(hw)
        ok = payload["ok"]
    sys.stdout.write(planner.render_table(payload))
    if args.out:
        planner.write_report(args.out, payload, suite)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
