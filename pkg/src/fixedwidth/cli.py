"""Command line interface: ``fixedwidth run|coverage|truth --config FILE``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .config import FORMATS, load_config
from .core import ConfigError, UnsupportedExperimentError
from .harness import run_once, run_replications, truths_for
from .report import ReportError, ReportIOError, emit_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixedwidth",
        description="Fixed-width sequential stopping rules for MCMC output.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=False, fmt=True):
        p.add_argument("--config", required=True, help="experiment config file (key = value)")
        p.add_argument("--seed", type=int, help="override the base seed")
        if workers:
            p.add_argument("--workers", type=int, help="worker processes for replications")
        if fmt:
            p.add_argument("--format", choices=FORMATS, help="output format (default from config)")
        p.add_argument("--out", help="write output here instead of stdout")

    common(sub.add_parser("run", help="single sequential run; prints the stopping result"))
    common(sub.add_parser("coverage", help="replication study; prints a coverage report"), workers=True)
    common(sub.add_parser("truth", help="print registered true values"), fmt=False)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _format_run(config, results, fmt: str) -> str:
    if fmt == "json":
        doc = []
        for r in results:
            doc.append({
                "rule": r.rule.kind, "label": r.rule.label, "n_stop": r.n_stop, "capped": r.capped,
                "estimates": {k: None if e is None else {
                    "n": e.n, "point": float(f"{e.point:.6g}"),
                    "sigma_hat": float(f"{e.sigma_hat:.6g}"),
                    "lambda_hat": float(f"{e.lambda_hat:.6g}"),
                    "half_width": float(f"{e.half_width:.6g}"), "delta": float(f"{e.delta:.6g}"),
                } for k, e in r.estimates.items()},
            })
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        lines = ["rule,epsilon,parameter,n_stop,capped,point,sigma_hat,lambda_hat,half_width"]
        for r in results:
            for i, spec in enumerate(config.specs):
                e = r.estimates[spec.id]
                vals = ["", "", "", ""] if e is None else [
                    f"{e.point:.6g}", f"{e.sigma_hat:.6g}", f"{e.lambda_hat:.6g}", f"{e.half_width:.6g}"]
                lines.append(",".join([r.rule.kind, f"{r.rule.epsilon_for(i):.6g}", spec.id,
                                       str(r.n_stop), str(int(r.capped))] + vals))
        return "\n".join(lines) + "\n"
    out = []
    for r in results:
        status = "CAPPED at" if r.capped else "stopped at"
        out.append(f"{r.rule.label}: {status} n = {r.n_stop}")
        for spec in config.specs:
            e = r.estimates[spec.id]
            if e is None:
                out.append(f"  {spec.id:>12}  (estimate unavailable)")
            else:
                out.append(f"  {spec.id:>12}  {e.point:.6g} +/- {e.half_width:.6g}"
                           f"  (mcse {e.mcse:.6g}, scale {e.lambda_hat:.6g})")
    return "\n".join(out) + "\n"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            config = replace(config, seed=args.seed)
        if getattr(args, "workers", None) is not None:
            config = replace(config, workers=args.workers)
        fmt = getattr(args, "format", None) or config.format
        out = args.out if args.out is not None else config.output

        if args.command == "truth":
            truths = truths_for(config)
            text = "".join(f"{k}\t{'n/a' if v is None else f'{v:.10g}'}\n" for k, v in truths.items())
            _emit(text, args.out)
        elif args.command == "run":
            _emit(_format_run(config, run_once(config, 0), fmt), args.out)
        else:
            report = run_replications(config)
            _emit(emit_report(report, fmt), out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedExperimentError as exc:
        print(f"unsupported experiment: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ReportIOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ReportError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
