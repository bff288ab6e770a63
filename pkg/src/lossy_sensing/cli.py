"""Command-line front end: point queries, custom sweeps and canned figure data.

Examples::

    lossy-sensing point --parameter gamma --x 0.8 --nt 0 --input fock:1
    lossy-sensing sweep --parameter nt --axis nt --range 0.1:10:100 --eta 0.9 \\
        --input fock:1 --quantities exact_counting,purification_bound
    lossy-sensing fig2 --out fig2.csv
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from importlib import resources

from .fockspace import ChannelParams, InputState, Parameter
from .report import (
    QUANTITIES,
    Settings,
    SweepSpec,
    Table,
    fmt,
    point_report,
    run_series,
)

log = logging.getLogger("lossy_sensing")

FIGURES = ("fig2", "fig3", "figS1")
CONFIG_KEYS = {
    "tail_tol": float,
    "p_floor": float,
    "min_dim": int,
    "sequential_method": str,
    "format": str,
}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """Read ``key = value`` defaults; a section header is optional."""
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser()
    parser.read_string("[defaults]\n" + text if not text.lstrip().startswith("[") else text)
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in CONFIG_KEYS:
                raise UsageError(f"config: unknown key {key!r} in {path}")
            out[key] = CONFIG_KEYS[key](raw)
    return out


def load_figure(name: str) -> dict:
    text = resources.files("lossy_sensing").joinpath("figures", f"{name}.json").read_text()
    return json.loads(text)


def figure_table(name: str, settings: Settings = Settings(), points: int | None = None) -> Table:
    fig = load_figure(name)
    specs = []
    for d in fig["series"]:
        if points is not None:
            d = {**d, "range": [d["range"][0], d["range"][1], points]}
        specs.append(SweepSpec.from_dict(d))
    meta = {"figure": fig["name"], "description": fig["description"], "notes": fig.get("notes", "")}
    return run_series(specs, settings, meta)


def render_table(table: Table, fmt_name: str) -> str:
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()
    rows = [dict(zip(table.columns, (_json_cell(v) for v in row))) for row in table.rows]
    return json.dumps({"metadata": table.metadata, "columns": table.columns, "rows": rows}, indent=2) + "\n"


def _json_cell(v):
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return None
        return float(f"{v:.12g}")
    return v


def _parse_range(text: str) -> tuple[float, float, int]:
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise UsageError(f"range: expected a:b:n, got {text!r}") from None


def _channel(args) -> ChannelParams:
    if args.x is not None and args.eta is not None:
        raise UsageError("give either --x or --eta, not both")
    nt = 0.0 if args.nt is None else args.nt
    if args.x is not None:
        return ChannelParams(args.x, nt)
    if args.eta is not None:
        return ChannelParams.from_eta(args.eta, nt)
    raise UsageError("eta: one of --x or --eta is required")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lossy-sensing",
        description="Precision limits for estimating damping and temperature of a lossy bosonic channel.",
    )
    ap.add_argument("--config", help="key = value file with defaults (tail_tol, p_floor, min_dim, ...)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--out", help="write to PATH instead of stdout")
        p.add_argument("--tail-tol", type=float, default=None)
        p.add_argument("--p-floor", type=float, default=None)
        p.add_argument("--min-dim", type=int, default=None)
        p.add_argument("--sequential-method", choices=["expansion", "exact"], default=None)

    p = sub.add_parser("point", help="all bounds at one channel point")
    p.add_argument("--parameter", default="gamma", help="gamma or nt")
    p.add_argument("--x", type=float, help="damping exposure gamma*t")
    p.add_argument("--eta", type=float, help="transmissivity exp(-2 gamma t)")
    p.add_argument("--nt", type=float, default=0.0)
    p.add_argument("--input", default="fock:1", help="fock:m | thermal:mean | vacuum")
    p.add_argument("--slice-x", type=float, help="slice exposure for the sequential strategy")
    common(p)

    s = sub.add_parser("sweep", help="tabulate quantities along one axis")
    s.add_argument("--parameter", default="gamma")
    s.add_argument("--axis", required=True, choices=["nt", "eta", "slice_x"])
    s.add_argument("--range", required=True, help="start:stop:points")
    s.add_argument("--x", type=float)
    s.add_argument("--eta", type=float)
    s.add_argument("--nt", type=float)
    s.add_argument("--slice-x", type=float)
    s.add_argument("--input", default="fock:1")
    s.add_argument("--quantities", default="exact_counting,purification_bound",
                   help="comma list from: " + ", ".join(QUANTITIES))
    s.add_argument("--label", default="")
    common(s)

    for name in FIGURES:
        f = sub.add_parser(name, help=f"data for {name}")
        f.add_argument("--points", type=int, help="override the number of grid points")
        common(f)
    return ap


def _settings(args, config: dict) -> Settings:
    def pick(flag, key, default):
        v = getattr(args, flag, None)
        return v if v is not None else config.get(key, default)

    base = Settings()
    return Settings(
        tail_tol=pick("tail_tol", "tail_tol", base.tail_tol),
        p_floor=pick("p_floor", "p_floor", base.p_floor),
        min_dim=pick("min_dim", "min_dim", base.min_dim),
        sequential_method=pick("sequential_method", "sequential_method", base.sequential_method),
    )


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = read_config(args.config) if args.config else {}
        settings = _settings(args, config)
        out_format = args.format or config.get("format")
        if args.command == "point":
            params = _channel(args)
            report = point_report(
                Parameter.parse(args.parameter), params, InputState.parse(args.input),
                slice_x=args.slice_x, settings=settings,
            )
            if (out_format or "json") == "json":
                text = json.dumps(report.to_dict(), indent=2) + "\n"
            else:
                table = Table(columns=["quantity", "value", "reason"])
                for k, v in report.to_dict()["quantities"].items():
                    table.rows.append([k, v["value"], v["reason"] or ""])
                text = render_table(table, "csv")
        elif args.command == "sweep":
            start, stop, points = _parse_range(args.range)
            x_eta = args.eta
            if args.x is not None:
                if args.eta is not None:
                    raise UsageError("give either --x or --eta, not both")
                x_eta = math.exp(-2.0 * args.x)
            spec = SweepSpec(
                parameter=Parameter.parse(args.parameter),
                axis=args.axis,
                start=start,
                stop=stop,
                points=points,
                input=InputState.parse(args.input),
                quantities=tuple(q.strip() for q in args.quantities.split(",") if q.strip()),
                eta=x_eta,
                n_T=args.nt,
                slice_x=args.slice_x,
                label=args.label,
            )
            text = render_table(run_series([spec], settings), out_format or "csv")
        else:
            text = render_table(figure_table(args.command, settings, args.points), out_format or "csv")
    except (UsageError, ValueError) as exc:
        print(f"lossy-sensing: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", args.out)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
