"""Command-line front end.

Subcommands: ``table``, ``simulate``, ``reserve-scan``, ``participation``.

Settings come from built-in defaults, then an optional ``--config`` JSON
file, then explicit flags (highest precedence). The merged settings are
echoed into every output together with the tool version, so re-running an
output's config reproduces it byte for byte.

Exit codes: 0 success, 2 configuration error, 3 mathematical-domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from auctionlab import __version__
from auctionlab.analytics import build_table, fmt12
from auctionlab.distributions import from_dict
from auctionlab.errors import DomainError
from auctionlab.participation import (
    ClosedFormSource,
    MonteCarloSource,
    ParticipationMatrix,
    is_pareto_improvement,
    parse_sidecar,
    read_matrix_csv,
    round_robin_exclusion,
)
from auctionlab.reserve import analyze_reserve, threshold_report
from auctionlab.simulate import DEFAULT_BLOCKS, estimate_auction, estimate_surplus_delta

EXIT_CONFIG = 2
EXIT_DOMAIN = 3

DEFAULTS = {
    "table": {"dist": None, "m_min": 2, "m_max": 10, "format": "csv"},
    "simulate": {
        "dist": None,
        "bidders": None,
        "reserve": None,
        "reps": 10**6,
        "seed": 0,
        "estimator": "auto",
        "blocks": DEFAULT_BLOCKS,
        "paired": False,
    },
    "reserve-scan": {
        "dist": None,
        "bidders": None,
        "r": None,
        "r_min": None,
        "r_max": None,
        "r_steps": 21,
        "format": "csv",
    },
    "participation": {
        "old": None,
        "new": None,
        "meta": None,
        "new_meta": None,
        "round_robin": None,
        "dist": None,
        "seller_mode": "single-seller",
        "source": "closed",
        "reps": 10**6,
        "seed": 0,
    },
}


class ConfigError(Exception):
    pass


def _dist_arg(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"--dist is not valid JSON: {exc}") from None
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="auctionlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"auctionlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--config", type=Path, help="JSON file with settings (flags override it)")
        sp.add_argument("--out", type=Path, help="output file (default: stdout)")
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"))

    t = sub.add_parser("table", help="closed-form surplus/revenue table over bidder counts")
    common(t)
    t.add_argument("--dist", type=_dist_arg, help='e.g. \'{"family":"pareto1","a":1,"v":2}\'')
    t.add_argument("--m-min", type=int)
    t.add_argument("--m-max", type=int)

    s = sub.add_parser("simulate", help="Monte Carlo estimates (JSON)")
    common(s, fmt=False)
    s.add_argument("--dist", type=_dist_arg)
    s.add_argument("--bidders", type=int, help="bidders m (with --paired: incumbents n, delta to n+1)")
    s.add_argument("--reserve", type=float)
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--estimator", choices=("mean", "mom", "auto"))
    s.add_argument("--blocks", type=int)
    s.add_argument("--paired", action="store_true", default=None, help="estimate E(p_{n+1} - p_n)")

    r = sub.add_parser("reserve-scan", help="revenue/surplus/derivative over a reserve grid")
    common(r)
    r.add_argument("--dist", type=_dist_arg)
    r.add_argument("--bidders", type=int)
    r.add_argument("--r", type=lambda s: [float(x) for x in s.split(",")], help="comma-separated reserves")
    r.add_argument("--r-min", type=float)
    r.add_argument("--r-max", type=float)
    r.add_argument("--r-steps", type=int)

    q = sub.add_parser("participation", help="Pareto-improvement check between two arrangements")
    common(q, fmt=False)
    q.add_argument("--old", type=Path, help="old inclusion matrix CSV")
    q.add_argument("--new", type=Path, help="new inclusion matrix CSV")
    q.add_argument("--meta", type=Path, help="JSON sidecar: distributions and seller_mode")
    q.add_argument("--new-meta", type=Path, help="sidecar for --new if different from --meta")
    q.add_argument("--round-robin", type=int, help="m: compare round-robin exclusion with all-in")
    q.add_argument("--dist", type=_dist_arg, help="distribution for --round-robin")
    q.add_argument("--seller-mode", choices=("single-seller", "per-auction-seller"))
    q.add_argument("--source", choices=("closed", "mc"))
    q.add_argument("--reps", type=int)
    q.add_argument("--seed", type=int)
    return p


def merge_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None) is not None:
        try:
            from_file = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(from_file, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(from_file) - set(cfg) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update({k: v for k, v in from_file.items() if k != "command"})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = str(val) if isinstance(val, Path) else val
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required settings: " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _dist(cfg: dict):
    _require(cfg, "dist")
    try:
        return from_dict(cfg["dist"])
    except DomainError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _preamble(cfg: dict, command: str) -> str:
    lines = [f"# auctionlab {__version__}", f"# command: {command}"]
    lines.append("# config: " + json.dumps(cfg, sort_keys=True))
    if "seed" in cfg:
        lines.append(f"# seed: {cfg['seed']}")
    return "\n".join(lines) + "\n"


def _envelope(cfg: dict, command: str, **payload) -> str:
    doc = {"tool": "auctionlab", "version": __version__, "command": command, "config": cfg}
    if "seed" in cfg:
        doc["seed"] = cfg["seed"]
    doc.update(payload)
    return json.dumps(doc, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def cmd_table(cfg: dict) -> str:
    dist = _dist(cfg)
    table = build_table(dist, int(cfg["m_min"]), int(cfg["m_max"]))
    if cfg["format"] == "json":
        rows = [
            {"m": r.m, "buyer_surplus": r.buyer_surplus, "seller_revenue": r.seller_revenue,
             "per_bidder_surplus": r.per_bidder_surplus, "marginal_revenue": r.marginal_revenue}
            for r in table.rows
        ]
        return _envelope(cfg, "table", rows=rows)
    return _preamble(cfg, "table") + table.to_csv()


def cmd_simulate(cfg: dict) -> str:
    dist = _dist(cfg)
    _require(cfg, "bidders")
    common = dict(
        replications=int(cfg["reps"]),
        seed=int(cfg["seed"]),
        estimator=cfg["estimator"],
        blocks=int(cfg["blocks"]),
    )
    if cfg["paired"]:
        if cfg["reserve"] is not None:
            raise ConfigError("--paired does not take a reserve")
        est = estimate_surplus_delta(dist, int(cfg["bidders"]), **common)
        return _envelope(cfg, "simulate", estimates={"surplus_delta": est.to_dict()})
    res = estimate_auction(dist, int(cfg["bidders"]), reserve=cfg["reserve"], **common)
    return _envelope(cfg, "simulate", estimates=res.to_dict())


def _reserve_grid(cfg: dict, dist) -> list[float]:
    if cfg["r"] is not None:
        grid = [float(x) for x in cfg["r"]]
    else:
        lo = dist.infimum if cfg["r_min"] is None else float(cfg["r_min"])
        if cfg["r_max"] is None:
            raise ConfigError("reserve-scan needs --r or --r-max")
        steps = int(cfg["r_steps"])
        if steps < 1:
            raise ConfigError("--r-steps must be >= 1")
        grid = np.linspace(lo, float(cfg["r_max"]), steps).tolist() if steps > 1 else [lo]
    if not grid:
        raise ConfigError("empty reserve grid")
    return grid


def cmd_reserve_scan(cfg: dict) -> str:
    dist = _dist(cfg)
    _require(cfg, "bidders")
    n = int(cfg["bidders"])
    rows = [analyze_reserve(dist, n, r) for r in _reserve_grid(cfg, dist)]
    report = threshold_report(dist, n)
    notes = {
        "ratio_threshold_reserve": report.reserve,
        "ratio_threshold_bidders": report.bidders_at_reserve,
        "note": report.note,
    }
    if report.inverted_form is not None:
        notes["inverted_form_not_threshold"] = report.inverted_form
    if cfg["format"] == "json":
        out = [
            {"r": a.r, "revenue": a.expected_revenue,
             "surplus": None if math.isinf(a.expected_surplus) else a.expected_surplus,
             "derivative": a.revenue_derivative, "sale_probability": a.sale_probability}
            for a in rows
        ]
        return _envelope(cfg, "reserve-scan", rows=out, notes=notes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "revenue", "surplus", "derivative", "sale_probability"])
    for a in rows:
        w.writerow([fmt12(a.r), fmt12(a.expected_revenue), fmt12(a.expected_surplus),
                    fmt12(a.revenue_derivative), fmt12(a.sale_probability)])
    head = _preamble(cfg, "reserve-scan")
    head += "".join(f"# {k}: {fmt12(v) if isinstance(v, float) else v}\n" for k, v in notes.items())
    return head + buf.getvalue()


def _load_arrangement(csv_path: str, meta_path: str) -> ParticipationMatrix:
    try:
        inc = read_matrix_csv(Path(csv_path).read_text())
        meta = json.loads(Path(meta_path).read_text())
        dists, mode = parse_sidecar(meta, inc.shape[1])
        return ParticipationMatrix(inc, dists, mode)
    except DomainError:
        raise
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load arrangement {csv_path}: {exc}") from None


def cmd_participation(cfg: dict) -> str:
    if cfg["round_robin"] is not None:
        old, new = round_robin_exclusion(int(cfg["round_robin"]), _dist(cfg), cfg["seller_mode"])
    else:
        _require(cfg, "old", "new", "meta")
        old = _load_arrangement(cfg["old"], cfg["meta"])
        new = _load_arrangement(cfg["new"], cfg["new_meta"] or cfg["meta"])
    if cfg["source"] == "mc":
        source = MonteCarloSource(int(cfg["reps"]), int(cfg["seed"]))
    else:
        source = ClosedFormSource()
    try:
        verdict = is_pareto_improvement(old, new, source)
    except DomainError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _envelope(cfg, "participation", result=verdict.to_dict())


COMMANDS = {
    "table": cmd_table,
    "simulate": cmd_simulate,
    "reserve-scan": cmd_reserve_scan,
    "participation": cmd_participation,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args.command, args)
        text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"auctionlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"auctionlab: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
