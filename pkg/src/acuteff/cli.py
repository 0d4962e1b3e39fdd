"""Command-line driver.

Exit codes: 0 success, 1 the checked property fails, 2 invalid input,
3 search budget exhausted, 4 a character-sum identity failed (a bug, not
an input problem).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import charsums, search
from .errors import AcuteError
from .field import GF
from .geometry import PointSet, set_is_acute
from .io import (
    atomic_write_text,
    envelope,
    load_point_set,
    point_set_from_dict,
    resolve_output,
    rows_to_csv,
    to_json,
)

log = logging.getLogger("acuteff")

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_BUDGET, EXIT_IDENTITY = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _field_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=int, required=True, help="characteristic (odd prime)")
    p.add_argument("--k", type=int, default=1, help="extension degree")
    p.add_argument("--modulus", type=_parse_ints, default=None,
                   help="comma-separated little-endian coefficients of the monic modulus")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (stdout when absent)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--log-level", default="WARNING")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acuteff", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check that a point set is acute")
    p.add_argument("set_file")
    _common(p)

    p = sub.add_parser("search", help="exact or greedy search for large acute sets")
    _field_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    p.add_argument("--node-budget", type=int, default=search.DEFAULT_NODE_BUDGET)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-fix-origin", action="store_true",
                   help="do not pin the origin (disables the translation reduction)")
    p.add_argument("--space-cap", type=int, default=None)
    p.add_argument("--checkpoint", default=None, help="write resumable state here on budget abort")
    p.add_argument("--resume", default=None, help="continue from a checkpoint file")
    _common(p)

    p = sub.add_parser("charsums", help="character sums and proof quantities for a set")
    p.add_argument("set_file")
    p.add_argument("--alpha", type=_parse_ints, default=None,
                   help="nonresidue: integer (k = 1) or coefficient list")
    p.add_argument("--chi-cap", type=int, default=charsums.DEFAULT_CHI_RHS_CAP)
    p.add_argument("--inject-fault", action="store_true",
                   help="self-test: corrupt one computed value before checking")
    _common(p)

    p = sub.add_parser("construct", help="grid construction in F_p^n")
    p.add_argument("kind", choices=("grid",))
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _common(p)

    p = sub.add_parser("qr-run", help="initial runs of quadratic residues over a prime range")
    p.add_argument("--p-min", type=int, required=True)
    p.add_argument("--p-max", type=int, required=True)
    _common(p)

    p = sub.add_parser("table", help="bound table from search reports")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--fields", type=_parse_ints, default=None,
                   help="comma-separated primes to search exactly when no reports are given")
    p.add_argument("--reports", nargs="*", default=None, help="SearchReport JSON files")
    p.add_argument("--node-budget", type=int, default=search.DEFAULT_NODE_BUDGET)
    _common(p)
    return ap


# -- commands: each returns (command name, config echo, payload, rows, exit code)

def _set_payload(Z: PointSet) -> dict:
    return {"set": Z.to_json_dict(), "set_sha256": Z.digest}


def cmd_verify(args):
    Z = _load_set(args.set_file)
    ok, bad = set_is_acute(Z)
    payload = {"acute": ok, "size": len(Z), **_set_payload(Z),
               "first_violation": list(bad) if bad else None,
               "violating_points": [list(Z[i].coords) for i in bad] if bad else None}
    config = {"set_file": os.path.basename(args.set_file), "set_sha256": Z.digest,
              **Z.field.describe(), "n": Z.n}
    row = {"acute": ok, "size": len(Z), "first_violation": payload["first_violation"]}
    return "verify", config, payload, [row], EXIT_OK if ok else EXIT_PROPERTY


def _field(args) -> GF:
    return GF(args.p, args.k, args.modulus)


def cmd_search(args):
    f = _field(args)
    config = {**f.describe(), "n": args.n, "mode": args.mode}
    if args.mode == "greedy":
        if args.seed is None:
            raise InputError("--seed is mandatory in greedy mode")
        cap = args.space_cap or 10**6
        config.update(restarts=args.restarts, seed=args.seed, space_cap=cap)
        rep = search.greedy_lower(f, args.n, args.restarts, args.seed,
                                  threads=args.threads, space_cap=cap)
    else:
        cap = args.space_cap or search.DEFAULT_SPACE_CAP
        ck = None
        if args.resume:
            with open(args.resume, encoding="utf-8") as fh:
                ck = json.load(fh)
        config.update(node_budget=args.node_budget, fix_origin=not args.no_fix_origin,
                      space_cap=cap, resumed=bool(ck))
        rep = search.max_acute_exact(f, args.n, args.node_budget, fix_origin=not args.no_fix_origin,
                                     space_cap=cap, checkpoint=ck)
        if not rep.exhaustive and args.checkpoint:
            atomic_write_text(resolve_output(args.checkpoint),
                              json.dumps(search.checkpoint_dict(rep), indent=1))
    payload = rep.to_dict()
    payload.pop("config")
    payload["search_config"] = rep.config
    row = {"q": f.q, "n": args.n, "mode": args.mode, "best_size": rep.best_size,
           "exhaustive": rep.exhaustive, "nodes_explored": rep.nodes_explored}
    code = EXIT_BUDGET if args.mode == "exact" and not rep.exhaustive else EXIT_OK
    return "search", config, payload, [row], code


def cmd_charsums(args):
    Z = _load_set(args.set_file)
    alpha = None
    if args.alpha is not None:
        alpha = Z.field(args.alpha[0] if Z.field.k == 1 else args.alpha)
    rep = charsums.sum_report(Z, alpha, threads=args.threads, chi_cap=args.chi_cap,
                              inject_fault=args.inject_fault)
    config = {"set_file": os.path.basename(args.set_file), "set_sha256": Z.digest,
              **Z.field.describe(), "n": Z.n, "alpha": rep["alpha"], "chi_cap": args.chi_cap,
              "inject_fault": args.inject_fault}
    payload = {k: v for k, v in rep.items() if k != "kind"}
    payload["set"] = Z.to_json_dict()
    code = EXIT_IDENTITY if charsums.failed_checks(rep) else EXIT_OK
    rows = [{k: c[k] for k in ("name", "kind", "relation", "pass", "lhs", "rhs", "tolerance")}
            for c in rep["checks"]]
    return "charsums", config, payload, rows, code


def cmd_construct(args):
    res = search.grid_construct(args.p, args.n, args.m)
    payload = res.to_dict()
    payload.pop("kind")
    config = {"kind": args.kind, "p": args.p, "n": args.n, "m": args.m}
    row = {k: payload[k] for k in ("p", "n", "m", "size", "acute", "delta_min", "delta_max",
                                   "p_mod_4", "negative_deltas")}
    return "construct", config, payload, [row], EXIT_OK if res.acute else EXIT_PROPERTY


def cmd_qr_run(args):
    if args.p_min > args.p_max or args.p_max < 3:
        raise InputError(f"invalid prime range [{args.p_min}, {args.p_max}]")
    rows = [{"p": p, "run_length": search.qr_run(p)}
            for p in search.primes_between(args.p_min, args.p_max)]
    config = {"p_min": args.p_min, "p_max": args.p_max}
    return "qr-run", config, {"rows": rows}, rows, EXIT_OK


def cmd_table(args):
    reports = []
    if args.reports:
        for path in args.reports:
            with open(path, encoding="utf-8") as fh:
                reports.append(_search_report_from_json(json.load(fh)))
        reports = [r for r in reports if r.n == args.n]
    elif args.fields:
        for p in args.fields:
            reports.append(search.max_acute_exact(GF(p), args.n, args.node_budget))
    else:
        raise InputError("table needs --reports or --fields")
    rows = search.bound_table(reports)
    config = {"n": args.n, "fields": [r.field.q for r in reports],
              "node_budget": None if args.reports else args.node_budget}
    return "table", config, {"rows": rows}, rows, EXIT_OK


def _search_report_from_json(d: dict) -> search.SearchReport:
    W = point_set_from_dict(d["witness"])
    return search.SearchReport(W.field, d["n"], d["best_size"], W, d["exhaustive"],
                               d["nodes_explored"], 0.0, d.get("mode", "exact"),
                               d.get("search_config", {}), d.get("resume_path"))


def _load_set(path: str) -> PointSet:
    try:
        return load_point_set(path)
    except FileNotFoundError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


COMMANDS = {
    "verify": cmd_verify,
    "search": cmd_search,
    "charsums": cmd_charsums,
    "construct": cmd_construct,
    "qr-run": cmd_qr_run,
    "table": cmd_table,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        name, config, payload, rows, code = COMMANDS[args.command](args)
    except (InputError, AcuteError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = envelope(name, config, payload, threads=args.threads,
                      wall_time=time.perf_counter() - t0)
    text = to_json(report) if args.format == "json" else rows_to_csv(rows)
    if args.out:
        out = atomic_write_text(resolve_output(args.out), text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
