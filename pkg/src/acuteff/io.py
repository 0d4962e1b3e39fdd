"""Point-set files, report envelopes, CSV tables and atomic output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from .field import GF
from .geometry import PointSet, set_is_acute

REPORT_SCHEMA = "acuteff-report/1"
OUTPUT_DIR_ENV = "ACUTEFF_OUTPUT_DIR"


def field_from_dict(d: dict) -> GF:
    k = int(d.get("k", 1))
    modulus = d.get("modulus") if k > 1 else None
    return GF(int(d["p"]), k, modulus)


def point_set_from_dict(d: dict) -> PointSet:
    """Parse ``{"p", "k", "modulus", "n", "points"}``; raises on bad input."""
    missing = [key for key in ("p", "n", "points") if key not in d]
    if missing:
        raise ValueError(f"point-set document lacks {missing}")
    f = field_from_dict(d)
    n = int(d["n"])
    rows = d["points"]
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ValueError(f"point {i} has {len(row)} coordinates, expected {n}")
        for c in row:
            if f.k == 1 and not isinstance(c, int):
                raise ValueError(f"point {i}: prime-field coordinates must be integers")
            if f.k > 1 and (not isinstance(c, list) or len(c) != f.k):
                raise ValueError(f"point {i}: expected length-{f.k} coefficient arrays")
            vals = [c] if f.k == 1 else c
            if any(not 0 <= v < f.p for v in vals):
                raise ValueError(f"point {i}: coordinate {c} not reduced mod {f.p}")
    return PointSet.from_coords(f, n, rows)


def load_point_set(path: str | os.PathLike) -> PointSet:
    with open(path, encoding="utf-8") as fh:
        return point_set_from_dict(json.load(fh))


def dump_point_set(Z: PointSet) -> str:
    return json.dumps(Z.to_json_dict(), indent=1)


def resolve_output(path: str | os.PathLike) -> Path:
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def envelope(command: str, config: dict, payload: dict, *, threads: int, wall_time: float) -> dict:
    """Wrap a payload with the config echo and a runtime block.

    Everything that may legitimately differ between identical runs (clock,
    duration, thread count) lives under ``runtime``.
    """
    report = {"schema": REPORT_SCHEMA, "command": command, "config": config}
    report.update(payload)
    report.setdefault("checks", [])
    report["runtime"] = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": wall_time,
        "threads": threads,
    }
    return report


def to_json(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=False, allow_nan=False) + "\n"


def strip_runtime(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "runtime"}


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def csv_to_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text, newline="")))


def validate_report(report: dict) -> None:
    """Re-check a parsed report against its own config echo.

    Raises ``ValueError`` on any inconsistency.
    """
    if report.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"unexpected schema {report.get('schema')!r}")
    cfg = report["config"]
    cmd = report["command"]
    if cmd == "search":
        f = GF(cfg["p"], cfg["k"], cfg.get("modulus"))
        if report["field"] != f.describe() or report["n"] != cfg["n"]:
            raise ValueError("search report field/dimension disagree with config")
        W = point_set_from_dict(report["witness"])
        if W.field != f or len(W) != report["best_size"]:
            raise ValueError("witness does not match report")
        if not set_is_acute(W)[0]:
            raise ValueError("witness is not acute")
        if cfg["mode"] == "greedy" and report["exhaustive"]:
            raise ValueError("greedy reports are never exhaustive")
    elif cmd in ("charsums", "verify"):
        Z = point_set_from_dict(report["set"])
        if Z.digest != report["set_sha256"] or Z.digest != cfg["set_sha256"]:
            raise ValueError("set hash mismatch")
        if report["acute"] != set_is_acute(Z)[0]:
            raise ValueError("acuteness flag disagrees with the embedded set")
    elif cmd == "construct":
        Z = point_set_from_dict(report["points"])
        if (cfg["p"], cfg["n"], cfg["m"]) != (report["p"], report["n"], report["m"]):
            raise ValueError("grid report disagrees with config")
        if report["acute"] != set_is_acute(Z)[0]:
            raise ValueError("acuteness flag disagrees with the embedded grid")
    elif cmd in ("qr-run", "table"):
        if not isinstance(report.get("rows"), list):
            raise ValueError("table report lacks rows")
    else:
        raise ValueError(f"unknown command {cmd!r}")
    for c in report.get("checks", []):
        for key in ("name", "pass", "lhs", "rhs", "tolerance"):
            if key not in c:
                raise ValueError(f"check entry lacks {key!r}")


def iter_json_files(paths: Iterable[str]) -> Iterable[dict]:
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            yield json.load(fh)
