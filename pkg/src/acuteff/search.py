"""Exact and heuristic search for large acute sets, plus the grid construction.

The exact search is a depth-first branch and bound over points of F_q^n in
canonical order. A node is one insertion attempt. Each search state keeps the
candidates that are still compatible with every pair already chosen, so an
insertion only has to test the new pairs it creates.

Because Delta is translation invariant, every acute set has a translate
through the origin; the search therefore pins the zero vector as the first
point unless asked not to.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import SpaceTooLarge
from .field import GF, is_prime
from .geometry import PointSet, acute_mask, all_points, set_is_acute

log = logging.getLogger(__name__)

DEFAULT_SPACE_CAP = 10**4
DEFAULT_NODE_BUDGET = 10**7
CHECKPOINT_FORMAT = "acuteff-checkpoint/1"


@dataclass
class SearchReport:
    field: GF
    n: int
    best_size: int
    witness: PointSet
    exhaustive: bool
    nodes_explored: int
    wall_time: float
    mode: str
    config: dict = dc_field(default_factory=dict)
    resume_path: list[int] | None = None

    def to_dict(self) -> dict:
        return {
            "kind": "search_report",
            "mode": self.mode,
            "field": self.field.describe(),
            "n": self.n,
            "best_size": self.best_size,
            "exhaustive": self.exhaustive,
            "nodes_explored": self.nodes_explored,
            "witness": self.witness.to_json_dict(),
            "witness_sha256": self.witness.digest,
            "resume_path": self.resume_path,
            "config": dict(self.config),
        }


def _check_space(field: GF, n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if field.q**n > cap:
        raise SpaceTooLarge(f"q^n = {field.q ** n} exceeds the enumeration cap {cap}")


class _Abort(Exception):
    def __init__(self, path: list[int]):
        self.path = path


class _BranchAndBound:
    def __init__(self, field: GF, n: int, budget: int, best: list[int], nodes: int):
        self.field = field
        self.P = all_points(field, n)
        self.budget = budget
        self.nodes = nodes
        self.best = list(best)

    def filter(self, S: list[int], x: int, C: np.ndarray) -> np.ndarray:
        P = self.P
        for s in S:
            if C.size == 0:
                break
            C = C[acute_mask(self.field, P[s], P[x], P[C])]
        return C

    def run(self, S: list[int], C: np.ndarray, resume: Sequence[int] | None) -> None:
        """Extend S by candidates C (sorted), skipping the explored prefix."""
        depth = len(S)
        start = 0
        if resume is not None:
            if len(resume) <= depth:
                resume = None
            else:
                start = int(np.searchsorted(C, resume[depth]))
        for pos in range(start, C.size):
            if len(S) + C.size - pos <= len(self.best):
                return
            x = int(C[pos])
            on_prefix = resume is not None and pos == start and x == resume[depth]
            # nodes strictly inside the resumed prefix were counted before the abort
            if not (on_prefix and depth < len(resume) - 1):
                if self.nodes >= self.budget:
                    raise _Abort(S + [x])
                self.nodes += 1
            newC = self.filter(S, x, C[pos + 1:])
            S.append(x)
            if len(S) > len(self.best):
                self.best = list(S)
            self.run(S, newC, resume if on_prefix else None)
            S.pop()


def max_acute_exact(
    field: GF,
    n: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    *,
    fix_origin: bool = True,
    space_cap: int = DEFAULT_SPACE_CAP,
    checkpoint: dict | None = None,
) -> SearchReport:
    """Largest acute set in F_q^n by branch and bound.

    When the budget runs out the incumbent is returned with
    ``exhaustive=False`` and ``resume_path`` set; pass the dict from
    :func:`checkpoint_dict` back as ``checkpoint`` to continue.
    """
    _check_space(field, n, space_cap)
    t0 = time.perf_counter()
    best: list[int] = []
    nodes = 0
    resume = None
    if checkpoint is not None:
        _validate_checkpoint(checkpoint, field, n, fix_origin)
        best = list(checkpoint["best_indices"])
        nodes = int(checkpoint["nodes_explored"])
        resume = list(checkpoint["resume_path"])
    bb = _BranchAndBound(field, n, nodes + node_budget, best, nodes)
    N = bb.P.shape[0]
    exhaustive = True
    path = None
    try:
        if fix_origin:
            if not bb.best:
                bb.best = [0]
            if resume is not None and resume[0] != 0:
                raise ValueError("checkpoint path does not start at the origin")
            bb.run([0], np.arange(1, N, dtype=np.int64), resume)
        else:
            bb.run([], np.arange(N, dtype=np.int64), resume)
    except _Abort as stop:
        exhaustive = False
        path = stop.path
    witness = PointSet(field, n, bb.P[sorted(bb.best)])
    _assert_acute(witness)
    config = {"node_budget": node_budget, "fix_origin": fix_origin, "space_cap": space_cap,
              "resumed": checkpoint is not None}
    return SearchReport(field, n, len(bb.best), witness, exhaustive, bb.nodes,
                        time.perf_counter() - t0, "exact", config, path)


def checkpoint_dict(report: SearchReport) -> dict:
    """Resumable state: the incumbent and the first unexplored search path."""
    if report.exhaustive or report.resume_path is None:
        raise ValueError("only an aborted exact search can be checkpointed")
    P = all_points(report.field, report.n)
    index = {tuple(row): i for i, row in enumerate(P.tolist())}
    best = [index[tuple(r)] for r in report.witness.coords.tolist()]
    return {
        "format": CHECKPOINT_FORMAT,
        "field": report.field.describe(),
        "n": report.n,
        "fix_origin": report.config.get("fix_origin", True),
        "best_indices": best,
        "resume_path": list(report.resume_path),
        "nodes_explored": report.nodes_explored,
    }


def _validate_checkpoint(ck: dict, field: GF, n: int, fix_origin: bool) -> None:
    if ck.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unknown checkpoint format {ck.get('format')!r}")
    if ck["field"] != field.describe() or ck["n"] != n:
        raise ValueError("checkpoint belongs to a different field or dimension")
    if ck["fix_origin"] != fix_origin:
        raise ValueError("checkpoint was taken with a different symmetry setting")


def _assert_acute(Z: PointSet) -> None:
    ok, bad = set_is_acute(Z)
    if not ok:
        raise AssertionError(f"search produced a non-acute witness, violating triple {bad}")


def _greedy_once(field: GF, P: np.ndarray, order: np.ndarray) -> list[int]:
    alive = np.ones(P.shape[0], dtype=bool)
    S: list[int] = []
    for x in order:
        x = int(x)
        if not alive[x]:
            continue
        alive[x] = False
        if S:
            live = np.flatnonzero(alive)
            for s in S:
                if live.size == 0:
                    break
                keep = acute_mask(field, P[s], P[x], P[live])
                alive[live[~keep]] = False
                live = live[keep]
        S.append(x)
    return S


def greedy_lower(
    field: GF,
    n: int,
    restarts: int,
    seed: int,
    *,
    threads: int = 1,
    space_cap: int = 10**6,
) -> SearchReport:
    """Best of ``restarts`` randomised greedy passes.

    Restart i scans the points in the order of a permutation drawn from the
    i-th child of ``SeedSequence(seed)`` and keeps each point that leaves the
    set acute. Ties between restarts go to the lowest index, so the result
    does not depend on ``threads``.
    """
    _check_space(field, n, space_cap)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    t0 = time.perf_counter()
    P = all_points(field, n)
    children = np.random.SeedSequence(seed).spawn(restarts)

    def one(ss):
        order = np.random.default_rng(ss).permutation(P.shape[0])
        return _greedy_once(field, P, order)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, children))
    else:
        results = [one(c) for c in children]
    best = max(range(restarts), key=lambda i: (len(results[i]), -i))
    witness = PointSet(field, n, P[sorted(results[best])])
    _assert_acute(witness)
    config = {"restarts": restarts, "seed": seed, "space_cap": space_cap, "best_restart": best}
    return SearchReport(field, n, len(witness), witness, False, sum(len(r) for r in results),
                        time.perf_counter() - t0, "greedy", config)


# -- construction ----------------------------------------------------------

def qr_run(p: int) -> int:
    """Largest M such that 1, ..., M are all quadratic residues mod p."""
    f = GF(p)
    m = 0
    while m + 1 < p and f.chi_euler(m + 1) == 1:
        m += 1
    return m


def primes_between(lo: int, hi: int) -> list[int]:
    """Odd primes in [lo, hi]."""
    if hi < 3:
        return []
    sieve = np.ones(hi + 1, dtype=bool)
    sieve[:2] = False
    for d in range(2, math.isqrt(hi) + 1):
        if sieve[d]:
            sieve[d * d::d] = False
    return [int(x) for x in np.flatnonzero(sieve) if x >= max(lo, 3)]


@dataclass
class GridResult:
    p: int
    n: int
    m: int
    points: PointSet
    acute: bool
    first_violation: tuple[int, int, int] | None
    delta_min: int | None
    delta_max: int | None
    p_mod_4: int
    negative_deltas: bool

    def to_dict(self) -> dict:
        return {
            "kind": "grid_report",
            "p": self.p, "n": self.n, "m": self.m,
            "size": len(self.points),
            "acute": self.acute,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "delta_min": self.delta_min,
            "delta_max": self.delta_max,
            "p_mod_4": self.p_mod_4,
            "negative_deltas": self.negative_deltas,
            "minus_one_is_residue": self.p_mod_4 == 1,
            "points": self.points.to_json_dict(),
        }


def grid_construct(p: int, n: int, m: int, *, space_cap: int = 4096) -> GridResult:
    """The grid {1..m}^n inside F_p^n, checked for acuteness.

    Also reports the range of Delta over distinct triples computed over the
    integers, before reduction mod p.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if m**n > space_cap:
        raise SpaceTooLarge(f"m^n = {m ** n} exceeds cap {space_cap}")
    f = GF(p)
    if m >= p:
        raise ValueError(f"grid side {m} must be < p so the points stay distinct")
    idx = np.arange(m**n)
    X = np.stack([(idx // m ** (n - 1 - i)) % m + 1 for i in range(n)], axis=1).astype(np.int64)
    Z = PointSet(f, n, X)
    acute, bad = set_is_acute(Z)
    lo = hi = None
    if m**n >= 3:
        D = X[:, None, :] - X[None, :, :]
        # integer Delta(u; v, w) = 2 (u - v).(u - w) for distinct triples
        k = len(X)
        vals = []
        for u in range(k):
            dots = 2 * np.einsum("vi,wi->vw", D[u], D[u])
            mask = np.ones((k, k), dtype=bool)
            mask[u, :] = mask[:, u] = False
            np.fill_diagonal(mask, False)
            if mask.any():
                vals.append((int(dots[mask].min()), int(dots[mask].max())))
        lo = min(v[0] for v in vals)
        hi = max(v[1] for v in vals)
    return GridResult(p, n, m, Z, acute, bad, lo, hi, p % 4, lo is not None and lo < 0)


# -- bound table -----------------------------------------------------------

def bound_table(reports: Sequence[SearchReport]) -> list[dict]:
    """Rows comparing best sizes with 2 q^(4/3) and the q^((n+1)/2) curve.

    The comparison with 2 q^(4/3) is done exactly as size^3 <= 8 q^4.
    """
    rows = []
    for r in reports:
        q, n, N = r.field.q, r.n, r.best_size
        rows.append({
            "q": q,
            "n": n,
            "best_size": N,
            "exhaustive": r.exhaustive,
            "two_q_four_thirds": round(2 * q ** (4 / 3), 2),
            "within_two_q_four_thirds": N**3 <= 8 * q**4,
            "q_pow_half_n_plus_1": round(q ** ((n + 1) / 2), 2),
            "reference_note": "shape only - constant unspecified",
        })
    return rows


def is_odd_prime(p: int) -> bool:
    return p % 2 == 1 and is_prime(p)
