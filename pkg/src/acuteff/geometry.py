"""Points in F_q^n, the acuteness form Delta, and acute-set verification.

For points u, v, w the vertex form is

    Delta(u; v, w) = sum_i (u_i - v_i)^2 + (u_i - w_i)^2 - (v_i - w_i)^2
                   = 2 (u - v) . (u - w)

and the vertex at u is acute when Delta is a nonzero square. Zero means a
right angle and is *not* acute.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegenerateTriple, DimensionMismatch, DuplicatePoint, FieldMismatch
from .field import GF, Elem, QRClass


@dataclass(frozen=True)
class Point:
    field: GF
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise DimensionMismatch("points need n >= 1")
        object.__setattr__(self, "coords", tuple(self.field.check(c) for c in self.coords))

    @classmethod
    def of(cls, field: GF, coords: Iterable) -> "Point":
        """Build from ints (k = 1), coefficient lists (k > 1) or Elems."""
        return cls(field, tuple(field(c).value for c in coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def elems(self) -> tuple[Elem, ...]:
        return tuple(Elem(self.field, c) for c in self.coords)

    def __add__(self, other: "Point") -> "Point":
        _compatible(self, other)
        f = self.field
        return Point(f, tuple(f.add(a, b) for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Point") -> "Point":
        _compatible(self, other)
        f = self.field
        return Point(f, tuple(f.sub(a, b) for a, b in zip(self.coords, other.coords)))

    def scale(self, lam: int) -> "Point":
        f = self.field
        return Point(f, tuple(f.mul(lam, a) for a in self.coords))


def _compatible(*pts: Point) -> None:
    first = pts[0]
    for pt in pts[1:]:
        if pt.field != first.field:
            raise FieldMismatch(f"{pt.field!r} vs {first.field!r}")
        if pt.n != first.n:
            raise DimensionMismatch(f"dimension {pt.n} vs {first.n}")


def inner(a: Point, b: Point) -> Elem:
    _compatible(a, b)
    f = a.field
    acc = 0
    for x, y in zip(a.coords, b.coords):
        acc = f.add(acc, f.mul(x, y))
    return Elem(f, acc)


def delta_sum(u: Point, v: Point, w: Point) -> Elem:
    """Delta from the coordinate-wise sum of three squared differences."""
    _compatible(u, v, w)
    f = u.field
    acc = 0
    for ui, vi, wi in zip(u.coords, v.coords, w.coords):
        a, b, c = f.sub(ui, vi), f.sub(ui, wi), f.sub(vi, wi)
        term = f.sub(f.add(f.mul(a, a), f.mul(b, b)), f.mul(c, c))
        acc = f.add(acc, term)
    return Elem(f, acc)


def delta_dot(u: Point, v: Point, w: Point) -> Elem:
    """Delta as 2 (u - v) . (u - w)."""
    _compatible(u, v, w)
    return inner(u - v, u - w) * 2


def vertex_class(u: Point, v: Point, w: Point) -> QRClass:
    return delta_dot(u, v, w).qr_class()


def triple_is_acute(u: Point, v: Point, w: Point) -> bool:
    if u == v or u == w or v == w:
        raise DegenerateTriple("acuteness is defined for pairwise distinct points")
    return (vertex_class(u, v, w) is QRClass.RESIDUE
            and vertex_class(v, u, w) is QRClass.RESIDUE
            and vertex_class(w, u, v) is QRClass.RESIDUE)


class PointSet:
    """An ordered set of pairwise distinct points of F_q^n.

    Coordinates are held as an ``(m, n)`` int64 array of element codes.
    Instances are immutable; :meth:`add` returns a new set.
    """

    def __init__(self, field: GF, n: int, points: Iterable[Sequence[int]] | np.ndarray = ()):
        self.field = field
        self.n = int(n)
        if self.n < 1:
            raise DimensionMismatch("n must be >= 1")
        arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                         dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, self.n), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != self.n:
            raise DimensionMismatch(f"expected points of dimension {self.n}, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise ValueError("coordinate code out of range")
        seen: dict[tuple, int] = {}
        for i, row in enumerate(map(tuple, arr.tolist())):
            if row in seen:
                raise DuplicatePoint(f"point {list(row)} repeated at indices {seen[row]} and {i}")
            seen[row] = i
        arr.setflags(write=False)
        self.coords = arr

    @classmethod
    def from_points(cls, pts: Sequence[Point]) -> "PointSet":
        if not pts:
            raise ValueError("cannot infer field from an empty list; use PointSet(field, n)")
        _compatible(*pts)
        return cls(pts[0].field, pts[0].n, [p.coords for p in pts])

    @classmethod
    def from_coords(cls, field: GF, n: int, rows: Iterable[Iterable]) -> "PointSet":
        """Rows of ints (k = 1) or of coefficient lists (k > 1)."""
        return cls(field, n, [[field(c).value for c in row] for row in rows])

    def __len__(self) -> int:
        return self.coords.shape[0]

    def __getitem__(self, i: int) -> Point:
        return Point(self.field, tuple(int(c) for c in self.coords[i]))

    def __iter__(self) -> Iterator[Point]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        return (isinstance(other, PointSet) and self.field == other.field
                and self.n == other.n and np.array_equal(self.coords, other.coords))

    def __repr__(self):
        return f"PointSet({self.field!r}, n={self.n}, size={len(self)})"

    def add(self, pt: Point) -> "PointSet":
        if pt.field != self.field:
            raise FieldMismatch(f"{pt.field!r} vs {self.field!r}")
        if pt.n != self.n:
            raise DimensionMismatch(f"dimension {pt.n} vs {self.n}")
        return PointSet(self.field, self.n, np.vstack([self.coords, np.asarray([pt.coords])]))

    def permuted(self, order: Sequence[int]) -> "PointSet":
        return PointSet(self.field, self.n, self.coords[np.asarray(order, dtype=np.int64)])

    def coord_json(self) -> list:
        f = self.field
        if f.k == 1:
            return self.coords.tolist()
        return [[list(f.coeffs(c)) for c in row] for row in self.coords.tolist()]

    def to_json_dict(self) -> dict:
        d = {"p": self.field.p, "k": self.field.k}
        if self.field.k > 1:
            d["modulus"] = list(self.field.modulus)
        d["n"] = self.n
        d["points"] = self.coord_json()
        return d

    @cached_property
    def digest(self) -> str:
        """sha256 of the canonical point-set JSON."""
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # -- vectorised kernels ---------------------------------------------

    @cached_property
    def gram(self) -> np.ndarray:
        """Matrix of pairwise inner products (element codes)."""
        f, X = self.field, self.coords
        m = len(self)
        g = np.zeros((m, m), dtype=np.int64)
        for i in range(self.n):
            col = X[:, i]
            g = f.vadd(g, f.vmul(col[:, None], col[None, :]))
        return g

    def delta_slab(self, u: int) -> np.ndarray:
        """Delta(u; v, w) for all v, w as an (m, m) code array."""
        f, g = self.field, self.gram
        inner_part = f.vadd(f.vsub(g[u, u], g[u, :])[:, None], f.vsub(g, g[u][None, :]))
        return f.vscale_int(2, inner_part)

    @cached_property
    def delta_tensor(self) -> np.ndarray:
        """Delta(u; v, w) for all ordered triples, shape (m, m, m)."""
        m = len(self)
        out = np.empty((m, m, m), dtype=np.int64)
        for u in range(m):
            out[u] = self.delta_slab(u)
        return out

    @cached_property
    def delta_histogram(self) -> np.ndarray:
        """Number of ordered triples (u, v, w) in Z^3 with Delta = x, indexed by code x."""
        counts = np.zeros(self.field.q, dtype=np.int64)
        for u in range(len(self)):
            counts += np.bincount(self.delta_slab(u).ravel(), minlength=self.field.q)
        return counts


def set_is_acute(Z: PointSet) -> tuple[bool, tuple[int, int, int] | None]:
    """Check every unordered triple of distinct points.

    Returns ``(True, None)`` or ``(False, (i, j, k))`` with the
    lexicographically smallest violating index triple ``i < j < k``.
    """
    m = len(Z)
    if m < 3:
        return True, None
    f = Z.field
    upper = np.triu(np.ones((m, m), dtype=bool), k=1)
    for i in range(m - 2):
        at_i = f.vchi(Z.delta_slab(i)) == 1
        # other_vertex[j, k] = residue test of Delta(j; i, k)
        other_vertex = np.empty((m, m), dtype=bool)
        for j in range(i + 1, m):
            other_vertex[j] = f.vchi(_delta_row(Z, j, i)) == 1
        other_vertex[: i + 1] = True
        ok = at_i & other_vertex & other_vertex.T
        bad = ~ok & upper
        bad[: i + 1, :] = False
        if bad.any():
            j, k = np.argwhere(bad)[0]
            return False, (i, int(j), int(k))
    return True, None


def _delta_row(Z: PointSet, u: int, v: int) -> np.ndarray:
    """Delta(u; v, w) for all w."""
    f, g = Z.field, Z.gram
    return f.vscale_int(2, f.vadd(f.vsub(g[u, u], g[u, v]), f.vsub(g[v, :], g[u, :])))


def all_points(field: GF, n: int) -> np.ndarray:
    """Every point of F_q^n in canonical (lexicographic code) order."""
    q = field.q
    idx = np.arange(q**n, dtype=np.int64)
    cols = [(idx // q ** (n - 1 - i)) % q for i in range(n)]
    return np.stack(cols, axis=1)


def acute_mask(field: GF, a: np.ndarray, b: np.ndarray, C: np.ndarray) -> np.ndarray:
    """For fixed distinct points a, b and candidate rows C (none equal to a or
    b), which triples (a, b, c) are acute at all three vertices."""
    f = field
    if f.k == 1:
        p = f.p
        ab = (a - b) % p
        ac = (a - C) % p
        bc = (b - C) % p
        # reduce each product before summing: p * p already uses 62 bits
        d_a = 2 * ((ac * ab % p).sum(axis=1) % p) % p
        d_b = -2 * ((bc * ab % p).sum(axis=1) % p) % p
        d_c = 2 * ((ac * bc % p).sum(axis=1) % p) % p
    else:
        ab = f.vsub(a, b)
        ac = f.vsub(a[None, :], C)
        bc = f.vsub(b[None, :], C)
        d_a = _vdot(f, ac, ab[None, :])
        d_b = f.vneg(_vdot(f, bc, ab[None, :]))
        d_c = _vdot(f, ac, bc)
        d_a, d_b, d_c = (f.vscale_int(2, d) for d in (d_a, d_b, d_c))
    return (f.vchi(d_a) == 1) & (f.vchi(d_b) == 1) & (f.vchi(d_c) == 1)


def _vdot(f: GF, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    prod = f.vmul(X, Y)
    acc = prod[..., 0]
    for i in range(1, prod.shape[-1]):
        acc = f.vadd(acc, prod[..., i])
    return acc
