"""Exact arithmetic in finite fields F_q of odd characteristic.

Elements are encoded as integers ``0 <= code < q``. For ``q = p**k`` the code
of the residue class ``c_0 + c_1 x + ... + c_{k-1} x^{k-1}`` is
``sum(c_i * p**i)``, so the constant ``c`` has code ``c`` and the prime field
sits inside every extension as codes ``0..p-1``. Ordering elements by code is
the canonical order used everywhere (lexicographic on the coefficient vector
read from the top-degree coefficient down).

Scalar operations live on :class:`GF` and work on codes; :class:`Elem` wraps a
code together with its field for operator-style use. Vectorised ``v*``
methods take and return ``int64`` numpy arrays of codes and back the
point-set kernels.
"""

from __future__ import annotations

import enum
import itertools
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DivisionByZero,
    EvenCharacteristic,
    FieldMismatch,
    FieldTooLarge,
    NotPrime,
    ReduciblePolynomial,
)

# q * q must fit a signed 64-bit product.
FIELD_CAP = 2**31
DEFAULT_TABLE_THRESHOLD = 2**20


class QRClass(enum.IntEnum):
    """Quadratic-character classification; the value is chi(x)."""

    ZERO = 0
    RESIDUE = 1
    NONRESIDUE = -1


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for sp in small:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p, little-endian coefficient lists -------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], f: Sequence[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], f: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _poly_mod(prod, f, p)


def _poly_powmod(a: list[int], e: int, f: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(list(a), f, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, p)
        base = _poly_mulmod(base, base, f, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Ben-Or test: monic ``f`` of degree k is irreducible over F_p iff
    gcd(x^(p^i) - x, f) = 1 for every 1 <= i <= k/2."""
    f = list(f)
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if f[0] % p == 0:
        return False
    h = [0, 1]
    for _ in range(k // 2):
        h = _poly_powmod(h, p, f, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(f, _trim(diff), p)
        if len(g) > 1:
            return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree k, ordered by lower coefficients
    read from the top down (the same order as element codes)."""
    for low in itertools.product(range(p), repeat=k):
        f = list(reversed(low)) + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class GF:
    """The finite field F_q, q = p**k, p odd.

    ``modulus`` is the monic defining polynomial as little-endian
    coefficients (length k + 1); it is required to be irreducible and is
    chosen deterministically when omitted. ``table_threshold`` bounds q for
    the lookup tables that accelerate residue tests and extension-field
    multiplication.
    """

    def __init__(
        self,
        p: int,
        k: int = 1,
        modulus: Sequence[int] | None = None,
        *,
        table_threshold: int = DEFAULT_TABLE_THRESHOLD,
    ):
        p, k = int(p), int(k)
        if p == 2:
            raise EvenCharacteristic("characteristic 2 is not supported: q must be odd")
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        if p**k >= FIELD_CAP:
            raise FieldTooLarge(f"q = {p}^{k} exceeds the supported cap {FIELD_CAP}")
        if k == 1:
            if modulus is not None and len(modulus) not in (0, 2):
                raise ValueError("a prime field takes no modulus")
            modulus = None
        elif modulus is None:
            modulus = smallest_irreducible(p, k)
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != k + 1 or modulus[-1] != 1:
                raise ValueError(f"modulus must be monic of degree {k}")
            if not is_irreducible(modulus, p):
                raise ReduciblePolynomial(f"{list(modulus)} is reducible over F_{p}")
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = tuple(modulus) if modulus is not None else None
        self.table_threshold = int(table_threshold)
        self._pw = [p**i for i in range(k)]

    # -- identity --------------------------------------------------------

    def _key(self):
        return (self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, GF) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.k == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k}, modulus={list(self.modulus)})"

    def describe(self) -> dict:
        return {"p": self.p, "k": self.k, "q": self.q,
                "modulus": list(self.modulus) if self.modulus else None}

    # -- encoding --------------------------------------------------------

    def coeffs(self, x: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.k):
            x, r = divmod(x, self.p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, cs: Iterable[int]) -> int:
        cs = list(cs)
        if len(cs) > self.k:
            raise ValueError(f"expected at most {self.k} coefficients, got {len(cs)}")
        return sum((int(c) % self.p) * w for c, w in zip(cs, self._pw))

    def check(self, x: int) -> int:
        x = int(x)
        if not 0 <= x < self.q:
            raise ValueError(f"element code {x} out of range for {self!r}")
        return x

    def __call__(self, value) -> "Elem":
        """Build an element from an integer (reduced mod p when k = 1, a
        code otherwise) or a coefficient sequence."""
        if isinstance(value, Elem):
            if value.field != self:
                raise FieldMismatch(f"{value!r} does not belong to {self!r}")
            return value
        if isinstance(value, (list, tuple, np.ndarray)):
            return Elem(self, self.from_coeffs(value))
        if self.k == 1:
            return Elem(self, int(value) % self.p)
        return Elem(self, self.check(value))

    def elements(self) -> range:
        return range(self.q)

    @property
    def one(self) -> int:
        return 1

    @property
    def minus_one(self) -> int:
        return self.p - 1

    # -- scalar arithmetic on codes -------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self.from_coeffs(x + y for x, y in zip(self.coeffs(a), self.coeffs(b)))

    def neg(self, a: int) -> int:
        if self.k == 1:
            return -a % self.p
        return self.from_coeffs(-x for x in self.coeffs(a))

    def sub(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a - b) % self.p
        return self.from_coeffs(x - y for x, y in zip(self.coeffs(a), self.coeffs(b)))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        prod = _poly_mulmod(_trim(list(self.coeffs(a))), _trim(list(self.coeffs(b))),
                            self.modulus, self.p)
        return self.from_coeffs(prod)

    def pow(self, a: int, e: int) -> int:
        a, e = int(a), int(e)
        if e < 0:
            a, e = self.inv(a), -e
        if self.k == 1:
            return pow(a, e, self.p)
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in {self!r}")
        return self.pow(a, self.q - 2)

    def scale_int(self, c: int, a: int) -> int:
        """Multiply by an integer constant of the prime field."""
        return self.mul(c % self.p, a)

    def trace(self, x: int) -> int:
        """Absolute trace x + x^p + ... + x^(p^(k-1)) as an integer in [0, p)."""
        if self.k == 1:
            return x
        return sum(c * t for c, t in zip(self.coeffs(x), self._trace_basis)) % self.p

    def trace_frobenius(self, x: int) -> int:
        """Trace by literally summing the Frobenius conjugates."""
        total, y = 0, x
        for _ in range(self.k):
            total = self.add(total, y)
            y = self.pow(y, self.p)
        if total >= self.p:
            raise AssertionError("trace left the prime field")
        return total

    @cached_property
    def _trace_basis(self) -> tuple[int, ...]:
        # code p**i is the monomial x^i
        return tuple(self.trace_frobenius(w) for w in self._pw)

    # -- quadratic character --------------------------------------------

    def chi_euler(self, x: int) -> int:
        if x == 0:
            return 0
        r = self.pow(x, (self.q - 1) // 2)
        if r == 1:
            return 1
        if r == self.minus_one:
            return -1
        raise AssertionError("Euler criterion produced neither 1 nor -1")

    def chi(self, x: int) -> int:
        x = int(x)
        if self.q <= self.table_threshold:
            return int(self.chi_table[x])
        return self.chi_euler(x)

    def qr_class(self, x: int) -> QRClass:
        return QRClass(self.chi(x))

    @cached_property
    def chi_table(self) -> np.ndarray:
        """chi over all codes, built from the set of squares."""
        table = np.full(self.q, -1, dtype=np.int8)
        xs = np.arange(self.q, dtype=np.int64)
        table[self.vmul(xs, xs)] = 1
        table[0] = 0
        return table

    def smallest_nonresidue(self) -> int:
        for x in range(1, self.q):
            if self.chi(x) == -1:
                return x
        raise AssertionError("no nonresidue")  # pragma: no cover

    # -- lookup tables for extension fields ------------------------------

    @cached_property
    def primitive_element(self) -> int:
        factors = _prime_factors(self.q - 1)
        for g in range(2 if self.k == 1 else self.p, self.q):
            if all(self.pow(g, (self.q - 1) // r) != 1 for r in factors):
                return g
        raise AssertionError("no primitive element")  # pragma: no cover

    @cached_property
    def _log_tables(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.primitive_element
        exp = np.empty(self.q - 1, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        y = 1
        for i in range(self.q - 1):
            exp[i] = y
            log[y] = i
            y = self.mul(y, g)
        return exp, log

    # -- vectorised arithmetic on int64 code arrays ----------------------

    def _digits(self, a: np.ndarray) -> np.ndarray:
        pw = np.asarray(self._pw, dtype=np.int64)
        return (np.asarray(a, dtype=np.int64)[..., None] // pw) % self.p

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        pw = np.asarray(self._pw, dtype=np.int64)
        return ((d % self.p) * pw).sum(axis=-1)

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a + b) % self.p
        return self._undigits(self._digits(a) + self._digits(b))

    def vsub(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a - b) % self.p
        return self._undigits(self._digits(a) - self._digits(b))

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return -a % self.p
        return self._undigits(-self._digits(a))

    def vscale_int(self, c: int, a) -> np.ndarray:
        """Multiply by the prime-field constant c (coefficient-wise)."""
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return (c % self.p) * a % self.p
        return self._undigits(self._digits(a) * (c % self.p))

    def vmul(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return a * b % self.p
        if self.q <= self.table_threshold:
            exp, log = self._log_tables
            a, b = np.broadcast_arrays(a, b)
            out = exp[(log[a] + log[b]) % (self.q - 1)]
            return np.where((a == 0) | (b == 0), 0, out)
        return np.frompyfunc(self.mul, 2, 1)(a, b).astype(np.int64)

    def vtrace(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return a.copy()
        basis = np.asarray(self._trace_basis, dtype=np.int64)
        return (self._digits(a) * basis).sum(axis=-1) % self.p

    def vchi(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.q <= self.table_threshold:
            return self.chi_table[a]
        if self.k == 1:
            r = _vpowmod(a, (self.p - 1) // 2, self.p)
            return np.where(a == 0, 0, np.where(r == 1, 1, -1)).astype(np.int8)
        return np.frompyfunc(self.chi_euler, 1, 1)(a).astype(np.int8)


def _vpowmod(a: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def make_field(p: int, k: int = 1, modulus: Sequence[int] | None = None, **kw) -> GF:
    return GF(p, k, modulus, **kw)


class Elem:
    """An element of a specific field, with arithmetic operators."""

    __slots__ = ("field", "value")

    def __init__(self, field: GF, value: int):
        self.field = field
        self.value = field.check(value)

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.value)

    def _other(self, other) -> int:
        if isinstance(other, Elem):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else Elem(self.field, self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else Elem(self.field, self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else Elem(self.field, self.field.sub(b, self.value))

    def __mul__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else Elem(self.field, self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return Elem(self.field, self.field.mul(self.value, self.field.inv(b)))

    def __neg__(self):
        return Elem(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        return Elem(self.field, self.field.pow(self.value, int(e)))

    def inv(self) -> "Elem":
        return Elem(self.field, self.field.inv(self.value))

    def trace(self) -> int:
        return self.field.trace(self.value)

    def qr_class(self) -> QRClass:
        return self.field.qr_class(self.value)

    def __eq__(self, other):
        if isinstance(other, Elem):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int) and self.field.k == 1:
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        if self.field.k == 1:
            return f"{self.value} (mod {self.field.p})"
        return f"Elem({list(self.coeffs)} in {self.field!r})"


_OPS = {"add", "sub", "mul", "neg", "inv", "pow"}


def arith(a: Elem, b: Elem | int | None, op: str) -> Elem:
    """Dispatch a named field operation. ``pow`` takes an integer exponent as b."""
    if op not in _OPS:
        raise ValueError(f"unknown operation {op!r}")
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** int(b)
    if not isinstance(b, Elem):
        b = a.field(b)
    return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__}[op](b)


def trace(x: Elem) -> int:
    return x.trace()


def qr_class(x: Elem) -> QRClass:
    return x.qr_class()
