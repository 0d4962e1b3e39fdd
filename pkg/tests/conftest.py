"""Shared fixtures and brute-force oracles.

The oracles use only scalar field operations and plain loops so they stay
independent of the vectorised kernels they check.
"""

import cmath
import itertools
import math

import numpy as np
import pytest

from acuteff.field import GF
from acuteff.geometry import Point, PointSet, all_points, delta_sum


def random_set(field, n, size, rng):
    pts = all_points(field, n)
    idx = rng.choice(len(pts), size=size, replace=False)
    return PointSet(field, n, pts[idx])


def corpus(field, n, count, seed, max_size=12):
    rng = np.random.default_rng(seed)
    cap = min(max_size, field.q**n)
    return [random_set(field, n, int(rng.integers(1, cap + 1)), rng) for _ in range(count)]


# -- scalar oracles --------------------------------------------------------

def psi_oracle(field, t, x):
    j = field.trace_frobenius(field.mul(t, x))
    return cmath.exp(2j * math.pi * j / field.p)


def inner_oracle(field, a, b):
    acc = 0
    for x, y in zip(a, b):
        acc = field.add(acc, field.mul(x, y))
    return acc


def delta_oracle(field, u, v, w):
    return delta_sum(Point(field, tuple(u)), Point(field, tuple(v)), Point(field, tuple(w))).value


def is_residue_oracle(field, x):
    return x != 0 and any(field.mul(y, y) == x for y in range(1, field.q))


def triple_acute_oracle(field, u, v, w):
    return (is_residue_oracle(field, delta_oracle(field, u, v, w))
            and is_residue_oracle(field, delta_oracle(field, v, u, w))
            and is_residue_oracle(field, delta_oracle(field, w, u, v)))


def s_sum_oracle(t, Z):
    f = Z.field
    rows = [tuple(r) for r in Z.coords.tolist()]
    return sum(psi_oracle(f, t, delta_oracle(f, u, v, w))
               for u in rows for v in rows for w in rows)


def quad_oracle_rhs(t, Z):
    """Naive O(|Z|^4) enumeration of the quadruple bound on |S_t|^2."""
    f = Z.field
    rows = [tuple(r) for r in Z.coords.tolist()]
    total = 0j
    for v, w, x, y in itertools.product(rows, repeat=4):
        if all(f.add(a, b) == f.add(c, d) for a, b, c, d in zip(v, w, x, y)):
            diff = f.sub(inner_oracle(f, v, w), inner_oracle(f, x, y))
            total += psi_oracle(f, t, f.mul(2 % f.p, diff))
    return len(rows) * f.q**Z.n * total


def w_oracle(Z):
    f = Z.field
    rows = [tuple(r) for r in Z.coords.tolist()]
    count = 0
    for v, w, x, y in itertools.product(rows, repeat=4):
        if (all(f.add(a, b) == f.add(c, d) for a, b, c, d in zip(v, w, x, y))
                and inner_oracle(f, v, w) == inner_oracle(f, x, y)):
            count += 1
    return count


def t_oracle(Z, alpha):
    """Count (u, v, w, z) with Delta(u; v, w) = alpha z^2 by full enumeration."""
    f = Z.field
    rows = [tuple(r) for r in Z.coords.tolist()]
    rhs = [f.mul(alpha, f.mul(z, z)) for z in range(f.q)]
    return sum(rhs.count(delta_oracle(f, u, v, w)) for u in rows for v in rows for w in rows)


def acute_set_oracle(field, rows):
    return all(triple_acute_oracle(field, *t) for t in itertools.combinations(rows, 3))


@pytest.fixture(scope="session")
def F7():
    return GF(7)


@pytest.fixture(scope="session")
def F9():
    return GF(3, 2, [1, 0, 1])
