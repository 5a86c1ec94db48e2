"""Octonion multiplication from a pinned Fano-plane table.

Imaginary units are ``e1..e7`` (stored at indices 1..7, index 0 is the real
unit). Each oriented triple ``(a, b, c)`` below means ``e_a e_b = e_c`` and
cyclic rotations thereof; reversing the order flips the sign::

    (1,2,3) (1,4,5) (1,7,6) (2,4,6) (2,5,7) (3,4,7) (3,6,5)

This table coincides with the Cayley-Dickson doubling of the quaternions,
``(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))`` with
``e1, e2, e3 = i, j, k`` and ``e4..e7 = l, il, jl, kl``.
"""

import numpy as np

FANO_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _multiplication_table():
    # table[a, b] = (sign, c) with e_a e_b = sign * e_c
    sign = np.zeros((8, 8), dtype=np.int64)
    index = np.zeros((8, 8), dtype=np.int64)
    for a in range(8):
        sign[0, a] = sign[a, 0] = 1
        index[0, a] = index[a, 0] = a
    for a in range(1, 8):
        sign[a, a] = -1
        index[a, a] = 0
    for a, b, c in FANO_TRIPLES:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            sign[x, y], index[x, y] = 1, z
            sign[y, x], index[y, x] = -1, z
    return sign, index


_SIGN, _INDEX = _multiplication_table()

# structure constants: (x y)_k = sum_ij MULT[i, j, k] x_i y_j
MULT = np.zeros((8, 8, 8))
for _i in range(8):
    for _j in range(8):
        MULT[_i, _j, _INDEX[_i, _j]] = _SIGN[_i, _j]


def multiply(x, y):
    """Octonion product of two length-8 arrays (real part first)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.einsum("i,j,ijk->k", x, y, MULT)


def conjugate(x):
    x = np.array(x, dtype=float)
    x[1:] *= -1.0
    return x


def imaginary_cross(u, v):
    """Cross product of two vectors of R^7, viewed as imaginary octonions."""
    x = np.concatenate([[0.0], np.asarray(u, dtype=float)])
    y = np.concatenate([[0.0], np.asarray(v, dtype=float)])
    return multiply(x, y)[1:]


def triple_cross(x, y, z):
    """Spin(7) triple product ``x × y × z = (x (ȳ z) - z (ȳ x)) / 2`` on R^8."""
    yb = conjugate(y)
    return 0.5 * (multiply(x, multiply(yb, z)) - multiply(z, multiply(yb, x)))
