"""Packed exponent vectors.

A monomial in ``n`` variables is stored as a single non-negative integer with
one byte per variable, the first variable in the most significant byte.
Multiplying monomials is then integer addition, which never carries as long
as every exponent stays below 256.  Within one degree, a larger key means a
larger exponent on an earlier variable (lexicographic order).
"""

from math import comb

BITS = 8
MASK = (1 << BITS) - 1
MAX_DEGREE = MASK


def pack(exps):
    key = 0
    for e in exps:
        if e < 0 or e > MAX_DEGREE:
            raise ValueError(f"exponent {e} out of range 0..{MAX_DEGREE}")
        key = (key << BITS) | e
    return key


def unpack(key, nvars):
    out = [0] * nvars
    for i in range(nvars - 1, -1, -1):
        out[i] = key & MASK
        key >>= BITS
    return tuple(out)


def degree(key):
    d = 0
    while key:
        d += key & MASK
        key >>= BITS
    return d


def unit(nvars, i):
    """Key of the i-th variable."""
    return 1 << (BITS * (nvars - 1 - i))


def grlex_key(key):
    """Sort key: ascending degree, then descending lex (x^2 before xy before y^2)."""
    return (degree(key), -key)


def monomials_of_degree(nvars, d):
    """All exponent tuples of total degree d, lex descending."""
    if nvars == 0:
        if d == 0:
            yield ()
        return
    if nvars == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in monomials_of_degree(nvars - 1, d - first):
            yield (first,) + rest


def count_upto(nvars, d):
    """Number of monomials of degree <= d."""
    if d < 0:
        return 0
    return comb(nvars + d, d)


def count_degree(nvars, d):
    if d < 0:
        return 0
    if nvars == 0:
        return 1 if d == 0 else 0
    return comb(nvars - 1 + d, d)


def embed(key, nvars, total, offset):
    """Move a key of an ``nvars``-variable ring into slots offset.. of a ``total``-variable ring."""
    return key << (BITS * (total - offset - nvars))
