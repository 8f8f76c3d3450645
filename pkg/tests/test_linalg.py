import random
from fractions import Fraction
from itertools import product

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from critforge import _monomial as mono
from critforge.errors import ResourceLimit
from critforge.expr import parse_series
from critforge.linalg import (
    JetBasis,
    RatMatrix,
    det,
    ideal_jet_echelon,
    inverse,
    jet_span_dim,
    kernel,
    rref,
    solve_linear,
    vector_row,
)
from critforge.series import Series


def fraction_rref(rows):
    """Textbook Gauss-Jordan over Fraction: leftmost pivot, smallest row index."""
    A = [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in rows]
    m = len(A)
    n = len(A[0]) if A else 0
    r = 0
    pivots = []
    for c in range(n):
        p = next((i for i in range(r, m) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, r, pivots


def random_matrix(rng, m, n, density=0.6):
    return RatMatrix([[mpq(rng.randint(-4, 4), rng.randint(1, 3)) if rng.random() < density else 0
                       for _ in range(n)] for _ in range(m)], n)


def test_rref_examples():
    I3 = RatMatrix.identity(3)
    R, r, piv = rref(I3)
    assert R == I3 and r == 3 and tuple(piv) == (0, 1, 2)
    R, r, piv = rref(RatMatrix([[1, 2], [2, 4]]))
    assert r == 1
    assert R == RatMatrix([[1, 2], [0, 0]])
    assert rref(RatMatrix.zeros(3, 4))[1] == 0


def test_rref_refuses_wide_dense():
    with pytest.raises(ResourceLimit):
        rref(RatMatrix.zeros(1, 5001))


def test_solve_linear_examples():
    b = [mpq(3), mpq(-1, 2), mpq(7)]
    assert list(solve_linear(RatMatrix.identity(3), b)) == b
    assert list(solve_linear(RatMatrix([[2]]), [1])) == [mpq(1, 2)]
    assert solve_linear(RatMatrix([[1, 1], [1, 1]]), [1, 2]) is None


def test_inverse_and_det():
    M = RatMatrix([[2, 1], [1, 1]])
    assert inverse(M) @ M == RatMatrix.identity(2)
    assert det(M) == 1
    with pytest.raises(ZeroDivisionError):
        inverse(RatMatrix([[1, 2], [2, 4]]))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_rref_matches_fraction_reference(seed):
    rng = random.Random(seed)
    M = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
    R, r, piv = rref(M)
    A, r2, piv2 = fraction_rref(M.tolist())
    assert (r, list(piv)) == (r2, piv2)
    assert [[Fraction(int(x.numerator), int(x.denominator)) for x in row]
            for row in R.tolist()] == A


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_rref_idempotent_and_rank_nullity(seed):
    rng = random.Random(seed)
    M = random_matrix(rng, rng.randint(1, 7), rng.randint(1, 7), rng.random())
    R, r, _ = rref(M)
    assert rref(R)[0] == R
    K = kernel(M)
    assert r + len(K) == M.cols
    for v in K:
        assert not any(M.apply(v))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_solve_linear_consistent(seed):
    rng = random.Random(seed)
    M = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
    x = [mpq(rng.randint(-3, 3)) for _ in range(M.cols)]
    b = M.apply(x)
    sol = solve_linear(M, b)
    assert sol is not None and list(M.apply(sol)) == list(b)


def test_jet_basis_size_and_order():
    B = JetBasis(3, 4)
    assert len(B) == 35
    B2 = JetBasis(2, 2)
    assert B2.monomials == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def brute_span_dim(generators, D, nvars):
    """Dense Fraction elimination over all products monomial * generator."""
    basis = [e for d in range(D + 1) for e in mono.monomials_of_degree(nvars, d)]
    idx = {e: i for i, e in enumerate(basis)}
    rows = []
    for g in generators:
        terms = g.terms()
        for m in basis:
            row = [mpq(0)] * len(basis)
            for e, c in terms.items():
                t = tuple(a + b for a, b in zip(e, m))
                if sum(t) <= D:
                    row[idx[t]] += c
            if any(row):
                rows.append(row)
    if not rows:
        return 0
    return fraction_rref(rows)[1]


def test_jet_span_dim_examples():
    x = Series.variable(1, 0, 6)
    assert jet_span_dim([x], 3) == 3
    assert jet_span_dim([], 3, 2) == 0
    gens = [parse_series("3*x^2", ["x", "y"], 6), parse_series("4*y^3", ["x", "y"], 6)]
    assert jet_span_dim(gens, 4) == 9
    assert brute_span_dim(gens, 4, 2) == 9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_jet_span_dim_matches_brute_force_and_is_monotone(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    gens = []
    for _ in range(rng.randint(1, 3)):
        terms = {}
        for _ in range(rng.randint(1, 3)):
            d = rng.randint(1, 3)
            e = [0] * n
            for _ in range(d):
                e[rng.randrange(n)] += 1
            terms[tuple(e)] = mpq(rng.randint(-3, 3), rng.randint(1, 2))
        gens.append(Series(n, 6, terms))
    prev = 0
    for D in range(0, 5):
        d = jet_span_dim(gens, D, n)
        assert d == brute_span_dim(gens, D, n)
        assert d >= prev
        prev = d


def test_echelon_membership():
    gens = [parse_series("x^2", ["x", "y"], 6), parse_series("y^2", ["x", "y"], 6)]
    ech = ideal_jet_echelon(gens, 4)
    assert ech.contains(vector_row(parse_series("3*x^2*y - y^3", ["x", "y"], 6), ech.basis))
    assert not ech.contains(vector_row(parse_series("x*y", ["x", "y"], 6), ech.basis))


def test_max_cells_env(monkeypatch):
    monkeypatch.setenv("CRITFORGE_MAX_CELLS", "10")
    with pytest.raises(ResourceLimit):
        ideal_jet_echelon([parse_series("x^2 + y^3", ["x", "y"], 8)], 6)
    monkeypatch.setenv("CRITFORGE_MAX_CELLS", "lots")
    with pytest.raises(ResourceLimit):
        ideal_jet_echelon([parse_series("x^2", ["x", "y"], 8)], 6)


def test_matmul_and_transpose():
    A = RatMatrix([[1, 2, 3], [4, 5, 6]])
    assert A.transpose().shape == (3, 2)
    assert (A @ A.transpose()) == RatMatrix([[14, 32], [32, 77]])
    assert all(A[i, j] == A.transpose()[j, i] for i, j in product(range(2), range(3)))
