import random
from itertools import product

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

import randgen
from critforge.series import (
    CoordChange,
    Series,
    add,
    binomial,
    compose,
    compose_changes,
    implicit_solve,
    invert_coordchange,
    mul,
    nth_root,
    partial,
    reciprocal,
)


def S(text, names, order):
    from critforge.expr import parse_series

    return parse_series(text, names.split(","), order)


def expand_oracle(f_terms, images, nvars, order):
    """Brute-force substitution with plain dict polynomials over Fraction-free mpq."""

    def pmul(a, b):
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if sum(e) <= order:
                    out[e] = out.get(e, 0) + ca * cb
        return out

    total = {}
    for e, c in f_terms.items():
        term = {(0,) * nvars: mpq(1)}
        for i, k in enumerate(e):
            for _ in range(k):
                term = pmul(term, images[i])
        for ee, cc in term.items():
            total[ee] = total.get(ee, 0) + c * cc
    return {e: c for e, c in total.items() if c}


# ---- add / mul ---------------------------------------------------------------

def test_add_inverse_cancels():
    assert add(S("x + x^2", "x", 5), S("-x", "x", 5)) == S("x^2", "x", 5)


def test_add_takes_min_order():
    r = add(S("1 + x", "x", 3), Series.zero(1, 2))
    assert r.order == 2
    assert r == S("1 + x", "x", 2)


def test_add_stabilized_pair():
    r = add(S("x^3 + y^4", "x,y", 6), S("y^2", "x,y", 6))
    assert r == S("x^3 + y^2 + y^4", "x,y", 6)
    assert r.terms() == {(0, 2): 1, (3, 0): 1, (0, 4): 1}


def test_add_variable_mismatch():
    with pytest.raises(ValueError):
        add(Series.variable(1, 0, 3), Series.variable(2, 0, 3))


def test_mul_examples():
    assert mul(S("x", "x", 5), S("x", "x", 5)) == S("x^2", "x", 5)
    assert mul(S("1 + x", "x", 2), S("1 - x", "x", 2)) == S("1 - x^2", "x", 2)
    assert mul(S("y^2", "y", 3), S("1 + y", "y", 3)) == S("y^2 + y^3", "y", 3)


def test_mul_variable_mismatch():
    with pytest.raises(ValueError):
        mul(Series.variable(1, 0, 3), Series.variable(2, 0, 3))


def test_canonical_form_drops_zeros_and_high_degree():
    s = Series(2, 3, {(1, 0): 0, (2, 2): 5, (0, 1): mpq(2, 4)})
    assert s.terms() == {(0, 1): mpq(1, 2)}
    assert s.ord() == 1
    assert Series.zero(2, 3).ord() is None or Series.zero(2, 3).ord() == float("inf")


# ---- compose / invert --------------------------------------------------------

def test_compose_example():
    phi = CoordChange([S("x + x^2", "x", 4)])
    assert compose(S("x^2", "x", 4), phi) == S("x^2 + 2*x^3 + x^4", "x", 4)


def test_compose_identity():
    f = S("x^3 + 2*x*y - 1/3*y^5", "x,y", 7)
    assert compose(f, CoordChange.identity(2, 7)) == f


def test_compose_quartic_automorphism_fixes_f():
    from critforge.isotopy import example_automorphism

    f = S("x^3 + y^4", "x,y", 16)
    assert compose(f, example_automorphism(16)) == f


def test_compose_rejects_constant_term():
    with pytest.raises(ValueError):
        CoordChange([S("1 + x", "x", 3)])


def test_invert_examples():
    assert invert_coordchange(CoordChange([S("2*x", "x", 4)])) == CoordChange([S("1/2*x", "x", 4)])
    inv = invert_coordchange(CoordChange([S("x + x^2", "x", 3)]))
    assert inv.components[0] == S("x - x^2 + 2*x^3", "x", 3)
    swap = CoordChange([S("y", "x,y", 5), S("x", "x,y", 5)])
    assert invert_coordchange(swap) == swap


def test_invert_singular_linear_part():
    with pytest.raises(ValueError):
        CoordChange([S("x^2", "x", 3)])


# ---- nth_root / partial ------------------------------------------------------

def test_sqrt_example():
    assert nth_root(S("1 + 2*x", "x", 2), 2) == S("1 + x - 1/2*x^2", "x", 2)


def test_root_of_one():
    for n in (1, 2, 3, 5):
        assert nth_root(Series.constant(2, 1, 6), n) == Series.constant(2, 1, 6)


def test_fourth_root_quartic_unit():
    u = S("1 - 3*x^2 - 3*x*y^4 - y^8", "x,y", 8)
    h = nth_root(u, 4)
    assert h ** 4 == u
    assert h.constant_term() == 1


def test_nth_root_rational_constant():
    u = S("4 + x", "x", 5)
    r = nth_root(u, 2)
    assert r.constant_term() == 2
    assert r * r == u


def test_nth_root_errors():
    with pytest.raises(ValueError):
        nth_root(S("x", "x", 3), 2)
    with pytest.raises(ValueError):
        nth_root(S("2 + x", "x", 3), 2)


def test_partial_examples():
    f = S("x^3 + y^4", "x,y", 6)
    assert partial(f, 0) == S("3*x^2", "x,y", 5)
    assert partial(f, 1) == S("4*y^3", "x,y", 5)
    assert partial(Series.constant(2, 7, 4), 0).is_zero()
    assert partial(f, 0).order == 5


def test_reciprocal():
    u = S("1 + x - 2*y + x*y", "x,y", 7)
    assert u * reciprocal(u) == Series.constant(2, 1, 7)


def test_binomial_coefficients():
    assert binomial(mpq(1, 2), 2) == mpq(-1, 8)
    assert binomial(5, 2) == 10


# ---- implicit_solve ----------------------------------------------------------

def test_implicit_solve_examples():
    (w,) = implicit_solve(S("y^2 + 2*x*y", "x,y", 6), 1)
    assert w == S("-x", "x", 5)
    assert all(c.is_zero() for c in implicit_solve(S("y^2 - 3*y*z + 5*z^2", "y,z", 6), 0))
    (w,) = implicit_solve(S("y^2 + x^2*y", "x,y", 4), 1)
    assert w == S("-1/2*x^2", "x", 3)


def test_implicit_solve_singular_block():
    from critforge.errors import NotRelativelyMorse

    with pytest.raises(NotRelativelyMorse):
        implicit_solve(S("y^3 + x*y", "x,y", 6), 1)


def _check_implicit(f, nbase):
    n = f.nvars
    w = implicit_solve(f, nbase)
    N = f.order - 1
    # y_j -> w_j(x); the fiber variables are eliminated
    images = [Series.variable(n, i, N) for i in range(nbase)] + \
        [w[j].embed(n, 0)._with_order(N) for j in range(n - nbase)]
    for j in range(nbase, n):
        g = partial(f, j)
        sub = g.substitute([c._with_order(g.order) for c in images])
        assert sub.truncate(N - 1).is_zero()


def test_implicit_solve_annihilates_fiber_partials():
    rng = random.Random(7)
    for _ in range(20):
        nb = rng.randint(1, 2)
        nf = rng.randint(1, 2)
        n = nb + nf
        q = randgen.quad_form(rng, nf, nf)
        f = q.as_series(n, nb, 7) + randgen.series(rng, n, 7, 6, 7, 2)
        # keep the y-Hessian block equal to the chosen form
        f = f - f.homogeneous(2) + q.as_series(n, nb, 7) \
            + randgen.series(rng, n, 7, 2, 2, 2).restrict(range(nb)).embed(n, 0)
        _check_implicit(f, nb)


# ---- properties ----------------------------------------------------------------

def _random_triple(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    N = rng.randint(0, 6)
    return [randgen.series(rng, n, N, 5) for _ in range(3)]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_ring_laws(seed):
    a, b, c = _random_triple(seed)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == Series.zero(a.nvars, a.order)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_compose_associative(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    N = rng.randint(2, 6)
    f = randgen.series(rng, n, N, 5)
    phi = randgen.coord_change(rng, n, N, 2)
    psi = randgen.coord_change(rng, n, N, 2)
    assert compose(compose(f, phi), psi) == compose(f, compose_changes(phi, psi))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_compose_matches_expansion_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    N = rng.randint(2, 5)
    f = randgen.series(rng, n, N, 4)
    phi = randgen.coord_change(rng, n, N, 2)
    want = expand_oracle(f.terms(), [c.terms() for c in phi.components], n, N)
    assert compose(f, phi).terms() == want


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_inverse_round_trip(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    N = rng.randint(1, 7)
    phi = randgen.coord_change(rng, n, N, 3)
    inv = invert_coordchange(phi)
    ident = CoordChange.identity(n, N)
    assert compose_changes(phi, inv) == ident
    assert compose_changes(inv, phi) == ident


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 5))
def test_nth_root_round_trip(seed, n):
    rng = random.Random(seed)
    nv = rng.randint(1, 3)
    N = rng.randint(0, 7)
    c = mpq(rng.randint(1, 4), rng.randint(1, 3)) ** n
    u = Series.constant(nv, c, N) + randgen.series(rng, nv, N, 5, N, 1)
    assert nth_root(u, n) ** n == u


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_partials_commute(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    f = randgen.series(rng, n, 8, 8)
    for i, j in product(range(n), repeat=2):
        assert partial(partial(f, i), j) == partial(partial(f, j), i)


def test_deterministic_term_order():
    f = S("y^2 + x*y + x^2 + x + y + 1", "x,y", 3)
    assert list(f.terms()) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_order_limit_guards_packed_exponents():
    # x^256 would carry out of its 8-bit slot, so orders past 255 are refused everywhere
    with pytest.raises(ValueError):
        Series.variable(1, 0, 256)
    with pytest.raises(ValueError):
        Series.constant(2, 1, 300)
    x = Series.variable(1, 0, 255)
    assert (x ** 200 * x ** 55).terms() == {(255,): 1}
    assert (x ** 200 * x ** 56).is_zero()
