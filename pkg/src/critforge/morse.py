"""Hessian analysis, the relative formal Morse iteration and the splitting pipeline."""

from dataclasses import dataclass

from gmpy2 import mpq

from . import _monomial as mono
from .errors import ContractViolation, NotRelativelyMorse
from .linalg import RatMatrix, inverse, kernel, rref
from .milnor import LGPair
from .quadform import QuadForm, congruence_diagonalize
from .series import (
    CoordChange,
    Series,
    compose,
    compose_changes,
    implicit_solve,
    invert_coordchange,
    nth_root,
    reciprocal,
)


@dataclass(frozen=True)
class HessianData:
    H: RatMatrix
    rank: int
    corank: int
    witness: RatMatrix
    diagonal: tuple

    def __post_init__(self):
        half = self.H.scale(mpq(1, 2))
        check = self.witness.transpose() @ half @ self.witness
        full = tuple(self.diagonal) + (mpq(0),) * self.corank
        if check != RatMatrix.diag(full):
            raise ContractViolation("Hessian congruence witness does not verify")


@dataclass(frozen=True)
class SplitResult:
    """compose(f, witness) == residual(x) + quad(y), x the first ``corank`` variables."""

    quad: QuadForm
    residual: LGPair
    witness: CoordChange
    order: int

    @property
    def corank(self):
        return self.residual.nvars

    def normal_form(self):
        n = self.residual.nvars + self.quad.dim
        return (self.residual.f.embed(n, 0)
                + self.quad.as_series(n, self.residual.nvars, self.order))


def _second_derivatives(f):
    n = f.nvars
    H = [[mpq(0)] * n for _ in range(n)]
    for exps, c in f.homogeneous(2).items():
        idx = [i for i, e in enumerate(exps) for _ in range(e)]
        i, j = idx
        if i == j:
            H[i][i] = 2 * c
        else:
            H[i][j] = H[j][i] = c
    return RatMatrix(H, n)


def hessian(p):
    H = _second_derivatives(p.f)
    P, d = congruence_diagonalize(H.scale(mpq(1, 2)))
    nonzero = tuple(x for x in d if x)
    return HessianData(H, len(nonzero), p.nvars - len(nonzero), P, nonzero)


def _fiber_parts(h, nbase):
    """Split h by degree in the fiber variables (those after the first nbase)."""
    nf = h.nvars - nbase
    mask = (1 << (mono.BITS * nf)) - 1
    parts = {}
    for k, c in h._terms.items():
        parts.setdefault(mono.degree(k & mask), {})[k] = c
    return {d: Series._raw(h.nvars, h.order, t) for d, t in parts.items()}


def _fiber_gram(h2, nbase):
    """Matrix B(x) of series with h2 = sum B_ij(x) y_i y_j, B symmetric."""
    n = h2.nvars
    nf = n - nbase
    B = [[{} for _ in range(nf)] for _ in range(nf)]
    for k, c in h2._terms.items():
        e = mono.unpack(k, n)
        ys = [i for i in range(nf) for _ in range(e[nbase + i])]
        i, j = ys
        base_key = mono.pack(e[:nbase] + (0,) * nf)
        if i == j:
            B[i][i][base_key] = c
        else:
            B[i][j][base_key] = c / 2
            B[j][i][base_key] = c / 2
    return [[Series._raw(n, h2.order, B[i][j]) for j in range(nf)] for i in range(nf)]


def _mat_mul(A, B, zero):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), zero)
             for j in range(len(B[0]))] for i in range(len(A))]


def _series_matrix_inverse(B, order):
    """Inverse of a matrix of series with invertible constant part, by Newton iteration."""
    n = len(B)
    nvars = B[0][0].nvars
    zero = Series.zero(nvars, order)
    B0 = RatMatrix([[B[i][j].constant_term() for j in range(n)] for i in range(n)], n)
    try:
        B0inv = inverse(B0)
    except ZeroDivisionError:
        raise NotRelativelyMorse("fiber Hessian block is singular") from None
    X = [[Series.constant(nvars, B0inv[i, j], order) for j in range(n)] for i in range(n)]
    prec = 0
    while prec < order:
        prec = 2 * prec + 1
        BX = _mat_mul(B, X, zero)
        R = [[(2 if i == j else 0) - BX[i][j] for j in range(n)] for i in range(n)]
        X = _mat_mul(X, R, zero)
    BX = _mat_mul(B, X, zero)
    for i in range(n):
        for j in range(n):
            if BX[i][j] != Series.constant(nvars, 1 if i == j else 0, order):
                raise ContractViolation("series matrix inverse failed to verify")
    return X


def _decompose_defect(fk, nbase):
    """Write fk = sum_i y_i g_i, each monomial going to its smallest-index fiber variable."""
    n = fk.nvars
    nf = n - nbase
    g = [{} for _ in range(nf)]
    for k, c in fk._terms.items():
        e = mono.unpack(k, n)
        i = next(i for i in range(nf) if e[nbase + i])
        g[i][k - mono.unit(n, nbase + i)] = c
    return [Series._raw(n, fk.order, t) for t in g]


def _fiber_map(n, nbase, order, fiber_images):
    comps = [Series.variable(n, i, order) for i in range(nbase)] + list(fiber_images)
    return CoordChange(comps, check=False)


def _relative_morse(h, nbase, N):
    """Substitution S (fixing the base) and constant diagonal q with compose(h, S) == q(y)."""
    n = h.nvars
    nf = n - nbase
    h = h.truncate(N) if h.order > N else h
    parts = _fiber_parts(h, nbase)
    for d in (0, 1):
        if d in parts and not parts[d].is_zero():
            raise ValueError(f"h has nonzero terms of fiber degree {d}; center it first")
    if nf == 0:
        if not h.is_zero():
            raise ValueError("with no fiber variables h must vanish")
        return QuadForm([]), CoordChange.identity(n, N)
    B = _fiber_gram(parts.get(2, Series.zero(n, N)), nbase)
    Binv = _series_matrix_inverse(B, N)
    ys = [Series.variable(n, nbase + i, N) for i in range(nf)]
    S = CoordChange.identity(n, N)
    cur = h
    for k in range(3, N + 1):
        fk = _fiber_parts(cur, nbase).get(k)
        if fk is None or fk.is_zero():
            continue
        g = _decompose_defect(fk, nbase)
        lam = [sum((Binv[i][j] * g[j] for j in range(nf)), Series.zero(n, N)) * mpq(1, 2)
               for i in range(nf)]
        phi = _fiber_map(n, nbase, N, [y - l for y, l in zip(ys, lam)])
        cur = compose(cur, phi)
        S = compose_changes(S, phi)
    leftover = [d for d, part in _fiber_parts(cur, nbase).items() if d != 2 and not part.is_zero()]
    if leftover:
        raise ContractViolation(f"defects of fiber degree {leftover} survived the iteration")

    # constant congruence making B(0) diagonal
    B0 = RatMatrix([[B[i][j].constant_term() for j in range(nf)] for i in range(nf)], nf)
    P0, _ = congruence_diagonalize(B0)
    phi = _fiber_map(n, nbase, N, [sum((ys[j] * P0[i, j] for j in range(nf)), Series.zero(n, N))
                                   for i in range(nf)])
    cur = compose(cur, phi)
    S = compose_changes(S, phi)

    # eliminate x-dependent off-diagonal terms; pivots are units of Q[[x]]
    for s in range(nf):
        Bc = _fiber_gram(cur, nbase)
        a_inv = reciprocal(Bc[s][s]._with_order(N))
        images = list(ys)
        shift = Series.zero(n, N)
        for j in range(s + 1, nf):
            if not Bc[s][j].is_zero():
                shift = shift + a_inv * Bc[s][j]._with_order(N) * ys[j]
        if shift.is_zero():
            continue
        images[s] = ys[s] - shift
        phi = _fiber_map(n, nbase, N, images)
        cur = compose(cur, phi)
        S = compose_changes(S, phi)

    # absorb unit square roots so the form has constant coefficients
    Bc = _fiber_gram(cur, nbase)
    diag = [Bc[i][i].constant_term() for i in range(nf)]
    images = []
    for i in range(nf):
        unit = Bc[i][i]._with_order(N) * (1 / diag[i])
        if unit == Series.constant(n, 1, N):
            images.append(ys[i])
        else:
            images.append(ys[i] * reciprocal(nth_root(unit, 2)))
    phi = _fiber_map(n, nbase, N, images)
    cur = compose(cur, phi)
    S = compose_changes(S, phi)

    quad = QuadForm.diagonal(diag)
    if cur != quad.as_series(n, nbase, N):
        raise ContractViolation("relative Morse normal form does not verify")
    return quad, S


def relative_morse(h, nbase, N=None):
    """Quadratic form q and coordinate change tau with compose(h, invert(tau)) == q(y).

    The first ``nbase`` variables are the base x, the rest the fiber y.  h must
    satisfy h(x, 0) = 0 and d_y h(x, 0) = 0 with invertible fiber Hessian at 0.
    tau is determined modulo m^N; its degree-N part depends on data of h
    beyond the truncation.
    """
    N = h.order if N is None else N
    quad, S = _relative_morse(h, nbase, N)
    return quad, invert_coordchange(S)


def _kernel_adapted_change(H, order):
    """Linear change putting the Hessian kernel on the first variables.

    Kernel vectors come from the rref of H (free columns ascending); the
    complement is spanned by the standard vectors of the pivot columns.
    """
    n = H.rows
    _, _, pivots = rref(H)
    cols = list(kernel(H)) + [tuple(mpq(1 if i == p else 0) for i in range(n)) for p in pivots]
    L = RatMatrix([[cols[j][i] for j in range(n)] for i in range(n)], n)
    return CoordChange.linear(L, order)


def split(p, N=12):
    """Split f into residual(x) + quad(y) with a verified witness, valid mod m^(N+1)."""
    f = p.f.truncate(N) if p.f.order > N else p.f
    n = p.nvars
    if f.order < N:
        raise ValueError(f"input known only to order {f.order} < {N}")
    if n == 0:
        res = SplitResult(QuadForm([]), p, CoordChange.identity(0, N), N)
        return res
    hd = hessian(p)
    c = hd.corank
    L = _kernel_adapted_change(hd.H, N)
    f1 = compose(f, L)
    w = implicit_solve(f1, c)
    shift = [wj.embed(n, 0)._with_order(N) for wj in w]
    R = _fiber_map(n, c, N, [Series.variable(n, c + j, N) + shift[j] for j in range(n - c)])
    f2 = compose(f1, R)
    parts = _fiber_parts(f2, c)
    g = parts.get(0, Series.zero(n, N))
    h = f2 - g
    quad, S = _relative_morse(h, c, N)
    witness = compose_changes(compose_changes(L, R), S)
    residual = LGPair.of(g.restrict(range(c)))
    result = SplitResult(quad, residual, witness, N)
    if compose(f, witness) != result.normal_form():
        raise ContractViolation("split witness does not verify")
    if not _second_derivatives(residual.f).entries == RatMatrix.zeros(c, c).entries:
        raise ContractViolation("residual Hessian does not vanish")
    return result


def minimal_model(p, N=12):
    """Split read as a minimal chart: the residual has zero Hessian at the origin."""
    return split(p, N)
