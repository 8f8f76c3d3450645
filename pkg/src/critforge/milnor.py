"""Milnor/Tjurina numbers, Behrend values and related invariants of an LG pair.

Quotient dimensions are computed on jets: with J the ideal in question and
V_L its image in O/m^(L+1), the graded pieces of O/J for the m-adic
filtration are h_k = #(monomials of degree k) - #(pivots of degree k).
Once h_(D+1) = 0 we know m^(D+1) is contained in J + m^(D+2), hence (by
Nakayama) in J, and the quotient has dimension h_0 + ... + h_D.
"""

from dataclasses import dataclass, field

from gmpy2 import mpq

from . import _monomial as mono
from .errors import NonIsolatedError, ResourceLimit
from .linalg import RatMatrix, ideal_jet_echelon, integer_terms, rank
from .series import Series

DEFAULT_CAP = 64


@dataclass(frozen=True)
class LGPair:
    """A formal LG pair: f in m^2, so 0 is the critical value at the origin."""

    nvars: int
    f: Series
    acting: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.f.nvars != self.nvars:
            raise ValueError(f"series has {self.f.nvars} variables, pair declares {self.nvars}")
        if self.f.constant_term():
            raise ValueError("LG pair needs f(0) = 0")
        if not self.f.homogeneous(1).is_zero():
            raise ValueError("LG pair needs df(0) = 0")

    @classmethod
    def of(cls, f):
        return cls(f.nvars, f)

    def jacobian(self):
        if self.nvars == 0:
            return []
        return [self.f.partial(i) for i in range(self.nvars)]


@dataclass(frozen=True)
class MilnorReport:
    mu: int | None
    certified_at: int | None
    hilbert: tuple
    tjurina: int | None
    checked_to: int
    reason: str | None = None

    @property
    def isolated(self):
        return self.mu is not None

    def to_json(self):
        return {
            "mu": self.mu,
            "isolated": self.isolated,
            "certified_at": self.certified_at,
            "hilbert": list(self.hilbert),
            "tjurina": self.tjurina,
            "checked_to": self.checked_to,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class QuotientDim:
    dim: int | None
    certified_at: int | None
    hilbert: tuple
    checked_to: int
    reason: str | None


def _schedule(limit):
    # elimination cost grows steeply with the level, so overshooting the
    # certifying level is the expensive mistake; step by one while levels are small
    L = 3
    out = []
    while L < limit:
        out.append(L)
        L = L + 1 if L < 16 else L * 5 // 4
    out.append(limit)
    return out


def quotient_dim(generators, nvars, cap, available):
    """dim O/(generators) with a Nakayama certificate, searching jet levels up to cap.

    ``available`` is the highest jet degree the generators are known to.
    """
    limit = min(cap, available)
    if limit < 1:
        return QuotientDim(None, None, (), limit, "precision")
    last = 0
    for L in _schedule(limit):
        try:
            ech = ideal_jet_echelon(generators, L, nvars)
        except ResourceLimit:
            return QuotientDim(None, None, (), last, "resource")
        last = L
        piv = ech.pivot_degree_counts()
        h = [mono.count_degree(nvars, k) - piv[k] for k in range(L + 1)]
        for D in range(L):
            if h[D + 1] == 0:
                return QuotientDim(sum(h[:D + 1]), D, tuple(h[:D + 1]), L, None)
    reason = "cap" if limit == cap else "precision"
    return QuotientDim(None, None, (), last, reason)


def _available(f):
    # jets of m*g with g a partial of f are known up to degree f.order - 1
    return f.order - 1


def _milnor_quotient(p, cap):
    if cap < 2:
        raise ValueError("cap must be at least 2")
    return quotient_dim(p.jacobian(), p.nvars, cap, _available(p.f))


def milnor_number(p, cap=DEFAULT_CAP):
    q = _milnor_quotient(p, cap)
    tau = None
    if q.dim is not None:
        tau = MilnorAlgebra(p, q.certified_at, q.dim).tjurina()
    return MilnorReport(q.dim, q.certified_at, q.hilbert, tau, q.checked_to, q.reason)


def tjurina_number(p, cap=DEFAULT_CAP):
    """dim O/((f) + J(f)) = mu - rank(f acting on the Milnor algebra); None if not certified."""
    return milnor_number(p, cap).tjurina


def tjurina_number_jets(p, cap=DEFAULT_CAP):
    """tau straight from jets of the ideal (f) + J(f); slower, kept as a cross-check."""
    q = quotient_dim([p.f] + p.jacobian(), p.nvars, cap, _available(p.f))
    return q.dim


def _require_mu(p, cap):
    report = milnor_number(p, cap)
    if report.mu is None:
        raise NonIsolatedError(
            f"no finite Milnor number certified (checked to order {report.checked_to}, "
            f"{report.reason})")
    return report


def euler_char_milnor_fiber(p, cap=DEFAULT_CAP):
    """chi(F) = 1 + (-1)^(n-1) mu for an isolated critical point."""
    mu = _require_mu(p, cap).mu
    return 1 + (-1) ** (p.nvars - 1) * mu


def behrend_value(p, cap=DEFAULT_CAP):
    """nu = (-1)^n (1 - chi(F)); equals mu at an isolated critical point."""
    mu = _require_mu(p, cap).mu
    chi = 1 + (-1) ** (p.nvars - 1) * mu
    nu = (-1) ** p.nvars * (1 - chi)
    assert nu == mu, (nu, mu)
    return nu


def behrend_value_vanishing_cycles(p, cap=DEFAULT_CAP):
    """(-1)^(n-1) chi(phi_f), reading chi(phi_f) as the reduced Euler characteristic chi(F) - 1.

    Exposed for comparison only.  Other shift conventions for the vanishing
    cycle complex change the sign; this reading is the one that agrees with
    ``behrend_value``.
    """
    chi = euler_char_milnor_fiber(p, cap)
    return (-1) ** (p.nvars - 1) * (chi - 1)


class MilnorAlgebra:
    """O/J(f) as a Q-vector space with basis the standard monomials."""

    def __init__(self, p, degree, mu):
        D = degree
        self.pair = p
        self.degree = D
        ech = ideal_jet_echelon(p.jacobian(), D, p.nvars)
        self.basis_jets = ech.basis
        # normalize pivot rows to leading coefficient 1 over Q
        self._pivots = {c: {k: mpq(v, row[c]) for k, v in row.items()}
                        for c, row in ech.pivots.items()}
        self.standard = [c for c in range(len(ech.basis)) if c not in self._pivots]
        self._pos = {c: i for i, c in enumerate(self.standard)}
        self.dim = len(self.standard)
        assert self.dim == mu, (self.dim, mu)

    @classmethod
    def of(cls, p, cap=DEFAULT_CAP):
        report = _require_mu(p, cap)
        return cls(p, report.certified_at, report.mu)

    def standard_monomials(self):
        return [self.basis_jets.monomials[c] for c in self.standard]

    def normal_form(self, s):
        """Coordinates of the class of a series in the standard-monomial basis."""
        if s.order < self.degree:
            raise ValueError("series not known to the certified degree")
        index = self.basis_jets.index
        row = {}
        for k, c in s._terms.items():
            if mono.degree(k) <= self.degree:
                row[index[k]] = c
        out = [mpq(0)] * self.dim
        pivots = self._pivots
        while row:
            col = min(row)
            c = row.pop(col)
            p = pivots.get(col)
            if p is None:
                out[self._pos[col]] += c
                continue
            for k, v in p.items():
                if k == col:
                    continue
                nv = row.get(k, 0) - c * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        return out

    def tjurina(self):
        return self.dim - rank(self.multiplication_matrix(self.pair.f))

    def multiplication_matrix(self, s):
        n = self.pair.nvars
        cols = []
        for c in self.standard:
            m = Series(n, self.degree, {self.basis_jets.monomials[c]: 1})
            cols.append(self.normal_form(m * s.truncate(self.degree)))
        return RatMatrix([[cols[j][i] for j in range(self.dim)] for i in range(self.dim)],
                         self.dim)


def tangent_complex_dims(p, cap=DEFAULT_CAP):
    """(dim ker, dim coker) of the Hessian acting on A^n, A the Milnor algebra."""
    A = MilnorAlgebra.of(p, cap)
    n = p.nvars
    mu = A.dim
    if n == 0:
        return (0, 0)
    grads = p.jacobian()
    blocks = [[A.multiplication_matrix(grads[i].partial(j)) for j in range(n)] for i in range(n)]
    rows = []
    for i in range(n):
        for r in range(mu):
            rows.append([blocks[i][j][r, c] for j in range(n) for c in range(mu)])
    H = RatMatrix(rows, n * mu)
    rk = rank(H)
    return (n * mu - rk, n * mu - rk)


def koszul_h0(p, cap=DEFAULT_CAP):
    """dim of H^0 of the Koszul complex on the partials: coker of (a_i) -> sum a_i d_i f.

    Computed with dense Bareiss elimination on the jet matrix of the Koszul
    differential, independently of the sparse engine used by milnor_number.
    Returns None when no finite value is certified.
    """
    report = milnor_number(p, cap)
    if report.mu is None:
        return None
    D = report.certified_at
    n = p.nvars
    basis_size = mono.count_upto(n, D)
    from .linalg import JetBasis

    basis = JetBasis(n, D)
    columns = []
    for g in p.jacobian():
        terms = integer_terms(g)
        for km, dm in zip(basis.keys, basis.degrees):
            col = [0] * basis_size
            for k, d, c in terms:
                if dm + d <= D:
                    col[basis.index[km + k]] = c
            if any(col):
                columns.append(col)
    if not columns:
        return basis_size
    M = RatMatrix([[col[i] for col in columns] for i in range(basis_size)], len(columns))
    return basis_size - rank(M)
