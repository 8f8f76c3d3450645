"""Exact linear algebra over Q and on jet spaces O/m^(D+1)."""

import os
from math import gcd, lcm

from gmpy2 import mpq

from . import _monomial as mono
from .errors import ResourceLimit

MAX_DENSE_COLS = 5000
DEFAULT_MAX_CELLS = 10**8


def max_cells():
    """Cap on rows*cols of a notional jet matrix, from CRITFORGE_MAX_CELLS."""
    raw = os.environ.get("CRITFORGE_MAX_CELLS")
    if not raw:
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError:
        raise ResourceLimit(f"CRITFORGE_MAX_CELLS is not an integer: {raw!r}") from None
    if value <= 0:
        raise ResourceLimit("CRITFORGE_MAX_CELLS must be positive")
    return value


class RatMatrix:
    """Dense immutable matrix of exact rationals."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries, cols=None):
        data = tuple(tuple(mpq(x) for x in row) for row in entries)
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged matrix")
        self.rows = len(data)
        self.cols = cols
        self.entries = data

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def diag(cls, values):
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def column(self, j):
        return tuple(row[j] for row in self.entries)

    def transpose(self):
        return RatMatrix([self.column(j) for j in range(self.cols)], self.rows)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ot = other.transpose().entries
        return RatMatrix(
            [[sum((a * b for a, b in zip(r, c)), mpq(0)) for c in ot] for r in self.entries],
            other.cols,
        )

    def apply(self, vec):
        return tuple(sum((a * b for a, b in zip(r, vec)), mpq(0)) for r in self.entries)

    def scale(self, c):
        c = mpq(c)
        return RatMatrix([[c * x for x in row] for row in self.entries], self.cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_symmetric(self):
        return self.rows == self.cols and all(
            self.entries[i][j] == self.entries[j][i]
            for i in range(self.rows)
            for j in range(i)
        )

    def tolist(self):
        return [list(row) for row in self.entries]

    def __eq__(self, other):
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in row) for row in self.entries)
        return f"RatMatrix([{body}])"


def _integer_rows(M):
    rows = []
    for row in M.entries:
        den = lcm(*(int(x.denominator) for x in row)) if row else 1
        rows.append([int(x.numerator) * (den // int(x.denominator)) for x in row])
    return rows


def _bareiss_echelon(A, ncols):
    """In-place fraction-free forward elimination. Returns pivot columns."""
    m = len(A)
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == m:
            break
        p = next((i for i in range(r, m) if A[i][c]), None)
        if p is None:
            continue
        if p != r:
            A[r], A[p] = A[p], A[r]
        piv_row = A[r]
        a = piv_row[c]
        for i in range(r + 1, m):
            row = A[i]
            b = row[c]
            for j in range(c + 1, ncols):
                row[j] = (a * row[j] - b * piv_row[j]) // prev
            row[c] = 0
        # rows above r are untouched; Bareiss divisibility holds with column skips
        prev = a
        pivots.append(c)
        r += 1
    return pivots


def rref(M):
    """Reduced row-echelon form over Q.

    Returns ``(R, rank, pivots)``.  Pivot choice is the leftmost column with a
    nonzero entry, taking the first such row in current order.
    """
    if M.cols > MAX_DENSE_COLS:
        raise ResourceLimit(f"dense elimination refused: {M.cols} columns > {MAX_DENSE_COLS}")
    A = _integer_rows(M)
    pivots = _bareiss_echelon(A, M.cols)
    R = [[mpq(x) for x in row] for row in A]
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        row = R[k]
        inv = 1 / row[c]
        for j in range(c, M.cols):
            row[j] *= inv
        for i in range(k):
            b = R[i][c]
            if b:
                other = R[i]
                for j in range(c, M.cols):
                    other[j] -= b * row[j]
    for i in range(len(pivots), len(R)):
        R[i] = [mpq(0)] * M.cols
    return RatMatrix(R, M.cols), len(pivots), tuple(pivots)


def rank(M):
    if M.rows == 0 or M.cols == 0:
        return 0
    A = _integer_rows(M)
    return len(_bareiss_echelon(A, M.cols))


def kernel(M):
    """Basis of the right kernel, one vector per free column (ascending)."""
    R, _, pivots = rref(M)
    free = [j for j in range(M.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * M.cols
        v[f] = mpq(1)
        for k, c in enumerate(pivots):
            v[c] = -R[k, f]
        basis.append(tuple(v))
    return basis


def solve_linear(M, b):
    """Exact particular solution of M x = b, free variables set to 0; None if inconsistent."""
    if len(b) != M.rows:
        raise ValueError("right-hand side length does not match matrix rows")
    aug = RatMatrix([list(row) + [bi] for row, bi in zip(M.entries, b)], M.cols + 1)
    R, _, pivots = rref(aug)
    if pivots and pivots[-1] == M.cols:
        return None
    x = [mpq(0)] * M.cols
    for k, c in enumerate(pivots):
        x[c] = R[k, M.cols]
    return tuple(x)


def inverse(M):
    if M.rows != M.cols:
        raise ValueError("inverse of a non-square matrix")
    n = M.rows
    aug = RatMatrix([list(row) + [1 if i == j else 0 for j in range(n)]
                     for i, row in enumerate(M.entries)], 2 * n)
    R, _, pivots = rref(aug)
    if tuple(pivots[:n]) != tuple(range(n)) or len(pivots) > n:
        raise ZeroDivisionError("singular matrix")
    return RatMatrix([row[n:] for row in R.entries[:n]], n)


def det(M):
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return mpq(1)
    A = [list(row) for row in M.entries]
    sign = 1
    result = mpq(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        a = A[c][c]
        result *= a
        for i in range(c + 1, n):
            b = A[i][c] / a
            if b:
                for j in range(c, n):
                    A[i][j] -= b * A[c][j]
    return sign * result


class JetBasis:
    """Monomials of degree <= D in graded-lex order (degree ascending, lex descending)."""

    def __init__(self, nvars, degree):
        self.nvars = nvars
        self.degree = degree
        self.monomials = [e for d in range(degree + 1)
                          for e in mono.monomials_of_degree(nvars, d)]
        self.keys = [mono.pack(e) for e in self.monomials]
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.degrees = [sum(e) for e in self.monomials]

    def __len__(self):
        return len(self.monomials)


class JetEchelon:
    """Semi-echelon basis of a subspace of O/m^(D+1), sparse integer rows.

    Each stored row has a distinct leading column (its smallest basis index,
    i.e. its lowest-degree term).  Rows are kept primitive; elimination is
    fraction-free.
    """

    def __init__(self, basis):
        self.basis = basis
        self.pivots = {}

    def _reduce(self, row, full):
        rest = {}
        pivots = self.pivots
        while row:
            c = min(row)
            p = pivots.get(c)
            if p is None:
                if not full:
                    return row
                rest[c] = row.pop(c)
                continue
            a = p[c]
            b = row[c]
            g = gcd(a, b)
            a //= g
            b //= g
            if a != 1:
                row = {k: a * v for k, v in row.items()}
                rest = {k: a * v for k, v in rest.items()}
            for k, v in p.items():
                nv = row.get(k, 0) - b * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        return rest

    def insert(self, row):
        """Add a row (dict column -> int); returns True if the span grew."""
        row = self._reduce(dict(row), full=False)
        if not row:
            return False
        g = gcd(*row.values())
        c = min(row)
        if row[c] < 0:
            g = -g
        if g != 1:
            row = {k: v // g for k, v in row.items()}
        self.pivots[c] = row
        return True

    def contains(self, row):
        return not self._reduce(dict(row), full=True)

    @property
    def rank(self):
        return len(self.pivots)

    def pivot_degree_counts(self):
        counts = [0] * (self.basis.degree + 1)
        for c in self.pivots:
            counts[self.basis.degrees[c]] += 1
        return counts


def integer_terms(series):
    """Series terms scaled to coprime integers: list of (key, degree, int)."""
    items = series._terms.items()
    if not items:
        return []
    den = lcm(*(int(c.denominator) for _, c in items))
    out = [(k, mono.degree(k), int(c.numerator) * (den // int(c.denominator))) for k, c in items]
    g = gcd(*(c for _, _, c in out))
    return [(k, d, c // g) for k, d, c in out]


def vector_row(series, basis):
    """Jet of a series as a sparse integer row (positive scaling is irrelevant for spans)."""
    row = {}
    for k, d, c in integer_terms(series):
        if d <= basis.degree:
            row[basis.index[k]] = c
    return row


def ideal_jet_echelon(generators, D, nvars=None):
    """Echelon of the image of the ideal (generators) in O/m^(D+1)."""
    if nvars is None:
        if not generators:
            raise ValueError("nvars required for an empty generator list")
        nvars = generators[0].nvars
    for g in generators:
        if g.nvars != nvars:
            raise ValueError("generators must share nvars")
    basis = JetBasis(nvars, D)
    gens = []
    for g in generators:
        terms = integer_terms(g)
        if terms:
            gens.append((min(d for _, d, _ in terms), terms))
    nrows = sum(mono.count_upto(nvars, D - o) for o, _ in gens)
    if nrows * len(basis) > max_cells():
        raise ResourceLimit(
            f"jet matrix {nrows}x{len(basis)} exceeds CRITFORGE_MAX_CELLS={max_cells()}")
    rows = []
    index = basis.index
    for o, terms in gens:
        for km, dm in zip(basis.keys, basis.degrees):
            if dm + o > D:
                break
            row = {index[km + k]: c for k, d, c in terms if dm + d <= D}
            rows.append(row)
    rows.sort(key=min)
    ech = JetEchelon(basis)
    for row in rows:
        ech.insert(row)
    return ech


def jet_span_dim(generators, D, nvars=None):
    """Dimension of the span of jet_D(m * g) over generators g and monomials m."""
    if not generators:
        return 0
    return ideal_jet_echelon(generators, D, nvars).rank
