"""Non-degenerate quadratic forms over Q and their stable invariants."""

from dataclasses import dataclass

from gmpy2 import is_square, mpq, mpz

from .errors import DegenerateForm
from .linalg import RatMatrix, det, rank

MODES = ("Q", "C-formal")
SQUARE_CLASS_LIMIT = 2**63


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


class QuadForm:
    """q(v) = v^T G v for a symmetric non-degenerate Gram matrix G."""

    __slots__ = ("gram",)

    def __init__(self, gram):
        G = gram if isinstance(gram, RatMatrix) else RatMatrix(gram, len(gram))
        if not G.is_symmetric():
            raise ValueError("Gram matrix must be square and symmetric")
        if G.rows and rank(G) < G.rows:
            raise DegenerateForm("quadratic form is degenerate")
        self.gram = G

    @classmethod
    def diagonal(cls, entries):
        return cls(RatMatrix.diag([mpq(a) for a in entries]))

    @classmethod
    def standard(cls, n):
        return cls(RatMatrix.identity(n))

    @classmethod
    def hyperbolic(cls):
        return cls([[0, 1], [1, 0]])

    @property
    def dim(self):
        return self.gram.rows

    def value(self, v):
        return sum((a * b for a, b in zip(v, self.gram.apply(v))), mpq(0))

    def bilinear(self, v, w):
        return sum((a * b for a, b in zip(v, self.gram.apply(w))), mpq(0))

    def det(self):
        return det(self.gram)

    def as_series(self, nvars=None, offset=0, order=12):
        """The polynomial sum G_ij z_i z_j placed in variables offset.. of an nvars ring."""
        from .series import Series

        n = self.dim
        total = n if nvars is None else nvars
        terms = {}
        for i in range(n):
            for j in range(i, n):
                c = self.gram[i, j] if i == j else 2 * self.gram[i, j]
                if c:
                    e = [0] * total
                    e[offset + i] += 1
                    e[offset + j] += 1
                    terms[tuple(e)] = c
        return Series(total, order, terms)

    def __eq__(self, other):
        return isinstance(other, QuadForm) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        if all(self.gram[i, j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j):
            return "QuadForm<" + ", ".join(str(self.gram[i, i]) for i in range(self.dim)) + ">"
        return f"QuadForm({self.gram.tolist()})"


def congruence_diagonalize(G):
    """P with P^T G P diagonal, for any symmetric G (singular allowed).

    Pivoting: the first nonzero remaining diagonal entry; if all remaining
    diagonal entries vanish, the first nonzero off-diagonal pair (i, j) is
    symmetrized by e_i -> e_i + e_j / (2 G_ij), which makes the new diagonal
    entry 1.  Returns ``(P, d)`` with the nonzero entries of d first.
    """
    n = G.rows
    A = [list(row) for row in G.entries]
    P = [[mpq(1 if i == j else 0) for j in range(n)] for i in range(n)]

    def add_multiple(dst, src, c):
        # e_dst += c e_src, applied as a congruence
        for k in range(n):
            P[k][dst] += c * P[k][src]
        for k in range(n):
            A[dst][k] += c * A[src][k]
        for k in range(n):
            A[k][dst] += c * A[k][src]

    def swap(i, j):
        if i == j:
            return
        for row in P:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]
        for row in A:
            row[i], row[j] = row[j], row[i]

    for s in range(n):
        piv = next((i for i in range(s, n) if A[i][i]), None)
        if piv is None:
            pair = next(((i, j) for i in range(s, n) for j in range(i + 1, n) if A[i][j]), None)
            if pair is None:
                break
            i, j = pair
            add_multiple(i, j, 1 / (2 * A[i][j]))
            piv = i
        swap(s, piv)
        a = A[s][s]
        for j in range(s + 1, n):
            if A[s][j]:
                add_multiple(j, s, -A[s][j] / a)
    d = tuple(A[i][i] for i in range(n))
    return RatMatrix(P, n), d


def diagonalize(q):
    """Diagonal entries and witness P with P^T G P = diag(entries)."""
    P, d = congruence_diagonalize(q.gram)
    if any(x == 0 for x in d):
        raise DegenerateForm("quadratic form is degenerate")
    return d, P


def direct_sum(q1, q2):
    n1, n2 = q1.dim, q2.dim
    rows = [list(r) + [0] * n2 for r in q1.gram.entries]
    rows += [[0] * n1 + list(r) for r in q2.gram.entries]
    return QuadForm(RatMatrix(rows, n1 + n2))


def _squarefree_int(n):
    """Signed squarefree part of a nonzero integer."""
    if n == 0:
        raise ValueError("zero has no square class")
    if abs(n) >= SQUARE_CLASS_LIMIT:
        raise OverflowError(f"square class of |{n}| >= 2^63 is not supported")
    sign = -1 if n < 0 else 1
    m = abs(int(n))
    out = 1
    p = 2
    while p * p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            if e % 2:
                out *= p
        p += 1 if p == 2 else 2
    # what is left has at most two prime factors above the cube root
    if m > 1 and not is_square(mpz(m)):
        out *= m
    return sign * out


def square_class(c):
    """Squarefree integer representing the class of a nonzero rational in Q*/Q*^2."""
    c = mpq(c)
    return _squarefree_int(int(c.numerator) * int(c.denominator))


@dataclass(frozen=True)
class GWClass:
    rank: int
    parity: int
    disc: int
    mode: str = "Q"

    def __add__(self, other):
        if self.mode != other.mode:
            raise ValueError("cannot add classes from different modes")
        disc = 1 if self.mode == "C-formal" else _squarefree_int(self.disc * other.disc)
        r = self.rank + other.rank
        return GWClass(r, r % 2, disc, self.mode)

    def to_json(self):
        return {"rank": self.rank, "parity": self.parity, "disc": self.disc, "mode": self.mode}


def gw_class(q, mode="Q"):
    _check_mode(mode)
    n = q.dim
    if mode == "C-formal":
        return GWClass(n, n % 2, 1, mode)
    return GWClass(n, n % 2, square_class(q.det()), mode)


def orientation_twist(q, mode="Q"):
    """(parity of the rank, discriminant square class) imprinted by acting with q."""
    c = gw_class(q, mode)
    return c.parity, c.disc


def isotropic_split_check(q, vectors):
    """True iff span(vectors) is totally isotropic of dimension dim(q)/2."""
    vectors = [tuple(mpq(x) for x in v) for v in vectors]
    for v in vectors:
        if len(v) != q.dim:
            raise ValueError("vector length does not match the form")
    if q.dim % 2:
        return False
    span = rank(RatMatrix(vectors, q.dim)) if vectors else 0
    if span != q.dim // 2:
        return False
    return all(q.bilinear(v, w) == 0 for i, v in enumerate(vectors) for w in vectors[i:])


def hyperbolic_count(q):
    """Number of hyperbolic planes when the diagonal pairs off as <a, -a> up to squares.

    Returns None when the diagonal entries do not pair off completely.
    """
    d, _ = diagonalize(q)
    classes = [square_class(a) for a in d]
    pairs = 0
    remaining = list(classes)
    while remaining:
        a = remaining.pop(0)
        if -a in remaining:
            remaining.remove(-a)
            pairs += 1
        else:
            return None
    return pairs
