"""One-parameter polynomial families: coordinate changes and matrices over Q[t]."""

from dataclasses import dataclass

from gmpy2 import mpq

from .linalg import RatMatrix, ideal_jet_echelon, vector_row
from .series import CoordChange, Series, _Jet, binomial


class TPoly:
    """Polynomial in t with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, TPoly):
            coeffs = coeffs.coeffs
        elif not isinstance(coeffs, (tuple, list)):
            coeffs = (coeffs,)
        cs = [mpq(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def t(cls):
        return cls((0, 1))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def _lift(self, other):
        return other if isinstance(other, TPoly) else TPoly(other)

    def __add__(self, other):
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return TPoly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    __radd__ = __add__

    def __neg__(self):
        return TPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, TPoly):
            c = mpq(other)
            return TPoly([x * c for x in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return TPoly()
        out = [mpq(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return TPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        result = TPoly(1)
        for _ in range(n):
            result = result * self
        return result

    def divmod(self, other):
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        quot = [mpq(0)] * max(len(rem) - d, 0)
        for i in range(len(rem) - 1, d - 1, -1):
            c = rem[i] / lead
            if c:
                quot[i - d] = c
                for j, y in enumerate(other.coeffs):
                    rem[i - d + j] -= c * y
        return TPoly(quot), TPoly(rem)

    def exact_div(self, other):
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("polynomial division is not exact")
        return q

    def __call__(self, t0):
        t0 = mpq(t0)
        acc = mpq(0)
        for c in reversed(self.coeffs):
            acc = acc * t0 + c
        return acc

    def is_constant(self):
        return len(self.coeffs) <= 1

    def __eq__(self, other):
        if isinstance(other, TPoly):
            return self.coeffs == other.coeffs
        try:
            return self.coeffs == TPoly(other).coeffs
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def format(self, var="t"):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            body = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        text = parts[0]
        for p in parts[1:]:
            text += " - " + p[1:] if p.startswith("-") else " + " + p
        return text

    def __str__(self):
        return self.format() if len([c for c in self.coeffs if c]) <= 1 else f"({self.format()})"

    def __repr__(self):
        return f"TPoly({self.format()!r})"


class FamilySeries(_Jet):
    """Truncated series whose coefficients are polynomials in t."""

    __slots__ = ()
    _family = True

    @classmethod
    def _coerce(cls, c):
        return c if isinstance(c, TPoly) else TPoly(c)

    @classmethod
    def lift(cls, s):
        """A Series viewed as a family constant in t."""
        return cls._raw(s.nvars, s.order, {k: TPoly(c) for k, c in s._terms.items()})

    @classmethod
    def parameter(cls, nvars, order):
        return cls.constant(nvars, TPoly.t(), order)

    @property
    def tdeg(self):
        return max((c.degree for c in self._terms.values()), default=-1)

    def specialize(self, t0):
        return Series._clean(self.nvars, self.order, {k: c(t0) for k, c in self._terms.items()})

    def unit_root(self, n):
        """n-th root of a family with constant term 1, via the binomial series."""
        if self.constant_term() != TPoly(1):
            raise ValueError("unit_root needs constant term exactly 1")
        u = self - 1
        result = FamilySeries.constant(self.nvars, 1, self.order)
        power = FamilySeries.constant(self.nvars, 1, self.order)
        for k in range(1, self.order + 1):
            power = power * u
            if power.is_zero():
                break
            result = result + power * binomial(mpq(1, n), k)
        return result


class FamilyCoordChange:
    """Coordinate changes phi_t depending polynomially on t."""

    __slots__ = ("nvars", "order", "components", "unit_linear_part")

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise ValueError("empty family")
        n = components[0].nvars
        if len(components) != n:
            raise ValueError(f"{len(components)} components for {n} variables")
        for c in components:
            if c.nvars != n:
                raise ValueError("components must share nvars")
            if c.constant_term():
                raise ValueError("family component has nonzero constant term")
        self.nvars = n
        self.order = min(c.order for c in components)
        self.components = components
        d = matrix_family_det(self.linear_part())
        if not d(0) or not d(1):
            raise ValueError(f"linear part has determinant {d.format()}, singular at t=0 or t=1")
        self.unit_linear_part = bool(d) and d.is_constant()

    def linear_part(self):
        n = self.nvars
        return MatrixFamily([[c.coefficient(tuple(1 if k == j else 0 for k in range(n)))
                              for j in range(n)] for c in self.components])

    def specialize(self, t0, check=True):
        return CoordChange([c.specialize(t0) for c in self.components], check=check)

    def __repr__(self):
        return "FamilyCoordChange(" + ", ".join(c.format() for c in self.components) + ")"


@dataclass(frozen=True)
class IsotopyReport:
    preserves_function: bool
    starts_at_identity: bool
    fixes_critical_jets: bool
    phi1: CoordChange
    order: int
    critical_check_order: int
    failing_component: int | None = None
    unit_linear_part: bool = True

    @property
    def passed(self):
        return self.preserves_function and self.starts_at_identity and self.fixes_critical_jets

    def to_json(self, names=None):
        return {
            "preserves_function": self.preserves_function,
            "starts_at_identity": self.starts_at_identity,
            "fixes_critical_jets": self.fixes_critical_jets,
            "critical_check_order": self.critical_check_order,
            "failing_component": self.failing_component,
            "unit_linear_part": self.unit_linear_part,
            "order": self.order,
            "passed": self.passed,
            "phi1": [c.format(names) for c in self.phi1.components],
        }


def verify_isotopy(f, phi, N):
    """Check that phi_t preserves f identically in t, that phi_0 = id, and that
    phi_1 - id lies in the Jacobian ideal on jets.

    The last check is the jet-level necessary condition for fixing the
    critical locus, run modulo m^(L+1) with L = min(N, f.order - 1).
    """
    if f.nvars != phi.nvars:
        raise ValueError(f"variable-count mismatch: {f.nvars} vs {phi.nvars}")
    if min(f.order, phi.order) < N:
        raise ValueError(f"inputs are not known to order {N}")
    F = FamilySeries.lift(f.truncate(N))
    comps = [c.truncate(N) for c in phi.components]
    preserves = F.substitute(comps) == F
    n = f.nvars
    phi0 = phi.specialize(0)
    ident = CoordChange.identity(n, N)
    starts = phi0.truncate(N) == ident
    phi1 = phi.specialize(1).truncate(N)

    L = min(N, f.order - 1)
    ech = ideal_jet_echelon([f.partial(i) for i in range(n)], L, n)
    failing = None
    for i, c in enumerate(phi1.components):
        diff = c.truncate(L) - Series.variable(n, i, L)
        if not ech.contains(vector_row(diff, ech.basis)):
            failing = i
            break
    return IsotopyReport(preserves, starts, failing is None, phi1, N, L, failing,
                         phi.unit_linear_part)


class MatrixFamily:
    """Square or rectangular matrix with entries in Q[t]."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        data = tuple(tuple(TPoly(x) for x in row) for row in entries)
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(r) != self.cols for r in data):
            raise ValueError("ragged matrix")
        self.entries = data

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return MatrixFamily([[sum((self.entries[i][k] * other.entries[k][j]
                                   for k in range(self.cols)), TPoly())
                              for j in range(other.cols)] for i in range(self.rows)])

    def __eq__(self, other):
        return isinstance(other, MatrixFamily) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "MatrixFamily([" + "; ".join(", ".join(e.format() for e in r)
                                            for r in self.entries) + "])"


def matrix_family_det(M):
    """Exact determinant over Q[t] by fraction-free (Bareiss) elimination."""
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return TPoly(1)
    A = [list(r) for r in M.entries]
    sign = 1
    prev = TPoly(1)
    for c in range(n - 1):
        p = next((i for i in range(c, n) if A[i][c]), None)
        if p is None:
            return TPoly()
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        a = A[c][c]
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                A[i][j] = (a * A[i][j] - A[i][c] * A[c][j]).exact_div(prev)
            A[i][c] = TPoly()
        prev = a
    return A[n - 1][n - 1] * sign


def specialize(M, t0):
    return RatMatrix([[e(t0) for e in row] for row in M.entries], M.cols)


def hyperbolic_3cycle():
    """The family [[1-t^3, t, 0], [0, 1-t^3, t], [t(3-3t^3+t^6), 0, 1-t^3]]."""
    a = TPoly((1, 0, 0, -1))
    t = TPoly.t()
    c = t * TPoly((3, 0, 0, -3, 0, 0, 1))
    return MatrixFamily([[a, t, 0], [0, a, t], [c, 0, a]])


def example_isotopy(order=16):
    """x -> x + t y^4, y -> y (1 - 3t x^2 - 3t^2 x y^4 - t^3 y^8)^(1/4) on k[[x, y]]."""
    t = TPoly.t()
    x = FamilySeries.variable(2, 0, order)
    y = FamilySeries.variable(2, 1, order)
    u = 1 - x ** 2 * (t * 3) - x * y ** 4 * (t ** 2 * 3) - y ** 8 * t ** 3
    return FamilyCoordChange([x + y ** 4 * t, y * u.unit_root(4)])


def example_automorphism(order=16):
    """x -> x + y^4, y -> y h with h^4 = 1 - 3x^2 - 3xy^4 - y^8, over Q."""
    from .series import nth_root

    x = Series.variable(2, 0, order)
    y = Series.variable(2, 1, order)
    h = nth_root(1 - 3 * x ** 2 - 3 * x * y ** 4 - y ** 8, 4)
    return CoordChange([x + y ** 4, y * h])

