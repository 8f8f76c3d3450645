"""Truncated multivariate formal power series with exact rational coefficients.

A ``Series`` in ``nvars`` variables carries its own truncation order ``N``:
it is trusted modulo m^(N+1), where m is the maximal ideal.  Binary
operations return results at the smaller of the two orders.
"""

from gmpy2 import gcd, iroot, lcm, mpq, mpz

from . import _monomial as mono
from .linalg import RatMatrix, inverse, rank

DEFAULT_ORDER = 12


def _group(terms):
    by_deg = {}
    for k, c in terms.items():
        by_deg.setdefault(mono.degree(k), []).append((k, c))
    return by_deg


def _mul_by_degree(ga, gb, order):
    """Truncated product of grouped terms, as {degree: {key: coefficient}}."""
    out = {}
    for da, la in ga.items():
        for db, lb in gb.items():
            d = da + db
            if d > order:
                continue
            part = out.get(d)
            if part is None:
                part = out[d] = {}
            get = part.get
            for ka, ca in la:
                for kb, cb in lb:
                    k = ka + kb
                    part[k] = get(k, 0) + ca * cb
    return out


def _mul_grouped(ga, gb, order):
    return {k: c for part in _mul_by_degree(ga, gb, order).values()
            for k, c in part.items() if c}


def _scale_grouped(grouped):
    """Rational grouped terms as (den, integer grouped terms) sharing one denominator."""
    den = mpz(1)
    for terms in grouped.values():
        for _, c in terms:
            d = c.denominator
            if d != 1:
                den = lcm(den, d)
    return den, {deg: [(k, c.numerator * (den // c.denominator)) for k, c in terms]
                 for deg, terms in grouped.items()}


def _reduce_scaled(den, parts):
    """Divide out the common factor of integer terms {deg: {key: int}} and the denominator."""
    g = den
    for part in parts.values():
        for v in part.values():
            if g == 1:
                return den, parts
            g = gcd(g, v)
    if g != 1:
        den //= g
        parts = {d: {k: v // g for k, v in part.items()} for d, part in parts.items()}
    return den, parts


def _mul_rational(ga, gb, order):
    """Truncated product of rational series, computed on integer numerators."""
    da, ia = _scale_grouped(ga)
    db, ib = _scale_grouped(gb)
    den = da * db
    return {k: mpq(v, den) for k, v in _mul_grouped(ia, ib, order).items()}


class _Jet:
    """Shared machinery for truncated series over a coefficient ring.

    Subclasses fix the coefficient type via ``_coerce``.  Keys of ``_terms``
    are packed exponent vectors (see ``_monomial``).
    """

    __slots__ = ("nvars", "order", "_terms", "_grouped")
    _family = False
    _product = staticmethod(_mul_grouped)

    def __init__(self, nvars, order, terms=None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        packed = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError(f"monomial {exps} does not have {nvars} exponents")
            if sum(exps) > order:
                continue
            c = self._coerce(c)
            if c:
                k = mono.pack(exps)
                packed[k] = packed.get(k, 0) + c
        self._set(nvars, order, {k: c for k, c in packed.items() if c})

    def _set(self, nvars, order, packed):
        # exponents are packed in 8 bits; a larger order could carry between variables
        if not 0 <= order <= mono.MAX_DEGREE:
            raise ValueError(f"order must lie in 0..{mono.MAX_DEGREE}")
        self.nvars = nvars
        self.order = order
        self._terms = packed
        self._grouped = None

    @classmethod
    def _coerce(cls, c):
        raise NotImplementedError

    @classmethod
    def _raw(cls, nvars, order, packed):
        """Build from packed terms already free of zeros and over-degree monomials."""
        obj = cls.__new__(cls)
        obj._set(nvars, order, packed)
        return obj

    @classmethod
    def _clean(cls, nvars, order, packed):
        return cls._raw(nvars, order, {k: c for k, c in packed.items()
                                       if c and mono.degree(k) <= order})

    @classmethod
    def zero(cls, nvars, order=DEFAULT_ORDER):
        return cls._raw(nvars, order, {})

    @classmethod
    def constant(cls, nvars, value, order=DEFAULT_ORDER):
        c = cls._coerce(value)
        return cls._raw(nvars, order, {0: c} if c else {})

    @classmethod
    def variable(cls, nvars, i, order=DEFAULT_ORDER):
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        if order < 1:
            return cls.zero(nvars, order)
        return cls._raw(nvars, order, {mono.unit(nvars, i): cls._coerce(1)})

    @classmethod
    def monomial(cls, exps, coef=1, order=DEFAULT_ORDER):
        return cls(len(exps), order, {tuple(exps): coef})

    def grouped(self):
        if self._grouped is None:
            self._grouped = _group(self._terms)
        return self._grouped

    def terms(self):
        """Mapping exponent tuple -> coefficient in graded-lex order."""
        return {mono.unpack(k, self.nvars): self._terms[k]
                for k in sorted(self._terms, key=mono.grlex_key)}

    def items(self):
        return self.terms().items()

    def coefficient(self, exps):
        return self._terms.get(mono.pack(exps), self._coerce(0))

    def constant_term(self):
        return self._terms.get(0, self._coerce(0))

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def ord(self):
        """Lowest degree of a nonzero term; None stands for infinity."""
        if not self._terms:
            return None
        return min(self.grouped())

    def max_degree(self):
        return max(self.grouped()) if self._terms else None

    def homogeneous(self, d):
        return self._raw(self.nvars, self.order, dict(self.grouped().get(d, ())))

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise precision from {self.order} to {order}")
        return self._with_order(order)

    def _with_order(self, order):
        """Change the declared order; raising it is only sound when the caller knows why."""
        if order >= self.order:
            return self._raw(self.nvars, order, self._terms)
        return self._raw(self.nvars, order, {k: c for k, c in self._terms.items()
                                             if mono.degree(k) <= order})

    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")

    def _promote(self, other):
        if isinstance(other, _Jet):
            self._check(other)
            return other
        return self.constant(self.nvars, other, self.order)

    def __add__(self, other):
        other = self._promote(other)
        order = min(self.order, other.order)
        out = {k: c for k, c in self._terms.items()}
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return self._clean(self.nvars, order, out)

    __radd__ = __add__

    def __neg__(self):
        return self._raw(self.nvars, self.order, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._promote(other))

    def __rsub__(self, other):
        return self._promote(other) - self

    def __mul__(self, other):
        if not isinstance(other, _Jet):
            c = self._coerce(other)
            return self._raw(self.nvars, self.order,
                             {k: v * c for k, v in self._terms.items() if v * c})
        self._check(other)
        order = min(self.order, other.order)
        return self._raw(self.nvars, order, self._product(self.grouped(), other.grouped(), order))

    def __rmul__(self, other):
        return self * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.constant(self.nvars, 1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def partial(self, i):
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.nvars} variables")
        if self.order == 0:
            raise ValueError("no precision left to differentiate an order-0 series")
        shift = mono.BITS * (self.nvars - 1 - i)
        u = 1 << shift
        out = {}
        for k, c in self._terms.items():
            e = (k >> shift) & mono.MASK
            if e:
                out[k - u] = c * e
        return self._raw(self.nvars, self.order - 1, out)

    def substitute(self, images, order=None):
        """Plug series (all in one ring, zero constant terms) in for the variables."""
        if len(images) != self.nvars:
            raise ValueError(f"need {self.nvars} images, got {len(images)}")
        if self.nvars == 0:
            raise ValueError("substitution into a 0-variable series needs a target ring")
        target = images[0]
        for img in images:
            if img.nvars != target.nvars:
                raise ValueError("images must share nvars")
            if img.constant_term():
                raise ValueError("substituted series must have zero constant term")
        if order is None:
            order = min([self.order] + [img.order for img in images])
        cls = type(self) if type(self)._family else type(target)
        rational = not (type(self)._family or type(target)._family)
        sub = _Substituter(self.nvars, [img.grouped() for img in images], target.nvars, order,
                           rational)
        return cls._raw(target.nvars, order, sub(self))

    def embed(self, total, offset):
        """The same function viewed in a ``total``-variable ring, variables shifted by ``offset``."""
        if offset < 0 or offset + self.nvars > total:
            raise ValueError("embedding does not fit")
        return self._raw(total, self.order,
                         {mono.embed(k, self.nvars, total, offset): c for k, c in self._terms.items()})

    def restrict(self, keep):
        """Set every variable not in ``keep`` to zero; result lives in len(keep) variables."""
        keep = list(keep)
        out = {}
        for k, c in self._terms.items():
            e = mono.unpack(k, self.nvars)
            if any(e[i] for i in range(self.nvars) if i not in keep):
                continue
            out[mono.pack([e[i] for i in keep])] = c
        return self._raw(len(keep), self.order, out)

    def __eq__(self, other):
        if not isinstance(other, _Jet):
            return NotImplemented
        return (type(self) is type(other) and self.nvars == other.nvars
                and self.order == other.order and self._terms == other._terms)

    def equal_mod(self, other, order):
        """Equality of jets of degree <= order (both must know that much)."""
        return self.truncate(order)._terms == other.truncate(order)._terms

    def __hash__(self):
        return hash((self.nvars, self.order, frozenset(self._terms.items())))

    def format(self, names=None):
        names = names or default_names(self.nvars)
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.terms().items():
            parts.append(_format_term(exps, c, names))
        text = parts[0]
        for p in parts[1:]:
            text += " - " + p[1:] if p.startswith("-") else " + " + p
        return text

    def __str__(self):
        return f"{self.format()} + O({self.order + 1})"

    def __repr__(self):
        return f"{type(self).__name__}({self.nvars}, {self.order}, {self.format()!r})"


def default_names(nvars):
    if nvars <= 3:
        return ["x", "y", "z"][:nvars]
    return [f"x{i + 1}" for i in range(nvars)]


def _format_term(exps, c, names):
    factors = []
    for name, e in zip(names, exps):
        if e == 1:
            factors.append(name)
        elif e:
            factors.append(f"{name}^{e}")
    coef = _format_coef(c)
    if not factors:
        return coef
    body = "*".join(factors)
    if coef == "1":
        return body
    if coef == "-1":
        return "-" + body
    if coef.startswith("(") or "/" in coef or coef.lstrip("-").isdigit():
        return f"{coef}*{body}"
    return f"({coef})*{body}"


def _format_coef(c):
    return str(c)


class _Substituter:
    """Evaluates series at fixed images, sharing the monomial images across calls.

    Over Q the images are kept as integer numerators over one denominator
    per monomial, so the inner products avoid rational normalization.
    """

    def __init__(self, n, images, nvars, order, rational=True):
        self.order = order
        self.units = [mono.unit(n, i) for i in range(n)]
        self.n = n
        self.rational = rational
        self.shift_mask = 0
        if n == nvars:
            for i, g in enumerate(images):
                if list(g) == [1] and g[1] == [(self.units[i], 1)]:
                    self.shift_mask |= mono.MASK << (mono.BITS * (n - 1 - i))
        if rational:
            self.images = [_scale_grouped(g) for g in images]
            self.memo = {0: (mpz(1), {0: [(0, mpz(1))]})}
        else:
            self.images = [(1, g) for g in images]
            self.memo = {0: (1, {0: [(0, 1)]})}

    def image(self, key):
        got = self.memo.get(key)
        if got is not None:
            return got
        fixed = key & self.shift_mask
        if fixed:
            # identity coordinates only relabel exponents
            d0 = mono.degree(fixed)
            den, prev = self.image(key - fixed)
            grouped = {d + d0: [(k + fixed, c) for k, c in terms]
                       for d, terms in prev.items() if d + d0 <= self.order}
        else:
            n = self.n
            i = n - 1
            while not (key >> (mono.BITS * (n - 1 - i))) & mono.MASK:
                i -= 1
            pden, prev = self.image(key - self.units[i])
            iden, img = self.images[i]
            parts = _mul_by_degree(prev, img, self.order)
            den = pden * iden
            if self.rational:
                den, parts = _reduce_scaled(den, parts)
            grouped = {}
            for d, part in parts.items():
                terms = [(k, c) for k, c in part.items() if c]
                if terms:
                    grouped[d] = terms
        self.memo[key] = (den, grouped)
        return den, grouped

    def __call__(self, f):
        order = self.order
        keys = [k for k in sorted(f._terms) if mono.degree(k) <= order]
        if not self.rational:
            out = {}
            for key in keys:
                c = f._terms[key]
                for terms in self.image(key)[1].values():
                    for k, v in terms:
                        out[k] = out.get(k, 0) + c * v
            return {k: c for k, c in out.items() if c}
        # common denominator for sum_key c_key * image(key) / den_key
        scaled = []
        common = mpz(1)
        for key in keys:
            c = f._terms[key]
            den, grouped = self.image(key)
            d = c.denominator * den
            common = lcm(common, d)
            scaled.append((c.numerator, d, grouped))
        out = {}
        get = out.get
        for num, d, grouped in scaled:
            m = num * (common // d)
            for terms in grouped.values():
                for k, v in terms:
                    out[k] = get(k, 0) + m * v
        return {k: mpq(v, common) for k, v in out.items() if v}


class Series(_Jet):
    """Truncated power series over Q."""

    __slots__ = ()
    _product = staticmethod(_mul_rational)

    @classmethod
    def _coerce(cls, c):
        return mpq(c)

    def derivative_vector(self):
        return [self.partial(i) for i in range(self.nvars)]


def _exact_root(c, n):
    """Rational n-th root of c (positive one for even n)."""
    c = mpq(c)
    if c == 0:
        raise ValueError("zero has no invertible root")
    if c < 0 and n % 2 == 0:
        raise ValueError(f"{c} has no rational {n}-th root")
    sign = -1 if c < 0 else 1
    num, ok1 = iroot(mpz(abs(c.numerator)), n)
    den, ok2 = iroot(mpz(c.denominator), n)
    if not (ok1 and ok2):
        raise ValueError(f"{c} has no rational {n}-th root")
    return sign * mpq(num, den)


def binomial(a, k):
    """Generalized binomial coefficient a(a-1)...(a-k+1)/k! for rational a."""
    out = mpq(1)
    for i in range(k):
        out = out * (a - i) / (i + 1)
    return out


def add(f, g):
    return f + g


def mul(f, g):
    return f * g


def partial(f, i):
    return f.partial(i)


def reciprocal(u):
    """Multiplicative inverse of a unit, by Newton iteration with doubling precision."""
    c0 = u.constant_term()
    if not c0:
        raise ValueError("series with zero constant term is not invertible")
    v = Series.constant(u.nvars, 1 / c0, 0)
    prec = 0
    while prec < u.order:
        prec = min(2 * prec + 1, u.order)
        ut = u.truncate(prec)
        v = v._with_order(prec)
        v = v * (2 - ut * v)
    return v


def nth_root(u, n):
    """Series r with r^n = u, r(0) the rational root of u(0) (positive for even n)."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("root index must be a positive integer")
    r0 = _exact_root(u.constant_term(), n)
    if n == 1:
        return u
    r = Series.constant(u.nvars, r0, 0)
    prec = 0
    while prec < u.order:
        prec = min(2 * prec + 1, u.order)
        ut = u.truncate(prec)
        r = r._with_order(prec)
        rn1 = r ** (n - 1)
        r = r - (rn1 * r - ut) * reciprocal(rn1 * n)
    return r


class CoordChange:
    """An adic automorphism given by the images of the coordinates.

    ``compose(f, phi)`` substitutes ``phi.components[i]`` for variable ``i``.
    """

    __slots__ = ("nvars", "order", "components")

    def __init__(self, components, check=True):
        components = tuple(components)
        if not components:
            self.nvars = 0
            self.order = mono.MAX_DEGREE
            self.components = ()
            return
        n = components[0].nvars
        if len(components) != n:
            raise ValueError(f"{len(components)} components for {n} variables")
        for c in components:
            if c.nvars != n:
                raise ValueError("components must share nvars")
            if c.constant_term():
                raise ValueError("coordinate change component has nonzero constant term")
        self.nvars = n
        self.order = min(c.order for c in components)
        self.components = components
        if check and rank(self.linear_part()) < n:
            raise ValueError("coordinate change has singular linear part")

    @classmethod
    def identity(cls, nvars, order=DEFAULT_ORDER):
        return cls([Series.variable(nvars, i, order) for i in range(nvars)], check=False)

    @classmethod
    def linear(cls, matrix, order=DEFAULT_ORDER):
        """x_i -> sum_j matrix[i][j] x_j."""
        M = matrix if isinstance(matrix, RatMatrix) else RatMatrix(matrix)
        n = M.rows
        comps = []
        for i in range(n):
            comps.append(Series(n, order, {tuple(1 if k == j else 0 for k in range(n)): M[i, j]
                                            for j in range(n)}))
        return cls(comps)

    def linear_part(self):
        n = self.nvars
        return RatMatrix([[c.coefficient(tuple(1 if k == j else 0 for k in range(n)))
                           for j in range(n)] for c in self.components], n)

    def truncate(self, order):
        return CoordChange([c.truncate(order) for c in self.components], check=False)

    def _with_order(self, order):
        return CoordChange([c._with_order(order) for c in self.components], check=False)

    def __eq__(self, other):
        if not isinstance(other, CoordChange):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def format(self, names=None):
        names = names or default_names(self.nvars)
        return ", ".join(f"{v} -> {c.format(names)}" for v, c in zip(names, self.components))

    def __repr__(self):
        return f"CoordChange({self.format()})"


def compose(f, phi):
    """f(phi_1, ..., phi_n) truncated at the smaller order."""
    if f.nvars != phi.nvars:
        raise ValueError(f"variable-count mismatch: {f.nvars} vs {phi.nvars}")
    if f.nvars == 0:
        return f
    return f.substitute(list(phi.components))


def compose_changes(phi, psi):
    """The change chi with compose(f, chi) == compose(compose(f, phi), psi)."""
    if phi.nvars != psi.nvars:
        raise ValueError("variable-count mismatch")
    if phi.nvars == 0:
        return phi
    comps = phi.components
    for c in comps:
        if c.nvars != psi.nvars:
            raise ValueError("variable-count mismatch")
    order = min([c.order for c in comps] + [c.order for c in psi.components])
    sub = _Substituter(psi.nvars, [c.grouped() for c in psi.components], psi.nvars, order, True)
    return CoordChange([Series._raw(psi.nvars, order, sub(c)) for c in comps], check=False)


def invert_coordchange(phi):
    """Inverse under composition, built one degree at a time."""
    n = phi.nvars
    N = phi.order
    if n == 0:
        return phi
    A = phi.linear_part()
    try:
        Ainv = inverse(A)
    except ZeroDivisionError:
        raise ValueError("coordinate change has singular linear part") from None
    xs = [Series.variable(n, i, N) for i in range(n)]
    psi = [sum((x * Ainv[i, j] for j, x in enumerate(xs)), Series.zero(n, N)) for i in range(n)]
    for d in range(2, N + 1):
        psi_d = [p.truncate(d) for p in psi]
        err = [compose(c.truncate(d), CoordChange(psi_d, check=False)).homogeneous(d)
               for c in phi.components]
        if all(e.is_zero() for e in err):
            continue
        psi = [p - sum((err[j]._with_order(N) * Ainv[i, j] for j in range(n)),
                       Series.zero(n, N))
               for i, p in enumerate(psi)]
    return CoordChange(psi, check=False)


def implicit_solve(f, nbase):
    """Solve d_y f(x, w(x)) = 0 for w, where the first ``nbase`` variables are x.

    Returns one series in the base variables per fiber variable, valid mod
    m^N with N = f.order (so at order N - 1).
    """
    from .errors import NotRelativelyMorse

    n = f.nvars
    nf = n - nbase
    if not 0 <= nbase <= n:
        raise ValueError("nbase out of range")
    N = f.order - 1
    if nf == 0:
        return []
    grads = [f.partial(nbase + j) for j in range(nf)]
    if any(g.constant_term() for g in grads):
        raise ValueError("fiber partials do not vanish at the origin")
    B = RatMatrix([[g.coefficient(tuple(1 if k == nbase + l else 0 for k in range(n)))
                    for l in range(nf)] for g in grads], nf)
    try:
        Binv = inverse(B)
    except ZeroDivisionError:
        raise NotRelativelyMorse("fiber Hessian block is singular") from None
    w = [Series.zero(nbase, N) for _ in range(nf)]
    if nbase == 0:
        return w
    xs = [Series.variable(nbase, i, N) for i in range(nbase)]
    for d in range(1, N + 1):
        images = [x.truncate(d) for x in xs] + [wj.truncate(d) for wj in w]
        err = [g.truncate(d).substitute(images).homogeneous(d) for g in grads]
        if all(e.is_zero() for e in err):
            continue
        w = [wj - sum((err[l]._with_order(N) * Binv[j, l] for l in range(nf)),
                      Series.zero(nbase, N))
             for j, wj in enumerate(w)]
    return w
