"""Thom-Sebastiani sums, quadratic stabilization and stable comparison of LG pairs."""

from dataclasses import dataclass

from .errors import NonIsolatedError
from .milnor import DEFAULT_CAP, LGPair, milnor_number
from .morse import split
from .quadform import GWClass, gw_class
from .series import CoordChange, compose

CONSISTENT = "CONSISTENT_TO_ORDER"
DISTINGUISHED = "DISTINGUISHED"


def ts_sum(p, r):
    """f(x) + g(y) on disjoint variable blocks, x first."""
    n = p.nvars + r.nvars
    order = min(p.f.order, r.f.order)
    f = p.f.truncate(order).embed(n, 0) + r.f.truncate(order).embed(n, p.nvars)
    return LGPair(n, f, p.acting + r.acting)


def stabilize(p, q, mode="Q"):
    """p + q(z) in fresh trailing variables; the acting class is appended to ``acting``."""
    n = p.nvars + q.dim
    f = p.f.embed(n, 0) + q.as_series(n, p.nvars, p.f.order)
    return LGPair(n, f, p.acting + (gw_class(q, mode),))


@dataclass(frozen=True)
class StableInvariants:
    corank: int
    mu: int
    tjurina: int
    hilbert: tuple
    quad_gw: GWClass
    total_dim_parity: int
    residual: LGPair

    def to_json(self):
        return {
            "corank": self.corank,
            "mu": self.mu,
            "tjurina": self.tjurina,
            "hilbert": list(self.hilbert),
            "quad_gw": self.quad_gw.to_json(),
            "total_dim_parity": self.total_dim_parity,
        }


def stable_invariants(p, N=12, mode="Q", cap=DEFAULT_CAP):
    s = split(p, N)
    report = milnor_number(s.residual, cap)
    if report.mu is None or report.tjurina is None:
        raise NonIsolatedError(
            f"residual has no certified Milnor number at order {N} ({report.reason})")
    return StableInvariants(
        corank=s.corank,
        mu=report.mu,
        tjurina=report.tjurina,
        hilbert=report.hilbert,
        quad_gw=gw_class(s.quad, mode),
        total_dim_parity=p.nvars % 2,
        residual=s.residual,
    )


def _normalized_jet(f):
    terms = f.terms()
    if not terms:
        return terms
    low = f.ord()
    leading = [c for e, c in terms.items() if sum(e) == low]
    if len(leading) == 1:
        scale = 1 / leading[0]
        return {e: c * scale for e, c in terms.items()}
    return terms


@dataclass(frozen=True)
class Verdict:
    kind: str
    order: int
    invariant: str | None = None
    values: tuple | None = None
    residual_jet_match: bool | None = None

    def to_json(self):
        return {
            "kind": self.kind,
            "order": self.order,
            "invariant": self.invariant,
            "values": None if self.values is None else [_jsonable(v) for v in self.values],
            "residual_jet_match": self.residual_jet_match,
        }


def _jsonable(v):
    return list(v) if isinstance(v, tuple) else v


def stable_compare(p1, p2, N=12, mode="Q", cap=DEFAULT_CAP):
    """Necessary-condition check for stable equivalence of two pairs at the origin.

    DISTINGUISHED carries the first differing invariant.  Otherwise the answer
    is CONSISTENT_TO_ORDER(N), never a claim of equivalence.  Residual jets
    are compared after scaling a unique leading term to 1; since residuals are
    only defined up to coordinate change, a mismatch there is reported but
    does not distinguish.
    """
    s1 = stable_invariants(p1, N, mode, cap)
    s2 = stable_invariants(p2, N, mode, cap)
    for name in ("corank", "mu", "tjurina", "hilbert"):
        a, b = getattr(s1, name), getattr(s2, name)
        if a != b:
            return Verdict(DISTINGUISHED, N, name, (a, b))
    match = _normalized_jet(s1.residual.f) == _normalized_jet(s2.residual.f)
    return Verdict(CONSISTENT, N, residual_jet_match=match)


def verify_stable_witness(p1, p2, q1, q2, phi, N=12):
    """Check compose(f1 + q1, phi) == f2 + q2 mod m^(N+1)."""
    s1 = stabilize(p1, q1)
    s2 = stabilize(p2, q2)
    if s1.nvars != s2.nvars:
        raise ValueError(f"stabilized dimensions differ: {s1.nvars} vs {s2.nvars}")
    if phi.nvars != s1.nvars:
        raise ValueError(f"coordinate change has {phi.nvars} variables, expected {s1.nvars}")
    if min(s1.f.order, s2.f.order, phi.order) < N:
        raise ValueError(f"inputs are not known to order {N}")
    try:
        CoordChange(phi.components)
    except ValueError:
        return False
    lhs = compose(s1.f.truncate(N), phi.truncate(N))
    return lhs == s2.f.truncate(N)
