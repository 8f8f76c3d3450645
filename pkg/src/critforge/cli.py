"""Command-line entry point.

Usage::

    critforge COMMAND [--vars x,y] EXPR [--vars ... EXPR ...] [options]
    critforge --batch FILE [--jobs K]

The i-th ``--vars`` declaration belongs to the i-th expression; a single
declaration is shared by all expressions.  Exit codes: 0 success,
1 usage or parse error, 2 inconclusive (e.g. non-isolated), 3 internal
contract violation.
"""

import argparse
import json
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from gmpy2 import mpq

from . import presets
from .errors import ContractViolation, DegenerateForm, NonIsolatedError, ResourceLimit
from .expr import ParseError, parse_expr, to_family, to_series, to_tpoly
from .isotopy import FamilyCoordChange, MatrixFamily, matrix_family_det, specialize, verify_isotopy
from .linalg import RatMatrix
from .milnor import (
    DEFAULT_CAP,
    LGPair,
    behrend_value,
    behrend_value_vanishing_cycles,
    euler_char_milnor_fiber,
    koszul_h0,
    milnor_number,
    tangent_complex_dims,
)
from .morse import minimal_model, split
from .quadform import QuadForm, diagonalize, gw_class, hyperbolic_count, orientation_twist
from .series import DEFAULT_ORDER, CoordChange
from .stability import stabilize, stable_compare, stable_invariants, ts_sum, verify_stable_witness

SCHEMA_VERSION = 1
COMMANDS = (
    "milnor", "tjurina", "behrend", "split", "minimal-model", "stabilize", "ts-sum",
    "invariants", "stable-compare", "verify-witness", "verify-isotopy", "det-family", "gw-class",
)
EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_CONTRACT = 0, 1, 2, 3


class UsageError(Exception):
    code = "usage_error"


class Inconclusive(Exception):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass
class JobSpec:
    command: str
    exprs: list
    variables: list
    order: int = DEFAULT_ORDER
    mode: str = "Q"
    cap: int = DEFAULT_CAP
    fmt: str = "human"
    gram: list = field(default_factory=list)
    maps: list = field(default_factory=list)
    family: list = field(default_factory=list)
    matrix: str | None = None
    preset: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.order < 2:
            raise UsageError("order N must be at least 2")
        if self.cap < self.order:
            raise UsageError("cap must be at least the order N")
        if self.mode not in ("Q", "C-formal"):
            raise UsageError("mode must be Q or C-formal")


def _parser():
    p = argparse.ArgumentParser(prog="critforge", add_help=True)
    p.add_argument("--vars", action="append", default=[],
                   help="comma-separated variable names for the next expression")
    p.add_argument("--order", "-N", type=int, default=DEFAULT_ORDER, help="truncation order N")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max jet order for certificates")
    p.add_argument("--mode", default="Q", choices=["Q", "C-formal", "c-formal"])
    p.add_argument("--format", dest="fmt", default="human", choices=["human", "json"])
    p.add_argument("--json", dest="fmt", action="store_const", const="json")
    p.add_argument("--gram", action="append", default=[],
                   help="Gram matrix as 'a,b;c,d' (empty string for the zero-dimensional form)")
    p.add_argument("--map", action="append", default=[],
                   help="coordinate change components separated by ';'")
    p.add_argument("--family", action="append", default=[],
                   help="family components in the variables and t, separated by ';'")
    p.add_argument("--matrix", help="matrix over Q[t] as 'a,b;c,d'")
    p.add_argument("--preset", help="named fixture: " + ", ".join(sorted(presets.PRESETS)))
    p.add_argument("exprs", nargs="*")
    return p


class _ArgError(Exception):
    pass


class _QuietParser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def parse_job(argv):
    if not argv:
        raise UsageError("missing command; one of " + ", ".join(COMMANDS))
    command, rest = argv[0], list(argv[1:])
    p = _parser()
    p.__class__ = _QuietParser
    try:
        ns = p.parse_intermixed_args(rest)
    except _ArgError as exc:
        raise UsageError(str(exc)) from None
    mode = "C-formal" if ns.mode.lower() == "c-formal" else "Q"
    job = JobSpec(command, ns.exprs, [_split_vars(v) for v in ns.vars], ns.order, mode, ns.cap,
                  ns.fmt, ns.gram, ns.map, ns.family, ns.matrix, ns.preset)
    job.validate()
    return job


def _split_vars(text):
    names = [v.strip() for v in text.split(",") if v.strip()]
    if len(set(names)) != len(names):
        raise UsageError(f"duplicate variable in {text!r}")
    return names


def _rat(text):
    text = text.strip()
    try:
        return mpq(text)
    except ValueError:
        raise UsageError(f"not a rational number: {text!r}") from None


def _gram(text):
    text = text.strip()
    if not text:
        return QuadForm([])
    rows = [[_rat(x) for x in row.split(",")] for row in text.split(";")]
    try:
        return QuadForm(rows)
    except DegenerateForm:
        raise
    except ValueError as exc:
        raise UsageError(f"bad Gram matrix: {exc}") from None


def _pairs(job, count=None, order=None):
    """(variables, LGPair) for each expression, or from the preset."""
    order = job.order if order is None else order
    specs = []
    if job.preset:
        pre = presets.get(job.preset)
        specs = list(pre.get("pairs", []))
    if job.exprs:
        if not job.variables:
            raise UsageError("--vars is required with an expression")
        if len(job.variables) not in (1, len(job.exprs)):
            raise UsageError("give one --vars for all expressions or one per expression")
        specs = [(job.variables[0] if len(job.variables) == 1 else job.variables[i], e)
                 for i, e in enumerate(job.exprs)]
    if count is not None and len(specs) != count:
        raise UsageError(f"{job.command} needs {count} expression(s), got {len(specs)}")
    out = []
    for names, text in specs:
        f = to_series(parse_expr(text, names), names, order)
        try:
            out.append((names, LGPair.of(f)))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return out


def _series_json(f, names):
    return {
        "vars": list(names),
        "order": f.order,
        "text": f.format(names),
        "terms": [[list(e), str(c)] for e, c in f.items()],
    }


def _gram_json(q):
    return [[str(x) for x in row] for row in q.gram.entries]


def _fresh_names(names, count, stem="z"):
    out = []
    i = 1
    while len(out) < count:
        cand = f"{stem}{i}"
        if cand not in names:
            out.append(cand)
        i += 1
    return out


def _milnor_order(job):
    # polynomial inputs are exact; give the certificate search room up to cap
    return max(job.order, job.cap + 1)


def cmd_milnor(job):
    (names, p), = _pairs(job, 1, _milnor_order(job))
    r = milnor_number(p, job.cap)
    result = r.to_json()
    if r.mu is None:
        raise Inconclusive("no finite Milnor number certified", result)
    result["koszul_h0"] = koszul_h0(p, job.cap)
    return result


def cmd_tjurina(job):
    (names, p), = _pairs(job, 1, _milnor_order(job))
    r = milnor_number(p, job.cap)
    result = {"tjurina": r.tjurina, "mu": r.mu, "checked_to": r.checked_to}
    if r.tjurina is None:
        raise Inconclusive("no finite Tjurina number certified", result)
    return result


def cmd_behrend(job):
    (names, p), = _pairs(job, 1, _milnor_order(job))
    r = milnor_number(p, job.cap)
    if r.mu is None:
        raise Inconclusive("non-isolated or uncertified critical point", r.to_json())
    return {
        "behrend": behrend_value(p, job.cap),
        "mu": r.mu,
        "euler_char_milnor_fiber": euler_char_milnor_fiber(p, job.cap),
        "behrend_vanishing_cycles": behrend_value_vanishing_cycles(p, job.cap),
        "tangent_complex": list(tangent_complex_dims(p, job.cap)),
    }


def _split_json(s, names):
    c = s.corank
    res_names = [f"u{i + 1}" for i in range(c)]
    quad_names = [f"v{i + 1}" for i in range(s.quad.dim)]
    target = res_names + quad_names
    return {
        "order": s.order,
        "corank": c,
        "rank": s.quad.dim,
        "quad": _gram_json(s.quad),
        "residual": _series_json(s.residual.f, res_names),
        "witness": {
            "source_vars": list(names),
            "target_vars": target,
            "components": [comp.format(target) for comp in s.witness.components],
        },
        "normal_form": s.normal_form().format(target),
        "verified": True,
    }


def cmd_split(job):
    (names, p), = _pairs(job, 1)
    return _split_json(split(p, job.order), names)


def cmd_minimal_model(job):
    (names, p), = _pairs(job, 1)
    return _split_json(minimal_model(p, job.order), names)


def _forms(job, count):
    grams = list(job.gram)
    if job.preset and not grams:
        grams = None
        pre = presets.get(job.preset)
        if "grams" in pre:
            return [QuadForm(g) for g in pre["grams"]][:count]
    if grams is None or len(grams) < count:
        raise UsageError(f"{job.command} needs {count} --gram option(s)")
    return [_gram(g) for g in grams[:count]]


def cmd_stabilize(job):
    (names, p), = _pairs(job, 1)
    q, = _forms(job, 1)
    s = stabilize(p, q, job.mode)
    new = names + _fresh_names(names, q.dim)
    return {"pair": _series_json(s.f, new), "acting": s.acting[-1].to_json()}


def cmd_ts_sum(job):
    (n1, p1), (n2, p2) = _pairs(job, 2)
    names = list(n1) + [v if v not in n1 else v + "_2" for v in n2]
    s = ts_sum(p1, p2)
    return {"pair": _series_json(s.f, names)}


def cmd_invariants(job):
    (names, p), = _pairs(job, 1)
    try:
        inv = stable_invariants(p, job.order, job.mode, job.cap)
    except NonIsolatedError as exc:
        raise Inconclusive(str(exc)) from None
    out = inv.to_json()
    out["residual"] = _series_json(inv.residual.f, [f"u{i + 1}" for i in range(inv.corank)])
    return out


def cmd_stable_compare(job):
    (n1, p1), (n2, p2) = _pairs(job, 2)
    try:
        v = stable_compare(p1, p2, job.order, job.mode, job.cap)
    except NonIsolatedError as exc:
        raise Inconclusive(str(exc)) from None
    return v.to_json()


def _parse_map(text, names, order):
    comps = [c for c in text.split(";")]
    if len(comps) != len(names):
        raise UsageError(f"map has {len(comps)} components for {len(names)} variables")
    series = [to_series(parse_expr(c, names), names, order) for c in comps]
    try:
        return CoordChange(series)
    except ValueError as exc:
        raise UsageError(f"invalid coordinate change: {exc}") from None


def cmd_verify_witness(job):
    (n1, p1), (n2, p2) = _pairs(job, 2)
    q1, q2 = _forms(job, 2)
    target = n2 + _fresh_names(n2, q2.dim)
    if job.maps:
        text = job.maps[0]
    elif job.preset and "map" in presets.get(job.preset):
        text = ";".join(presets.get(job.preset)["map"])
    else:
        raise UsageError("verify-witness needs --map")
    if p1.nvars + q1.dim != len(target):
        raise UsageError(f"stabilized dimensions differ: {p1.nvars + q1.dim} vs {len(target)}")
    phi = _parse_map(text, target, job.order)
    ok = verify_stable_witness(p1, p2, q1, q2, phi, job.order)
    return {"verified": ok, "target_vars": target}


def cmd_verify_isotopy(job):
    order = job.order
    if job.preset:
        pre = presets.get(job.preset)
        if "family" not in pre:
            raise UsageError(f"preset {job.preset!r} has no isotopy family")
        (names, p), = _pairs(job, 1, order + 1)
        phi = pre["family"](order)
    else:
        (names, p), = _pairs(job, 1, order + 1)
        if not job.family:
            raise UsageError("verify-isotopy needs --family or --preset")
        comps = job.family[0].split(";")
        if len(comps) != len(names):
            raise UsageError(f"family has {len(comps)} components for {len(names)} variables")
        fam = [to_family(parse_expr(c, list(names) + ["t"]), names, order) for c in comps]
        try:
            phi = FamilyCoordChange(fam)
        except ValueError as exc:
            raise UsageError(f"invalid family: {exc}") from None
    report = verify_isotopy(p.f, phi, order)
    out = report.to_json(names)
    if job.preset == "quartic-isotopy":
        out["matches_quartic_automorphism"] = (
            report.phi1 == presets.get("quartic-automorphism")["automorphism"](order))
    return out


def _matrix(job):
    if job.matrix:
        rows = [[to_tpoly(parse_expr(x, ["t"])) for x in row.split(",")]
                for row in job.matrix.split(";")]
        try:
            return MatrixFamily(rows)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if job.preset:
        pre = presets.get(job.preset)
        if "matrix" not in pre:
            raise UsageError(f"preset {job.preset!r} has no matrix family")
        return pre["matrix"]()
    raise UsageError("det-family needs --matrix or --preset")


def cmd_det_family(job):
    M = _matrix(job)
    if M.rows != M.cols:
        raise UsageError("det-family needs a square matrix")
    d = matrix_family_det(M)
    return {
        "det": d.format(),
        "det_coefficients": [str(c) for c in d.coeffs],
        "at_t0": [[str(x) for x in row] for row in specialize(M, 0).entries],
        "at_t1": [[str(x) for x in row] for row in specialize(M, 1).entries],
        "t0_is_identity": specialize(M, 0) == RatMatrix.identity(M.rows),
    }


def cmd_gw_class(job):
    q, = _forms(job, 1)
    cls = gw_class(q, job.mode)
    parity, disc = orientation_twist(q, job.mode)
    d, _ = diagonalize(q) if q.dim else ((), None)
    return {
        "class": cls.to_json(),
        "orientation_twist": {"parity": parity, "disc": disc},
        "diagonal": [str(x) for x in d],
        "hyperbolic_planes": hyperbolic_count(q) if q.dim else 0,
    }


HANDLERS = {
    "milnor": cmd_milnor,
    "tjurina": cmd_tjurina,
    "behrend": cmd_behrend,
    "split": cmd_split,
    "minimal-model": cmd_minimal_model,
    "stabilize": cmd_stabilize,
    "ts-sum": cmd_ts_sum,
    "invariants": cmd_invariants,
    "stable-compare": cmd_stable_compare,
    "verify-witness": cmd_verify_witness,
    "verify-isotopy": cmd_verify_isotopy,
    "det-family": cmd_det_family,
    "gw-class": cmd_gw_class,
}


def _envelope(job, status, result=None, error=None):
    out = {"schema": SCHEMA_VERSION, "status": status}
    if job is not None:
        out.update({"command": job.command, "order": job.order, "mode": job.mode, "cap": job.cap})
    if result is not None:
        out["result"] = result
    if error is not None:
        out["error"] = error
    return out


def _human(payload):
    lines = []
    if payload.get("command"):
        lines.append(f"{payload['command']} (N={payload['order']}, mode={payload['mode']}, "
                     f"cap={payload['cap']}): {payload['status']}")
    if "error" in payload:
        err = payload["error"]
        where = f" at byte {err['offset']}" if err.get("offset") is not None else ""
        lines.append(f"error [{err['code']}]: {err['message']}{where}")
    result = payload.get("result") or {}
    if payload.get("command") == "det-family" and "det" in result:
        lines.append(f"det = {result['det']}")
    for key in sorted(result):
        value = result[key]
        if isinstance(value, dict) and "text" in value:
            value = value["text"]
        lines.append(f"  {key}: {json.dumps(value, sort_keys=True, ensure_ascii=False)}"
                     if not isinstance(value, str) else f"  {key}: {value}")
    return "\n".join(lines)


def render(payload, fmt):
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return _human(payload)


def run(argv):
    """Run one job; returns (exit code, rendered output)."""
    fmt = "json" if ("--json" in argv or "--format=json" in argv
                     or any(a == "--format" and i + 1 < len(argv) and argv[i + 1] == "json"
                            for i, a in enumerate(argv))) else "human"
    job = None
    try:
        job = parse_job(argv)
        fmt = job.fmt
        result = HANDLERS[job.command](job)
        return EXIT_OK, render(_envelope(job, "ok", result), fmt)
    except Inconclusive as exc:
        err = {"code": "inconclusive", "message": str(exc)}
        return EXIT_INCONCLUSIVE, render(_envelope(job, "inconclusive", exc.result, err), fmt)
    except ParseError as exc:
        err = {"code": exc.code, "message": exc.message, "offset": exc.offset}
        return EXIT_USAGE, render(_envelope(job, "error", error=err), fmt)
    except (UsageError, KeyError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        err = {"code": "usage_error", "message": str(msg)}
        return EXIT_USAGE, render(_envelope(job, "error", error=err), fmt)
    except NonIsolatedError as exc:
        err = {"code": "non_isolated", "message": str(exc)}
        return EXIT_INCONCLUSIVE, render(_envelope(job, "inconclusive", error=err), fmt)
    except ResourceLimit as exc:
        err = {"code": "resource_limit", "message": str(exc)}
        return EXIT_INCONCLUSIVE, render(_envelope(job, "inconclusive", error=err), fmt)
    except ContractViolation as exc:
        err = {"code": "contract_violation", "message": str(exc)}
        return EXIT_CONTRACT, render(_envelope(job, "error", error=err), fmt)


def _run_line(line):
    return run(shlex.split(line))


def run_batch(path, jobs=None):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if jobs == 1 or len(lines) <= 1:
        results = [_run_line(ln) for ln in lines]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_line, lines))
    code = max((c for c, _ in results), default=EXIT_OK)
    return code, [text for _, text in results]


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "--batch":
        bp = argparse.ArgumentParser(prog="critforge --batch")
        bp.add_argument("--batch", required=True)
        bp.add_argument("--jobs", type=int, default=None)
        ns = bp.parse_args(argv)
        code, outputs = run_batch(ns.batch, ns.jobs)
        for text in outputs:
            print(text)
        return code
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        print("\ncommands: " + ", ".join(COMMANDS))
        return EXIT_OK if argv else EXIT_USAGE
    code, text = run(argv)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
