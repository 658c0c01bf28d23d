"""Command-line front end.

Each command prints one record per result, either as readable text or as
line-delimited JSON (``--format json``).  Exit status: 0 on success, 1 on
malformed input, 2 when a polynomial is rejected, 3 when a precision or
node budget runs out (partial results are still printed).
"""

import argparse
import math
import re
import sys
from fractions import Fraction

from . import roots
from .algebraic import INF, AlgebraicNumber, canonical_roots, height
from .correspondence import kappa_bound, parse_correspondence, predecessors, successors
from .errors import BudgetExceeded, ParseError, PrecisionExhausted, ValidationError
from .heights import (
    FamilyCorrespondence,
    canonical_height,
    expected_height,
    expected_height_relation_check,
    hmin_hmax,
    local_canonical_height,
    local_contributions,
    local_global_check,
    shift_scaling_check,
    specialization_experiment,
)
from .pathspace import (
    All,
    ByIndex,
    Path,
    PathPrefix,
    RandomWeighted,
    extend,
    is_periodic,
    is_repetitive,
    rational_path_search,
    repetitive_start_search,
)
from .poly import UniPoly, factor_over_rationals
from .polytext import parse_polynomial, parse_rational
from .records import dumps, make_record, point_text

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_REJECTED = 2
EXIT_BUDGET = 3

_ROOT = re.compile(r"^\s*root\s*\((.*),([^,]*)\)\s*$")


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_point(text):
    """``inf``, a rational such as ``-3/2`` or ``root(x^2 - 2, 1.414)``."""
    s = text.strip()
    if s.lower() in ("inf", "infinity", "oo"):
        return INF
    m = _ROOT.match(s)
    if m:
        return _root_point(m.group(1), m.group(2), text)
    return AlgebraicNumber.from_rational(parse_rational(s))


def _root_point(poly_text, approx_text, full):
    terms = parse_polynomial(poly_text)
    if any(j or k for (_, j, k) in terms):
        raise ParseError("root() takes a polynomial in x only", full, full.index(poly_text))
    degree = max((i for (i, _, _), c in terms.items() if c), default=0)
    p = UniPoly([terms.get((i, 0, 0), 0) for i in range(degree + 1)])
    if p.degree < 1:
        raise ParseError("root() needs a nonconstant polynomial", full, full.index(poly_text))
    try:
        z = complex(approx_text.strip().replace("i", "j"))
    except ValueError:
        raise ParseError("bad approximation in root()", full, full.rindex(approx_text)) from None
    best = None
    for fac, _ in factor_over_rationals(p):
        ints = fac.primitive()[1]
        for k, box in enumerate(canonical_roots(ints)):
            dist = abs(box.midpoint() - z)
            if best is None or dist < best[0]:
                best = (dist, ints, k)
    return AlgebraicNumber(best[1], best[2])


def parse_branch(text, mode):
    """``0,1,1`` (index list), ``seed:N`` or ``all``."""
    s = text.strip().lower()
    if s == "all":
        return All()
    if s.startswith("seed:"):
        try:
            return RandomWeighted((int(s[5:]),))
        except ValueError:
            raise ParseError("seed must be an integer", text, 5) from None
    out = []
    pos = 0
    for part in s.split(","):
        try:
            v = int(part)
        except ValueError:
            raise ParseError("branch indices must be nonnegative integers", text, pos) from None
        if v < 0:
            raise ParseError("branch indices must be nonnegative integers", text, pos)
        out.append(v)
        pos += len(part) + 1
    return ByIndex(tuple(out), mode)


_LOG = re.compile(r"^\s*log\s*\(\s*([0-9/]+)\s*\)\s*$")


def parse_height_bound(text):
    """A float, or ``log(N)`` for the logarithm of a positive rational."""
    m = _LOG.match(text)
    if m:
        return math.log(Fraction(m.group(1)))
    try:
        v = float(text)
    except ValueError:
        raise ParseError("height bound must be a number or log(N)", text, 0) from None
    if v < 0 or not math.isfinite(v):
        raise ParseError("height bound must be a finite nonnegative number", text, 0)
    return v


def parse_place(text):
    s = text.strip().lower()
    if s in ("inf", "arch", "infinity"):
        return "inf"
    try:
        q = int(s)
    except ValueError:
        raise ParseError("place must be 'inf' or a prime", text, 0) from None
    if q < 2 or any(q % d == 0 for d in range(2, math.isqrt(q) + 1)):
        raise ParseError("place must be 'inf' or a prime", text, 0)
    return q


def build_parser():
    parser = argparse.ArgumentParser(
        prog="corrheight",
        description="canonical heights along paths of correspondences on the projective line",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--corr", help="polynomial F(x, y) defining the correspondence")
    parser.add_argument("--family", help="polynomial F(x, y, t) for specialize")
    parser.add_argument("--start", default="0", help="start point: rational, inf or root(p, approx)")
    parser.add_argument("--branch", default="0", help="index list, seed:N or all")
    parser.add_argument("--branch-mode", choices=("cycle", "pad"), default="cycle",
                        help="how an index list continues past its end")
    parser.add_argument("--depth", type=int, default=8)
    parser.add_argument("--height-bound", default="log(10)")
    parser.add_argument("--tolerance", type=float, default=0.01)
    parser.add_argument("--precision", type=int, default=None,
                        help="bit budget for root refinement (default from CORRHEIGHT_PRECISION)")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--degree-bound", type=int, default=8)
    parser.add_argument("--node-budget", type=int, default=None)
    parser.add_argument("--t-values", default="1,2,4,8,16")
    parser.add_argument("--place", action="append", default=None,
                        help="inf or a prime; may be repeated")
    parser.add_argument("--relation", action="store_true",
                        help="expected-height: also check the successor relation")
    parser.add_argument("--predecessors", action="store_true",
                        help="successors: list predecessors instead")
    return parser


# ---------------------------------------------------------------------------
# commands


class Emitter:
    def __init__(self, fmt, out):
        self.fmt = fmt
        self.out = out
        self.count = 0

    def emit(self, record):
        self.count += 1
        if self.fmt == "json":
            self.out.write(dumps(record) + "\n")
        else:
            self.out.write(render_text(record) + "\n")


def render_text(record):
    lines = [f"[{record['command']}] {record['status']} ({record['provenance']})"]
    _text_lines(record["result"], "  ", lines)
    return "\n".join(lines)


def _text_lines(value, indent, lines):
    for key, v in value.items():
        if isinstance(v, dict) and set(v) == {"mid", "rad"}:
            lines.append(f"{indent}{key}: {v['mid']} +- {v['rad']}")
        elif isinstance(v, dict):
            lines.append(f"{indent}{key}:")
            _text_lines(v, indent + "  ", lines)
        elif isinstance(v, list) and v and all(isinstance(e, dict) for e in v):
            lines.append(f"{indent}{key}:")
            for e in v:
                lines.append(f"{indent}  -")
                _text_lines(e, indent + "    ", lines)
        elif isinstance(v, list):
            lines.append(f"{indent}{key}: [{', '.join(_scalar(e) for e in v)}]")
        else:
            lines.append(f"{indent}{key}: {_scalar(v)}")


def _scalar(v):
    if isinstance(v, dict) and set(v) == {"mid", "rad"}:
        return f"{v['mid']} +- {v['rad']}"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _inputs(args, *names):
    out = {}
    for name in names:
        out[name.replace("_", "-")] = getattr(args, name)
    return out


def _corr(args):
    if not args.corr:
        raise ParseError("--corr is required for this command")
    return parse_correspondence(args.corr)


def _single_path(C, args):
    strategy = parse_branch(args.branch, args.branch_mode)
    if isinstance(strategy, All):
        raise ValidationError("this command follows one path", "--branch 0,1 or --branch seed:N")
    return Path(C, parse_point(args.start), strategy)


def _prefix_record(pre):
    rec = pre.to_record()
    rec["repetitive"] = list(is_repetitive(pre)) if is_repetitive(pre) else None
    rec["periodic"] = list(is_periodic(pre)) if is_periodic(pre) else None
    return rec


def cmd_validate(args, em):
    C = _corr(args)
    kappa = kappa_bound(C)
    result = C.to_record()
    result["kappa"] = kappa.to_record()
    em.emit(make_record("validate", _inputs(args, "corr"), result, kappa.certified))


def cmd_successors(args, em):
    C = _corr(args)
    a = parse_point(args.start)
    if args.predecessors:
        items = predecessors(C, a, args.precision)
    else:
        items = successors(C, a, args.precision)
    for b, m in items:
        result = {
            "point": point_text(b),
            "multiplicity": m,
            "degree": b.degree,
            "rational": b.is_rational,
            "direction": "predecessor" if args.predecessors else "successor",
        }
        em.emit(make_record("successors", _inputs(args, "corr", "start", "predecessors"),
                            result, True))


def cmd_path(args, em):
    C = _corr(args)
    strategy = parse_branch(args.branch, args.branch_mode)
    a = parse_point(args.start)
    inputs = _inputs(args, "corr", "start", "branch", "branch_mode", "depth")
    if isinstance(strategy, All):
        prefixes = extend(PathPrefix(C, (a,), ()), strategy, args.depth, args.precision)
    else:
        prefixes = [Path(C, a, strategy).prefix(args.depth, args.precision)]
    for pre in prefixes:
        result = _prefix_record(pre)
        result["probability"] = pre.probability()
        em.emit(make_record("path", inputs, result, True))


def cmd_canonical_height(args, em):
    C = _corr(args)
    path = _single_path(C, args)
    res = canonical_height(path, args.depth, budget=args.precision)
    result = res.to_record()
    result["path"] = path.describe()
    result["node"] = point_text(res.node)
    result["shift_relation"] = bool(shift_scaling_check(path, args.depth, res.kappa)["pass"])
    em.emit(make_record("canonical-height",
                        _inputs(args, "corr", "start", "branch", "branch_mode", "depth"),
                        result, res.estimate.certified))


def cmd_hminmax(args, em):
    C = _corr(args)
    a = parse_point(args.start)
    kwargs = {} if args.node_budget is None else {"node_budget": args.node_budget}
    res = hmin_hmax(C, a, Fraction(args.tolerance), budget=args.precision, **kwargs)
    result = res.to_record()
    if res.witness_min is not None:
        result["witness_min"] = res.witness_min.render()
    if res.witness_max is not None:
        result["witness_max"] = res.witness_max.render()
    status = "truncated" if res.truncated else "ok"
    em.emit(make_record("hminmax", _inputs(args, "corr", "start", "tolerance", "node_budget"),
                        result, res.hmin.certified and res.hmax.certified, status))
    if res.truncated:
        raise BudgetExceeded("node budget exhausted before reaching the tolerance")


def cmd_expected_height(args, em):
    C = _corr(args)
    a = parse_point(args.start)
    inputs = _inputs(args, "corr", "start", "samples", "depth", "seed", "relation")
    est = expected_height(C, a, args.samples, args.depth, args.seed)
    em.emit(make_record("expected-height", inputs, est.to_record(), False))
    if args.relation:
        rep = expected_height_relation_check(C, a, args.samples, args.depth, args.seed)
        em.emit(make_record("expected-height", inputs, rep.to_record(), False))


def cmd_local_heights(args, em):
    C = _corr(args)
    path = _single_path(C, args)
    places = [parse_place(p) for p in args.place] if args.place else None
    if places is None:
        places = ["inf"] + sorted(int(k) for k in local_contributions(path, args.depth) if k != "inf")
    inputs = _inputs(args, "corr", "start", "branch", "branch_mode", "depth", "place")
    for v in places:
        res = local_canonical_height(path, v, args.depth)
        em.emit(make_record("local-heights", inputs, res.to_record(), False))


def cmd_local_global(args, em):
    C = _corr(args)
    path = _single_path(C, args)
    rep = local_global_check(path, args.depth, args.tolerance)
    em.emit(make_record("local-global",
                        _inputs(args, "corr", "start", "branch", "branch_mode", "depth", "tolerance"),
                        rep.to_record(), False))


def cmd_search_rational(args, em):
    C = _corr(args)
    bound = parse_height_bound(args.height_bound)
    res = rational_path_search(C, bound, args.depth)
    inputs = _inputs(args, "corr", "height_bound", "depth")
    for r in res.starts:
        result = {
            "start": str(r),
            "witnesses": [w.render() for w in res.witnesses[r]],
            "witnesses_truncated": res.truncated,
        }
        em.emit(make_record("search-rational", inputs, result, True))


def cmd_search_repetitive(args, em):
    C = _corr(args)
    bound = parse_height_bound(args.height_bound)
    kwargs = {} if args.node_budget is None else {"node_budget": args.node_budget}
    inputs = _inputs(args, "corr", "height_bound", "depth", "degree_bound", "node_budget")
    try:
        res = repetitive_start_search(C, bound, args.depth, args.degree_bound,
                                      budget=args.precision, **kwargs)
        error = None
    except BudgetExceeded as exc:
        res, error = exc.partial, exc
    for p in res.points:
        key = ("inf",) if p is INF else (p.ints, p.index)
        result = {
            "point": point_text(p),
            "height": height(p),
            "witness": res.witnesses[key].render(),
            "search_truncated": res.truncated,
        }
        em.emit(make_record("search-repetitive", inputs, result, True,
                            "partial" if error else "ok"))
    if error is not None:
        raise error


def cmd_specialize(args, em):
    if not args.family:
        raise ParseError("--family is required for specialize")
    family = FamilyCorrespondence(args.family)
    strategy = parse_branch(args.branch, args.branch_mode)
    if isinstance(strategy, All):
        raise ValidationError("specialize follows one branch pattern", "--branch 0")
    t_values = []
    pos = 0
    for part in args.t_values.split(","):
        try:
            t_values.append(parse_rational(part))
        except ParseError as exc:
            raise ParseError(exc.message, args.t_values, pos + exc.position) from None
        pos += len(part) + 1
    start = parse_point(args.start)
    if start is not INF:
        if not start.is_rational:
            raise ValidationError("specialize needs a rational start or inf")
        start = start.as_fraction()
    table = specialization_experiment(family, start, strategy, t_values, args.depth)
    inputs = _inputs(args, "family", "start", "branch", "branch_mode", "depth", "t_values")
    if args.format == "text":
        em.out.write(table.to_text() + "\n")
        for t, why in table.skipped:
            em.out.write(f"skipped t={t}: {why}\n")
        return
    for row in table.rows:
        em.emit(make_record("specialize", inputs, row.to_record(), row.hhat.estimate.certified))
    summary = {
        "ratio_differences": table.ratio_differences(),
        "coarse_bound": {"c1": table.c1, "c2": table.c2, "holds": table.coarse_bound_holds},
        "skipped": [{"t": str(t), "reason": why} for t, why in table.skipped],
    }
    em.emit(make_record("specialize", inputs, summary, False))


COMMANDS = {
    "validate": cmd_validate,
    "successors": cmd_successors,
    "path": cmd_path,
    "canonical-height": cmd_canonical_height,
    "hminmax": cmd_hminmax,
    "expected-height": cmd_expected_height,
    "local-heights": cmd_local_heights,
    "local-global": cmd_local_global,
    "search-rational": cmd_search_rational,
    "search-repetitive": cmd_search_repetitive,
    "specialize": cmd_specialize,
}


def run(argv=None, out=None, err=None):
    """Run one command; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.depth < 0:
        err.write("error: --depth must be >= 0\n")
        return EXIT_PARSE
    if args.tolerance <= 0:
        err.write("error: --tolerance must be > 0\n")
        return EXIT_PARSE
    if args.precision is None:
        args.precision = roots.DEFAULT_BUDGET
    em = Emitter(args.format, out)
    try:
        COMMANDS[args.command](args, em)
    except ParseError as exc:
        err.write(f"parse error: {exc.annotated()}\n")
        return EXIT_PARSE
    except ValidationError as exc:
        _emit_failure(em, args, "rejected", str(exc))
        err.write(f"rejected: {exc}\n")
        return EXIT_REJECTED
    except (BudgetExceeded, PrecisionExhausted) as exc:
        _emit_failure(em, args, "exhausted", str(exc))
        err.write(f"budget exhausted: {exc}\n")
        return EXIT_BUDGET
    return EXIT_OK


def _emit_failure(em, args, status, message):
    em.emit(make_record(args.command, _inputs(args, "corr", "start"),
                        {"error": message}, False, status))


def main(argv=None):
    sys.exit(run(argv))
