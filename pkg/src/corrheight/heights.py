"""Canonical heights along paths and the computations built on them.

Along a path ``a_0 -> a_1 -> ...`` with polarization ``alpha > 1`` the
truncations ``alpha^-n h(a_n)`` converge, and telescoping the per-edge bound
``|h(b)/alpha - h(a)| <= kappa`` gives

    |alpha^-n h(a_n) - hhat(P)| <= alpha^-n * alpha/(alpha-1) * kappa.

Every certified enclosure below is that interval widened by the radius of
the height enclosure itself.
"""

import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import flint

from .algebraic import INF, AlgebraicNumber, HeightEstimate, height, log_plus
from .correspondence import (
    KappaBound,
    kappa_bound,
    successors,
    validate,
)
from .errors import BudgetExceeded, ValidationError
from .pathspace import All, ByIndex, Path, PathPrefix, RandomWeighted, extend, is_repetitive
from .places import enumerate_place_values
from .poly import BiPoly
from .polytext import parse_polynomial

MAX_DEPTH = 16
WORK_PRECISION = 128


def _q(f):
    f = Fraction(f)
    return flint.fmpq(f.numerator, f.denominator)


def _require_polarized(C):
    if C.alpha <= 1:
        raise ValidationError(
            f"canonical heights need alpha > 1, got alpha = {C.alpha}",
            "swap x and y or use a correspondence with d_x > d_y",
        )


def kappa_prime(C, kappa=None):
    """``alpha/(alpha-1) * kappa`` as an exact rational upper bound."""
    kappa = kappa or kappa_bound(C)
    return C.alpha / (C.alpha - 1) * Fraction(kappa.value)


@dataclass
class CanonicalHeightResult:
    estimate: HeightEstimate
    depth: int
    kappa: KappaBound
    alpha: Fraction
    node: object = None

    @property
    def value(self):
        return self.estimate.value

    @property
    def radius(self):
        return self.estimate.radius

    def to_record(self):
        return {
            "value": {"mid": self.estimate.value, "rad": self.estimate.radius},
            "certified": self.estimate.certified,
            "depth": self.depth,
            "kappa": self.kappa.to_record(),
            "alpha": str(self.alpha),
        }


def _node_at(path, depth, budget=None):
    if isinstance(path, PathPrefix):
        if depth > path.length:
            raise BudgetExceeded(f"prefix has length {path.length}, depth {depth} requested")
        return path.nodes[depth]
    return path.node(depth, budget)


def telescoped(C, node_height, depth, kappa):
    """Enclosure ``alpha^-n h +- alpha^-n kappa'`` for a node height at depth ``n``.

    Centre and half-width are kept as exact rationals.
    """
    scale = Fraction(1) / C.alpha ** depth
    kp = C.alpha / (C.alpha - 1) * kappa.exact
    lo, hi = node_height.interval()
    return HeightEstimate.from_center((lo + hi) / 2 * scale, ((hi - lo) / 2 + kp) * scale,
                                      node_height.certified and kappa.certified)


def canonical_height(path, depth, kappa=None, max_depth=MAX_DEPTH, budget=None):
    """Canonical height of a path from its node at ``depth``.

    ``path`` is a :class:`Path` (extended on demand) or a long enough
    :class:`PathPrefix`.  The radius is
    ``alpha^-n (alpha/(alpha-1)) kappa + alpha^-n * (height radius)``.
    """
    C = path.correspondence
    _require_polarized(C)
    if depth > max_depth:
        raise BudgetExceeded(f"depth {depth} exceeds the budget of {max_depth}")
    kappa = kappa or kappa_bound(C)
    node = _node_at(path, depth, budget)
    est = telescoped(C, height(node), depth, kappa)
    return CanonicalHeightResult(est, depth, kappa, C.alpha, node)


def scaling_relation_check(P, Q, factor, depth, kappa=None):
    """Do the enclosures of ``hhat(Q)`` and ``factor * hhat(P)`` overlap?"""
    hp = canonical_height(P, depth, kappa)
    hq = canonical_height(Q, depth, kappa)
    scaled = hp.estimate.scale(Fraction(factor))
    return {
        "pass": hq.estimate.overlaps(scaled),
        "left": hq,
        "right": scaled,
        "factor": Fraction(factor),
    }


def shift_scaling_check(path, depth, kappa=None):
    """``hhat(shift P)`` against ``alpha * hhat(P)``, both at the same depth."""
    if isinstance(path, PathPrefix):
        shifted = path.shift()
    else:
        shifted = path.shift()
    C = path.correspondence
    _require_polarized(C)
    return scaling_relation_check(path, shifted, C.alpha, depth, kappa)


# ---------------------------------------------------------------------------
# branch and bound for the extreme canonical heights


@dataclass
class ExtremeResult:
    hmin: HeightEstimate
    hmax: HeightEstimate
    truncated: bool
    expanded: int
    witness_min: PathPrefix = None
    witness_max: PathPrefix = None
    cycle_found: bool = False

    def to_record(self):
        return {
            "hmin": {"mid": self.hmin.value, "rad": self.hmin.radius},
            "hmax": {"mid": self.hmax.value, "rad": self.hmax.radius},
            "certified": self.hmin.certified and self.hmax.certified,
            "truncated": self.truncated,
            "expanded": self.expanded,
            "cycle_found": self.cycle_found,
        }


def _node_interval(C, node, depth, kappa, parent):
    lo, hi = telescoped(C, height(node), depth, kappa).interval()
    lo = max(lo, Fraction(0))
    if parent is not None:
        lo = max(lo, parent[0])
        hi = min(hi, parent[1])
    return (lo, hi)


def _search_extreme(C, a, tolerance, kappa, node_budget, sense, budget=None):
    """Best-first search; ``sense=+1`` minimises, ``-1`` maximises."""
    tolerance = Fraction(tolerance)
    counter = itertools.count()
    root = PathPrefix(C, (a,), ())
    root_iv = _node_interval(C, a, 0, kappa, None)
    best = root_iv[1] if sense > 0 else root_iv[0]
    best_prefix = root
    heap = [((root_iv[0] if sense > 0 else -root_iv[1]), next(counter), root, root_iv)]
    expanded = 0
    cycle = False
    truncated = False
    while heap:
        key, _, pre, iv = heap[0]
        bound = key if sense > 0 else -key
        gap = (best - bound) if sense > 0 else (bound - best)
        if gap <= 2 * tolerance:
            break
        if expanded >= node_budget:
            truncated = True
            break
        heapq.heappop(heap)
        expanded += 1
        depth = pre.length + 1
        for b, m in successors(C, pre.nodes[-1], budget):
            child = PathPrefix(C, pre.nodes + (b,), pre.multiplicities + (m,))
            civ = _node_interval(C, b, depth, kappa, iv)
            if civ[0] > civ[1]:
                # empty intersection can only come from rounding; keep the parent's box
                civ = iv
            if is_repetitive(child) is not None and sense > 0:
                # a closed loop yields a path whose nodes repeat, so hhat = 0
                cycle = True
                civ = (Fraction(0), Fraction(0))
                if best > 0:
                    best = Fraction(0)
                    best_prefix = child
                continue
            if sense > 0:
                if civ[1] < best:
                    best, best_prefix = civ[1], child
                if civ[0] <= best:
                    heapq.heappush(heap, (civ[0], next(counter), child, civ))
            else:
                if civ[0] > best:
                    best, best_prefix = civ[0], child
                if civ[1] >= best:
                    heapq.heappush(heap, (-civ[1], next(counter), child, civ))
    if heap:
        frontier = heap[0][0] if sense > 0 else -heap[0][0]
    else:
        frontier = best
    lo, hi = (frontier, best) if sense > 0 else (best, frontier)
    if lo > hi:
        lo, hi = hi, lo
    est = HeightEstimate.from_interval(lo, hi, kappa.certified)
    return est, truncated, expanded, best_prefix, cycle


def hmin_hmax(C, a, tolerance=Fraction(1, 100), kappa=None, node_budget=200, budget=None):
    """Enclosures of the least and largest canonical heights of paths from ``a``."""
    _require_polarized(C)
    kappa = kappa or kappa_bound(C)
    lo_est, t1, e1, w1, cycle = _search_extreme(C, a, tolerance, kappa, node_budget, +1, budget)
    hi_est, t2, e2, w2, _ = _search_extreme(C, a, tolerance, kappa, node_budget, -1, budget)
    return ExtremeResult(lo_est, hi_est, t1 or t2, e1 + e2, w1, w2, cycle)


# ---------------------------------------------------------------------------
# expected heights


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    samples: int
    depth: int
    bias_bound: float
    exact_mean: Fraction = None

    def to_record(self):
        return {
            "mean": {"mid": self.mean, "rad": self.stderr},
            "stderr": self.stderr,
            "samples": self.samples,
            "depth": self.depth,
            "truncation_bound": self.bias_bound,
        }


def _truncated_value(C, path, depth):
    node = path.node(depth)
    h = height(node).value
    return Fraction(h) / C.alpha ** depth


def _summarize(values, depth, C, kappa):
    # exact rational sums make the result independent of summation order
    n = len(values)
    total = sum(values, Fraction(0))
    mean = total / n
    if n > 1:
        var = sum(((v - mean) ** 2 for v in values), Fraction(0)) / (n - 1)
        stderr = math.sqrt(float(var) / n)
    else:
        stderr = 0.0
    bias = float(C.alpha / (C.alpha - 1) * Fraction(kappa.value) / C.alpha ** depth)
    return MonteCarloEstimate(float(mean), stderr, n, depth, bias, mean)


def expected_height(C, a, samples, depth, seed, kappa=None, stream=()):
    """Monte Carlo mean of ``alpha^-n h(a_n)`` over multiplicity-weighted random paths."""
    _require_polarized(C)
    kappa = kappa or kappa_bound(C)
    values = []
    for i in range(samples):
        path = Path(C, a, RandomWeighted((int(seed),) + tuple(stream) + (i,)))
        values.append(_truncated_value(C, path, depth))
    return _summarize(values, depth, C, kappa)


def exact_expected_height(C, a, depth, kappa=None):
    """Exhaustive multiplicity-weighted average of ``alpha^-n h(a_n)`` over the depth-n tree."""
    _require_polarized(C)
    total = Fraction(0)
    for pre in extend(PathPrefix(C, (a,), ()), All(), depth):
        total += pre.probability() * Fraction(height(pre.nodes[-1]).value)
    return total / C.alpha ** depth


@dataclass
class RelationReport:
    successor_mean: float
    successor_stderr: float
    scaled_start: float
    scaled_stderr: float
    sigmas: float
    passed: bool

    def to_record(self):
        return {
            "successor_mean": {"mid": self.successor_mean, "rad": self.successor_stderr},
            "alpha_times_start": {"mid": self.scaled_start, "rad": self.scaled_stderr},
            "sigmas": self.sigmas,
            "pass": self.passed,
        }


def expected_height_relation_check(C, a, samples, depth, seed, kappa=None):
    """Weighted successor mean of E[hhat] against ``alpha * E[hhat(a)]``.

    The successor side truncates at ``depth`` and the start side at
    ``depth + 1`` so both estimate the same quantity exactly; the check
    passes when they agree within three combined standard errors.
    """
    _require_polarized(C)
    kappa = kappa or kappa_bound(C)
    succ = successors(C, a)
    mean = Fraction(0)
    var = 0.0
    for k, (b, m) in enumerate(succ):
        est = expected_height(C, b, samples, depth, seed, kappa, stream=(1, k))
        w = Fraction(m, C.d_y)
        mean += w * est.exact_mean
        var += (float(w) * est.stderr) ** 2
    start = expected_height(C, a, samples, depth + 1, seed, kappa, stream=(2,))
    scaled = C.alpha * start.exact_mean
    scaled_se = float(C.alpha) * start.stderr
    se = math.sqrt(var + scaled_se ** 2)
    diff = float(abs(mean - scaled))
    sigmas = diff / se if se > 0 else (0.0 if diff == 0 else math.inf)
    return RelationReport(float(mean), math.sqrt(var), float(scaled), scaled_se, sigmas,
                          sigmas <= 3)


# ---------------------------------------------------------------------------
# local heights


@dataclass
class LocalHeightValue:
    place: str
    value: HeightEstimate
    depth: int
    stabilized: bool

    def to_record(self):
        return {
            "place": self.place,
            "value": {"mid": self.value.value, "rad": self.value.radius},
            "depth": self.depth,
            "stabilized": self.stabilized,
            "certified": False,
        }


def _local_log_plus(node, place):
    """``log+|node|_v`` for ``place = "inf"`` (the node's own embedding) or a prime.

    At a prime the value is averaged over the places of ``Q(node)`` above it
    with their local-degree weights.
    """
    with flint.ctx.workprec(WORK_PRECISION):
        if node is INF:
            return flint.arb(0)
        if place == "inf":
            if node.is_rational:
                f = node.as_fraction()
                return log_plus(flint.arb(_q(abs(f))).log()) if f else flint.arb(0)
            return log_plus(abs(node.to_acb()).log())
        if node.ints[0] == 0:
            return flint.arb(0)
        total = flint.arb(0)
        q = int(place)
        if node.ints[-1] % q:
            return total
        for pv in enumerate_place_values(node, "poles"):
            if pv.place.kind == "finite" and pv.place.prime == q:
                total += log_plus(pv.logabs) * _q(pv.weight)
        return total


def local_canonical_height(path, place, depth, tolerance=1e-3):
    """Truncated local canonical height ``alpha^-n log+|a_n|_v``.

    ``place`` is ``"inf"`` or a prime.  ``stabilized`` reports whether
    depths ``n-1`` and ``n`` agree within ``tolerance``.  No certified
    radius is claimed.
    """
    C = path.correspondence
    _require_polarized(C)
    vals = []
    for n in (max(depth - 1, 0), depth):
        node = _node_at(path, n)
        vals.append(_local_log_plus(node, place) * _q(Fraction(1) / C.alpha ** n))
    stable = abs(float(vals[1].mid()) - float(vals[0].mid())) <= tolerance
    return LocalHeightValue(str(place), HeightEstimate(vals[1], False), depth, stable)


def local_contributions(path, depth):
    """Per-rational-place masses ``sum_{v | p} weight * alpha^-n log+|a_n|_v``."""
    C = path.correspondence
    node = _node_at(path, depth)
    scale = _q(Fraction(1) / C.alpha ** depth)
    out = {}
    if node is INF or node.ints[0] == 0:
        return {"inf": flint.arb(0)}
    with flint.ctx.workprec(WORK_PRECISION):
        for pv in enumerate_place_values(node, "poles"):
            key = "inf" if pv.place.kind == "arch" else str(pv.place.prime)
            out.setdefault(key, flint.arb(0))
            out[key] += log_plus(pv.logabs) * _q(pv.weight) * scale
    return out


@dataclass
class LocalGlobalReport:
    local_sum: HeightEstimate
    canonical: CanonicalHeightResult
    contributions: dict
    difference: float
    passed: bool

    def to_record(self):
        return {
            "local_sum": {"mid": self.local_sum.value, "rad": self.local_sum.radius},
            "canonical": self.canonical.to_record(),
            "places": {k: {"mid": float(v.mid()), "rad": float(v.rad())}
                       for k, v in sorted(self.contributions.items())},
            "difference": self.difference,
            "pass": self.passed,
        }


def local_global_check(path, depth, tolerance=1e-3, kappa=None):
    """Sum of weighted local heights against the canonical height at the same depth."""
    contributions = local_contributions(path, depth)
    with flint.ctx.workprec(WORK_PRECISION):
        total = flint.arb(0)
        for v in contributions.values():
            total += v
    local = HeightEstimate(total, False)
    canon = canonical_height(path, depth, kappa)
    diff = abs(local.value - canon.value)
    passed = diff <= tolerance + canon.radius + local.radius
    return LocalGlobalReport(local, canon, contributions, diff, passed)


# ---------------------------------------------------------------------------
# continuity in the tree topology


@dataclass
class ContinuityReport:
    agree_depth: int
    bound: float
    difference: HeightEstimate
    status: str  # "verified", "not refuted" or "refuted"
    depth_used: int

    @property
    def passed(self):
        return self.status == "verified"

    def to_record(self):
        return {
            "agree_depth": self.agree_depth,
            "bound": self.bound,
            "difference": {"mid": self.difference.value, "rad": self.difference.radius},
            "status": self.status,
            "depth": self.depth_used,
        }


def tree_continuity_check(P, Q, agree_depth, kappa=None, extra=1, max_extra=8, max_depth=MAX_DEPTH):
    """Check ``|hhat(P) - hhat(Q)| <= 2 alpha^-n kappa'`` for paths sharing ``n+1`` nodes.

    Heights are evaluated ``extra`` levels deeper, going further (up to
    ``max_extra`` levels and depth ``max_depth``) until the difference
    enclosure sits inside the bound (verified) or outside it (refuted).
    """
    C = P.correspondence
    _require_polarized(C)
    kappa = kappa or kappa_bound(C)
    for k in range(agree_depth + 1):
        if _node_at(P, k) != _node_at(Q, k) and not (_node_at(P, k) is INF and _node_at(Q, k) is INF):
            raise ValidationError(f"paths differ at node {k}")
    bound = 2 * kappa_prime(C, kappa) / C.alpha ** agree_depth
    status = "not refuted"
    last = min(agree_depth + max_extra, max_depth)
    first = min(agree_depth + extra, last)
    for depth in range(first, last + 1):
        hp = canonical_height(P, depth, kappa)
        hq = canonical_height(Q, depth, kappa)
        diff = hp.estimate - hq.estimate
        dlo, dhi = diff.interval()
        hi = max(abs(dlo), abs(dhi))
        lo_abs = Fraction(0) if dlo <= 0 <= dhi else min(abs(dlo), abs(dhi))
        if hi <= bound:
            status = "verified"
            break
        if lo_abs > bound:
            status = "refuted"
            break
    return ContinuityReport(agree_depth, float(bound), diff, status, depth)


# ---------------------------------------------------------------------------
# specialization in families


class FamilyCorrespondence:
    """``F(x, y, t)``; each rational ``t`` gives the correspondence ``F(x, y, t)``."""

    def __init__(self, terms, text=""):
        if isinstance(terms, str):
            text = text or terms
            terms = parse_polynomial(terms)
        self.terms = dict(terms)
        self.text = text

    def specialize(self, t):
        t = Fraction(t)
        out = {}
        for (i, j, k), c in self.terms.items():
            out[(i, j)] = out.get((i, j), 0) + c * t ** k
        out = {key: c for key, c in out.items() if c}
        return validate(BiPoly.from_terms(out), f"{self.text} at t={t}")

    def generic_alpha(self):
        dx = max((i for (i, _, _), c in self.terms.items() if c), default=0)
        dy = max((j for (_, j, _), c in self.terms.items() if c), default=0)
        return Fraction(dx, dy) if dy else None


@dataclass
class SpecializationRow:
    t: Fraction
    h_t: float
    hhat: CanonicalHeightResult
    ratio: float
    sqrt_residual: float = 0.0
    start_height: float = 0.0

    def to_record(self):
        return {
            "t": str(self.t),
            "h_t": self.h_t,
            "hhat": {"mid": self.hhat.value, "rad": self.hhat.radius},
            "ratio": self.ratio,
            "sqrt_residual": self.sqrt_residual,
        }


@dataclass
class SpecializationTable:
    rows: list
    skipped: list = field(default_factory=list)
    c1: float = 0.0
    c2: float = 0.0
    coarse_bound_holds: bool = True

    def ratio_differences(self):
        r = [row.ratio for row in self.rows]
        return [abs(b - a) for a, b in zip(r, r[1:])]

    def to_text(self, sep="\t"):
        head = sep.join(["t", "h(t)", "hhat", "radius", "ratio", "sqrt_residual"])
        lines = [head]
        for row in self.rows:
            lines.append(sep.join([
                str(row.t), f"{row.h_t:.12g}", f"{row.hhat.value:.12g}",
                f"{row.hhat.radius:.3g}", f"{row.ratio:.12g}", f"{row.sqrt_residual:.6g}",
            ]))
        return "\n".join(lines)


def specialization_experiment(family, start, branch, t_values, depth, max_depth=MAX_DEPTH):
    """Canonical heights of the same branch pattern across specializations.

    For each ``t`` the path from ``start`` following ``branch`` on
    ``F(x, y, t)`` is evaluated at ``depth``.  The table reports the ratio
    ``hhat / h(t)`` and a residual ``(hhat - r h(t)) / sqrt(h(t))`` against
    the last ratio ``r``.  A coarse envelope ``|hhat - h(start)| <= c1 h(t) + c2``
    is fitted over the rows.
    """
    if isinstance(family, str):
        family = FamilyCorrespondence(family)
    alpha = family.generic_alpha()
    table = SpecializationTable([])
    for t in t_values:
        t = Fraction(t)
        try:
            C = family.specialize(t)
        except ValidationError as exc:
            table.skipped.append((t, str(exc)))
            continue
        if C.alpha != alpha or C.alpha <= 1:
            table.skipped.append((t, f"alpha changes to {C.alpha}"))
            continue
        pt = start if start is INF else AlgebraicNumber.from_rational(start)
        path = Path(C, pt, branch if not isinstance(branch, (list, tuple)) else ByIndex(tuple(branch)))
        res = canonical_height(path, depth, max_depth=max_depth)
        ht = height(AlgebraicNumber.from_rational(t)).value
        ratio = res.value / ht if ht else math.inf
        table.rows.append(SpecializationRow(t, ht, res, ratio, 0.0, height(pt).value))
    if table.rows:
        last = table.rows[-1].ratio
        for row in table.rows:
            if row.h_t > 0:
                row.sqrt_residual = (row.hhat.value - last * row.h_t) / math.sqrt(row.h_t)
        _fit_coarse_bound(table)
    return table


def _fit_coarse_bound(table):
    xs = [row.h_t for row in table.rows]
    ys = [abs(row.hhat.value - row.start_height) for row in table.rows]
    n = len(xs)
    if n >= 2 and max(xs) > min(xs):
        mx = sum(xs) / n
        my = sum(ys) / n
        c1 = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
        c1 = max(c1, 0.0)
    else:
        c1 = 0.0
    c2 = max(y - c1 * x for x, y in zip(xs, ys))
    c2 = max(c2, 0.0)
    table.c1, table.c2 = c1, c2
    table.coarse_bound_holds = all(y <= c1 * x + c2 + 1e-12 for x, y in zip(xs, ys))
