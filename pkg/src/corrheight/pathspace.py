"""Finite path prefixes, branch strategies and bounded tree searches.

A path ``a0 -> a1 -> ...`` is described by a start point and a strategy that
picks one successor at every step.  :class:`Path` materialises nodes lazily
and shares them between shifted copies; :class:`PathPrefix` is the finite,
certified piece actually computed.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import flint

from .algebraic import INF, AlgebraicNumber, equals, height
from .correspondence import successors
from .errors import BudgetExceeded, ValidationError
from .rng import weighted_index


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class ByIndex:
    """Branch ``indices[k]`` at absolute step ``k``.

    Past the end of the list the indices are cycled (``mode="cycle"``) or
    padded with zeros (``mode="pad"``).  An index larger than the number of
    distinct successors wraps around modulo that number.
    """

    indices: tuple
    mode: str = "cycle"

    def __post_init__(self):
        if not self.indices:
            object.__setattr__(self, "indices", (0,))
        if self.mode not in ("cycle", "pad"):
            raise ValueError("mode must be 'cycle' or 'pad'")

    def index_at(self, step):
        if step < len(self.indices):
            return self.indices[step]
        if self.mode == "pad":
            return 0
        return self.indices[step % len(self.indices)]

    def choose(self, succ, step, d_y):
        return self.index_at(step) % len(succ)

    def describe(self):
        return {"kind": "index", "indices": list(self.indices), "mode": self.mode}


@dataclass(frozen=True)
class RandomWeighted:
    """Draw each successor with probability multiplicity / d_y.

    The draw at absolute step ``k`` is keyed by ``key + (k,)``.
    """

    key: tuple

    def __post_init__(self):
        if not isinstance(self.key, tuple):
            object.__setattr__(self, "key", (int(self.key),))

    def choose(self, succ, step, d_y):
        return weighted_index(self.key + (step,), [m for _, m in succ])

    def describe(self):
        return {"kind": "seed", "key": list(self.key)}


@dataclass(frozen=True)
class All:
    """Every successor; only meaningful for :func:`extend`."""

    def describe(self):
        return {"kind": "all"}


# ---------------------------------------------------------------------------
# prefixes


@dataclass(frozen=True)
class PathPrefix:
    """Certified nodes ``a_0 .. a_n`` with edge multiplicities.

    ``offset`` counts how many times the prefix has been shifted relative to
    the path its strategy indices refer to.
    """

    correspondence: object
    nodes: tuple
    multiplicities: tuple = ()
    offset: int = 0

    def __post_init__(self):
        if not self.nodes:
            raise ValidationError("a path prefix needs at least one node")
        if len(self.multiplicities) != len(self.nodes) - 1:
            raise ValidationError("one multiplicity per edge is required")

    @property
    def length(self):
        return len(self.nodes) - 1

    @property
    def start(self):
        """Initial vertex of the path."""
        return self.nodes[0]

    @property
    def first_edge(self):
        """Initial edge ``(a_0, a_1)``."""
        if len(self.nodes) < 2:
            raise ValidationError("prefix has no edge")
        return (self.nodes[0], self.nodes[1])

    @property
    def weight(self):
        """Product of edge multiplicities (the path's count in the tree)."""
        w = 1
        for m in self.multiplicities:
            w *= m
        return w

    def probability(self):
        return Fraction(self.weight, self.correspondence.d_y ** self.length)

    def shift(self):
        """Drop the first node."""
        if len(self.nodes) < 2:
            raise ValidationError("cannot shift a single-node prefix")
        return PathPrefix(self.correspondence, self.nodes[1:], self.multiplicities[1:],
                          self.offset + 1)

    def render(self):
        return [n.render() for n in self.nodes]

    def to_record(self):
        return {
            "correspondence": self.correspondence.text,
            "nodes": self.render(),
            "multiplicities": list(self.multiplicities),
        }

    def extend(self, strategy, steps=1, budget=None):
        return extend(self, strategy, steps, budget)


def extend(prefix, strategy, steps=1, budget=None):
    """Append ``steps`` certified successors.

    ``All`` returns every prefix of the next tree level (one per distinct
    successor sequence, weights given by the multiplicities); other
    strategies return a single prefix in a one-element list.
    """
    C = prefix.correspondence
    if isinstance(strategy, All):
        level = [prefix]
        for _ in range(steps):
            nxt = []
            for pre in level:
                for b, m in successors(C, pre.nodes[-1], budget):
                    nxt.append(PathPrefix(C, pre.nodes + (b,), pre.multiplicities + (m,), pre.offset))
            level = nxt
        return level
    nodes = list(prefix.nodes)
    mults = list(prefix.multiplicities)
    for _ in range(steps):
        succ = successors(C, nodes[-1], budget)
        step = prefix.offset + len(nodes) - 1
        b, m = succ[strategy.choose(succ, step, C.d_y)]
        nodes.append(b)
        mults.append(m)
    return [PathPrefix(C, tuple(nodes), tuple(mults), prefix.offset)]


class Path:
    """An infinite path given by a start point and a strategy.

    Nodes are computed on demand and shared with shifted copies.
    """

    def __init__(self, correspondence, start, strategy, offset=0, _store=None):
        if isinstance(strategy, All):
            raise ValidationError("a single path needs an index list or a seed")
        self.correspondence = correspondence
        self.strategy = strategy
        self.offset = offset
        self._store = _store if _store is not None else {"nodes": [start], "mults": []}

    @property
    def start(self):
        return self.node(0)

    def node(self, k, budget=None):
        self._ensure(self.offset + k, budget)
        return self._store["nodes"][self.offset + k]

    def _ensure(self, absolute, budget=None):
        nodes = self._store["nodes"]
        mults = self._store["mults"]
        C = self.correspondence
        while len(nodes) <= absolute:
            succ = successors(C, nodes[-1], budget)
            step = len(nodes) - 1
            b, m = succ[self.strategy.choose(succ, step, C.d_y)]
            nodes.append(b)
            mults.append(m)

    def prefix(self, n, budget=None):
        self._ensure(self.offset + n, budget)
        lo = self.offset
        return PathPrefix(self.correspondence, tuple(self._store["nodes"][lo:lo + n + 1]),
                          tuple(self._store["mults"][lo:lo + n]), self.offset)

    def shift(self, times=1):
        return Path(self.correspondence, None, self.strategy, self.offset + times, self._store)

    def describe(self):
        return {"start": self._store["nodes"][0].render(), "offset": self.offset,
                "branch": self.strategy.describe()}


def sample_path(correspondence, a, n, seed):
    """Length-``n`` prefix with independent multiplicity-weighted branch draws."""
    key = seed if isinstance(seed, tuple) else (int(seed),)
    return Path(correspondence, a, RandomWeighted(key)).prefix(n)


# ---------------------------------------------------------------------------
# predicates


def is_repetitive(prefix):
    """First revisit ``(n, m)``: the least ``m`` whose node equals an earlier node ``n``."""
    seen = {}
    for m, node in enumerate(prefix.nodes):
        key = _node_key(node)
        if key in seen:
            return (seen[key], m)
        seen[key] = m
    return None


def _node_key(node):
    return ("inf",) if node is INF else (node.ints, node.index)


def is_periodic(prefix):
    """``(n, m)`` if the prefix repeats with period ``m - n`` from ``n`` to its end.

    At least one full period must be confirmed after ``m`` (so
    ``[0, -1, 0]`` alone does not qualify).  This certifies a property of
    the prefix only, not of any infinite extension.
    """
    nodes = prefix.nodes
    last = len(nodes) - 1
    for n in range(last + 1):
        for m in range(n + 1, last + 1):
            period = m - n
            if m + period > last:
                break
            if all(equals(nodes[n + k], nodes[m + k]) for k in range(last - m + 1)):
                return (n, m)
    return None


# ---------------------------------------------------------------------------
# searches


def rationals_up_to_height(bound):
    """All finite rationals ``p/q`` with ``log max(|p|, q) <= bound``, by increasing height."""
    N = height_bound_to_int(bound)
    out = [Fraction(0)]
    for m in range(1, N + 1):
        batch = []
        for q in range(1, m + 1):
            if math.gcd(m, q) == 1:
                batch.append(Fraction(m, q))
                if q != m:
                    batch.append(Fraction(q, m))
        batch = sorted(set(batch))
        for f in batch:
            out.extend([-f, f])
    return out


def height_bound_to_int(bound):
    """Largest integer ``N`` with ``log N <= bound`` (tolerant of rounding in ``log N``)."""
    N = int(math.floor(math.exp(bound)))
    while math.log(N + 1) <= bound + 1e-12:
        N += 1
    while N > 1 and math.log(N) > bound + 1e-12:
        N -= 1
    return max(N, 1)


@lru_cache(maxsize=65536)
def _rational_successors(C, r):
    """Rational (and infinite) successors of a rational or infinite point."""
    if r is INF:
        top = C.F.coeff_in_x(C.d_x)
        poly, inf_mult = top, C.d_y - top.degree
    else:
        poly = C.F.eval_x(r)
        inf_mult = C.d_y - poly.degree
    out = []
    if poly.degree >= 1:
        content, ints = poly.primitive()
        _, facs = flint.fmpz_poly(list(ints)).factor()
        for f, m in facs:
            if f.degree() == 1:
                c0, c1 = int(f[0]), int(f[1])
                out.append((Fraction(-c0, c1), int(m)))
    out.sort()
    if inf_mult:
        out.append((INF, inf_mult))
    return out


@dataclass
class RationalSearchResult:
    starts: list
    witnesses: dict = field(default_factory=dict)
    truncated: bool = False


def rational_path_search(C, height_bound, depth, witness_budget=16):
    """Rational starts of height at most ``height_bound`` with an all-rational path of length ``depth``.

    The point at infinity may occur as a later node but is not itself
    offered as a start.  For each start up to ``witness_budget`` witness
    prefixes are returned.
    """
    memo = {}

    def alive(r, remaining):
        if remaining == 0:
            return True
        key = (r, remaining)
        if key not in memo:
            memo[key] = any(alive(s, remaining - 1) for s, _ in _rational_successors(C, r))
        return memo[key]

    def witnesses(r, remaining, acc, out):
        if len(out) >= witness_budget:
            return True
        if remaining == 0:
            out.append(acc)
            return False
        for s, m in _rational_successors(C, r):
            if alive(s, remaining - 1):
                if witnesses(s, remaining - 1, acc + [(s, m)], out):
                    return True
        return False

    result = RationalSearchResult([])
    for r in rationals_up_to_height(height_bound):
        if alive(r, depth):
            result.starts.append(r)
            found = []
            if witnesses(r, depth, [], found):
                result.truncated = True
            result.witnesses[r] = [_prefix_from_rationals(C, r, w) for w in found]
    return result


def _to_point(r):
    return INF if r is INF else AlgebraicNumber.from_rational(r)


def _prefix_from_rationals(C, start, steps):
    nodes = (_to_point(start),) + tuple(_to_point(s) for s, _ in steps)
    return PathPrefix(C, nodes, tuple(m for _, m in steps))


@dataclass
class RepetitiveSearchResult:
    points: list
    witnesses: dict = field(default_factory=dict)
    truncated: bool = False
    notes: list = field(default_factory=list)


def repetitive_start_search(C, height_bound, depth, degree_bound=8, node_budget=20000, budget=None):
    """Points of height at most ``height_bound`` with a repetitive prefix within ``depth`` steps.

    Rational starts are explored breadth first.  Nodes of degree above
    ``degree_bound`` are not expanded (reported through ``truncated``).
    Besides the rational starts, every node of degree at most
    ``degree_bound`` lying before the first revisit on a witness path is
    reported, since the remainder of that path is repetitive too.
    """
    result = RepetitiveSearchResult([])
    found = {}
    visited = 0
    for r in rationals_up_to_height(height_bound):
        start = AlgebraicNumber.from_rational(r)
        queue = deque([PathPrefix(C, (start,), ())])
        while queue:
            pre = queue.popleft()
            rep = is_repetitive(pre)
            if rep is not None:
                n, _m = rep
                for node in pre.nodes[: n + 1]:
                    key = _node_key(node)
                    if key in found:
                        continue
                    if node is not INF and node.degree > degree_bound:
                        continue
                    if height(node).lower > height_bound:
                        continue
                    found[key] = node
                    result.witnesses[key] = pre
                continue
            if pre.length >= depth:
                continue
            last = pre.nodes[-1]
            if last is not INF and last.degree > degree_bound:
                result.truncated = True
                continue
            visited += 1
            if visited > node_budget:
                result.truncated = True
                result.notes.append("node budget exhausted")
                result.points = _ordered(found)
                raise BudgetExceeded("node budget exhausted", partial=result)
            for b, m in successors(C, last, budget):
                queue.append(PathPrefix(C, pre.nodes + (b,), pre.multiplicities + (m,)))
    result.points = _ordered(found)
    return result


def _ordered(found):
    pts = list(found.values())
    pts.sort(key=lambda p: (p is INF, p.degree if p is not INF else 0,
                            p.sort_key() if p is not INF else ()))
    return pts
