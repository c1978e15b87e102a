"""Conjugators between multiplication by n and partition-built expanding maps.

Every affine Markov partition whose expanding map g exists is combinatorially
conjugate to plain multiplication by n on the same circle: the conjugacy h
sends the uniform grid refinements of the source circle to the partition's
vertex tables, level by level.  This module evaluates h exactly on grid
points, inverts it on vertices, brackets it everywhere else with nested
enclosures, certifies the vertex law to any depth, and extracts h in closed
form when the partition pairs up.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Optional

from .errors import (
    BudgetExceeded,
    FixedPointsNotVertices,
    NeutralBranch,
    NotAVertex,
    NotMarkov,
    NotPL,
    OddCount,
    ReconstructionMismatch,
)
from .exact import as_fraction, is_nadic, is_smooth, to_nadic
from .maps import PLCircleMap, multiplication_map, orbit, reduce_to_circle
from .markov import (
    AffineMarkovPartition,
    LevelChain,
    build_expanding_map,
)

DEFAULT_MEMO_DEPTH = 16


def default_memo_depth() -> int:
    """Table depth budget: CHAMELEON_MAX_DEPTH when set, else 16."""
    raw = os.environ.get("CHAMELEON_MAX_DEPTH")
    if raw is None:
        return DEFAULT_MEMO_DEPTH
    try:
        return max(0, int(raw))
    except ValueError:
        return DEFAULT_MEMO_DEPTH


@dataclass(frozen=True)
class Enclosure:
    """One bracketing step: the grid interval around the query and the vertex
    interval its image is trapped in."""

    depth: int
    source: tuple[Fraction, Fraction]
    image: tuple[Fraction, Fraction]

    @property
    def width(self) -> Fraction:
        return self.image[1] - self.image[0]


@dataclass(frozen=True)
class ConjugacyCheck:
    """Outcome of verifying the vertex permutation law to a depth."""

    passed: bool
    depth: int
    witness: Optional[tuple[int, int, Fraction, Fraction]]  # depth, index, want, got

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class EqualityCounterexample:
    """A base-n point of the target circle that the conjugator provably does
    not reach from the base-n points of the source."""

    point: Fraction
    source_point: Optional[Fraction]
    kind: str  # "grid-point" | "periodic-point"


@dataclass(frozen=True)
class ImageStatusReport:
    """Whether the conjugator maps base-n points into, and onto, base-n points."""

    base: int
    depth: int
    subset_holds: bool
    counterexample: Optional[EqualityCounterexample]

    @property
    def equality_refuted(self) -> bool:
        return self.counterexample is not None


class Conjugator:
    """The increasing circle map carrying the uniform grid tower onto a
    partition's vertex tower, fixing 0 and intertwining multiplication by n
    with the partition's expanding map."""

    def __init__(self, partition: AffineMarkovPartition,
                 max_depth: Optional[int] = None):
        self.partition = partition
        g, report = build_expanding_map(partition)
        self.map = g
        self.report = report
        self.base = partition.base
        self.circumference = partition.circumference
        self.interval_count = partition.interval_count
        self.max_depth = default_memo_depth() if max_depth is None else max_depth
        self.chain = LevelChain(partition, g)

    def source_vertex(self, index: int, depth: int) -> Fraction:
        """The source-circle grid point paired with vertex (index, depth)."""
        p, n, r = self.interval_count, self.base, self.circumference
        return Fraction(r * index, p * n**depth)

    def evaluate(self, q) -> Fraction:
        """Exact image of a source grid point.

        Refuses with FixedPointsNotVertices when q is not on the source grid
        at any depth, and with BudgetExceeded when it first appears beyond
        the depth budget.
        """
        n, p, r = self.base, self.interval_count, self.circumference
        q = reduce_to_circle(as_fraction(q), r)
        scaled = q * p / r
        if not is_smooth(scaled.denominator, n):
            raise FixedPointsNotVertices(
                f"{q} is never a source grid point for {p} intervals on "
                f"circumference {r}"
            )
        depth = 0
        while (scaled * n**depth).denominator != 1:
            depth += 1
        index = int(scaled * n**depth)
        while depth > 0 and index % n == 0:
            index //= n
            depth -= 1
        if depth > self.max_depth:
            raise BudgetExceeded(
                f"grid point {q} first appears at depth {depth}, budget is "
                f"{self.max_depth}",
                limit=self.max_depth,
            )
        if depth == 0:
            return self.partition.endpoints[index]
        return self.chain.table(depth).values[index]

    def inverse_value(self, x) -> Fraction:
        """The source grid point mapped to a vertex x, searching all depths
        within budget; refuses with NotAVertex otherwise."""
        n, p, r = self.base, self.interval_count, self.circumference
        x = reduce_to_circle(as_fraction(x), r)
        if not is_nadic(x, n):
            raise NotAVertex(f"{x} is not a base-{n} fraction, so not a vertex",
                             point=x)
        for depth in range(self.max_depth + 1):
            idx = self.chain.table(depth).index_of(x)
            if idx is not None:
                return Fraction(r * idx, p * n**depth)
        raise NotAVertex(
            f"{x} is not a vertex at any depth up to {self.max_depth}", point=x
        )

    def enclosure(self, q, width) -> Enclosure:
        """Nested vertex brackets around the image of any circle point,
        refined until the bracket is at most the requested width."""
        n, p, r = self.base, self.interval_count, self.circumference
        q = reduce_to_circle(as_fraction(q), r)
        width = as_fraction(width)
        if width <= 0:
            raise ValueError("width must be positive")
        best = None
        for depth in range(self.max_depth + 1):
            count = p * n**depth
            index = (q * count / r).__floor__()
            table = self.chain.table(depth)
            lo = table.values[index]
            hi = table.values[index + 1] if index + 1 < count else Fraction(r)
            best = Enclosure(
                depth=depth,
                source=(Fraction(r * index, count), Fraction(r * (index + 1), count)),
                image=(lo, hi),
            )
            if best.width <= width:
                return best
        raise BudgetExceeded(
            f"bracket width {best.width} after depth {self.max_depth}, wanted "
            f"{width}",
            limit=self.max_depth,
            partial=best,
        )

    def check(self, depth: int) -> ConjugacyCheck:
        """Verify the vertex permutation law g(T[N]) = T[n*N mod M] for every
        cached table up to the given depth."""
        if depth < 0:
            raise ValueError("check depth must be nonnegative")
        n = self.base
        for t in range(depth + 1):
            table = self.chain.table(t)
            M = len(table)
            for N in range(M):
                want = table.values[(n * N) % M]
                got = self.map.evaluate(table.values[N])
                if got != want:
                    return ConjugacyCheck(False, depth, (t, N, want, got))
        return ConjugacyCheck(True, depth, None)


def equal_pairs(P: AffineMarkovPartition) -> bool:
    """Whether consecutive intervals pair up with equal weights (base 2).

    This is exactly the condition for the conjugator to be piecewise linear
    with finitely many pieces.
    """
    if P.base != 2:
        raise ValueError("the pairing test is specific to base 2")
    p = P.interval_count
    if p == 1:
        return True  # one interval is the whole circle; the conjugator is trivial
    if p % 2 != 0:
        raise OddCount(f"{p} intervals cannot pair up")
    return all(P.lengths[2 * i] == P.lengths[2 * i + 1] for i in range(p // 2))


def extract_pl_h(conj: Conjugator) -> PLCircleMap:
    """The conjugator as an explicit piecewise-linear circle map.

    Only exists when the partition pairs up; then the map interpolating
    vertex i at height i/p is the whole conjugator, which is verified by
    the intertwining identity before returning.
    """
    P = conj.partition
    if not equal_pairs(P):
        bad = next(i for i in range(P.interval_count // 2)
                   if P.lengths[2 * i] != P.lengths[2 * i + 1])
        raise NotPL(
            f"intervals {2 * bad} and {2 * bad + 1} have different weights "
            f"{P.lengths[2 * bad]} and {P.lengths[2 * bad + 1]}",
            witness=(2 * bad, (P.lengths[2 * bad], P.lengths[2 * bad + 1])),
        )
    p, r = P.interval_count, P.circumference
    heights = tuple(Fraction(r * i, p) for i in range(p))
    slopes = tuple(
        (P.interval_length(i)) / Fraction(r, p) for i in range(p)
    )
    h = PLCircleMap(r, 1, heights, slopes, P.endpoints[0])
    model = multiplication_map(P.base, r)
    if h.compose(model) != conj.map.compose(h):
        raise ReconstructionMismatch(
            "pairing map fails to intertwine the expanding map with the model"
        )
    return h


def periodic_points(m: PLCircleMap, power: int) -> tuple[Fraction, ...]:
    """All circle points fixed by the power-fold composite of m.

    Refuses with NeutralBranch when some composite branch is pointwise fixed
    (slope one, shift zero mod the circumference), since the set is then
    infinite.
    """
    if power < 1:
        raise ValueError("power must be at least 1")
    comp = m.iterate(power)
    r = comp.circumference
    found = set()
    for start, end, branch in comp.window_pieces():
        s, c = branch.slope, branch.intercept
        if s == 1:
            if reduce_to_circle(c, r) == 0:
                raise NeutralBranch(
                    f"branch on [{reduce_to_circle(start, r)}, "
                    f"{reduce_to_circle(end, r)}) is pointwise fixed",
                    interval=(reduce_to_circle(start, r), reduce_to_circle(end, r)),
                )
            continue
        # Solve s*x + c = x + k*r for integer k with start <= x < end.
        if s > 1:
            k = -((-(start * (s - 1) + c)) // r)  # ceiling
            while True:
                x = (k * r - c) / (s - 1)
                if x >= end:
                    break
                found.add(reduce_to_circle(x, r))
                k += 1
        else:
            k = (start * (s - 1) + c) // r  # floor; x decreases as k grows
            while True:
                x = (k * r - c) / (s - 1)
                if x >= end:
                    break
                found.add(reduce_to_circle(x, r))
                k -= 1
    return tuple(sorted(found))


def nadic_image_status(conj: Conjugator, depth: int) -> ImageStatusReport:
    """Does the conjugator map base-n points to base-n points, and onto them?

    The subset direction is certified vertex by vertex to the given depth.
    For the reverse direction the report carries a counterexample when one is
    found: either a vertex whose source grid point is not base-n, or a
    base-n periodic point of the expanding map whose source must be outside
    the base-n points (every non-fixed short-period point of plain
    multiplication is).
    """
    n, p, r = conj.base, conj.interval_count, conj.circumference
    subset_holds = True
    counterexample = None
    for t in range(depth + 1):
        table = conj.chain.table(t)
        count = p * n**t
        for N, x in enumerate(table.values):
            if not is_nadic(x, n):
                subset_holds = False
            if counterexample is None:
                q = Fraction(r * N, count)
                if not is_nadic(q, n) and is_nadic(x, n):
                    counterexample = EqualityCounterexample(
                        point=x, source_point=q, kind="grid-point"
                    )
    if counterexample is None:
        fixed = set(periodic_points(conj.map, 1))
        for x in periodic_points(conj.map, 2):
            if x not in fixed and is_nadic(x, n):
                counterexample = EqualityCounterexample(
                    point=x, source_point=None, kind="periodic-point"
                )
                break
    return ImageStatusReport(
        base=n, depth=depth, subset_holds=subset_holds,
        counterexample=counterexample,
    )


def partition_from_expanding_map(g: PLCircleMap,
                                 max_refinements: int = 20) -> AffineMarkovPartition:
    """Recover an affine Markov partition from an expanding map fixing 0.

    Pulls the fixed point back through g until every breakpoint is covered,
    then converts the gaps to integer weights.  The recovered partition is
    verified to rebuild g exactly.
    """
    r, n = g.circumference, g.degree
    if n < 2:
        raise ValueError("need an expanding map of degree at least 2")
    if g.evaluate(Fraction(0)) != 0:
        raise ValueError("the map must fix 0")
    breaks = set(g.breakpoints)
    for b in breaks:
        # A breakpoint lies in some pullback of 0 exactly when its forward
        # orbit lands on 0; otherwise no amount of refinement can cover it.
        if orbit(g, b).cycle != (Fraction(0),):
            raise NotAVertex(
                f"breakpoint {b} never reaches the fixed point, so pullbacks "
                "of 0 cannot place it on a vertex",
                point=b,
            )
    vertices = {Fraction(0)}
    rounds = 0
    while not breaks <= vertices:
        if rounds >= max_refinements:
            raise BudgetExceeded(
                f"breakpoints not covered after {max_refinements} pullbacks",
                limit=max_refinements,
            )
        pulled = set()
        for start, end, branch in g.window_pieces():
            s, c = branch.slope, branch.intercept
            lo, hi = branch(start), branch(end)
            for v in vertices:
                k = -((-(lo - v)) // r)  # smallest k with v + k*r >= lo
                while v + k * r < hi:
                    pulled.add(reduce_to_circle((v + k * r - c) / s, r))
                    k += 1
        vertices = pulled
        rounds += 1
    cuts = sorted(vertices)
    gaps = [b - a for a, b in zip(cuts, cuts[1:])] + [cuts[0] + r - cuts[-1]]
    scale = lcm(*(gap.denominator for gap in gaps))
    weights = [int(gap * scale) for gap in gaps]
    unit = gcd(*weights)
    P = AffineMarkovPartition(n, [w // unit for w in weights])
    rebuilt, _ = build_expanding_map(P)
    if rebuilt != g:
        raise NotMarkov("recovered cut points do not rebuild the map", index=-1)
    return P
