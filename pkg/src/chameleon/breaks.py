"""Break-value calculus along forward orbits of expanding circle maps.

The central quantity is the iterated break sum of a point: the total of the
break values (base-n logs of slope ratios) collected along its forward orbit.
It is finite exactly when the orbit's eventual cycle carries no breaks, it is
constant on grid classes from the stable refinement level onward, and for
base 2 its constancy across the newest vertices decides whether the
partition's conjugator is piecewise linear — in which case the conjugator is
rebuilt here in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    DivergentCycle,
    DivergentFixedPoint,
    ReconstructionMismatch,
    SlopeNotPowerOfTwo,
)
from .exact import as_fraction, is_nadic, power_exponent
from .maps import (
    PLCircleMap,
    break_value,
    classify,
    map_to_dict,
    multiplication_map,
    orbit,
    reduce_to_circle,
)
from .markov import (
    AffineMarkovPartition,
    LevelChain,
    VertexRef,
    reduce_ref,
    stable_level,
    vertex_value,
)


def _preserves_lattice(g: PLCircleMap, n: int) -> bool:
    report = classify(g, n)
    return report.items[2] and report.items[3] and report.items[4]


def iterated_break_sum(g: PLCircleMap, x, max_steps: int = 4096,
                       base: Optional[int] = None) -> int:
    """Total break value collected along the forward orbit of x.

    Defined exactly when every point of the orbit's eventual cycle has zero
    break value; refuses with DivergentFixedPoint or DivergentCycle
    otherwise.  When the map has base-n breaks, power-of-n slopes, and
    preserves the base-n lattice, points outside the lattice never meet a
    break, so their sum is 0 without walking the orbit.
    """
    n = base if base is not None else g.circumference + 1
    x = reduce_to_circle(as_fraction(x), g.circumference)
    if not is_nadic(x, n) and _preserves_lattice(g, n):
        return 0
    result = orbit(g, x, max_steps=max_steps)
    cycle_breaks = tuple(break_value(g, c, n) for c in result.cycle)
    if any(cycle_breaks):
        if len(result.cycle) == 1:
            raise DivergentFixedPoint(
                f"orbit of {x} ends at fixed point {result.cycle[0]} with "
                f"break value {cycle_breaks[0]}",
                point=result.cycle[0], break_value=cycle_breaks[0],
            )
        raise DivergentCycle(
            f"orbit of {x} enters the cycle {result.cycle} with break values "
            f"{cycle_breaks}",
            cycle=result.cycle, break_values=cycle_breaks,
        )
    return sum(break_value(g, p, n) for p in result.prefix)


@dataclass(frozen=True)
class BreakSumTable:
    """Iterated break sums at the newest vertices of the stable level.

    ``entries`` maps each stable-level vertex index not divisible by the base
    to its break sum; together with the reduction law (the sum at any vertex
    of level at least the stable level depends only on its index modulo the
    stable vertex count) this determines the sum at every vertex from the
    stable level onward.  An empty table (stable level 0) means the sum is
    identically zero.
    """

    base: int
    stable_level: int
    entries: tuple[tuple[int, int], ...]

    def _modulus(self) -> int:
        return (self.base - 1) * self.base**self.stable_level

    def value_at(self, ref: VertexRef) -> int:
        reduced = reduce_ref(ref, self.base)
        if self.stable_level == 0:
            return 0
        if reduced.level < self.stable_level:
            raise ValueError(
                f"vertex first appears at level {reduced.level}, below the "
                f"stable level {self.stable_level}; the reduction law does "
                f"not reach it"
            )
        idx = reduced.index % self._modulus()
        for i, v in self.entries:
            if i == idx:
                return v
        raise ValueError(f"no entry for reduced index {idx}")

    def sequence(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.entries)

    @property
    def is_constant(self) -> bool:
        return len(set(self.sequence())) <= 1

    def constant_value(self) -> int:
        seq = set(self.sequence())
        if not seq:
            return 0
        if len(seq) > 1:
            raise ValueError("table is not constant")
        return seq.pop()

    def as_records(self) -> tuple[tuple[int, int, int], ...]:
        return tuple((i, self.stable_level, v) for i, v in self.entries)


def break_sum_table(g: PLCircleMap, P: AffineMarkovPartition,
                    chain: Optional[LevelChain] = None,
                    max_steps: int = 4096) -> BreakSumTable:
    """Break sums at all newest stable-level vertices of the partition.

    Requires the power form (otherwise the stable level does not exist) and
    finite sums at every one of those vertices; divergence refusals
    propagate.
    """
    K = stable_level(P)
    n = P.base
    if K == 0:
        return BreakSumTable(base=n, stable_level=K, entries=())
    if chain is None:
        chain = LevelChain(P, g)
    entries = []
    for i in range((n - 1) * n**K):
        if i % n == 0:
            continue
        x = vertex_value(P, g, VertexRef(i, K), chain)
        entries.append((i, iterated_break_sum(g, x, max_steps=max_steps, base=n)))
    return BreakSumTable(base=n, stable_level=K, entries=tuple(entries))


def coboundary_check(g: PLCircleMap, xs, max_steps: int = 4096) -> bool:
    """Whether the break value equals the step difference of break sums,
    break(x) = sum(x) - sum(g(x)), at every sample point."""
    n = g.circumference + 1
    for x in xs:
        x = reduce_to_circle(as_fraction(x), g.circumference)
        lhs = break_value(g, x, n)
        rhs = (iterated_break_sum(g, x, max_steps=max_steps)
               - iterated_break_sum(g, g.evaluate(x), max_steps=max_steps))
        if lhs != rhs:
            return False
    return True


@dataclass(frozen=True)
class OrbitMergeViolation:
    """Two points whose forward orbits meet carrying different break totals."""

    left: Fraction
    right: Fraction
    meeting_point: Fraction
    left_sum: int
    right_sum: int


def _vertices_up_to(P: AffineMarkovPartition, g: PLCircleMap, level: int,
                    chain: LevelChain) -> list[Fraction]:
    n, m = P.base, P.power_exponent
    if m is not None:
        if level <= m:
            stride = n**(m - level)
            return [P.endpoints[i * stride] for i in range((n - 1) * n**level)]
        return list(chain.table(level - m).values)
    if level == 0:
        return list(P.endpoints)
    return list(chain.table(level).values)


def orbit_merge_violations(g: PLCircleMap, P: AffineMarkovPartition,
                           level_bound: int,
                           max_steps: int = 4096) -> tuple[OrbitMergeViolation, ...]:
    """All vertex pairs up to a level whose orbits meet with unequal break
    totals accumulated up to the first common point.

    An empty result certifies the merge identity on the tested range only;
    whether a violation is reported at the first meeting or any later one is
    immaterial, since after the merge both orbits collect identical terms.
    """
    n = P.base
    chain = LevelChain(P, g)
    points = _vertices_up_to(P, g, level_bound, chain)
    walks = {}
    for x in points:
        res = orbit(g, x, max_steps=max_steps)
        walks[x] = list(res.prefix) + list(res.cycle)
    violations = []
    for a_idx in range(len(points)):
        for b_idx in range(a_idx + 1, len(points)):
            x, y = points[a_idx], points[b_idx]
            wx, wy = walks[x], walks[y]
            pos_y = {pt: j for j, pt in reversed(list(enumerate(wy)))}
            meet = None
            for i, pt in enumerate(wx):
                if pt in pos_y:
                    j = pos_y[pt]
                    if meet is None or i + j < meet[0] + meet[1]:
                        meet = (i, j, pt)
            if meet is None:
                continue
            i, j, pt = meet
            left_sum = sum(break_value(g, q, n) for q in wx[:i])
            right_sum = sum(break_value(g, q, n) for q in wy[:j])
            if left_sum != right_sum:
                violations.append(OrbitMergeViolation(
                    left=x, right=y, meeting_point=pt,
                    left_sum=left_sum, right_sum=right_sum,
                ))
    return tuple(violations)


@dataclass(frozen=True)
class BreakAssignment:
    """Finitely supported integer break budget on circle points."""

    entries: tuple[tuple[Fraction, int], ...]

    @property
    def total(self) -> int:
        return sum(v for _, v in self.entries)

    def value_at(self, x) -> int:
        x = as_fraction(x)
        for pt, v in self.entries:
            if pt == x:
                return v
        return 0


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of the base-2 piecewise-linearity decision.

    A positive verdict carries the rebuilt conjugator and its initial slope;
    a negative one carries two stable-level vertices whose break sums differ.
    """

    is_pl: bool
    stable_level: int
    table: BreakSumTable
    witness: Optional[tuple[VertexRef, VertexRef]]
    witness_values: Optional[tuple[int, int]]
    conjugator: Optional[PLCircleMap]
    initial_slope: Optional[Fraction]
    assignment: Optional[BreakAssignment]

    def __bool__(self) -> bool:
        return self.is_pl

    def as_dict(self) -> dict:
        if self.is_pl:
            return {
                "outcome": "pl",
                "stable_level": self.stable_level,
                "initial_slope": str(self.initial_slope),
                "conjugator": map_to_dict(self.conjugator),
                "assignment": [[str(x), v] for x, v in self.assignment.entries],
            }
        return {
            "outcome": "not-pl",
            "stable_level": self.stable_level,
            "witness_indices": [self.witness[0].index, self.witness[1].index],
            "witness_values": list(self.witness_values),
        }


def pl_criterion(g: PLCircleMap, P: AffineMarkovPartition,
                 max_steps: int = 4096) -> CriterionVerdict:
    """Decide whether the partition's conjugator is piecewise linear (base 2).

    The conjugator is PL exactly when the break sum is constant across the
    newest stable-level vertices.  On success the conjugator is rebuilt from
    the sums: the defect of each shallow vertex prescribes a break at the
    height of that vertex, the initial slope is solved exactly from the
    requirement that the pieces close up around the circle, and the rebuilt
    map is verified to intertwine doubling with g before it is returned.
    """
    if P.base != 2:
        raise ValueError("the piecewise-linearity decision is specific to base 2")
    chain = LevelChain(P, g)
    table = break_sum_table(g, P, chain=chain, max_steps=max_steps)
    K = table.stable_level
    if not table.is_constant:
        seq = table.entries
        first_idx, first_val = seq[0]
        other_idx, other_val = next((i, v) for i, v in seq if v != first_val)
        return CriterionVerdict(
            is_pl=False, stable_level=K, table=table,
            witness=(VertexRef(first_idx, K), VertexRef(other_idx, K)),
            witness_values=(first_val, other_val),
            conjugator=None, initial_slope=None, assignment=None,
        )
    common = table.constant_value()
    assignment_entries = []
    for i in range(0, 2**K, 2):
        x = vertex_value(P, g, VertexRef(i, K), chain)
        b = common - iterated_break_sum(g, x, max_steps=max_steps, base=2)
        if b != 0:
            assignment_entries.append((x, b))
    assignment = BreakAssignment(entries=tuple(sorted(assignment_entries)))
    if assignment.total != 0:
        raise ReconstructionMismatch(
            f"break budget sums to {assignment.total}, expected 0"
        )
    heights = [(x, b) for x, b in assignment.entries if x != 0]
    # Segment j runs between consecutive heights (0 and 1 padding the ends)
    # and carries slope m * 2^(cumulative break above it).
    cuts = [Fraction(0)] + [x for x, _ in heights] + [Fraction(1)]
    cumulative = [0]
    for _, b in heights:
        cumulative.append(cumulative[-1] + b)
    m = sum((cuts[j + 1] - cuts[j]) * Fraction(2)**(-cumulative[j])
            for j in range(len(cuts) - 1))
    if power_exponent(m, 2) is None:
        raise SlopeNotPowerOfTwo(f"initial slope solves to {m}", slope=m)
    boundaries = [Fraction(0)]
    slopes = []
    for j in range(len(cuts) - 1):
        s = m * Fraction(2)**cumulative[j]
        slopes.append(s)
        if j < len(cuts) - 2:
            boundaries.append(boundaries[-1] + (cuts[j + 1] - cuts[j]) / s)
    rebuilt = PLCircleMap(1, 1, tuple(boundaries), tuple(slopes), Fraction(0))
    model = multiplication_map(2)
    if rebuilt.compose(model) != g.compose(rebuilt):
        raise ReconstructionMismatch(
            "rebuilt conjugator fails to intertwine doubling with the map"
        )
    return CriterionVerdict(
        is_pl=True, stable_level=K, table=table, witness=None,
        witness_values=None, conjugator=rebuilt, initial_slope=m,
        assignment=assignment,
    )


@dataclass(frozen=True)
class Discrepancy:
    """Offset at which two vertex neighborhoods disagree in break sums."""

    offset: int
    point: Fraction
    left_value: int
    right_value: int


def find_break_sum_discrepancy(g: PLCircleMap, P: AffineMarkovPartition,
                               left: VertexRef, right: VertexRef,
                               pad: int = 1,
                               table: Optional[BreakSumTable] = None,
                               chain: Optional[LevelChain] = None
                               ) -> Optional[Discrepancy]:
    """Search the stable-level offsets for a break-sum disagreement between
    the deep vertices just after ``left`` and those just after ``right``.

    Both anchors must already be at their natural level, at or beyond the
    stable level; ``pad`` pushes the right-hand comparison deeper.  Returns
    the smallest offset where the two sums differ, with the left-hand vertex
    value as evidence, or None when every offset agrees (in particular
    whenever the table is constant).
    """
    if P.base != 2:
        raise ValueError("the discrepancy search is specific to base 2")
    if pad < 1:
        raise ValueError("pad must be at least 1")
    if chain is None:
        chain = LevelChain(P, g)
    if table is None:
        table = break_sum_table(g, P, chain=chain)
    K = table.stable_level
    left, right = reduce_ref(left, 2), reduce_ref(right, 2)
    for ref in (left, right):
        if ref.level < K:
            raise ValueError(
                f"anchor first appears at level {ref.level}, below the stable "
                f"level {K}"
            )
    span = 1 << K
    for i in range(1, span):
        left_ref = VertexRef(left.index * span + i, left.level + K)
        right_ref = VertexRef(right.index * (span << pad) + i,
                              right.level + K + pad)
        va = table.value_at(left_ref)
        vb = table.value_at(right_ref)
        if va != vb:
            return Discrepancy(
                offset=i,
                point=vertex_value(P, g, left_ref, chain),
                left_value=va, right_value=vb,
            )
    return None
