"""Affine Markov partitions for degree-n expanding circle maps.

A partition is a cyclic sequence of positive integer weights on the
circumference-(n-1) circle.  When every induced branch slope is a power of n
and every cut point is a base-n fraction, the partition builds an expanding
map conjugate to multiplication by n, and the cut points refine level by
level: applying ``derive`` to a vertex table inserts the n-1 extra preimages
inside each interval, and the map permutes each level's vertices by index
multiplication.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    ClassMismatch,
    EndpointNotNAdic,
    NotMarkov,
    NotPowerForm,
    ParseError,
    SlopeNotPowerOfN,
)
from .exact import is_nadic, power_exponent, trailing_zeros
from .maps import PLCircleMap


class AffineMarkovPartition:
    """Cyclic integer weights cutting the circumference-(base-1) circle."""

    __slots__ = ("base", "lengths", "interval_count", "total_weight", "unit",
                 "circumference", "endpoints", "slopes", "power_exponent")

    def __init__(self, base: int, lengths) -> None:
        if isinstance(base, bool) or not isinstance(base, int) or base < 2:
            raise ValueError("base must be an integer >= 2")
        lengths = tuple(lengths)
        if any(isinstance(v, bool) or not isinstance(v, int) for v in lengths):
            raise ValueError("interval weights must be plain integers")
        if len(lengths) < base - 1:
            raise ValueError(
                f"need at least base-1={base - 1} intervals, got {len(lengths)}"
            )
        if any(v <= 0 for v in lengths):
            raise ValueError("interval weights must be positive integers")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "lengths", lengths)
        p = len(lengths)
        total = sum(lengths)
        unit = Fraction(base - 1, total)
        object.__setattr__(self, "interval_count", p)
        object.__setattr__(self, "total_weight", total)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "circumference", base - 1)
        acc, cuts = 0, []
        for v in lengths:
            cuts.append(unit * acc)
            acc += v
        object.__setattr__(self, "endpoints", tuple(cuts))
        slopes = []
        for i in range(p):
            block = sum(lengths[(base * i + l) % p] for l in range(base))
            slopes.append(Fraction(block, lengths[i]))
        object.__setattr__(self, "slopes", tuple(slopes))
        # power form: p = (base-1) * base**m
        m, q = 0, p
        if p % (base - 1) == 0:
            q = p // (base - 1)
            while q % base == 0:
                q //= base
                m += 1
        object.__setattr__(self, "power_exponent", m if q == 1 else None)

    def __setattr__(self, name, value):  # pragma: no cover - frozen
        raise AttributeError("partition objects are immutable")

    @property
    def is_power_form(self) -> bool:
        return self.power_exponent is not None

    def interval_length(self, i: int) -> Fraction:
        return self.unit * self.lengths[i % self.interval_count]

    def break_indices(self) -> tuple[int, ...]:
        p = self.interval_count
        return tuple(i for i in range(p) if self.slopes[i] != self.slopes[i - 1])

    def to_dict(self) -> dict:
        return {"base": self.base, "lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, data: dict) -> "AffineMarkovPartition":
        if not isinstance(data, dict):
            raise ParseError("partition document must be a JSON object")
        try:
            base = data["base"]
            lengths = data["lengths"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"partition document missing field: {exc}") from exc
        if not isinstance(base, int) or isinstance(base, bool):
            raise ParseError("'base' must be an integer")
        if (not isinstance(lengths, list) or not lengths
                or any(not isinstance(v, int) or isinstance(v, bool) or v <= 0
                       for v in lengths)):
            raise ParseError("'lengths' must be a nonempty list of positive integers")
        try:
            return cls(base, lengths)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "AffineMarkovPartition":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def _key(self):
        return (self.base, self.lengths)

    def __eq__(self, other):
        return isinstance(other, AffineMarkovPartition) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"AffineMarkovPartition(base={self.base}, lengths={list(self.lengths)})"


@dataclass(frozen=True)
class BuildReport:
    """Everything the expanding-map construction established on the way."""

    base: int
    interval_count: int
    unit: Fraction
    endpoints: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]
    slope_exponents: tuple[int, ...]
    break_values: tuple[tuple[Fraction, int], ...]
    degree: int
    is_power_form: bool
    power_exponent: Optional[int]


def build_expanding_map(P: AffineMarkovPartition) -> tuple[PLCircleMap, BuildReport]:
    """The degree-n expanding map whose branch over interval i stretches it
    across the next base-many intervals, with a report of its invariants.

    Refuses when a branch slope is not a power of the base or a cut point is
    not a base-n fraction — in either case no base-n map realizes the
    partition.
    """
    n, p = P.base, P.interval_count
    exponents = []
    for i, s in enumerate(P.slopes):
        e = power_exponent(s, n)
        if e is None:
            raise SlopeNotPowerOfN(
                f"interval {i} has slope {s}, not a power of {n}",
                index=i, slope=s,
            )
        exponents.append(e)
    for i, x in enumerate(P.endpoints):
        if not is_nadic(x, n):
            raise EndpointNotNAdic(
                f"cut point {i} at {x} is not a base-{n} fraction",
                index=i, value=x,
            )
    g = PLCircleMap(P.circumference, n, P.endpoints, P.slopes, Fraction(0))
    breaks = []
    for i in P.break_indices():
        e = exponents[i] - exponents[(i - 1) % p]
        breaks.append((P.endpoints[i], e))
    report = BuildReport(
        base=n,
        interval_count=p,
        unit=P.unit,
        endpoints=P.endpoints,
        slopes=P.slopes,
        slope_exponents=tuple(exponents),
        break_values=tuple(breaks),
        degree=n,
        is_power_form=P.is_power_form,
        power_exponent=P.power_exponent,
    )
    return g, report


@dataclass(frozen=True)
class PartitionLevelTable:
    """Sorted vertex values of one refinement depth, anchored at 0."""

    level: int
    values: tuple[Fraction, ...]
    circumference: int

    def __post_init__(self):
        if not self.values or self.values[0] != 0:
            raise ValueError("a level table must start at 0")

    def __len__(self) -> int:
        return len(self.values)

    def interval_length(self, i: int) -> Fraction:
        vals, m = self.values, len(self.values)
        i %= m
        if i == m - 1:
            return self.circumference + vals[0] - vals[i]
        return vals[i + 1] - vals[i]

    def index_of(self, x: Fraction) -> Optional[int]:
        from bisect import bisect_left

        i = bisect_left(self.values, x)
        if i < len(self.values) and self.values[i] == x:
            return i
        return None


def standard_level_table(n: int, k: int) -> PartitionLevelTable:
    """Vertices i/n^k of the uniform base-n grid on the circle [0, n-1)."""
    if n < 2 or k < 0:
        raise ValueError("need base >= 2 and level >= 0")
    count = (n - 1) * n**k
    return PartitionLevelTable(
        level=k,
        values=tuple(Fraction((n - 1) * i, count) for i in range(count)),
        circumference=n - 1,
    )


def derive(table: PartitionLevelTable, g: PLCircleMap) -> PartitionLevelTable:
    """One refinement: insert the n-1 extra g-preimages inside each interval.

    Verifies the vertex permutation law g(T[N]) = T[n*N mod M] first and
    refuses with the failing index when the table is not g-compatible; also
    requires every breakpoint of g to be a table vertex already, so g is
    affine on each interval.
    """
    n = g.degree
    vals = table.values
    M = len(vals)
    r = table.circumference
    if g.circumference != r:
        raise ValueError("table and map live on different circles")
    value_set = set(vals)
    for b in g.breakpoints:
        if b not in value_set:
            raise NotMarkov(f"map breaks at {b}, which is not a level-{table.level} vertex",
                            index=-1)
    for N in range(M):
        if g.evaluate(vals[N]) != vals[(n * N) % M]:
            raise NotMarkov(
                f"vertex {N} maps to {g.evaluate(vals[N])}, expected vertex {(n * N) % M}",
                index=N,
            )
    new_values = []
    for N in range(M):
        new_values.append(vals[N])
        length = table.interval_length(N)
        block = [table.interval_length((n * N + l) % M) for l in range(n)]
        span = sum(block)
        acc = Fraction(0)
        for l in range(n - 1):
            acc += block[l]
            new_values.append(vals[N] + length * acc / span)
    return PartitionLevelTable(level=table.level + 1, values=tuple(new_values),
                               circumference=r)


class LevelChain:
    """Lazily derived tower of vertex tables for one partition's map."""

    def __init__(self, partition: AffineMarkovPartition,
                 g: Optional[PLCircleMap] = None):
        self.partition = partition
        if g is None:
            g, _ = build_expanding_map(partition)
        self.map = g
        base_table = PartitionLevelTable(
            level=0, values=partition.endpoints,
            circumference=partition.circumference,
        )
        self._tables = [base_table]
        self._lock = threading.Lock()

    def table(self, depth: int) -> PartitionLevelTable:
        if depth < 0:
            raise ValueError("refinement depth must be nonnegative")
        with self._lock:
            while len(self._tables) <= depth:
                self._tables.append(derive(self._tables[-1], self.map))
            return self._tables[depth]


@dataclass(frozen=True)
class VertexRef:
    """A vertex named by (index, level); index i at level k is the point
    x(i, k), with the alias x(i, k) = x(n*i, k+1)."""

    index: int
    level: int

    def __post_init__(self):
        if self.index < 0 or self.level < 0:
            raise ValueError("vertex references are nonnegative")


def reduce_ref(ref: VertexRef, n: int) -> VertexRef:
    """Canonical form: divide out n from the index while the level allows."""
    i, k = ref.index, ref.level
    while k > 0 and i % n == 0:
        i //= n
        k -= 1
    if i == ref.index and k == ref.level:
        return ref
    return VertexRef(i, k)


def natural_level(ref: VertexRef, n: int) -> int:
    """The first level at which this vertex appears."""
    return reduce_ref(ref, n).level


def fixed_point_class(ref: VertexRef, n: int) -> int:
    """Residue class mod n-1 of the canonical index; vertices in the same
    class share a grid orbit."""
    if n == 2:
        return 0
    return reduce_ref(ref, n).index % (n - 1)


def vertex_value(P: AffineMarkovPartition, g: PLCircleMap, ref: VertexRef,
                 chain: Optional[LevelChain] = None) -> Fraction:
    """The circle point a vertex reference names.

    For power-form partitions, level k indexes the (base-1)*n^k vertices of
    the k-th refinement of the base grid: levels up to the power exponent
    stride through the cut points, deeper levels read derived tables.  For
    other partitions, level counts derivations from the cut points directly.
    """
    n = P.base
    ref = reduce_ref(ref, n)
    i, k = ref.index, ref.level
    m = P.power_exponent
    if m is not None:
        if i >= (n - 1) * n**k:
            raise ValueError(f"index {i} out of range for level {k}")
        if k <= m:
            return P.endpoints[i * n**(m - k)]
        depth = k - m
    else:
        if i >= P.interval_count * n**k:
            raise ValueError(f"index {i} out of range for depth {k}")
        if k == 0:
            return P.endpoints[i]
        depth = k
    if chain is None:
        chain = LevelChain(P, g)
    return chain.table(depth).values[i]


def interval_length_at(P: AffineMarkovPartition, g: PLCircleMap, level: int,
                       index: int, chain: Optional[LevelChain] = None) -> Fraction:
    """Length of the level interval starting at the given vertex index."""
    n = P.base
    m = P.power_exponent
    if m is not None:
        count = (n - 1) * n**level
        index %= count
        if level <= m:
            stride = n**(m - level)
            lo = P.endpoints[index * stride]
            if index == count - 1:
                return P.circumference - lo
            return P.endpoints[(index + 1) * stride] - lo
        depth = level - m
    else:
        if level == 0:
            return P.interval_length(index)
        depth = level
    if chain is None:
        chain = LevelChain(P, g)
    return chain.table(depth).interval_length(index)


def stable_level(P: AffineMarkovPartition) -> int:
    """The refinement level from which the vertex pattern of breaks repeats.

    Only defined for power-form partitions; it is the smallest K such that
    every break index is divisible by n^(m-K).
    """
    m = P.power_exponent
    if m is None:
        raise NotPowerForm(
            f"{P.interval_count} intervals is not (base-1)*base^m for base {P.base}"
        )
    n = P.base
    best = 0
    for i in P.break_indices():
        if i == 0:
            continue
        z = min(trailing_zeros(i, n), m)
        best = max(best, m - z)
    return best


def natural_slope(P: AffineMarkovPartition, g: PLCircleMap, a: VertexRef,
                  c: VertexRef, chain: Optional[LevelChain] = None) -> Fraction:
    """Ratio of stable-level interval lengths at two vertices of one grid
    class — the derivative the partition's conjugator must have if it moves
    vertex a to vertex c."""
    n = P.base
    K = stable_level(P)
    a, c = reduce_ref(a, n), reduce_ref(c, n)
    for ref in (a, c):
        if ref.index >= (n - 1) * n**ref.level:
            raise ValueError(f"index {ref.index} out of range for level {ref.level}")
    ca, cc = fixed_point_class(a, n), fixed_point_class(c, n)
    if ca != cc:
        raise ClassMismatch(
            f"vertices lie in different grid classes {ca} and {cc} mod {n - 1}",
            left=ca, right=cc,
        )
    if chain is None:
        chain = LevelChain(P, g)
    la = interval_length_at(P, g, a.level + K, a.index * n**K, chain)
    lc = interval_length_at(P, g, c.level + K, c.index * n**K, chain)
    return lc / la
