"""Break-value calculus: iterated sums, stable tables, identities, and the
base-2 piecewise-linearity decision."""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from chameleon.breaks import (
    BreakSumTable,
    break_sum_table,
    coboundary_check,
    find_break_sum_discrepancy,
    iterated_break_sum,
    orbit_merge_violations,
    pl_criterion,
)
from chameleon.errors import (
    BudgetExceeded,
    DivergentCycle,
    DivergentFixedPoint,
    NotPowerForm,
)
from chameleon.exact import as_fraction
from chameleon.golden import load_example
from chameleon.conjugacy import periodic_points
from chameleon.maps import break_value, multiplication_map, orbit
from chameleon.markov import (
    AffineMarkovPartition,
    LevelChain,
    VertexRef,
    build_expanding_map,
    reduce_ref,
    stable_level,
    vertex_value,
)

F = Fraction


def vertices_at_level(partition, g, level):
    """Every distinct vertex reference value at the given refinement level."""
    n = partition.base
    if partition.power_exponent is not None:
        span = (n - 1) * n**level
    else:
        span = partition.interval_count * n**level
    chain = LevelChain(partition, g)
    return [vertex_value(partition, g, VertexRef(i, level), chain)
            for i in range(span)]


def orbit_sum_oracle(g, x, stop=None):
    """Break total along the orbit of x, independently of iterated_break_sum:
    walk with evaluate() and add break_value() until the cycle (or stop)."""
    n = g.circumference + 1
    res = orbit(g, x)
    walk = list(res.prefix) if stop is None else None
    if stop is not None:
        walk = []
        p = x
        while p != stop:
            walk.append(p)
            p = g.evaluate(p)
    return sum(break_value(g, q, n) for q in walk)


def one_sided_slopes(g, p):
    """(left slope, right slope) of g at the circle point p.

    The piece window starts at the first breakpoint, so a point may only be
    covered by its representative one circumference later.
    """
    left = right = None
    for start, end, piece in g.window_pieces():
        for q in (p, p + g.circumference):
            if start <= q < end:
                right = piece.slope
            if start < q <= end:
                left = piece.slope
    return left, right


class TestIteratedSums:
    @pytest.mark.parametrize("example_id", ("1", "3"))
    def test_golden_vertex_sums(self, examples, example_id):
        """Direct per-point sums at the newest stable-level vertices must
        reproduce the frozen sequence, without going through the table."""
        partition, g, _ = examples[example_id]
        record = load_example(example_id)
        K = record["stable_level"]
        chain = LevelChain(partition, g)
        got = [
            iterated_break_sum(g, vertex_value(partition, g, VertexRef(i, K), chain))
            for i in range(1, 2**K, 2)
        ]
        assert got == record["sigma"]

    def test_first_odd_vertex_of_example_one(self, examples):
        _, g, _ = examples["1"]
        assert iterated_break_sum(g, F(1, 16)) == -2

    @pytest.mark.parametrize("example_id", ("1", "2", "3", "4", "5"))
    def test_off_lattice_points_sum_to_zero(self, examples, example_id):
        _, g, _ = examples[example_id]
        for probe in (F(1, 3), F(2, 7), F(3, 5)):
            assert iterated_break_sum(g, probe) == 0

    def test_off_lattice_fast_path_agrees_with_the_orbit(self, examples):
        """Every point on the orbit of a non-dyadic probe misses the breaks,
        so the shortcut answer 0 matches a term-by-term walk."""
        _, g, _ = examples["1"]
        res = orbit(g, F(1, 3))
        assert all(break_value(g, p) == 0 for p in res.prefix + res.cycle)
        assert iterated_break_sum(g, F(1, 3)) == 0

    @pytest.mark.parametrize("base", (2, 3, 5))
    def test_multiplication_map_sums_vanish(self, base):
        g = multiplication_map(base)
        for numerator in (1, 3, 7):
            assert iterated_break_sum(g, F(numerator, base**3)) == 0
        assert iterated_break_sum(g, F(0)) == 0

    def test_budget_propagates(self):
        g = multiplication_map(2)
        with pytest.raises(BudgetExceeded):
            iterated_break_sum(g, F(1, 2**30), max_steps=3)

    def test_divergent_fixed_point(self, examples):
        _, g, _ = examples["4"]
        record = load_example("4")
        with pytest.raises(DivergentFixedPoint) as err:
            iterated_break_sum(g, F(0))
        assert err.value.point == 0
        assert err.value.break_value == record["origin_break"]

    @pytest.mark.parametrize("example_id", ("2", "5"))
    def test_divergent_cycle(self, examples, example_id):
        _, g, _ = examples[example_id]
        divergence = load_example(example_id)["iterated_divergence"]
        with pytest.raises(DivergentCycle) as err:
            iterated_break_sum(g, as_fraction(divergence["probe"]))
        assert err.value.cycle == tuple(as_fraction(p) for p in divergence["cycle"])
        assert err.value.break_values == tuple(divergence["breaks"])

    @pytest.mark.parametrize("example_id", ("1", "2", "3", "4", "5"))
    def test_origin_break_matches_record(self, examples, example_id):
        _, g, _ = examples[example_id]
        assert break_value(g, F(0)) == load_example(example_id)["origin_break"]


class TestBreakSumTable:
    @pytest.mark.parametrize("example_id", ("1", "3"))
    def test_golden_tables(self, examples, example_id):
        partition, g, _ = examples[example_id]
        record = load_example(example_id)
        table = break_sum_table(g, partition)
        assert table.stable_level == record["stable_level"]
        assert list(table.sequence()) == record["sigma"]
        assert table.is_constant is record["sigma_constant"]
        with pytest.raises(ValueError):
            table.constant_value()

    def test_uniform_partition_has_empty_table(self):
        partition = AffineMarkovPartition(2, [1, 1])
        g, _ = build_expanding_map(partition)
        table = break_sum_table(g, partition)
        assert table.stable_level == 0
        assert table.entries == ()
        assert table.is_constant
        assert table.constant_value() == 0
        assert table.value_at(VertexRef(3, 5)) == 0

    @pytest.mark.parametrize("example_id", ("1", "3"))
    def test_reduction_law_against_per_point_sums(self, examples, example_id):
        """The table's answer at every vertex of natural level at least the
        stable level must equal the sum computed directly at that point."""
        partition, g, _ = examples[example_id]
        chain = LevelChain(partition, g)
        table = break_sum_table(g, partition, chain=chain)
        K = table.stable_level
        for level in range(K, K + 3):
            for i in range(2**level):
                ref = reduce_ref(VertexRef(i, level), 2)
                if ref.level < K:
                    continue
                x = vertex_value(partition, g, ref, chain)
                assert table.value_at(ref) == iterated_break_sum(g, x)

    def test_aliases_share_a_value(self, examples):
        partition, g, _ = examples["1"]
        table = break_sum_table(g, partition)
        K = table.stable_level
        for j in (1, 5, 11, 15):
            assert (table.value_at(VertexRef(j, K))
                    == table.value_at(VertexRef(2 * j, K + 1))
                    == table.value_at(VertexRef(4 * j, K + 2)))

    def test_vertices_below_the_stable_level_are_refused(self, examples):
        partition, g, _ = examples["1"]
        table = break_sum_table(g, partition)
        with pytest.raises(ValueError):
            table.value_at(VertexRef(0, 5))
        with pytest.raises(ValueError):
            table.value_at(VertexRef(8, 4))

    @pytest.mark.parametrize("example_id", ("2", "5"))
    def test_not_power_form_refusal(self, examples, example_id):
        partition, g, _ = examples[example_id]
        assert load_example(example_id)["sigma_refusal"]["kind"] == "not_power_form"
        with pytest.raises(NotPowerForm):
            break_sum_table(g, partition)

    def test_divergence_refusal(self, examples):
        partition, g, _ = examples["4"]
        refusal = load_example("4")["sigma_refusal"]
        assert refusal["kind"] == "divergent_fixed_point"
        with pytest.raises(DivergentFixedPoint) as err:
            break_sum_table(g, partition)
        assert err.value.point == as_fraction(refusal["point"])
        assert err.value.break_value == refusal["break"]

    def test_records_shape(self, examples):
        partition, g, _ = examples["1"]
        table = break_sum_table(g, partition)
        for index, level, value in table.as_records():
            assert level == table.stable_level
            assert index % 2 == 1
            assert table.value_at(VertexRef(index, level)) == value


class TestZeroSum:
    """The break values of the map total zero over every vertex set that
    contains all of its breakpoints."""

    @pytest.mark.parametrize("example_id", ("1", "3", "4"))
    def test_power_form_levels(self, examples, example_id):
        partition, g, _ = examples[example_id]
        K = stable_level(partition)
        for level in range(K, K + 4):
            points = vertices_at_level(partition, g, level)
            assert len(set(points)) == len(points)
            assert sum(break_value(g, p) for p in points) == 0

    @pytest.mark.parametrize("example_id", ("2", "5"))
    def test_derived_levels(self, examples, example_id):
        partition, g, _ = examples[example_id]
        for level in range(0, 4):
            points = vertices_at_level(partition, g, level)
            assert len(set(points)) == len(points)
            assert sum(break_value(g, p) for p in points) == 0

    def test_random_conjugate_levels(self, random_conjugate_factory):
        for seed in (11, 12, 13):
            _, g, partition = random_conjugate_factory(seed)
            K = stable_level(partition)
            for level in range(K, K + 3):
                points = vertices_at_level(partition, g, level)
                assert sum(break_value(g, p) for p in points) == 0


class TestCoboundary:
    @pytest.mark.parametrize("example_id", ("1", "3"))
    def test_exhaustive_over_deep_vertices(self, examples, example_id):
        partition, g, _ = examples[example_id]
        K = stable_level(partition)
        points = vertices_at_level(partition, g, K + 3)
        assert coboundary_check(g, points)

    def test_single_step_instance(self, examples):
        """At the fourth cut of the first example the orbit runs to 0 in two
        steps, pinning all three quantities in the identity."""
        partition, g, _ = examples["1"]
        x = partition.endpoints[4]
        assert break_value(g, x) == -1
        assert iterated_break_sum(g, x) == -2
        assert iterated_break_sum(g, g.evaluate(x)) == -1

    def test_model_map(self):
        g = multiplication_map(2)
        assert coboundary_check(g, [F(0), F(1, 2), F(3, 8), F(1, 3)])

    def test_divergence_propagates(self, examples):
        _, g4, _ = examples["4"]
        with pytest.raises(DivergentFixedPoint):
            coboundary_check(g4, [F(0)])
        _, g2, _ = examples["2"]
        with pytest.raises(DivergentCycle):
            coboundary_check(g2, [F(1, 2)])


class TestOrbitMerge:
    def test_golden_violation(self, examples):
        partition, g, _ = examples["1"]
        record = load_example("1")["merge_violation"]
        left = as_fraction(record["left"])
        right = as_fraction(record["right"])
        violations = orbit_merge_violations(g, partition, 5)
        assert violations
        match = next(v for v in violations
                     if v.left == left and v.right == right)
        assert match.left_sum - match.right_sum == record["difference"]
        # Re-derive both accumulated sums by walking each orbit to the
        # reported meeting point with evaluate() and break_value() alone.
        assert orbit_sum_oracle(g, left, stop=match.meeting_point) == match.left_sum
        assert orbit_sum_oracle(g, right, stop=match.meeting_point) == match.right_sum

    def test_all_reports_are_genuine(self, examples):
        partition, g, _ = examples["1"]
        for v in orbit_merge_violations(g, partition, 4):
            assert v.left_sum != v.right_sum
            assert orbit_sum_oracle(g, v.left, stop=v.meeting_point) == v.left_sum
            assert orbit_sum_oracle(g, v.right, stop=v.meeting_point) == v.right_sum

    def test_model_map_is_clean(self):
        partition = AffineMarkovPartition(2, [1, 1])
        g, _ = build_expanding_map(partition)
        assert orbit_merge_violations(g, partition, 3) == ()

    def test_random_conjugate_reports_are_genuine(self, random_conjugate_factory):
        _, g, partition = random_conjugate_factory(21)
        for v in orbit_merge_violations(g, partition, 3):
            assert v.left_sum != v.right_sum
            assert orbit_sum_oracle(g, v.left, stop=v.meeting_point) == v.left_sum
            assert orbit_sum_oracle(g, v.right, stop=v.meeting_point) == v.right_sum


class TestPLCriterion:
    @pytest.mark.parametrize("example_id", ("1", "3"))
    def test_non_constant_tables_refute(self, examples, example_id):
        partition, g, _ = examples[example_id]
        record = load_example(example_id)
        verdict = pl_criterion(g, partition)
        assert record["criterion"] == "not_pl"
        assert not verdict
        assert verdict.is_pl is False
        assert verdict.stable_level == record["stable_level"]
        assert list(verdict.table.sequence()) == record["sigma"]
        a, b = verdict.witness
        va, vb = verdict.witness_values
        assert va != vb
        assert verdict.table.value_at(a) == va
        assert verdict.table.value_at(b) == vb
        payload = verdict.as_dict()
        assert payload["outcome"] == "not-pl"
        assert payload["witness_values"] == [va, vb]
        json.dumps(payload)

    def test_uniform_partition_yields_the_identity(self):
        partition = AffineMarkovPartition(2, [1, 1])
        g, _ = build_expanding_map(partition)
        verdict = pl_criterion(g, partition)
        assert verdict
        assert verdict.initial_slope == 1
        assert verdict.assignment.entries == ()
        h = verdict.conjugator
        for probe in (F(0), F(1, 3), F(5, 8)):
            assert h.evaluate(probe) == probe

    @pytest.mark.parametrize("example_id", ("2", "5"))
    def test_power_form_is_required(self, examples, example_id):
        partition, g, _ = examples[example_id]
        assert load_example(example_id)["criterion"] == "not_power_form"
        with pytest.raises(NotPowerForm):
            pl_criterion(g, partition)

    def test_divergence_is_refused(self, examples):
        partition, g, _ = examples["4"]
        assert load_example("4")["criterion"] == "divergent_fixed_point"
        with pytest.raises(DivergentFixedPoint):
            pl_criterion(g, partition)

    def test_only_base_two_is_decided(self):
        partition = AffineMarkovPartition(3, [1, 1])
        g, _ = build_expanding_map(partition)
        with pytest.raises(ValueError):
            pl_criterion(g, partition)

    def test_roundtrip_recovery(self, random_conjugate_factory):
        from chameleon.exact import power_exponent

        for seed in range(12):
            h, g, partition = random_conjugate_factory(seed)
            verdict = pl_criterion(g, partition)
            assert verdict.is_pl
            assert verdict.conjugator == h
            assert power_exponent(verdict.initial_slope, 2) is not None
            assert verdict.assignment.total == 0
            payload = verdict.as_dict()
            assert payload["outcome"] == "pl"
            json.dumps(payload)

    def test_verdict_matches_pairing_where_defined(self, examples,
                                                   random_conjugate_factory):
        """Wherever the decision procedure returns a verdict at all, it must
        agree with the endpoint-pairing route to the same question."""
        from chameleon.conjugacy import equal_pairs

        corpus = [(p, g) for p, g, _ in examples.values()]
        for seed in (3, 7):
            _, g, partition = random_conjugate_factory(seed)
            corpus.append((partition, g))
        decided = 0
        for partition, g in corpus:
            try:
                verdict = pl_criterion(g, partition)
            except (NotPowerForm, DivergentFixedPoint, DivergentCycle):
                continue
            decided += 1
            assert verdict.is_pl == equal_pairs(partition)
        assert decided >= 4

    def test_fixed_points_of_conjugates_are_smooth(self, random_conjugate_factory):
        """A map conjugate to doubling has both one-sided slopes equal to 2
        at each of its fixed points."""
        for seed in (0, 5, 9):
            _, g, _ = random_conjugate_factory(seed)
            for p in periodic_points(g, 1):
                assert one_sided_slopes(g, p) == (2, 2)


class TestDiscrepancySearch:
    def test_example_one_sampled_anchors(self, examples):
        partition, g, _ = examples["1"]
        chain = LevelChain(partition, g)
        table = break_sum_table(g, partition, chain=chain)
        K = table.stable_level
        rng = random.Random(4)
        anchors = [VertexRef(rng.randrange(1, 2**level, 2), level)
                   for level in (K, K, K + 1)]
        for left in anchors:
            for right in anchors:
                for pad in (1, 2):
                    hit = find_break_sum_discrepancy(
                        g, partition, left, right, pad=pad,
                        table=table, chain=chain)
                    assert hit is not None
                    assert 1 <= hit.offset < 2**K
                    assert hit.left_value != hit.right_value
                    # Independent recomputation of both sums at the offset.
                    span = 2**K
                    deep_left = VertexRef(left.index * span + hit.offset,
                                          left.level + K)
                    deep_right = VertexRef(
                        right.index * (span << pad) + hit.offset,
                        right.level + K + pad)
                    xl = vertex_value(partition, g, deep_left, chain)
                    xr = vertex_value(partition, g, deep_right, chain)
                    assert iterated_break_sum(g, xl) == hit.left_value
                    assert iterated_break_sum(g, xr) == hit.right_value
                    assert hit.point == xl
                    # Minimality: every earlier offset agrees.
                    for i in range(1, hit.offset):
                        early_left = VertexRef(left.index * span + i,
                                               left.level + K)
                        early_right = VertexRef(
                            right.index * (span << pad) + i,
                            right.level + K + pad)
                        assert (table.value_at(early_left)
                                == table.value_at(early_right))

    def test_constant_tables_never_yield(self, random_conjugate_factory):
        for seed in (1, 6):
            _, g, partition = random_conjugate_factory(seed)
            chain = LevelChain(partition, g)
            table = break_sum_table(g, partition, chain=chain)
            assert table.is_constant
            K = table.stable_level
            left = VertexRef(max(1, 2**K - 1), K)
            right = VertexRef(1, K + 1)
            for pad in (1, 2):
                assert find_break_sum_discrepancy(
                    g, partition, left, right, pad=pad,
                    table=table, chain=chain) is None

    def test_uniform_partition_is_trivially_clean(self):
        partition = AffineMarkovPartition(2, [1, 1])
        g, _ = build_expanding_map(partition)
        assert find_break_sum_discrepancy(
            g, partition, VertexRef(1, 1), VertexRef(1, 2)) is None

    def test_validation(self, examples):
        partition, g, _ = examples["1"]
        with pytest.raises(ValueError):
            find_break_sum_discrepancy(g, partition,
                                       VertexRef(1, 4), VertexRef(1, 4), pad=0)
        with pytest.raises(ValueError):
            find_break_sum_discrepancy(g, partition,
                                       VertexRef(1, 3), VertexRef(1, 4))
        partition3 = AffineMarkovPartition(3, [1, 1])
        g3, _ = build_expanding_map(partition3)
        with pytest.raises(ValueError):
            find_break_sum_discrepancy(g3, partition3,
                                       VertexRef(1, 1), VertexRef(1, 1))
