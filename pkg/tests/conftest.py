"""Shared fixtures: the bundled example partitions and partition-file factory."""

from __future__ import annotations

import json
import random
from math import gcd, lcm

import pytest
from hypothesis import HealthCheck, settings

from chameleon.conjugacy import partition_from_expanding_map
from chameleon.golden import example_ids, load_example
from chameleon.interpolate import random_dyadic_homeomorphism
from chameleon.maps import multiplication_map
from chameleon.markov import AffineMarkovPartition, LevelChain, build_expanding_map

settings.register_profile(
    "package",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("package")


@pytest.fixture(scope="session")
def examples():
    """id -> (partition, map, build report) for the five bundled examples."""
    built = {}
    for example_id in example_ids():
        record = load_example(example_id)
        partition = AffineMarkovPartition(record["base"], record["lengths"])
        g, report = build_expanding_map(partition)
        built[example_id] = (partition, g, report)
    return built


@pytest.fixture
def partition_file(tmp_path):
    """Factory writing a bundled example's partition data to a JSON file."""

    def write(example_id: str) -> str:
        record = load_example(example_id)
        path = tmp_path / f"partition{example_id}.json"
        path.write_text(
            json.dumps({"base": record["base"], "lengths": record["lengths"]})
        )
        return str(path)

    return write


def rescaled_level_partition(
    partition: AffineMarkovPartition, g, depth: int
) -> AffineMarkovPartition:
    """The integer-weight partition whose endpoints are the level-``depth``
    vertices of ``partition`` — a finer valid partition of the same map."""
    table = LevelChain(partition, g).table(depth)
    values = list(table.values) + [partition.circumference]
    gaps = [b - a for a, b in zip(values, values[1:])]
    scale = lcm(*(gap.denominator for gap in gaps))
    weights = [int(gap * scale) for gap in gaps]
    shrink = gcd(*weights)
    return AffineMarkovPartition(partition.base, [w // shrink for w in weights])


@pytest.fixture(scope="session")
def random_conjugate_factory():
    """Factory for (h, g, partition) triples built from random conjugators."""

    def make(seed: int, max_breaks: int = 6, grid_exponent: int = 4):
        rng = random.Random(seed)
        model = multiplication_map(2)
        h = random_dyadic_homeomorphism(
            rng, max_breaks=max_breaks, grid_exponent=grid_exponent
        )
        g = h.compose(model).compose(h.invert())
        return h, g, partition_from_expanding_map(g)

    return make


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One visible pass/fail line per acceptance criterion, capture-proof."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(f"criterion {number:02d}: {RESULTS[number].line}")
