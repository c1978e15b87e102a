"""Prefix-block laws: decomposition, per-sequence checks, exhaustive scans,
and backend selection."""

from __future__ import annotations

import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from chameleon.blocks import (
    BlockLawReport,
    active_backend,
    exhaustive_scan,
    prefix_blocks,
    verify_block_laws,
)
from chameleon.errors import BadLength


def sliced_universal(seq, depth):
    """Oracle for the all-pairs law, by raw list slicing only."""
    for bits in range(1, depth + 1):
        size = len(seq) >> bits
        blocks = [list(seq[i:i + size]) for i in range(0, len(seq), size)]
        for even in blocks[0::2]:
            for odd in blocks[1::2]:
                if even != odd:
                    return False
    return True


power_of_two_sequences = st.integers(1, 4).flatmap(
    lambda depth: st.lists(
        st.integers(-2, 2), min_size=2**depth, max_size=2**depth
    )
)


class TestPrefixBlocks:
    def test_structure(self):
        seq = (5, 1, 4, 1, 5, 9, 2, 6)
        for bits in (1, 2, 3):
            blocks = prefix_blocks(seq, bits)
            assert len(blocks) == 2**bits
            size = len(seq) >> bits
            rebuilt = []
            for prefix, block in enumerate(blocks):
                assert block.prefix == prefix
                assert block.bits == bits
                assert block.values == seq[prefix * size:(prefix + 1) * size]
                assert block.parity == ("odd" if prefix % 2 else "even")
                rebuilt.extend(block.values)
            assert tuple(rebuilt) == seq

    def test_parity_alternates(self):
        blocks = prefix_blocks((0,) * 16, 3)
        assert [b.parity for b in blocks] == ["even", "odd"] * 4

    def test_width_bounds(self):
        with pytest.raises(BadLength):
            prefix_blocks((1, 2, 3, 4), 0)
        with pytest.raises(BadLength):
            prefix_blocks((1, 2, 3, 4), 3)

    def test_length_must_be_a_power_of_two(self):
        with pytest.raises(BadLength):
            prefix_blocks((1, 2, 3), 1)
        with pytest.raises(BadLength):
            prefix_blocks((), 1)


class TestVerifyBlockLaws:
    def test_exhaustive_small_shapes(self):
        """Every sequence of lengths 4 and 8 over three symbols satisfies
        both laws, and the all-pairs flag matches the slicing oracle."""
        for length in (4, 8):
            depth = length.bit_length() - 1
            for seq in itertools.product((-1, 0, 1), repeat=length):
                report = verify_block_laws(seq)
                assert report.consistent
                assert report.universal == sliced_universal(seq, depth)
                assert report.constant == (len(set(seq)) == 1)
                assert report.existential == (not report.universal)

    @given(power_of_two_sequences)
    def test_random_sequences_are_consistent(self, seq):
        report = verify_block_laws(seq)
        assert report.consistent
        assert report.constant == (len(set(seq)) == 1)
        depth = len(seq).bit_length() - 1
        assert report.universal == sliced_universal(seq, depth)

    def test_single_entry_sequence(self):
        report = verify_block_laws([7])
        assert report.constant and report.universal and report.chained
        assert report.consistent

    def test_rejects_bad_lengths(self):
        with pytest.raises(BadLength):
            verify_block_laws([1, 2, 3])
        with pytest.raises(BadLength):
            verify_block_laws([])

    def test_report_shape(self):
        report = verify_block_laws((3, 3, 3, 3))
        assert isinstance(report, BlockLawReport)
        assert (report.constant, report.universal,
                report.existential, report.chained) == (True, True, False, True)


class TestExhaustiveScan:
    @pytest.mark.parametrize("length", (2, 4, 8))
    @pytest.mark.parametrize("alphabet", ((0, 1), (-1, 0, 1), (0, 1, 2, 3)))
    def test_backends_agree(self, length, alphabet):
        reference = exhaustive_scan(length, alphabet, backend="reference")
        assert reference.checked == len(alphabet)**length
        assert reference.nonconstant == reference.checked - len(alphabet)
        assert reference.violations == ()
        if active_backend() == "compiled":
            compiled = exhaustive_scan(length, alphabet, backend="compiled")
            assert compiled.checked == reference.checked
            assert compiled.nonconstant == reference.nonconstant
            assert compiled.violations == reference.violations

    def test_full_depth_five_shape_reference(self):
        report = exhaustive_scan(16, (-1, 0, 1), backend="reference")
        assert report.checked == 3**16
        assert report.nonconstant == 3**16 - 3
        assert report.violations == ()
        assert report.backend == "reference"

    def test_full_depth_five_shape_default(self):
        report = exhaustive_scan(16, (-1, 0, 1))
        assert report.checked == 3**16
        assert report.nonconstant == 3**16 - 3
        assert report.violations == ()
        assert report.backend == active_backend()

    def test_single_entry_shape(self):
        report = exhaustive_scan(1, (-1, 0, 1))
        assert report.checked == 3
        assert report.nonconstant == 0
        assert report.violations == ()

    def test_alphabet_validation(self):
        with pytest.raises(ValueError):
            exhaustive_scan(4, ())
        with pytest.raises(ValueError):
            exhaustive_scan(4, (1, 1))

    def test_length_validation(self):
        with pytest.raises(BadLength):
            exhaustive_scan(6)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            exhaustive_scan(4, (0, 1), backend="quantum")

    def test_tallies_match_brute_force(self):
        """Independently recount constants and violations for one shape."""
        report = exhaustive_scan(4, (0, 1, 2), backend="reference")
        seen = nonconstant = 0
        for seq in itertools.product((0, 1, 2), repeat=4):
            seen += 1
            if len(set(seq)) > 1:
                nonconstant += 1
            assert verify_block_laws(seq).consistent
        assert (seen, nonconstant) == (report.checked, report.nonconstant)


class TestBackendSelection:
    def test_compiled_backend_is_built(self):
        assert active_backend() == "compiled"

    def test_environment_forces_reference(self, monkeypatch):
        monkeypatch.setenv("CHAMELEON_PURE", "1")
        assert active_backend() == "reference"
        report = exhaustive_scan(4, (0, 1))
        assert report.backend == "reference"
        with pytest.raises(ValueError):
            exhaustive_scan(4, (0, 1), backend="compiled")

    def test_environment_in_fresh_interpreter(self):
        env = dict(os.environ, CHAMELEON_PURE="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from chameleon.blocks import active_backend, exhaustive_scan\n"
             "r = exhaustive_scan(8, (-1, 0, 1))\n"
             "print(active_backend(), r.backend, r.checked, len(r.violations))"],
            capture_output=True, text=True, env=env, check=True,
        )
        assert out.stdout.split() == ["reference", "reference", "6561", "0"]
