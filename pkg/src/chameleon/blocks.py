"""Prefix-block laws for halved integer sequences.

A sequence whose length is a power of two splits, for each prefix width
``w`` between 1 and ``log2(len)``, into ``2**w`` contiguous blocks, each
indexed by the ``w``-bit prefix of the positions it covers.  A block is
*even* or *odd* according to the last bit of its prefix.  Two facts tie
these blocks to constancy:

* the sequence is constant exactly when, at every width, every even
  block equals every odd block; and
* a chained schedule that compares only the two leading blocks at each
  width (one even/odd comparison per width) already detects every
  non-constant sequence.

This module provides the block decomposition, a per-sequence check of
both laws, and an exhaustive scan over all sequences of a given length
and alphabet.  The scan has two interchangeable backends — a vectorised
reference scanner and an optional compiled scanner — selected
automatically unless forced via the ``backend`` argument or the
``CHAMELEON_PURE`` environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import BadLength

__all__ = [
    "PrefixBlock",
    "BlockLawReport",
    "ScanReport",
    "prefix_blocks",
    "verify_block_laws",
    "exhaustive_scan",
    "active_backend",
]


def _log2_length(count: int) -> int:
    """Return ``log2(count)`` for a power-of-two ``count``, else refuse."""
    if count < 1 or count & (count - 1):
        raise BadLength(f"sequence length must be a power of two, got {count}")
    return count.bit_length() - 1


@dataclass(frozen=True)
class PrefixBlock:
    """One contiguous block of a halved sequence.

    ``prefix`` is the block's index among the ``2**bits`` blocks, read as
    the shared ``bits``-bit position prefix; its last bit gives the
    block's parity tag.
    """

    prefix: int
    bits: int
    values: Tuple[int, ...]

    @property
    def parity(self) -> str:
        return "odd" if self.prefix & 1 else "even"


def prefix_blocks(values: Sequence[int], bits: int) -> Tuple[PrefixBlock, ...]:
    """Split ``values`` into ``2**bits`` equal contiguous blocks.

    The sequence length must be a power of two, and ``bits`` must lie in
    ``[1, log2(len(values))]``; block ``p`` covers positions
    ``[p * size, (p + 1) * size)`` where ``size = len(values) >> bits``.
    """
    seq = tuple(values)
    depth = _log2_length(len(seq))
    if not 1 <= bits <= depth:
        raise BadLength(
            f"prefix width must lie in [1, {depth}] for length {len(seq)}, got {bits}"
        )
    size = len(seq) >> bits
    return tuple(
        PrefixBlock(prefix, bits, seq[prefix * size : (prefix + 1) * size])
        for prefix in range(1 << bits)
    )


@dataclass(frozen=True)
class BlockLawReport:
    """Outcome of the two block laws on a single sequence.

    ``constant``    -- every entry equals the first.
    ``universal``   -- at every prefix width, every even block equals
                       every odd block.
    ``existential`` -- at some width, some even block differs from some
                       odd block (the negation of ``universal``).
    ``chained``     -- at every width the two leading blocks agree.
    ``consistent``  -- ``universal`` and ``chained`` both coincide with
                       ``constant`` and ``existential`` with its negation,
                       as the laws assert they must.
    """

    constant: bool
    universal: bool
    existential: bool
    chained: bool

    @property
    def consistent(self) -> bool:
        return (
            self.universal == self.constant
            and self.existential == (not self.constant)
            and self.chained == self.constant
        )


def verify_block_laws(values: Sequence[int]) -> BlockLawReport:
    """Evaluate both block laws on one sequence of power-of-two length."""
    seq = tuple(values)
    depth = _log2_length(len(seq))
    constant = all(v == seq[0] for v in seq)
    universal = True
    for bits in range(1, depth + 1):
        blocks = prefix_blocks(seq, bits)
        evens = [b.values for b in blocks if b.parity == "even"]
        odds = [b.values for b in blocks if b.parity == "odd"]
        if not all(e == o for e in evens for o in odds):
            universal = False
            break
    chained = True
    for bits in range(1, depth + 1):
        size = len(seq) >> bits
        if seq[0:size] != seq[size : 2 * size]:
            chained = False
            break
    return BlockLawReport(constant, universal, not universal, chained)


@dataclass(frozen=True)
class ScanReport:
    """Result of an exhaustive law scan over one sequence shape.

    ``checked`` counts the sequences enumerated, ``nonconstant`` counts
    those that are not constant, and ``violations`` lists any sequences
    on which a law failed (always empty when the laws hold).
    """

    length: int
    alphabet: Tuple[int, ...]
    checked: int
    nonconstant: int
    violations: Tuple[Tuple[int, ...], ...]
    backend: str


ScanFunc = Callable[[int, int], Tuple[int, int, List[Tuple[int, ...]]]]


def _load_compiled() -> Optional[ScanFunc]:
    if os.environ.get("CHAMELEON_PURE") == "1":
        return None
    try:
        from . import _blocks_fast  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _blocks_fast.scan


def _resolve_backend(backend: Optional[str]) -> Tuple[ScanFunc, str]:
    from . import _blocks_ref

    if backend is None:
        fast = _load_compiled()
        if fast is not None:
            return fast, "compiled"
        return _blocks_ref.scan, "reference"
    if backend == "reference":
        return _blocks_ref.scan, "reference"
    if backend == "compiled":
        fast = _load_compiled()
        if fast is None:
            raise ValueError("compiled scanner is unavailable")
        return fast, "compiled"
    raise ValueError(f"unknown backend {backend!r}")


def active_backend() -> str:
    """Name of the scan backend that a default dispatch would use."""
    return "compiled" if _load_compiled() is not None else "reference"


def exhaustive_scan(
    length: int,
    alphabet: Sequence[int] = (-1, 0, 1),
    backend: Optional[str] = None,
) -> ScanReport:
    """Verify both block laws on every sequence of ``length`` symbols.

    Enumerates all ``len(alphabet) ** length`` sequences over the given
    distinct symbols, evaluates ``constant``, ``universal`` and
    ``chained`` for each, and records any sequence where the laws
    disagree with constancy.  Returns the tally; ``violations`` is empty
    exactly when the laws hold over the whole shape.
    """
    symbols = tuple(alphabet)
    if not symbols or len(set(symbols)) != len(symbols):
        raise ValueError("alphabet symbols must be nonempty and distinct")
    depth = _log2_length(length)
    func, name = _resolve_backend(backend)
    if depth == 0:
        # Single-entry sequences are constant and admit no comparisons.
        return ScanReport(length, symbols, len(symbols), 0, (), name)
    checked, nonconstant, raw = func(length, len(symbols))
    violations = tuple(tuple(symbols[d] for d in digits) for digits in raw)
    return ScanReport(length, symbols, checked, nonconstant, violations, name)
