"""Reference scan backend: vectorised arithmetic on integer codes.

Each sequence of ``length`` digits over an alphabet of ``base`` symbols
is identified with the integer whose base-``base`` digits, least
significant first, are the sequence entries.  Every law then becomes
plain integer arithmetic on whole arrays of codes at once:

* a sequence is constant exactly when its code is a multiple of the
  repunit ``(base**length - 1) // (base - 1)``;
* all ``2**bits`` blocks at one width are equal exactly when the code is
  ``b * T`` for a single block code ``b < base**size``, where ``T`` is
  the block-tiling repunit ``(base**length - 1) // (base**size - 1)``;
* the two leading blocks agree exactly when the code is congruent to
  its quotient by ``base**size`` modulo ``base**size``.

No digit arrays are materialised; codes are processed in fixed-size
chunks of one flat int64 array.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

_CHUNK = 1 << 20


def scan(length: int, base: int) -> Tuple[int, int, List[Tuple[int, ...]]]:
    """Tally both block laws over all ``base**length`` digit sequences.

    Returns ``(checked, nonconstant, violations)`` where violations are
    digit tuples (least significant position first) on which a law
    disagreed with constancy.
    """
    if length < 2 or length & (length - 1):
        raise ValueError(f"length must be a power of two >= 2, got {length}")
    if base < 1:
        raise ValueError(f"alphabet size must be positive, got {base}")
    if base == 1:
        return 1, 0, []
    total = base**length
    if total > 1 << 40:
        raise ValueError(f"scan of {total} sequences is too large")
    depth = length.bit_length() - 1
    repunit = (total - 1) // (base - 1)
    checked = 0
    nonconstant = 0
    violations: List[Tuple[int, ...]] = []
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        constant = codes % repunit == 0
        universal = np.ones(codes.shape, dtype=bool)
        chained = np.ones(codes.shape, dtype=bool)
        for bits in range(1, depth + 1):
            size = length >> bits
            modulus = base**size
            tiling = (total - 1) // (modulus - 1)
            universal &= (codes % tiling == 0) & (codes // tiling < modulus)
            chained &= (codes // modulus) % modulus == codes % modulus
        bad = (universal != constant) | (chained != constant)
        checked += int(codes.size)
        nonconstant += int(codes.size) - int(np.count_nonzero(constant))
        for code in codes[bad]:
            value = int(code)
            digits = []
            for _ in range(length):
                digits.append(value % base)
                value //= base
            violations.append(tuple(digits))
    return checked, nonconstant, violations
