# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan backend: odometer enumeration over digit arrays.

Sequences are walked in counting order by incrementing a C digit array
(least significant position first).  Each law is checked by direct
elementwise block comparison with early exits, independently of the
integer-code arithmetic used by the reference backend.
"""

_MAX_LENGTH = 32
_MAX_BASE = 8


def scan(int length, int base):
    """Tally both block laws over all ``base**length`` digit sequences.

    Returns ``(checked, nonconstant, violations)`` with the same
    conventions as the reference backend: digit tuples are ordered by
    sequence position, position 0 first.
    """
    if length < 2 or length > _MAX_LENGTH or (length & (length - 1)) != 0:
        raise ValueError(f"length must be a power of two in [2, {_MAX_LENGTH}], got {length}")
    if base < 1 or base > _MAX_BASE:
        raise ValueError(f"alphabet size must lie in [1, {_MAX_BASE}], got {base}")

    cdef int digits[32]
    cdef int i, bits, size, count, block, pos, depth
    cdef long long checked = 0
    cdef long long nonconstant = 0
    cdef bint constant, universal, chained, more
    violations = []

    if base == 1:
        return 1, 0, violations

    depth = 0
    i = length
    while i > 1:
        depth += 1
        i >>= 1
    for i in range(length):
        digits[i] = 0

    more = True
    while more:
        constant = True
        for i in range(1, length):
            if digits[i] != digits[0]:
                constant = False
                break

        universal = True
        for bits in range(1, depth + 1):
            size = length >> bits
            count = 1 << bits
            for block in range(1, count):
                for pos in range(size):
                    if digits[block * size + pos] != digits[pos]:
                        universal = False
                        break
                if not universal:
                    break
            if not universal:
                break

        chained = True
        for bits in range(1, depth + 1):
            size = length >> bits
            for pos in range(size):
                if digits[size + pos] != digits[pos]:
                    chained = False
                    break
            if not chained:
                break

        checked += 1
        if not constant:
            nonconstant += 1
        if universal != constant or chained != constant:
            violations.append(tuple([digits[i] for i in range(length)]))

        i = 0
        while i < length:
            digits[i] += 1
            if digits[i] < base:
                break
            digits[i] = 0
            i += 1
        if i == length:
            more = False

    return checked, nonconstant, violations
