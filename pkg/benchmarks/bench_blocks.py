"""Compare the block-law scan backends on identical workloads.

Runs the exhaustive prefix-block law scan with the compiled kernel and with
the pure reference scanner, reports wall times, and verifies that both
backends return identical tallies.  Usage:

    python3 benchmarks/bench_blocks.py [--lengths 4,8,16] [--alphabet -1,0,1]
"""

from __future__ import annotations

import argparse
import time

from chameleon.blocks import active_backend, exhaustive_scan


def time_scan(length: int, alphabet: tuple[int, ...], backend: str):
    start = time.perf_counter()
    report = exhaustive_scan(length, alphabet, backend=backend)
    return time.perf_counter() - start, report


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lengths", default="4,8,16",
                        help="comma-separated power-of-two lengths")
    parser.add_argument("--alphabet", default="-1,0,1",
                        help="comma-separated distinct integer symbols")
    args = parser.parse_args()
    lengths = [int(part) for part in args.lengths.split(",")]
    alphabet = tuple(int(part) for part in args.alphabet.split(","))

    backends = ["reference"]
    if active_backend() == "compiled":
        backends.insert(0, "compiled")
    else:
        print("compiled kernel unavailable; timing the reference scanner only")

    for name in backends:  # warm up imports so rows time only the scans
        exhaustive_scan(2, alphabet, backend=name)

    header = f"{'length':>7} {'sequences':>12}"
    for name in backends:
        header += f" {name + ' (s)':>14}"
    if len(backends) == 2:
        header += f" {'speedup':>8}"
    print(header)

    for length in lengths:
        times = {}
        reports = {}
        for name in backends:
            times[name], reports[name] = time_scan(length, alphabet, name)
        baseline = reports[backends[0]]
        for name in backends[1:]:
            other = reports[name]
            if (other.checked, other.nonconstant, other.violations) != (
                baseline.checked, baseline.nonconstant, baseline.violations
            ):
                print(f"backend tallies disagree at length {length}!")
                return 1
        row = f"{length:>7} {baseline.checked:>12}"
        for name in backends:
            row += f" {times[name]:>14.4f}"
        if len(backends) == 2:
            row += f" {times['reference'] / times['compiled']:>7.1f}x"
        print(row)
        if baseline.violations:
            print(f"  law violations found at length {length}!")
            return 1
    print("tallies agree across backends; no law violations")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
