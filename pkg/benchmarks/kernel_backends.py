"""Compare the numba and numpy merge-kernel backends.

Synthesizes sorted label arrays with controllable witness sharing,
runs the multiway merge through both backends (jump on and off), and
prints a timing table.  Counters are asserted equal across backends
on every workload, so this doubles as a consistency check.

Run:  python benchmarks/kernel_backends.py [--quick]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from twigjoin.kernels import get_backend


def make_lists(
    rng: np.random.Generator,
    n_lists: int,
    rows_per_list: int,
    n_witnesses: int,
    plen: int,
    depth: int,
) -> list[np.ndarray]:
    """Sorted (rows, depth) arrays sharing a pool of prefix witnesses."""
    witnesses = rng.integers(1, 50, size=(n_witnesses, plen), dtype=np.int64)
    witnesses = witnesses[np.lexsort(witnesses.T[::-1])]
    lists = []
    for _ in range(n_lists):
        pick = np.sort(rng.integers(0, n_witnesses, size=rows_per_list))
        rows = np.zeros((rows_per_list, depth), dtype=np.int64)
        rows[:, :plen] = witnesses[pick]
        rows[:, plen:] = rng.integers(1, 1000, size=(rows_per_list, depth - plen))
        rows = rows[np.lexsort(rows.T[::-1])]
        lists.append(rows)
    return lists


def run_once(backend, lists: list[np.ndarray], plen: int, use_jump: bool):
    k = len(lists)
    width = lists[0].shape[1]
    total = sum(len(a) for a in lists)
    stacked = np.zeros((total, width), dtype=np.int64)
    offsets = np.empty(k + 1, dtype=np.int64)
    pos = 0
    for j, a in enumerate(lists):
        offsets[j] = pos
        stacked[pos : pos + len(a)] = a
        pos += len(a)
    offsets[k] = pos
    touched = np.zeros(total, dtype=np.uint8)
    reads = np.zeros(k, dtype=np.int64)
    t0 = time.perf_counter()
    out, count, comps, jumps = backend.multiway_merge(
        stacked, offsets, plen, use_jump, touched, reads
    )
    dt = time.perf_counter() - t0
    return dt, (count, comps, jumps, int(reads.sum()))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scale = 10 if args.quick else 1
    workloads = [
        ("2 lists, dense overlap", 2, 200_000 // scale, 20_000 // scale, 3, 6),
        ("2 lists, sparse overlap", 2, 200_000 // scale, 2_000_000 // scale, 3, 6),
        ("4 lists, dense overlap", 4, 80_000 // scale, 10_000 // scale, 3, 6),
        ("4 lists, sparse overlap", 4, 80_000 // scale, 800_000 // scale, 3, 6),
    ]
    numba_be = get_backend("numba")
    numpy_be = get_backend("numpy")
    if numba_be.name != "numba":
        print("numba unavailable; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    lists0 = make_lists(rng, 2, 1000, 100, 2, 4)
    run_once(numba_be, lists0, 2, True)  # trigger JIT before timing
    run_once(numba_be, lists0, 2, False)

    hdr = f"{'workload':28} {'jump':5} {'numba':>9} {'numpy':>9} {'speedup':>8}"
    print(hdr)
    print("-" * len(hdr))
    for name, k, rows, wit, plen, depth in workloads:
        rng = np.random.default_rng(args.seed + 1)
        lists = make_lists(rng, k, rows, wit, plen, depth)
        for use_jump in (True, False):
            t_nb, c_nb = run_once(numba_be, lists, plen, use_jump)
            t_np, c_np = run_once(numpy_be, lists, plen, use_jump)
            if c_nb != c_np:
                print(f"COUNTER MISMATCH on {name}: {c_nb} vs {c_np}", file=sys.stderr)
                return 1
            print(
                f"{name:28} {'on' if use_jump else 'off':5} "
                f"{t_nb * 1e3:8.1f}ms {t_np * 1e3:8.1f}ms {t_np / t_nb:7.1f}x"
            )
    print("\ncounters agreed on every workload")
    return 0


if __name__ == "__main__":
    sys.exit(main())
