"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 5]

Both backends receive the same pre-drawn uniforms, so outputs are checked
for equality before any timing is reported.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from uaroots import _pykernels
from uaroots.centrality import log_table

try:
    from uaroots import _ckernels
except ImportError:
    _ckernels = None


def cases(n: int, seed: int):
    rng = np.random.default_rng(seed)
    u = rng.random(n - 1)
    parent = _pykernels.ua_parents(u)
    sizes = _pykernels.subtree_sizes(parent)
    rank = _pykernels.birth_ranks(parent)
    tab = log_table(n)
    steps = rng.random(n // 3)
    urn_u = rng.random(n)
    start = np.ones(3, dtype=np.int64)
    return {
        "ua_parents": lambda k: k.ua_parents(u),
        "ua_regular_tree(d=3)": lambda k: k.ua_regular_tree(3, steps),
        "birth_ranks": lambda k: k.birth_ranks(parent),
        "subtree_sizes": lambda k: k.subtree_sizes(parent),
        "log_ratios": lambda k: k.log_ratios(parent, sizes, tab),
        "weights_heights": lambda k: k.weights_heights(parent, rank),
        "polya_urn": lambda k: k.polya_urn(start, 2, urn_u, 0),
    }


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"n={args.n}, best of {args.repeat}")
    print(f"{'kernel':<22}{'cython ms':>12}{'python ms':>12}{'speedup':>10}")
    for name, fn in cases(args.n, args.seed).items():
        if not same(fn(_ckernels), fn(_pykernels)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=max(1, args.repeat // 2)))
        print(f"{name:<22}{tc * 1e3:>12.2f}{tp * 1e3:>12.2f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
