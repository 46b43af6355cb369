"""Compare the numba and numpy rank kernels, plus one end-to-end study run.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on both private implementations in the same process
(the jit path is warmed up first, so compile time is excluded).  The study
timing uses whichever backend CIRCUMPLEX_EVAL_JIT selects.
"""
import argparse
import tempfile
from pathlib import Path
from timeit import default_timer as timer

import numpy as np

from circumplex_eval import _kernels as K
from circumplex_eval.ingest import load_responses
from circumplex_eval.pipeline import run_study
from circumplex_eval.synth import load_spec, write_dataset

ROOT = Path(__file__).resolve().parents[1]


def best_of(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = timer()
        fn(*args)
        best = min(best, timer() - t0)
    return best


def cases(rng):
    for n in (30, 300, 3000, 30000):
        x = rng.integers(0, 101, size=n).astype(np.float64)
        blocks = rng.integers(0, 3, size=n).astype(np.int64)
        yield f"n={n}", {
            "midranks": (x,),
            "tie_sum": (x,),
            "block_midranks": (x, blocks),
        }
    for nx, n in ((5, 10), (10, 20), (30, 63)):
        yield f"nx={nx},n={n}", {"rank_sum_counts": (nx, n)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if K._nb is None:
        print("numba not installed; only the numpy path is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} {'size':<14} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for label, kernels in cases(rng):
        for name, kargs in kernels.items():
            jit_fn, np_fn = getattr(K, f"_{name}_jit"), getattr(K, f"_{name}_numpy")
            jit_fn(*kargs)  # compile
            a = np.asarray(np_fn(*kargs))
            b = np.asarray(jit_fn(*kargs))
            assert np.array_equal(a, b), name
            t_np = best_of(np_fn, kargs, args.repeat)
            t_jit = best_of(jit_fn, kargs, args.repeat)
            print(f"{name:<16} {label:<14} {t_np * 1e3:>10.4f} {t_jit * 1e3:>10.4f} {t_np / t_jit:>7.1f}x")

    with tempfile.TemporaryDirectory() as d:
        spec = load_spec(ROOT / "configs" / "synth_regression.json")
        paths = write_dataset(spec, d)
        records, people = load_responses(paths["responses"], spec.config, paths["respondents"])
        run_study(records, people, spec.config, combined=True)  # warm-up
        t = best_of(run_study, (records, people, spec.config, True), max(3, args.repeat // 4))
        print(f"\nrun_study on the regression dataset ({K.BACKEND} backend): {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
