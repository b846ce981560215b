"""Compare the compiled and pure-Python Fincke-Pohst kernels.

Run with ``python3 benchmarks/bench_enum.py``.  Each case counts the values
of a quaternion norm form (a hom lattice between two ideal classes of the
level p^2 order) up to a bound, checks that both kernels return identical
histograms, and prints the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from levelp2 import ratlinalg
from levelp2 import _fpenum_py
from levelp2.ideals import enumerate_classes, hom_lattice_conj
from levelp2.orders_p2 import build_context

try:
    from levelp2 import _fpenum
except ImportError:  # pragma: no cover
    _fpenum = None


def _hessian(p: int, i: int, j: int) -> np.ndarray:
    ctx = build_context(p)
    cl = enumerate_classes(ctx.O_tilde, p, seeds=ctx.norm_one)
    L = hom_lattice_conj(cl.reps[i % cl.h], cl.reps[j % cl.h])
    return np.array(L.hessian, dtype=np.int64)


def _time(fn, *args, repeat: int = 3) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, nargs="+", default=[7, 11, 13])
    ap.add_argument("--bounds", type=int, nargs="+", default=[100, 400, 1000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"active backend: {ratlinalg.BACKEND}")
    if _fpenum is None:
        print("compiled kernel not built; only the pure-Python kernel is timed")
    print(f"{'p':>3} {'bound':>7} {'vectors':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for p in args.p:
        H = _hessian(p, 0, 1)
        for hi in args.bounds:
            t_py, h_py = _time(_fpenum_py.count_values, H, 2 * hi, repeat=args.repeat)
            total = int(np.sum(h_py))
            if _fpenum is None:
                print(f"{p:>3} {hi:>7} {total:>10} {t_py:>10.4f} {'-':>10} {'-':>8}")
                continue
            t_cy, h_cy = _time(_fpenum.count_values, H, 2 * hi, repeat=args.repeat)
            if not np.array_equal(np.asarray(h_py), np.asarray(h_cy)):
                raise SystemExit(f"kernels disagree at p={p}, bound={hi}")
            print(f"{p:>3} {hi:>7} {total:>10} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>8.1f}")


if __name__ == "__main__":
    main()
