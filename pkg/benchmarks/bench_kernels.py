"""Quadruple-product kernel benchmark: compiled vs pure-numpy backend.

Builds a deep golden-mean truncation and times the four-operator product
s_v s_u^T s_u s_w^T column kernel under both backends.  The pure path is
selected the same way users select it: the SHIFTCA_PURE_NUMPY env flag,
read per call.
"""

import os
import time

import numpy as np

from shiftca._backend import backend_name, quadruple_product
from shiftca.presentations import Presentation
from shiftca.repcheck import build_truncation

DEPTH = 14
REPEATS = 5

GOLDEN = Presentation.sft(("0", "1"), ((1, 1), (1, 0)))

CASES = [
    (("0",), ("1",), ("0",)),
    (("0", "1"), ("1",), ("0", "0")),
    (("1", "0", "1"), ("0",), ("1", "0", "0")),
]


def timed(su, sv, up, wp):
    best = float("inf")
    out = None
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        out = quadruple_product(su, sv, up, wp)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rep = build_truncation(GOLDEN, DEPTH)
    print(f"golden mean, depth {DEPTH}: basis {rep.size} words")
    print(f"default backend: {backend_name()}")
    print()
    print(f"{'u':>8} {'v':>8} {'w':>8} {'numba':>10} {'pure':>10} {'speedup':>8}")

    for u, v, w in CASES:
        su, sv = rep.operator(u), rep.operator(v)
        up, wp = rep.preimages(u), rep.preimages(w)

        os.environ.pop("SHIFTCA_PURE_NUMPY", None)
        quadruple_product(su, sv, up, wp)  # warm the jit cache
        t_fast, out_fast = timed(su, sv, up, wp)

        os.environ["SHIFTCA_PURE_NUMPY"] = "1"
        t_pure, out_pure = timed(su, sv, up, wp)
        os.environ.pop("SHIFTCA_PURE_NUMPY", None)

        assert np.array_equal(out_fast, out_pure), "backends disagree"
        fu, fv, fw = ("".join(x) or "eps" for x in (u, v, w))
        print(
            f"{fu:>8} {fv:>8} {fw:>8} {t_fast * 1e3:>8.2f}ms "
            f"{t_pure * 1e3:>8.2f}ms {t_pure / t_fast:>7.1f}x"
        )


if __name__ == "__main__":
    main()
