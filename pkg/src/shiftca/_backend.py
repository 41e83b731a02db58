"""Kernel backends for the truncated-representation product loops.

The only hot spot in the package is the four-factor partial-isometry
product used by the representation checks: for partial maps ``s_u``,
``s_v``, ``s_w`` on the word basis it accumulates, column by column, the
integer matrix of ``s_v s_u^T s_u s_w^T``.  Everything else in the
package is cheap by comparison.

Two interchangeable implementations live here:

* a numba ``@njit`` kernel (plain nested loops, compiled on first use),
* a pure numpy version that vectorises the inner gather.

Both fill a caller-allocated output: ``np.zeros`` gets its pages from
calloc, and the product is sparse enough that forcing a dense clear
inside a jit kernel would cost more than the arithmetic.

The compiled kernel is used when numba imports cleanly and the
``SHIFTCA_PURE_NUMPY`` environment variable is unset or empty; setting
the variable to any non-empty value forces the numpy path.  The choice
is re-evaluated on every call so tests can flip the flag at runtime.
``benchmarks/bench_kernels.py`` times one against the other.

Partial maps are dense ``int64`` arrays where ``arr[i]`` is the image
basis index and ``-1`` means the basis vector is annihilated.  Preimage
families use a CSR-style pair ``(indptr, data)``: the preimages of
basis index ``m`` are ``data[indptr[m]:indptr[m + 1]]``.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "SHIFTCA_PURE_NUMPY"


def _pure_fill(out, su, sv, u_indptr, u_data, w_indptr, w_data):
    n = su.shape[0]
    for col in range(n):
        for z in w_data[w_indptr[col] : w_indptr[col + 1]]:
            m = su[z]
            if m < 0:
                continue
            xs = sv[u_data[u_indptr[m] : u_indptr[m + 1]]]
            xs = xs[xs >= 0]
            # np.add.at, not fancy-index +=, so repeated hits accumulate
            np.add.at(out[:, col], xs, 1)


def _loop_fill(out, su, sv, u_indptr, u_data, w_indptr, w_data):
    n = su.shape[0]
    for col in range(n):
        for iz in range(w_indptr[col], w_indptr[col + 1]):
            m = su[w_data[iz]]
            if m < 0:
                continue
            for iy in range(u_indptr[m], u_indptr[m + 1]):
                x = sv[u_data[iy]]
                if x >= 0:
                    out[x, col] += 1


try:  # pragma: no cover - exercised indirectly via backend_name()
    from numba import njit

    _njit_fill = njit(cache=True)(_loop_fill)
except ImportError:  # pragma: no cover
    _njit_fill = None


def using_pure() -> bool:
    """True when the numpy fallback is active (flag set or numba absent)."""
    if _njit_fill is None:
        return True
    return bool(os.environ.get(ENV_FLAG))


def backend_name() -> str:
    return "pure-numpy" if using_pure() else "numba"


def quadruple_product(su, sv, u_preimages, w_preimages):
    """Integer matrix of ``s_v s_u^T s_u s_w^T`` on the word basis.

    ``su``/``sv`` are dense partial maps; ``u_preimages`` and
    ``w_preimages`` are the CSR preimage pairs of ``s_u`` and ``s_w``.
    Column ``c`` of the result counts, for every basis vector ``z`` with
    ``s_w(z) = c``, the chains ``z -> s_u(z) = s_u(y) -> s_v(y)``.
    """
    u_indptr, u_data = u_preimages
    w_indptr, w_data = w_preimages
    n = su.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    if using_pure():
        _pure_fill(out, su, sv, u_indptr, u_data, w_indptr, w_data)
    else:
        _njit_fill(out, su, sv, u_indptr, u_data, w_indptr, w_data)
    return out
