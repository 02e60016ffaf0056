"""Hot scatter/gather kernels with a numba path and a pure-numpy fallback.

Set ``MINIMOOSE_DISABLE_NUMBA=1`` to force the numpy implementations. Both
paths accumulate in identical (C) order, so results are bitwise equal.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("MINIMOOSE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag in CI
    njit = None

USING_NUMBA = njit is not None


def _np_scatter_add(out, index, values):
    np.add.at(out, index.ravel(), values.ravel())


def _np_gather(source, index):
    return source[index]


def _np_zero_rows(data, indptr, rows, diag_pos):
    for r, d in zip(rows, diag_pos):
        data[indptr[r] : indptr[r + 1]] = 0.0
        data[d] = 1.0


if USING_NUMBA:

    @njit(cache=True)
    def _nb_scatter_add(out, index, values):
        idx = index.ravel()
        vals = values.ravel()
        for k in range(idx.shape[0]):
            out[idx[k]] += vals[k]

    @njit(cache=True)
    def _nb_gather(source, index):
        flat = index.ravel()
        res = np.empty(flat.shape[0], dtype=source.dtype)
        for k in range(flat.shape[0]):
            res[k] = source[flat[k]]
        return res.reshape(index.shape)

    @njit(cache=True)
    def _nb_zero_rows(data, indptr, rows, diag_pos):
        for k in range(rows.shape[0]):
            r = rows[k]
            for j in range(indptr[r], indptr[r + 1]):
                data[j] = 0.0
            data[diag_pos[k]] = 1.0


def scatter_add(out, index, values, use_numba=None):
    """``out[index[k]] += values[k]`` sequentially in C order of ``index``."""
    use = USING_NUMBA if use_numba is None else (use_numba and USING_NUMBA)
    index = np.ascontiguousarray(index, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if use:
        _nb_scatter_add(out, index, values)
    else:
        _np_scatter_add(out, index, values)
    return out


def gather(source, index, use_numba=None):
    use = USING_NUMBA if use_numba is None else (use_numba and USING_NUMBA)
    if use:
        return _nb_gather(np.ascontiguousarray(source, dtype=np.float64), np.ascontiguousarray(index, dtype=np.int64))
    return _np_gather(source, index)


def replace_rows_with_identity(data, indptr, rows, diag_pos, use_numba=None):
    use = USING_NUMBA if use_numba is None else (use_numba and USING_NUMBA)
    rows = np.asarray(rows, dtype=np.int64)
    diag_pos = np.asarray(diag_pos, dtype=np.int64)
    if use:
        _nb_zero_rows(data, np.asarray(indptr, dtype=np.int64), rows, diag_pos)
    else:
        _np_zero_rows(data, indptr, rows, diag_pos)
    return data
