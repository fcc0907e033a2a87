"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

Backend selection is controlled by the SEQLCD_BACKEND environment variable at
import time: "numba" (require numba), "numpy" (force the fallback), or "auto"
(default: numba when importable).

All kernels fill a sub-range of a preallocated output array so callers can
chunk work across threads; every cell is computed independently with a fixed
inner summation order, so results are byte-identical for any chunking.
"""

from __future__ import annotations

import os

import numpy as np

from seqlcd.errors import ConfigError

_requested = os.environ.get("SEQLCD_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numba", "numpy"):
    raise ConfigError(
        f"SEQLCD_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

_have_numba = False
if _requested in ("auto", "numba"):
    try:
        import numba

        _have_numba = True
    except ImportError:
        if _requested == "numba":
            raise ConfigError("SEQLCD_BACKEND=numba but numba is not importable")

BACKEND = "numba" if _have_numba else "numpy"


# --- pure-numpy implementations -------------------------------------------


_PAIRWISE_BLOCK = 16  # rows per broadcasted block; bounds temp memory


def pairwise_sad_numpy(ref: np.ndarray, test: np.ndarray, out: np.ndarray,
                       row0: int, row1: int) -> None:
    n, dim = test.shape
    buf = np.empty((_PAIRWISE_BLOCK, n, dim))
    for b0 in range(row0, row1, _PAIRWISE_BLOCK):
        b1 = min(b0 + _PAIRWISE_BLOCK, row1)
        work = buf[: b1 - b0]
        np.subtract(ref[b0:b1, None, :], test[None, :, :], out=work)
        np.abs(work, out=work)
        work.sum(axis=2, out=out[b0:b1])


def pairwise_euclid_sq_numpy(ref: np.ndarray, test: np.ndarray, out: np.ndarray,
                             row0: int, row1: int) -> None:
    n, dim = test.shape
    buf = np.empty((_PAIRWISE_BLOCK, n, dim))
    for b0 in range(row0, row1, _PAIRWISE_BLOCK):
        b1 = min(b0 + _PAIRWISE_BLOCK, row1)
        work = buf[: b1 - b0]
        np.subtract(ref[b0:b1, None, :], test[None, :, :], out=work)
        np.multiply(work, work, out=work)
        work.sum(axis=2, out=out[b0:b1])


def enhance_columns_numpy(d: np.ndarray, radius: int, eps: float,
                          out: np.ndarray, col0: int, col1: int) -> None:
    # Two-pass windowed z-score via shifted accumulation. The shifts run in
    # ascending window order, matching the jitted kernel's summation order.
    x = d[:, col0:col1]
    m = x.shape[0]
    idx = np.arange(m)
    counts = (np.minimum(idx + radius, m - 1) - np.maximum(idx - radius, 0) + 1.0)
    acc = np.zeros_like(x)
    for delta in range(-radius, radius + 1):
        i0 = max(0, -delta)
        i1 = min(m - 1, m - 1 - delta)
        if i0 > i1:
            continue
        acc[i0 : i1 + 1] += x[i0 + delta : i1 + 1 + delta]
    mean = acc / counts[:, None]
    acc = np.zeros_like(x)
    for delta in range(-radius, radius + 1):
        i0 = max(0, -delta)
        i1 = min(m - 1, m - 1 - delta)
        if i0 > i1:
            continue
        dev = x[i0 + delta : i1 + 1 + delta] - mean[i0 : i1 + 1]
        acc[i0 : i1 + 1] += dev * dev
    sigma = np.sqrt(acc / counts[:, None])
    out[:, col0:col1] = (x - mean) / np.maximum(sigma, eps)


def best_routes_numpy(dhat: np.ndarray, offsets: np.ndarray, d_s: int,
                      t0: int, t1: int, out_score: np.ndarray,
                      out_s: np.ndarray, out_v: np.ndarray,
                      block: int = 64) -> None:
    # Route scores for all start rows at once, one velocity at a time:
    # score[s, T] = sum_t' dhat[s + offsets[v, t'], T - d_s + t'].
    m, _ = dhat.shape
    nv = offsets.shape[0]
    for c0 in range(t0, t1, block):
        c1 = min(c0 + block, t1)
        width = c1 - c0
        scores = np.full((nv, m, width), np.inf)
        for v in range(nv):
            last = int(offsets[v, d_s])
            m_valid = m - last
            if m_valid <= 0:
                continue
            acc = np.zeros((m_valid, width))
            for tp in range(d_s + 1):
                off = int(offsets[v, tp])
                col = c0 - d_s + tp
                acc += dhat[off : off + m_valid, col : col + width]
            scores[v, :m_valid, :] = acc
        # First occurrence of the minimum over flattened (s, v) gives the
        # (lower s, then lower V) tie-break.
        flat = scores.transpose(2, 1, 0).reshape(width, m * nv)
        best = np.argmin(flat, axis=1)
        vals = flat[np.arange(width), best]
        out_score[c0:c1] = vals
        out_s[c0:c1] = best // nv
        out_v[c0:c1] = best % nv


# --- numba implementations --------------------------------------------------

if _have_numba:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _pairwise_sad_jit(ref, test, out, row0, row1):  # pragma: no cover - jitted
        n, dim = test.shape
        for i in range(row0, row1):
            for j in range(n):
                acc = 0.0
                for k in range(dim):
                    diff = ref[i, k] - test[j, k]
                    acc += diff if diff >= 0.0 else -diff
                out[i, j] = acc

    @_jit
    def _pairwise_euclid_sq_jit(ref, test, out, row0, row1):  # pragma: no cover
        n, dim = test.shape
        for i in range(row0, row1):
            for j in range(n):
                acc = 0.0
                for k in range(dim):
                    diff = ref[i, k] - test[j, k]
                    acc += diff * diff
                out[i, j] = acc

    @_jit
    def _enhance_columns_jit(d, radius, eps, out, col0, col1):  # pragma: no cover
        m = d.shape[0]
        for j in range(col0, col1):
            for i in range(m):
                lo = i - radius
                if lo < 0:
                    lo = 0
                hi = i + radius
                if hi > m - 1:
                    hi = m - 1
                w = hi - lo + 1
                acc = 0.0
                for k in range(lo, hi + 1):
                    acc += d[k, j]
                mean = acc / w
                acc = 0.0
                for k in range(lo, hi + 1):
                    dev = d[k, j] - mean
                    acc += dev * dev
                sigma = np.sqrt(acc / w)
                if sigma < eps:
                    sigma = eps
                out[i, j] = (d[i, j] - mean) / sigma

    @_jit
    def _best_routes_jit(dhat, offsets, d_s, t0, t1, out_score, out_s, out_v):  # pragma: no cover
        m = dhat.shape[0]
        nv = offsets.shape[0]
        for t in range(t0, t1):
            best = np.inf
            best_s = -1
            best_v = -1
            for s in range(m):
                for v in range(nv):
                    if s + offsets[v, d_s] > m - 1:
                        continue
                    acc = 0.0
                    for tp in range(d_s + 1):
                        acc += dhat[s + offsets[v, tp], t - d_s + tp]
                    if acc < best:
                        best = acc
                        best_s = s
                        best_v = v
            out_score[t] = best
            out_s[t] = best_s
            out_v[t] = best_v

    def pairwise_sad_numba(ref, test, out, row0, row1):
        _pairwise_sad_jit(ref, test, out, row0, row1)

    def pairwise_euclid_sq_numba(ref, test, out, row0, row1):
        _pairwise_euclid_sq_jit(ref, test, out, row0, row1)

    def enhance_columns_numba(d, radius, eps, out, col0, col1):
        _enhance_columns_jit(d, radius, eps, out, col0, col1)

    def best_routes_numba(dhat, offsets, d_s, t0, t1, out_score, out_s, out_v):
        _best_routes_jit(dhat, offsets, d_s, t0, t1, out_score, out_s, out_v)


if BACKEND == "numba":
    pairwise_sad = pairwise_sad_numba
    pairwise_euclid_sq = pairwise_euclid_sq_numba
    enhance_columns = enhance_columns_numba
    best_routes = best_routes_numba
else:
    pairwise_sad = pairwise_sad_numpy
    pairwise_euclid_sq = pairwise_euclid_sq_numpy
    enhance_columns = enhance_columns_numpy
    best_routes = best_routes_numpy
