"""Pure numpy implementation of the support-enumeration kernels.

Supports are processed in lexicographic chunks; each chunk's principal
submatrices are gathered into one stacked array and handed to a batched
symmetric eigensolver.
"""

from __future__ import annotations

import itertools

import numpy as np

CHUNK = 1 << 15


def _chunk_extremes(gram, supports):
    sub = gram[supports[:, :, None], supports[:, None, :]]
    eig = np.linalg.eigvalsh(sub)
    lo, hi = eig[:, 0], eig[:, -1]
    i, j = int(np.argmin(lo)), int(np.argmax(hi))
    return lo[i], hi[j], supports[i], supports[j]


def _scan(gram, chunks):
    best_lo, best_hi = np.inf, -np.inf
    lo_sup = hi_sup = None
    count = 0
    for supports in chunks:
        lo, hi, s_lo, s_hi = _chunk_extremes(gram, supports)
        count += len(supports)
        # strict comparisons keep the lexicographically first extreme
        if lo < best_lo:
            best_lo, lo_sup = lo, s_lo
        if hi > best_hi:
            best_hi, hi_sup = hi, s_hi
    return (float(best_lo), float(best_hi), tuple(int(i) for i in lo_sup),
            tuple(int(i) for i in hi_sup), count)


def enumerate_extremes(gram, order):
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    n = gram.shape[0]
    if order < 1 or order > n:
        raise ValueError(f"order must be in [1, {n}], got {order}")

    def chunks():
        combos = itertools.combinations(range(n), order)
        while True:
            flat = np.fromiter(
                itertools.chain.from_iterable(itertools.islice(combos, CHUNK)),
                dtype=np.intp,
            )
            if flat.size == 0:
                return
            yield flat.reshape(-1, order)

    return _scan(gram, chunks())


def sampled_extremes(gram, supports):
    gram = np.ascontiguousarray(gram, dtype=np.float64)
    supports = np.ascontiguousarray(supports, dtype=np.intp)
    if supports.ndim != 2 or supports.shape[0] < 1 or supports.shape[1] < 1:
        raise ValueError("supports must be a non-empty 2-d array")
    return _scan(gram, (supports[i:i + CHUNK] for i in range(0, len(supports), CHUNK)))
