"""Pure-numpy fallback implementations of the hot kernels.

Semantically identical to the compiled Cython versions in ``_ckernels``;
the compiled versions only exist for speed. Keep the two in lockstep.
"""

import numpy as np

IMPLEMENTATION = "python"


def local_maxima_prominences(signal):
    """All interior local maxima with their topographic prominences.

    A plateau (run of equal values strictly above both flanking samples)
    yields one maximum at its leftmost index. Boundary samples never
    qualify. Prominence is value minus the higher of the two window
    minima, each window extending from the peak until a strictly higher
    sample or the signal end.

    Returns (indices, prominences) as int64/float64 arrays.
    """
    x = np.asarray(signal, dtype=np.float64)
    n = x.shape[0]
    idx = []
    prom = []
    i = 1
    while i < n - 1:
        if x[i] <= x[i - 1]:
            i += 1
            continue
        # x[i] > x[i-1]; scan the plateau of equal values
        j = i
        while j + 1 < n and x[j + 1] == x[i]:
            j += 1
        if j + 1 < n and x[j + 1] < x[i]:
            # left base: min until a strictly higher sample or the start
            left_min = x[i]
            k = i - 1
            while k >= 0 and x[k] <= x[i]:
                if x[k] < left_min:
                    left_min = x[k]
                k -= 1
            right_min = x[i]
            k = j + 1
            while k < n and x[k] <= x[i]:
                if x[k] < right_min:
                    right_min = x[k]
                k += 1
            idx.append(i)
            prom.append(x[i] - max(left_min, right_min))
        i = j + 1
    return np.asarray(idx, dtype=np.int64), np.asarray(prom, dtype=np.float64)


def midrank(values):
    """Average ranks (1-based) with mid-ranks for ties."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    n = x.shape[0]
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def spearman_rho(xs, ys):
    """Spearman rho as Pearson correlation of mid-ranks.

    Returns nan when either input is constant.
    """
    rx = midrank(xs)
    ry = midrank(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0.0:
        return float("nan")
    return float(np.dot(rx, ry) / denom)
