"""Reference asymptotic-variance estimators used for comparison studies.

Batch means, overlapping batch means, the Bartlett-window spectral estimator,
and the initial positive / monotone / convex sequence estimators.  All are
pure functions of the sample array.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_samples, check_positive_int
from .autocov import WindowSpec, apply_window, empirical_autocov, gamma_pairs

__all__ = [
    "batch_means",
    "overlapping_batch_means",
    "spectral_bartlett",
    "initial_seq",
    "initial_seq_from_autocov",
    "greatest_convex_minorant",
    "INIT_SEQ_KINDS",
]

INIT_SEQ_KINDS = ("positive", "monotone", "convex")


def batch_means(samples, batch_size):
    """Batch-means estimate with non-overlapping batches starting at 0, b, 2b, ...

    Uses ``floor(M / b)`` full batches (a trailing partial batch is discarded)
    but centers deviations at the mean of all ``M`` samples.
    """
    x = as_samples(samples)
    b = check_positive_int(batch_size, "batch_size")
    n_batches = x.size // b
    if n_batches < 2:
        raise ValueError(
            f"need at least 2 full batches, got {n_batches} (M={x.size}, b={b})"
        )
    means = x[: n_batches * b].reshape(n_batches, b).mean(axis=1)
    dev = means - x.mean()
    return float(b / (n_batches - 1) * np.dot(dev, dev))


def overlapping_batch_means(samples, batch_size):
    """Overlapping batch-means estimate over all ``M - b + 1`` window starts."""
    x = as_samples(samples)
    b = check_positive_int(batch_size, "batch_size")
    m_len = x.size
    if b >= m_len:
        raise ValueError(f"batch_size must be < M, got b={b}, M={m_len}")
    sums = np.convolve(x, np.ones(b), mode="valid")
    dev = sums / b - x.mean()
    factor = m_len * b / ((m_len - b) * (m_len - b + 1))
    return float(factor * np.dot(dev, dev))


def spectral_bartlett(samples, batch_size):
    """Spectral variance estimate at frequency zero under the Bartlett window:
    the two-sided sum of the windowed empirical autocovariance."""
    x = as_samples(samples)
    b = check_positive_int(batch_size, "batch_size")
    r = empirical_autocov(x, max_lag=min(b, x.size))
    windowed = apply_window(r, WindowSpec.bartlett(b))
    return windowed.sum_two_sided()


def greatest_convex_minorant(values):
    """Pointwise-largest convex sequence lying below the input.

    Lower convex hull of the points ``(k, y_k)`` evaluated at the integers.
    Hull vertices keep their input values exactly and the result never
    exceeds the input.
    """
    y = np.asarray(values, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("need a 1-D sequence with at least one entry")
    n = y.size
    if n == 1:
        return y.copy()
    hull = [0]
    for i in range(1, n):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # pop while the slope would decrease through the middle point
            if (y[i1] - y[i0]) * (i - i1) <= (y[i] - y[i1]) * (i1 - i0):
                break
            hull.pop()
        hull.append(i)
    out = np.empty(n)
    for a, b in zip(hull[:-1], hull[1:]):
        out[a] = y[a]
        span = b - a
        for k in range(a + 1, b):
            out[k] = (y[a] * (b - k) + y[b] * (k - a)) / span
    out[hull[-1]] = y[hull[-1]]
    # guard the minorant property against interpolation rounding
    return np.minimum(out, y)


def _shaped_pair_sums(pair_sums, kind):
    if kind == "positive":
        return pair_sums
    if kind == "monotone":
        return np.minimum.accumulate(pair_sums)
    if kind == "convex":
        # hull of the monotone sequence so the three variants are ordered
        return greatest_convex_minorant(np.minimum.accumulate(pair_sums))
    raise ValueError(f"kind must be one of {INIT_SEQ_KINDS}, got {kind!r}")


def initial_seq_from_autocov(r, kind):
    """Initial-sequence estimate from an already-computed autocovariance.

    The pair sums ``r(2k) + r(2k+1)`` are truncated at the first negative
    entry (or kept whole when none exists), shape-corrected per ``kind``, and
    combined as ``-r(0) + 2 * sum``.
    """
    pair = gamma_pairs(r)
    negative = np.nonzero(pair < 0.0)[0]
    cutoff = int(negative[0]) if negative.size else pair.size
    if cutoff == 0:
        raise ValueError(
            "pair sum at index 0 is negative; the initial-sequence estimate is undefined"
        )
    shaped = _shaped_pair_sums(pair[:cutoff], kind)
    return float(-r.values[0] + 2.0 * np.sum(shaped))


def initial_seq(samples, kind):
    """Initial-sequence asymptotic-variance estimate from raw samples.

    ``kind`` selects the shape correction applied to the truncated pair-sum
    sequence: ``positive`` (none), ``monotone`` (running minimum), or
    ``convex`` (greatest convex minorant of the running minimum).
    """
    x = as_samples(samples)
    return initial_seq_from_autocov(empirical_autocov(x), kind)
