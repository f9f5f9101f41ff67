"""Initial autocovariance estimators: empirical, known-mean, and windowed.

Centering mode is encoded by the optional ``mean`` argument: ``None`` centers
at the sample mean, a float centers at that known mean.  The divisor is the
full sample length ``M`` at every lag, never ``M - k``; the zero-sum identity
(the two-sided sum of the sample-mean-centered autocovariance vanishes)
depends on this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_samples, check_positive_int
from .sequences import LagSequence

__all__ = [
    "WindowSpec",
    "empirical_autocov",
    "apply_window",
    "gamma_pairs",
    "validate_initial_conditions",
    "InitialConditionsReport",
]

_WINDOW_KINDS = ("none", "truncation", "parzen")


@dataclass(frozen=True)
class WindowSpec:
    """Lag-window description.

    ``kind`` is one of ``none`` (identity), ``truncation`` (hard cutoff at the
    threshold), or ``parzen`` with exponent ``q`` (weight ``1 - (k/b)**q`` below
    the threshold ``b``, zero at and beyond it).  ``parzen`` with ``q == 1`` is
    the modified Bartlett window.
    """

    kind: str = "none"
    threshold: int | None = None
    q: int = 1

    def __post_init__(self):
        if self.kind not in _WINDOW_KINDS:
            raise ValueError(f"kind must be one of {_WINDOW_KINDS}, got {self.kind!r}")
        if self.kind != "none":
            object.__setattr__(self, "threshold", check_positive_int(self.threshold, "threshold"))
            object.__setattr__(self, "q", check_positive_int(self.q, "q"))

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def truncation(cls, threshold):
        return cls("truncation", threshold)

    @classmethod
    def parzen(cls, threshold, q):
        return cls("parzen", threshold, q)

    @classmethod
    def bartlett(cls, threshold):
        return cls("parzen", threshold, 1)

    def weights(self, n_lags):
        """Window weights at lags ``0..n_lags-1`` (all within the threshold)."""
        k = np.arange(n_lags)
        if self.kind == "parzen":
            return 1.0 - (k / self.threshold) ** self.q
        return np.ones(n_lags)


def empirical_autocov(samples, mean=None, max_lag=None):
    """Empirical autocovariance at lags ``0..L-1`` with divisor ``M`` throughout.

    Parameters
    ----------
    samples : array-like of shape (M,)
        Chain output; must be finite with M >= 2.
    mean : float or None
        Known process mean.  ``None`` centers at the sample mean instead.
    max_lag : int or None
        Cap on the number of stored lags; default keeps all ``M`` lags.

    Returns
    -------
    LagSequence
    """
    x = as_samples(samples)
    m_len = x.size
    if max_lag is None:
        n_lags = m_len
    else:
        n_lags = min(check_positive_int(max_lag, "max_lag"), m_len)
    center = x.mean() if mean is None else float(mean)
    if not np.isfinite(center):
        raise ValueError("mean must be finite")
    dev = x - center
    values = np.empty(n_lags)
    for k in range(n_lags):
        values[k] = np.dot(dev[: m_len - k], dev[k:]) / m_len
    return LagSequence(values)


def apply_window(r, window):
    """Multiply a lag sequence by a window; support shrinks to the threshold."""
    if window.kind == "none":
        return r
    n = min(len(r), window.threshold)
    return LagSequence(r.values[:n] * window.weights(n))


def gamma_pairs(r):
    """Rolling pair sums ``r(2k) + r(2k+1)`` for ``k = 0..ceil(L/2)-1``.

    Lags beyond the support read as zero, matching the convention that the
    sequence vanishes there.
    """
    v = r.values
    if v.size % 2:
        v = np.concatenate([v, [0.0]])
    return v[0::2] + v[1::2]


@dataclass(frozen=True)
class InitialConditionsReport:
    """Eligibility report for an initial autocovariance sequence.

    Symmetry and finite support hold structurally for any ``LagSequence``.
    The peak-at-zero condition ``r(0) >= |r(k)|`` is checked within a relative
    float tolerance; violating lags are listed.  Elementwise convergence to
    the true autocovariance is an asymptotic property of the estimator family
    and cannot be checked on a single sample, which ``notes`` records.
    """

    ok: bool
    peak_violations: tuple[int, ...]
    notes: str


def validate_initial_conditions(r, rel_tol=1e-12):
    """Check the single-sample eligibility conditions for projection input."""
    v = r.values
    slack = rel_tol * max(1.0, abs(v[0]))
    bad = np.nonzero(np.abs(v[1:]) > v[0] + slack)[0] + 1
    notes = (
        "symmetry and finite support are structural; "
        "elementwise convergence is asymptotic and not checkable on one sample"
    )
    return InitialConditionsReport(
        ok=(bad.size == 0),
        peak_violations=tuple(int(k) for k in bad),
        notes=notes,
    )
