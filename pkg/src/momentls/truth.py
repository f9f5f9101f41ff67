"""Exact ground truth for the two simulation settings.

For a finite-state reversible kernel the autocovariance sequence of ``g`` is a
mixture of geometric sequences located at the kernel's non-unit eigenvalues,
with weights given by squared stationary-weighted projections of ``g`` onto
the eigenvectors.  For the stationary AR(1) chain the mixture is a single atom
at the autoregressive coefficient.  Bundles also carry the constants needed to
tune the rival estimators: the asymptotic variance, the spectral gap implied
by the mixture support, and mean-squared-error optimal batch sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int
from .projection import sigma2_of_measure
from .sequences import DiscreteMeasure, LagSequence, materialize

__all__ = [
    "TruthBundle",
    "discrete_truth",
    "ar1_truth",
    "oracle_delta",
    "optimal_batch_sizes",
]

_WEIGHT_FLOOR = 1e-14


@dataclass(frozen=True)
class TruthBundle:
    """Exact autocovariance truth for one chain model and chain length.

    ``gamma_bs`` is the batch-size constant ``-2 * sum_{s>=1} s * gamma(s)``
    (distinct from the pair-sum sequence used by initial-sequence estimators,
    despite the similar traditional symbol).  ``b_bm`` and ``b_obm`` are the
    mean-squared-error optimal batch sizes for ``chain_length``; the Bartlett
    window threshold equals ``b_obm``.
    """

    gamma: LagSequence
    measure: DiscreteMeasure
    sigma2: float
    delta0: float
    gamma_bs: float
    b_bm: int
    b_obm: int
    chain_length: int

    def to_dict(self):
        return {
            "gamma": [float(v) for v in self.gamma.values],
            "atoms": [[float(a), float(w)] for a, w in self.measure.atoms],
            "sigma2": self.sigma2,
            "delta0": self.delta0,
            "gamma_bs": self.gamma_bs,
            "b_bm": self.b_bm,
            "b_obm": self.b_obm,
            "chain_length": self.chain_length,
        }


def _bundle(measure, lags, chain_length):
    sigma2 = sigma2_of_measure(measure)
    loc = measure.locations
    delta0 = 1.0 - float(np.max(np.abs(loc))) if loc.size else 1.0
    if loc.size:
        gamma_bs = -2.0 * float(np.dot(measure.weights, loc / (1.0 - loc) ** 2))
    else:
        gamma_bs = 0.0
    if sigma2 > 0.0:
        b_bm, b_obm = optimal_batch_sizes(sigma2, gamma_bs, chain_length)
    else:
        b_bm = b_obm = 1  # degenerate target; batch size is irrelevant
    return TruthBundle(
        gamma=materialize(measure, lags),
        measure=measure,
        sigma2=sigma2,
        delta0=delta0,
        gamma_bs=gamma_bs,
        b_bm=b_bm,
        b_obm=b_obm,
        chain_length=chain_length,
    )


def discrete_truth(model, lags, chain_length):
    """Exact truth for a finite-state reversible model.

    Eigendecomposes the stationary-weight symmetrization of the kernel (a
    symmetric matrix because the kernel is reversible), normalizes the
    eigenvectors to be orthonormal under the stationary weights, and builds
    the mixture from all non-unit eigenpairs, flooring negligible weights.

    Raises ``ValueError`` when a non-unit eigenvalue has modulus >= 1 (the
    model would not be ergodic).
    """
    lags = check_positive_int(lags, "lags")
    chain_length = check_positive_int(chain_length, "chain_length")
    sqrt_pi = np.sqrt(model.pi)
    sym = sqrt_pi[:, None] * model.kernel / sqrt_pi[None, :]
    eigvals, eigvecs = np.linalg.eigh(sym)
    stationary = int(np.argmax(eigvals))  # the unit eigenvalue is the largest
    rest = np.delete(np.arange(model.d), stationary)
    if np.max(np.abs(eigvals[rest])) >= 1.0:
        raise ValueError("model is not ergodic: a non-unit eigenvalue has modulus >= 1")
    g_centered = model.g - float(np.dot(model.pi, model.g))
    projections = (sqrt_pi * g_centered) @ eigvecs
    weights = projections[rest] ** 2
    keep = weights > _WEIGHT_FLOOR
    measure = DiscreteMeasure(eigvals[rest][keep], weights[keep])
    return _bundle(measure, lags, chain_length)


def ar1_truth(rho, tau, lags, chain_length):
    """Exact truth for the stationary AR(1) chain with the identity function:
    a single atom at ``rho`` with weight ``tau^2 / (1 - rho^2)``."""
    if not abs(rho) < 1.0:
        raise ValueError(f"|rho| must be < 1, got {rho!r}")
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    lags = check_positive_int(lags, "lags")
    chain_length = check_positive_int(chain_length, "chain_length")
    measure = DiscreteMeasure([rho], [tau * tau / (1.0 - rho * rho)])
    return _bundle(measure, lags, chain_length)


def oracle_delta(measure):
    """Largest half-gap that keeps the mixture support feasible:
    ``1 - max_i |a_i|``.  Undefined (error) for an empty measure."""
    if measure.n_atoms == 0:
        raise ValueError("oracle delta is undefined for an empty measure")
    if np.max(np.abs(measure.locations)) >= 1.0:
        raise ValueError("oracle delta requires all atom locations in (-1, 1)")
    return 1.0 - float(np.max(np.abs(measure.locations)))


def optimal_batch_sizes(sigma2, gamma_bs, chain_length):
    """Mean-squared-error optimal batch sizes for batch means and overlapping
    batch means: ``(gamma_bs^2 M / sigma2)^(1/3)`` and
    ``(8 gamma_bs^2 M / (3 sigma2))^(1/3)``, rounded half-up to the nearest
    integer and clamped to ``[1, M-1]``."""
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    chain_length = check_positive_int(chain_length, "chain_length")
    base = gamma_bs * gamma_bs * chain_length / sigma2
    raw_bm = base ** (1.0 / 3.0)
    raw_obm = (8.0 / 3.0 * base) ** (1.0 / 3.0)
    upper = max(1, chain_length - 1)

    def _round_clamp(value):
        return int(min(max(np.floor(value + 0.5), 1), upper))

    return _round_clamp(raw_bm), _round_clamp(raw_obm)
