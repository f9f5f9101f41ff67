"""Seeded simulators: a stationary AR(1) chain and a random discrete-state
Metropolis-Hastings chain.

Randomness comes from numpy's PCG64 generator seeded through ``SeedSequence``;
independent substreams are derived with ``spawn_key`` paths so that parallel
replications are reproducible and adding consumers never perturbs existing
streams.  Given the same seed and numpy version, output is bit-reproducible
across runs and platforms.  Both chains start at stationarity (the initial
state is drawn exactly from the stationary law; no burn-in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from ._validation import check_positive_int

__all__ = [
    "Ar1Spec",
    "DiscreteChainModel",
    "rng_stream",
    "simulate_ar1",
    "build_random_mh",
    "simulate_discrete",
]

_ROW_TOL = 1e-12


def rng_stream(base_seed, *path):
    """Independent generator for a substream identified by an integer path.

    ``rng_stream(seed)`` is the root stream; ``rng_stream(seed, a, b, ...)``
    derives a child keyed by ``(a, b, ...)`` via ``SeedSequence(spawn_key=...)``.
    """
    path = tuple(int(p) for p in path)
    if any(p < 0 for p in path):
        raise ValueError("stream path components must be nonnegative integers")
    seq = np.random.SeedSequence(int(base_seed), spawn_key=path)
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Ar1Spec:
    """Stationary AR(1) chain: ``X_{t+1} = rho X_t + eps_{t+1}`` with
    ``eps ~ N(0, tau^2)`` and ``X_0`` drawn from ``N(0, tau^2 / (1 - rho^2))``."""

    rho: float
    tau: float
    length: int
    seed: int

    def __post_init__(self):
        if not abs(self.rho) < 1.0:
            raise ValueError(f"|rho| must be < 1, got {self.rho!r}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if self.length < 2:
            raise ValueError(f"length must be >= 2, got {self.length!r}")


def simulate_ar1(spec):
    """Simulate the chain described by an ``Ar1Spec``; deterministic per seed."""
    return _simulate_ar1(spec.rho, spec.tau, spec.length, rng_stream(spec.seed))


def _simulate_ar1(rho, tau, length, rng):
    x0 = rng.normal(0.0, tau / np.sqrt(1.0 - rho * rho))
    eps = rng.normal(0.0, tau, size=length - 1)
    out = np.empty(length)
    out[0] = x0
    # exact linear recursion x[t] = rho * x[t-1] + eps[t]
    out[1:] = scipy.signal.lfilter([1.0], [1.0, -rho], eps, zi=[rho * x0])[0]
    return out


@dataclass(frozen=True)
class DiscreteChainModel:
    """Finite-state Metropolis-Hastings model.

    ``pi`` is the stationary distribution, ``proposal`` the row-stochastic
    proposal matrix, ``kernel`` the induced Metropolis-Hastings kernel
    (reversible with respect to ``pi`` by construction), and ``g`` the function
    values whose averages the estimators target.
    """

    d: int
    pi: np.ndarray
    proposal: np.ndarray
    kernel: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        pi, proposal, kernel, g = (
            np.asarray(self.pi, float),
            np.asarray(self.proposal, float),
            np.asarray(self.kernel, float),
            np.asarray(self.g, float),
        )
        d = int(self.d)
        if pi.shape != (d,) or g.shape != (d,):
            raise ValueError("pi and g must be length-d vectors")
        if proposal.shape != (d, d) or kernel.shape != (d, d):
            raise ValueError("proposal and kernel must be d x d matrices")
        if np.any(pi <= 0.0) or abs(pi.sum() - 1.0) > _ROW_TOL:
            raise ValueError("pi must be strictly positive and sum to 1")
        for name, mat in (("proposal", proposal), ("kernel", kernel)):
            if np.any(mat < 0.0):
                raise ValueError(f"{name} has negative entries")
            if np.max(np.abs(mat.sum(axis=1) - 1.0)) > _ROW_TOL:
                raise ValueError(f"{name} rows must sum to 1")
        flux = pi[:, None] * kernel
        if np.max(np.abs(flux - flux.T)) > _ROW_TOL:
            raise ValueError("kernel is not reversible with respect to pi")
        for field, arr in (("pi", pi), ("proposal", proposal), ("kernel", kernel), ("g", g)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, field, arr)
        object.__setattr__(self, "d", d)


def build_random_mh(d, seed):
    """Random model on ``d`` states: stationary weights and proposal rows from
    normalized iid Uniform(0, 1) draws, standard normal function values, and
    the Metropolis-Hastings acceptance rule applied to the proposal."""
    d = check_positive_int(d, "d")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    rng = rng_stream(seed)
    u = rng.uniform(size=d)
    pi = u / u.sum()
    v = rng.uniform(size=(d, d))
    proposal = v / v.sum(axis=1, keepdims=True)
    g = rng.normal(size=d)

    # acceptance: Q_ij = P_ij * min(1, pi_j P_ji / (pi_i P_ij)) for j != i,
    # computed as min(pi_i P_ij, pi_j P_ji) / pi_i so the flux matrix is
    # exactly symmetric in floating point.
    flux = np.minimum(pi[:, None] * proposal, (pi[:, None] * proposal).T)
    kernel = flux / pi[:, None]
    np.fill_diagonal(kernel, 0.0)
    diag = 1.0 - kernel.sum(axis=1)
    np.fill_diagonal(kernel, np.maximum(diag, 0.0))
    return DiscreteChainModel(d=d, pi=pi, proposal=proposal, kernel=kernel, g=g)


def simulate_discrete(model, length, seed):
    """Simulate states from the model's kernel; deterministic per seed.

    The initial state is drawn from ``pi`` and every transition uses
    inverse-CDF sampling of the current kernel row.
    """
    length = check_positive_int(length, "length")
    return _simulate_discrete(model, length, rng_stream(seed))


def _simulate_discrete(model, length, rng):
    cum_pi = np.cumsum(model.pi)
    cum_rows = np.cumsum(model.kernel, axis=1)
    cum_pi[-1] = 1.0
    cum_rows[:, -1] = 1.0
    u = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    last = model.d - 1
    s = min(int(np.searchsorted(cum_pi, u[0], side="right")), last)
    states[0] = s
    for t in range(1, length):
        s = min(int(np.searchsorted(cum_rows[s], u[t], side="right")), last)
        states[t] = s
    return states
