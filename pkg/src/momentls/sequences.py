"""Symmetric lag sequences, discrete measures on [-1, 1], and their inner products.

The estimators in this package work with real sequences indexed by all integers
that are symmetric about lag 0 and supported on finitely many lags, and with
finite nonnegative measures whose moments generate such sequences: a measure
``mu`` with atoms ``(a_i, w_i)`` generates the sequence ``sum_i w_i a_i**|k|``.
This module provides both representations, the closed-form two-sided inner
products between them, the affine moment transform onto [0, 1], and finite
difference (k-monotonicity) checks.

Everything here is an immutable value object and every operation is a pure
function, so instances can be shared freely across threads.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ._validation import as_float_array

__all__ = [
    "LagSequence",
    "GeometricAtom",
    "DiscreteMeasure",
    "MomentSequence",
    "seq_inner",
    "geom_inner",
    "geom_seq_inner",
    "materialize",
    "measure_inner",
    "measure_seq_inner",
    "hausdorff_transform",
    "check_k_monotone",
    "KMonotoneResult",
]

ATOM_MERGE_TOL = 1e-8


class LagSequence:
    """Finite-support real sequence on the integers, symmetric about lag 0.

    Only lags ``0..len-1`` are stored; the value at lag ``-k`` is defined to
    equal the value at ``k``, and lags at or beyond the support length are
    zero.  Symmetry is therefore structural and cannot be violated.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        arr = as_float_array(values, "lag values").copy()
        if arr.size < 1:
            raise ValueError("a lag sequence needs at least the lag-0 value")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LagSequence is immutable")

    def __len__(self):
        return int(self.values.size)

    def __repr__(self):
        head = np.array2string(self.values[:4], separator=", ")
        suffix = ", ..." if len(self) > 4 else ""
        return f"LagSequence({head[:-1]}{suffix}], length={len(self)})"

    def value(self, lag):
        """Value at an arbitrary integer lag (zero beyond the support)."""
        k = abs(int(lag))
        return float(self.values[k]) if k < len(self) else 0.0

    def norm_sq(self):
        """Squared two-sided l2 norm: ``v(0)**2 + 2 * sum_{k>=1} v(k)**2``."""
        v = self.values
        return float(v[0] * v[0] + 2.0 * np.dot(v[1:], v[1:]))

    def sum_two_sided(self):
        """Sum over all integer lags: ``v(0) + 2 * sum_{k>=1} v(k)``."""
        v = self.values
        return float(v[0] + 2.0 * np.sum(v[1:]))


class GeometricAtom(NamedTuple):
    """Point mass ``weight >= 0`` at ``location`` in [-1, 1]."""

    location: float
    weight: float


class DiscreteMeasure:
    """Finite nonnegative measure on [-1, 1] stored as sorted point masses.

    Atoms whose locations differ by less than ``merge_tol`` are merged by
    weight addition (near-duplicate locations make Gram systems of geometric
    sequences numerically singular), so stored locations are strictly
    increasing.
    """

    __slots__ = ("locations", "weights")

    def __init__(self, locations=(), weights=(), merge_tol=ATOM_MERGE_TOL):
        loc = as_float_array(locations, "locations")
        wgt = as_float_array(weights, "weights")
        if loc.shape != wgt.shape:
            raise ValueError("locations and weights must have matching lengths")
        if loc.size and np.max(np.abs(loc)) > 1.0:
            raise ValueError("atom locations must lie in [-1, 1]")
        if np.any(wgt < 0.0):
            raise ValueError("atom weights must be nonnegative")
        order = np.argsort(loc, kind="stable")
        loc, wgt = loc[order], wgt[order]
        if loc.size:
            loc, wgt = _merge_close(loc, wgt, merge_tol)
        loc.flags.writeable = False
        wgt.flags.writeable = False
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", wgt)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    @classmethod
    def from_atoms(cls, atoms, merge_tol=ATOM_MERGE_TOL):
        atoms = list(atoms)
        return cls([a[0] for a in atoms], [a[1] for a in atoms], merge_tol)

    @property
    def n_atoms(self):
        return int(self.locations.size)

    @property
    def atoms(self):
        return [GeometricAtom(float(a), float(w)) for a, w in zip(self.locations, self.weights)]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    def __add__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return DiscreteMeasure(
            np.concatenate([self.locations, other.locations]),
            np.concatenate([self.weights, other.weights]),
        )

    def __repr__(self):
        return f"DiscreteMeasure({self.n_atoms} atoms, mass={self.total_mass:.6g})"


def _merge_close(loc, wgt, tol):
    """Merge runs of locations closer than ``tol``; weights add, locations
    become the weight-weighted mean of the run."""
    breaks = np.nonzero(np.diff(loc) >= tol)[0] + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks, [loc.size]])
    if starts.size == loc.size:
        return loc.copy(), wgt.copy()
    out_loc = np.empty(starts.size)
    out_wgt = np.empty(starts.size)
    for i, (s, e) in enumerate(zip(starts, ends)):
        w = wgt[s:e]
        total = w.sum()
        out_wgt[i] = total
        out_loc[i] = np.dot(loc[s:e], w) / total if total > 0 else loc[s:e].mean()
    return out_loc, out_wgt


class MomentSequence:
    """Lag sequence generated by a measure with support strictly inside (-1, 1).

    Caches a materialization of configurable length; the lag-0 value equals the
    total mass of the measure by construction.
    """

    __slots__ = ("measure", "length", "sequence")

    def __init__(self, measure, length):
        if measure.n_atoms and np.max(np.abs(measure.locations)) >= 1.0:
            raise ValueError("moment sequences require all atom locations in (-1, 1)")
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "length", int(length))
        object.__setattr__(self, "sequence", materialize(measure, int(length)))

    def __setattr__(self, name, value):
        raise AttributeError("MomentSequence is immutable")


def seq_inner(a, b):
    """Two-sided inner product of symmetric finite-support sequences.

    Equals ``a(0)b(0) + 2 * sum_{k>=1} a(k)b(k)`` over the common support.
    """
    n = min(len(a), len(b))
    va, vb = a.values[:n], b.values[:n]
    return float(va[0] * vb[0] + 2.0 * np.dot(va[1:], vb[1:]))


def geom_inner(alpha, beta):
    """Closed form of the two-sided inner product of the geometric sequences
    ``alpha**|k|`` and ``beta**|k|``: ``(1 + alpha*beta) / (1 - alpha*beta)``.

    Requires ``|alpha * beta| < 1`` for the underlying series to converge.
    """
    p = float(alpha) * float(beta)
    if abs(p) >= 1.0:
        raise ValueError(f"|alpha * beta| must be < 1, got {p!r}")
    return (1.0 + p) / (1.0 - p)


def _powers(alpha, length):
    """``[1, alpha, alpha**2, ..., alpha**(length-1)]`` via cumulative products."""
    if length == 1:
        return np.ones(1)
    return np.concatenate([[1.0], np.cumprod(np.full(length - 1, alpha))])


def _eval_poly_many(coeffs, x, block=512):
    """Evaluate ``p(x) = sum_k coeffs[k] x**k`` at many points.

    Horner over coefficient blocks: the Python-level loop runs
    ``block + ceil(L/block)`` times instead of ``L`` times.
    """
    length = coeffs.size
    if length <= block:
        out = np.zeros_like(x)
        for c in coeffs[::-1]:
            out *= x
            out += c
        return out
    n_blocks = -(-length // block)
    padded = np.zeros(n_blocks * block)
    padded[:length] = coeffs
    table = padded.reshape(n_blocks, block)
    acc = np.zeros((n_blocks, x.size))
    for j in range(block - 1, -1, -1):
        acc *= x
        acc += table[:, j : j + 1]
    out = np.zeros_like(x)
    x_block = x**block
    for i in range(n_blocks - 1, -1, -1):
        out *= x_block
        out += acc[i]
    return out


def geom_seq_inner(alpha, r):
    """Two-sided inner product of the geometric sequence ``alpha**|k|`` with a
    finite-support sequence: ``r(0) + 2 * sum_{k=1}^{L-1} r(k) alpha**k``.

    ``alpha`` may be a scalar or a 1-D array of evaluation points.
    """
    v = r.values
    if np.ndim(alpha) == 0:
        if v.size == 1:
            return float(v[0])
        p = _powers(float(alpha), v.size)
        return float(v[0] + 2.0 * np.dot(v[1:], p[1:]))
    alpha = np.asarray(alpha, dtype=np.float64)
    coeffs = np.concatenate([[v[0]], 2.0 * v[1:]])
    return _eval_poly_many(coeffs, alpha)


def materialize(measure, length):
    """Lag sequence of a measure: value ``sum_i w_i a_i**k`` at lags ``0..length-1``.

    Requires every atom location strictly inside (-1, 1) so the materialized
    sequence is square-summable over the integers.
    """
    length = int(length)
    if length < 1:
        raise ValueError("length must be >= 1")
    loc, wgt = measure.locations, measure.weights
    if loc.size == 0:
        return LagSequence(np.zeros(length))
    if np.max(np.abs(loc)) >= 1.0:
        raise ValueError("cannot materialize atoms with |location| >= 1")
    values = np.zeros(length)
    row = np.ones_like(loc)
    for k in range(length):
        values[k] = np.dot(wgt, row)
        row = row * loc
    return LagSequence(values)


def measure_inner(f_measure, g_measure):
    """Two-sided inner product of the sequences generated by two measures,
    computed in closed form: ``sum_ij w_i v_j (1 + a_i b_j)/(1 - a_i b_j)``.
    """
    if f_measure.n_atoms == 0 or g_measure.n_atoms == 0:
        return 0.0
    prod = np.outer(f_measure.locations, g_measure.locations)
    if np.max(np.abs(prod)) >= 1.0:
        raise ValueError("measure_inner requires |a_i * b_j| < 1 for all atom pairs")
    table = (1.0 + prod) / (1.0 - prod)
    return float(f_measure.weights @ table @ g_measure.weights)


def measure_seq_inner(measure, r):
    """Two-sided inner product of the sequence generated by a measure with a
    finite-support sequence: ``sum_i w_i * geom_seq_inner(a_i, r)``.
    """
    if measure.n_atoms == 0:
        return 0.0
    vals = geom_seq_inner(measure.locations, r)
    return float(np.dot(measure.weights, vals))


def hausdorff_transform(moments, a, b, max_len=60):
    """Map moments of a measure on ``[a, b]`` to moments of its affine
    push-forward onto [0, 1].

    Entry ``k`` is ``(b-a)**(-k) * sum_i binom(k, i) * m(i) * (-a)**(k-i)``;
    the identity when ``(a, b) == (0, 1)``, and entry 0 always equals ``m(0)``.
    Binomial coefficients are exact integers.  Length is capped by default
    because the alternating sums are numerically explosive at large order.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a!r}, b={b!r}")
    m = as_float_array(moments, "moments")
    if m.size < 1:
        raise ValueError("need at least one moment")
    if m.size > max_len:
        raise ValueError(
            f"sequence length {m.size} exceeds max_len={max_len}; the transform "
            "is numerically unreliable at large order (raise max_len to override)"
        )
    span = b - a
    neg_a = -float(a)
    out = np.empty(m.size)
    out[0] = m[0]
    for k in range(1, m.size):
        # sum_i binom(k, i) * m[i] * (-a)**(k-i), exact binomials
        total = 0.0
        for i in range(k + 1):
            total += math.comb(k, i) * m[i] * neg_a ** (k - i)
        out[k] = span ** (-k) * total
    return out


class KMonotoneResult(NamedTuple):
    """Outcome of a k-monotonicity check.

    ``ok`` is True when every signed finite difference up to the requested
    order is nonnegative within tolerance; otherwise ``order`` and ``index``
    locate the first violation.
    """

    ok: bool
    order: int | None = None
    index: int | None = None


def check_k_monotone(moments, order, tol=None):
    """Check ``(-1)**j * diff^j m >= -tol`` for every ``j = 0..order``.

    Scans orders from 0 upward and reports the first violating (order, index).
    Default tolerance is ``1e-10 * max(1, |m(0)|)``; the exact conditions need
    slack under floating point.
    """
    m = as_float_array(moments, "moments")
    if order < 0:
        raise ValueError("order must be >= 0")
    if m.size <= order:
        raise ValueError(f"need more than order={order} entries, got {m.size}")
    if tol is None:
        tol = 1e-10 * max(1.0, abs(float(m[0])))
    diff = m.copy()
    sign = 1.0
    for j in range(order + 1):
        signed = sign * diff
        bad = np.nonzero(signed < -tol)[0]
        if bad.size:
            return KMonotoneResult(False, j, int(bad[0]))
        diff = np.diff(diff)
        sign = -sign
    return KMonotoneResult(True)
