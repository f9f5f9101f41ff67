"""Projection of a finite-support sequence onto mixtures of geometric sequences.

The fitted object is the closest (in the two-sided l2 sense) sequence of the
form ``sum_i w_i a_i**|k|`` with nonnegative weights and locations confined to
``[-1 + delta, 1 - delta]``.  It is computed by support reduction: grow the
atom set along the steepest feasible direction, re-solve the weight
least-squares on the current support, and prune atoms whose weights would go
negative, until no direction improves the objective beyond tolerance.

All reported objectives are the exact two-sided values (the part of the fit
beyond the input support is summed in closed form, never truncated).

``grid_nnls_oracle`` solves the same problem with locations restricted to a
fixed grid, using Lawson-Hanson nonnegative least squares on an explicit
design matrix; it shares no code path with ``project`` and serves as an
independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .sequences import (
    DiscreteMeasure,
    LagSequence,
    geom_seq_inner,
    materialize,
)

__all__ = [
    "ProjectionConfig",
    "ProjectionResult",
    "ProjectionError",
    "KktReport",
    "project",
    "grid_nnls_oracle",
    "sigma2_of_measure",
    "kkt_report",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MERGE_TOL = 1e-8


@dataclass(frozen=True)
class ProjectionConfig:
    """Solver settings.

    ``delta`` confines candidate locations to ``[-1 + delta, 1 - delta]``;
    larger values impose more shape regularization.  ``kkt_tol=None`` scales
    the optimality slack with the input as ``1e-8 * (1 + ||r||^2)``.
    ``refine_iters`` golden-section steps polish the best grid candidate in
    each direction search.
    """

    delta: float = 0.05
    grid_size: int = 1000
    kkt_tol: float | None = None
    max_iter: int = 500
    refine_iters: int = 30

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta!r}")
        if self.grid_size < 3:
            raise ValueError(f"grid_size must be >= 3, got {self.grid_size!r}")
        if self.kkt_tol is not None and not self.kkt_tol > 0:
            raise ValueError(f"kkt_tol must be positive, got {self.kkt_tol!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be >= 0")


@dataclass(frozen=True)
class ProjectionResult:
    """Fitted mixture, diagnostics, and the exact two-sided objective.

    ``kkt_worst`` is the most negative directional derivative found on the
    candidate grid (with local refinement) at termination; at an exact optimum
    it would be nonnegative.  ``iterations`` is None for solvers that do not
    iterate over support sets.
    """

    measure: DiscreteMeasure
    fitted: LagSequence
    sigma2: float
    objective: float
    kkt_worst: float
    iterations: int | None
    delta: float

    @property
    def total_mass(self):
        return self.measure.total_mass


class ProjectionError(RuntimeError):
    """Solver failure; carries the best iterate when one exists."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def sigma2_of_measure(measure):
    """Two-sided sum of the sequence generated by a measure:
    ``sum_i w_i (1 + a_i) / (1 - a_i)``.

    Requires every atom location strictly inside (-1, 1).
    """
    loc, wgt = measure.locations, measure.weights
    if loc.size == 0:
        return 0.0
    if np.max(np.abs(loc)) >= 1.0:
        raise ValueError("sigma2 requires all atom locations in (-1, 1)")
    return float(np.dot(wgt, (1.0 + loc) / (1.0 - loc)))


def _candidate_grid(delta, grid_size):
    lo, hi = -1.0 + delta, 1.0 - delta
    if hi <= lo:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, grid_size)


def _gram(locations):
    prod = np.outer(locations, locations)
    return (1.0 + prod) / (1.0 - prod)


def _cross(alphas, locations):
    """Matrix of closed-form inner products between grid points and atoms."""
    prod = np.outer(alphas, locations)
    return (1.0 + prod) / (1.0 - prod)


def _solve_weights(gram, rhs):
    """Symmetric positive-definite solve with a Tikhonov fallback."""
    try:
        cho = scipy.linalg.cho_factor(gram, check_finite=False)
        return scipy.linalg.cho_solve(cho, rhs, check_finite=False)
    except scipy.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(gram)
        ridged = gram + jitter * np.eye(gram.shape[0])
        return scipy.linalg.solve(ridged, rhs, assume_a="pos", check_finite=False)


def _golden_min(fun, lo, hi, iters):
    """Golden-section minimization; returns the best evaluated (x, f(x))."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    if fc <= fd:
        best_x, best_f = c, fc
    else:
        best_x, best_f = d, fd
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, best_f


class _Workspace:
    """Mutable solver state: current support, right-hand sides, weights."""

    def __init__(self, r):
        self.r = r
        self.locations: list[float] = []
        self.rhs: list[float] = []
        self.weights = np.zeros(0)

    def direction_values(self, alphas):
        """``D(alpha) = <fit - r, x_alpha>`` for an array of candidates."""
        proj_r = geom_seq_inner(alphas, self.r)
        if not self.locations:
            return -proj_r
        fit_part = _cross(alphas, np.asarray(self.locations)) @ self.weights
        return fit_part - proj_r

    def direction_value(self, alpha):
        value = -geom_seq_inner(float(alpha), self.r)
        if self.locations:
            prod = np.asarray(self.locations) * float(alpha)
            value += float(np.dot(self.weights, (1.0 + prod) / (1.0 - prod)))
        return value

    def add_atom(self, alpha):
        self.locations.append(float(alpha))
        self.rhs.append(geom_seq_inner(float(alpha), self.r))
        self.weights = np.concatenate([self.weights, [0.0]])

    def restricted_solve(self):
        loc = np.asarray(self.locations)
        rhs = np.asarray(self.rhs)
        return _solve_weights(_gram(loc), rhs)

    def nnls_inner_loop(self):
        """Re-solve weights on the support, pruning atoms driven negative.

        Walks from the previous feasible weights toward each unconstrained
        solution until the first weight hits zero, drops that atom, and
        repeats; each pass removes an atom, so it terminates.
        """
        while True:
            target = self.restricted_solve()
            if np.min(target) >= 0.0:
                self.weights = target
                return
            prev = self.weights
            neg = np.nonzero(target < 0.0)[0]
            steps = prev[neg] / (prev[neg] - target[neg])
            stop = np.argmin(steps)
            t = steps[stop]
            moved = np.maximum(prev + t * (target - prev), 0.0)
            drop = int(neg[stop])
            keep = np.ones(moved.size, dtype=bool)
            keep[drop] = False
            self.locations = [a for a, k in zip(self.locations, keep) if k]
            self.rhs = [b for b, k in zip(self.rhs, keep) if k]
            self.weights = moved[keep]

    def objective(self, norm_sq):
        if not self.locations:
            return norm_sq
        loc = np.asarray(self.locations)
        rhs = np.asarray(self.rhs)
        w = self.weights
        value = norm_sq - 2.0 * np.dot(w, rhs) + w @ _gram(loc) @ w
        return max(value, 0.0)


def _search_direction(state, grid, spacing, refine_iters):
    """Most negative direction value over the grid, locally refined."""
    values = state.direction_values(grid)
    j = int(np.argmin(values))  # ties resolve to the smallest location
    best_alpha, best_value = float(grid[j]), float(values[j])
    if refine_iters > 0 and spacing > 0.0:
        lo = max(grid[0], best_alpha - spacing)
        hi = min(grid[-1], best_alpha + spacing)
        if hi > lo:
            x, fx = _golden_min(state.direction_value, lo, hi, refine_iters)
            if fx < best_value:
                best_alpha, best_value = float(x), float(fx)
    return best_alpha, best_value


def _prune_vestigial(workspace, norm_sq, rel_tol=1e-7):
    """Drop atoms carrying a negligible share of the mass when re-solving the
    remaining support does not worsen the objective beyond rounding."""
    while workspace.weights.size > 1:
        total = float(np.sum(workspace.weights))
        smallest = int(np.argmin(workspace.weights))
        if workspace.weights[smallest] >= rel_tol * total:
            return
        before = workspace.objective(norm_sq)
        saved = (list(workspace.locations), list(workspace.rhs), workspace.weights.copy())
        del workspace.locations[smallest]
        del workspace.rhs[smallest]
        workspace.weights = np.delete(workspace.weights, smallest)
        workspace.nnls_inner_loop()
        if workspace.objective(norm_sq) > before + 1e-12 * (1.0 + before):
            workspace.locations, workspace.rhs, workspace.weights = saved
            return


def _finalize(state, r, norm_sq, grid, spacing, refine_iters, iterations, delta):
    keep = state.weights > 0.0
    measure = DiscreteMeasure(np.asarray(state.locations)[keep], state.weights[keep])
    # Recompute on the merged, sorted atoms so the report matches the measure.
    final = _Workspace(r)
    for a in measure.locations:
        final.add_atom(a)
    final.weights = measure.weights.copy()
    if final.weights.size:
        _prune_vestigial(final, norm_sq)
        measure = DiscreteMeasure(final.locations, final.weights)
    _, kkt_worst = _search_direction(final, grid, spacing, refine_iters)
    kkt_worst = min(kkt_worst, 0.0)
    return ProjectionResult(
        measure=measure,
        fitted=materialize(measure, len(r)),
        sigma2=sigma2_of_measure(measure),
        objective=final.objective(norm_sq),
        kkt_worst=kkt_worst,
        iterations=iterations,
        delta=delta,
    )


def project(r, config=None):
    """Project a finite-support sequence onto the geometric-mixture cone.

    Parameters
    ----------
    r : LagSequence
        Input sequence (symmetric, finite support).
    config : ProjectionConfig, optional
        Solver settings; defaults per ``ProjectionConfig``.

    Returns
    -------
    ProjectionResult
        At termination the fit satisfies, within the active tolerance: no
        candidate direction improves the objective, the fit's self inner
        product equals its inner product with the input, and the directional
        derivative vanishes at every atom.

    Raises
    ------
    ProjectionError
        If ``max_iter`` support updates do not reach tolerance; the error
        carries the best iterate.
    """
    cfg = config if config is not None else ProjectionConfig()
    norm_sq = r.norm_sq()
    kkt_tol = cfg.kkt_tol if cfg.kkt_tol is not None else 1e-8 * (1.0 + norm_sq)
    grid = _candidate_grid(cfg.delta, cfg.grid_size)
    spacing = float(grid[1] - grid[0]) if grid.size > 1 else 0.0

    state = _Workspace(r)
    objective = norm_sq
    for iteration in range(1, cfg.max_iter + 1):
        alpha, worst = _search_direction(state, grid, spacing, cfg.refine_iters)
        if worst >= -kkt_tol:
            return _finalize(
                state, r, norm_sq, grid, spacing, cfg.refine_iters, iteration, cfg.delta
            )
        if state.locations and np.min(np.abs(np.asarray(state.locations) - alpha)) < _MERGE_TOL:
            # Best direction collides with an existing atom: numerical floor.
            return _finalize(
                state, r, norm_sq, grid, spacing, cfg.refine_iters, iteration, cfg.delta
            )
        state.add_atom(alpha)
        state.nnls_inner_loop()
        new_objective = state.objective(norm_sq)
        if objective - new_objective < 1e-14 * (1.0 + new_objective):
            return _finalize(
                state, r, norm_sq, grid, spacing, cfg.refine_iters, iteration, cfg.delta
            )
        objective = new_objective

    best = _finalize(
        state, r, norm_sq, grid, spacing, cfg.refine_iters, cfg.max_iter, cfg.delta
    )
    raise ProjectionError(
        f"no convergence after {cfg.max_iter} support updates "
        f"(kkt_worst={best.kkt_worst:.3e}, tol={kkt_tol:.3e})",
        result=best,
    )


def _design_rows(r, grid):
    """Explicit weighted design for the grid-restricted problem.

    Row ``k`` carries weight 1 (k = 0) or 2 (k >= 1) and entries ``a_i**k``;
    rows extend past the input support until the largest ``|a_i|**k`` falls
    below double-precision resolution, which makes the omitted tail of the
    two-sided objective negligible.
    """
    length = len(r)
    amax = float(np.max(np.abs(grid))) if grid.size else 0.0
    if 0.0 < amax < 1.0:
        tail = int(np.ceil(-40.0 / math.log(amax)))
    else:
        tail = 0
    n_rows = length + tail
    design = np.empty((n_rows, grid.size))
    row = np.ones(grid.size)
    for k in range(n_rows):
        design[k] = row
        row = row * grid
    target = np.zeros(n_rows)
    target[:length] = r.values
    sqrt2 = math.sqrt(2.0)
    design[1:] *= sqrt2
    target[1:length] *= sqrt2
    return design, target


def grid_nnls_oracle(r, delta, grid_size=2001):
    """Projection restricted to a fixed equispaced grid of locations, solved by
    Lawson-Hanson nonnegative least squares; independent check for ``project``.

    The feasible set is a subset of the full problem's, so the reported
    objective is never materially below ``project``'s on the same input.
    """
    if grid_size < 101:
        raise ValueError(f"grid_size must be >= 101, got {grid_size!r}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta!r}")
    grid = _candidate_grid(delta, grid_size)
    design, target = _design_rows(r, grid)
    try:
        weights, _ = scipy.optimize.nnls(design, target, maxiter=max(10 * grid.size, 10000))
    except RuntimeError as exc:
        raise ProjectionError(f"grid NNLS did not converge: {exc}") from exc
    keep = weights > 0.0
    measure = DiscreteMeasure(grid[keep], weights[keep])

    norm_sq = r.norm_sq()
    state = _Workspace(r)
    for a in measure.locations:
        state.add_atom(a)
    state.weights = measure.weights.copy()
    kkt_worst = float(np.min(state.direction_values(grid))) if grid.size else 0.0
    return ProjectionResult(
        measure=measure,
        fitted=materialize(measure, len(r)),
        sigma2=sigma2_of_measure(measure),
        objective=state.objective(norm_sq),
        kkt_worst=min(kkt_worst, 0.0),
        iterations=None,
        delta=delta,
    )


@dataclass(frozen=True)
class KktReport:
    """Optimality slacks of a fit, recomputed on an independent probe grid.

    ``direction_slack``: how far the most negative probe direction falls below
    zero.  ``fit_inner_gap``: ``|<fit, fit> - <fit, r>|``.  ``support_slack``:
    largest ``|<fit - r, x_a>|`` over the fitted atoms.  All are nonnegative;
    all vanish at an exact optimum.
    """

    direction_slack: float
    fit_inner_gap: float
    support_slack: float
    worst_alpha: float

    @property
    def worst(self):
        return max(self.direction_slack, self.fit_inner_gap, self.support_slack)

    def within(self, tol):
        return self.worst <= tol


def kkt_report(result, r, probe_grid=2001):
    """Recompute the three optimality conditions on a fresh probe grid."""
    probe = _candidate_grid(result.delta, int(probe_grid))
    state = _Workspace(r)
    for a in result.measure.locations:
        state.add_atom(a)
    state.weights = result.measure.weights.copy()

    values = state.direction_values(probe)
    j = int(np.argmin(values))
    direction_slack = max(0.0, -float(values[j]))

    loc = result.measure.locations
    if loc.size:
        w = result.measure.weights
        rhs = np.asarray(state.rhs)
        fit_inner_gap = abs(float(w @ _gram(loc) @ w - np.dot(w, rhs)))
        support_slack = float(np.max(np.abs(state.direction_values(loc))))
    else:
        fit_inner_gap = 0.0
        support_slack = 0.0
    return KktReport(
        direction_slack=direction_slack,
        fit_inner_gap=fit_inner_gap,
        support_slack=support_slack,
        worst_alpha=float(probe[j]),
    )
