"""Deterministic derivative-free maximization over small boxes.

Coarse grid scan plus golden-section refinement in 1-D; grid multistart plus
Nelder-Mead simplex descent in up to five dimensions.  No randomness anywhere,
so repeated runs are bit-identical.  Infeasible points are signalled by the
objective returning -inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import AllInfeasibleError, DomainError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SearchSpec:
    """Box bounds and tolerances for a maximization run.

    grid_points defaults to 25 in one dimension and 9 per dimension above.
    refine_tol is a parameter-space stop, objective_tol a value-space one.
    """

    bounds: tuple[tuple[float, float], ...]
    grid_points: int | None = None
    refine_tol: float = 1e-7
    objective_tol: float = 1e-10

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise DomainError("bounds must be nonempty")
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise DomainError(f"invalid bound ({lo}, {hi})")
        if self.refine_tol <= 0.0 or self.objective_tol <= 0.0:
            raise DomainError("tolerances must be positive")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dims(self) -> int:
        return len(self.bounds)

    def grid(self) -> int:
        if self.grid_points is not None:
            return self.grid_points
        return 25 if self.dims == 1 else 9


class MaxResult(NamedTuple):
    x: object  # float in 1-D, ndarray otherwise
    value: float
    converged: bool
    n_evals: int


def maximize_1d(f: Callable[[float], float], spec: SearchSpec) -> MaxResult:
    """Grid scan followed by golden-section refinement around the best cell."""
    if spec.dims != 1:
        raise DomainError(f"maximize_1d needs one bound pair, got {spec.dims}")
    lo, hi = spec.bounds[0]
    n = max(spec.grid(), 2)
    xs = np.linspace(lo, hi, n)
    evals = 0
    vals = []
    for x in xs:
        vals.append(f(float(x)))
        evals += 1
    vals = np.asarray(vals, dtype=float)
    if not np.any(np.isfinite(vals)):
        raise AllInfeasibleError("every grid point evaluated to -inf")
    i = int(np.argmax(vals))  # first maximum: smallest-argument tie-break
    best_x, best_v = float(xs[i]), float(vals[i])

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, n - 1)])
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    evals += 2
    candidates = [(x1, f1), (x2, f2)]
    while b - a > spec.refine_tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
            candidates.append((x1, f1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
            candidates.append((x2, f2))
        evals += 1
    for x, v in candidates:
        if v > best_v or (v == best_v and x < best_x):
            best_x, best_v = x, v
    return MaxResult(best_x, best_v, True, evals)


def _clip(x: np.ndarray, bounds) -> np.ndarray:
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return np.minimum(np.maximum(x, lo), hi)


def _nelder_mead(f, x0, steps, bounds, refine_tol, objective_tol, max_iter):
    """Maximize f from x0; reflection/expansion/contraction = (1, 2, 0.5)."""
    dim = x0.size
    simplex = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        if v[i] + steps[i] <= bounds[i][1]:
            v[i] += steps[i]
        else:
            v[i] -= steps[i]
        simplex.append(_clip(v, bounds))
    vals = [f(v) for v in simplex]
    evals = dim + 1
    converged = False

    for _ in range(max_iter):
        order = sorted(range(dim + 1),
                       key=lambda k: (-vals[k], tuple(simplex[k])))
        simplex = [simplex[k] for k in order]
        vals = [vals[k] for k in order]
        best, worst = vals[0], vals[-1]
        diameter = max(float(np.max(np.abs(v - simplex[0])))
                       for v in simplex[1:])
        if diameter <= refine_tol:
            converged = True
            break
        if math.isfinite(best) and best - worst <= objective_tol:
            # value-flat simplex: further geometry refinement is meaningless
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = _clip(centroid + (centroid - simplex[-1]), bounds)
        fr = f(xr)
        evals += 1
        if fr > best:
            xe = _clip(centroid + 2.0 * (centroid - simplex[-1]), bounds)
            fe = f(xe)
            evals += 1
            if fe > fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
        elif fr > vals[-2]:
            simplex[-1], vals[-1] = xr, fr
        else:
            xc = _clip(centroid + 0.5 * (simplex[-1] - centroid), bounds)
            fc = f(xc)
            evals += 1
            if fc > worst:
                simplex[-1], vals[-1] = xc, fc
            else:
                for k in range(1, dim + 1):
                    simplex[k] = _clip(
                        simplex[0] + 0.5 * (simplex[k] - simplex[0]), bounds)
                    vals[k] = f(simplex[k])
                    evals += 1

    order = sorted(range(dim + 1), key=lambda k: (-vals[k], tuple(simplex[k])))
    return simplex[order[0]], vals[order[0]], converged, evals


def maximize_nd(f: Callable[[np.ndarray], float], spec: SearchSpec) -> MaxResult:
    """Full-grid multistart simplex maximization over a bounded box.

    The five best coarse-grid cells each seed a Nelder-Mead descent; the best
    refined point wins, with lexicographically-smallest tie-breaking, and the
    result is never worse than the best grid value.
    """
    bounds = spec.bounds
    dim = spec.dims
    gp = max(spec.grid(), 2)
    axes = [np.linspace(lo, hi, gp) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)

    evals = 0
    vals = np.empty(points.shape[0])
    for i in range(points.shape[0]):
        vals[i] = f(points[i])
        evals += 1
    finite = np.isfinite(vals)
    if not finite.any():
        raise AllInfeasibleError("every grid point evaluated to -inf")

    order = sorted(np.nonzero(finite)[0],
                   key=lambda k: (-vals[k], tuple(points[k])))
    starts = order[:5]
    best_x = None
    best_v = -math.inf
    best_conv = False

    steps = np.array([(hi - lo) / (gp - 1) * 0.5 for lo, hi in bounds])
    steps = np.where(steps > 0.0, steps, spec.refine_tol)
    for idx in starts:
        x, v, conv, used = _nelder_mead(
            f, points[idx].copy(), steps, bounds,
            spec.refine_tol, spec.objective_tol, max_iter=400 * dim)
        evals += used
        if best_x is None or v > best_v or (v == best_v
                                            and tuple(x) < tuple(best_x)):
            best_x, best_v, best_conv = x, v, conv
    # a simplex start is a grid vertex and the returned vertex only improves,
    # so best_v >= best coarse-grid value by construction
    return MaxResult(best_x, best_v, best_conv, evals)
