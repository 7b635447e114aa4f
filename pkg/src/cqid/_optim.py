"""Simplex-constrained solvers with certified bounds.

`cutting_plane_maximize` is Kelley's method for a concave function given
linear majorants; the LP value is a valid upper bound at every step.
`pairwise_fw_minimize` is pairwise Frank-Wolfe for a smooth convex function;
the Frank-Wolfe gap gives a valid lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .errors import SolverFailure

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass
class BoundedOptimum:
    x: np.ndarray
    value: float  # attained (certified lower bound for max, upper bound for min)
    bound: float  # certified bound on the other side
    iterations: int

    @property
    def gap(self) -> float:
        return abs(self.bound - self.value)


def simplex_lp_max(cuts: np.ndarray) -> tuple[np.ndarray, float]:
    """max_p min_k cuts[k] . p over the probability simplex."""
    k, dim = cuts.shape
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-cuts, np.ones((k, 1))])
    b_ub = np.zeros(k)
    a_eq = np.zeros((1, dim + 1))
    a_eq[0, :dim] = 1.0
    bounds = [(0, None)] * dim + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds,
                  method="highs", options=_LP_OPTIONS)
    if res.status != 0:
        raise SolverFailure(f"cutting-plane LP failed: {res.message}")
    p = np.clip(res.x[:dim], 0.0, None)
    return p / p.sum(), -float(res.fun)


def cutting_plane_maximize(
    oracle: Callable[[np.ndarray], tuple[float, list[np.ndarray]]],
    dim: int,
    tol: float,
    max_iter: int = 2000,
    x0: np.ndarray | None = None,
    initial_cuts: list[np.ndarray] | None = None,
    mix: float = 1e-10,
) -> BoundedOptimum:
    """Maximize a concave f over the simplex.

    ``oracle(p)`` returns ``(lower, cuts)`` where ``lower <= f(p)`` and every
    cut ``c`` satisfies ``f(p') <= c . p'`` for all p'. Iterates are mixed with
    the uniform distribution by ``mix`` so cut coefficients stay finite.
    """
    uniform = np.full(dim, 1.0 / dim)
    x = uniform if x0 is None else np.asarray(x0, dtype=float)
    cuts = [np.asarray(c, dtype=float) for c in (initial_cuts or [])]
    best_x, best_val = x, -np.inf
    upper = np.inf
    for it in range(1, max_iter + 1):
        x = (1 - mix) * x + mix * uniform
        val, new_cuts = oracle(x)
        if val > best_val:
            best_x, best_val = x.copy(), float(val)
        cuts.extend(np.asarray(c, dtype=float) for c in new_cuts)
        x, lp_val = simplex_lp_max(np.array(cuts))
        upper = min(upper, lp_val)
        if upper - best_val <= tol:
            return BoundedOptimum(best_x, best_val, upper, it)
    return BoundedOptimum(best_x, best_val, upper, max_iter)


def pairwise_fw_minimize(
    fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    dim: int,
    tol: float,
    max_iter: int = 500,
    x0: np.ndarray | None = None,
) -> BoundedOptimum:
    """Minimize a smooth convex f over the simplex; `bound` is f(x) minus the FW gap."""
    x = np.full(dim, 1.0 / dim) if x0 is None else np.asarray(x0, dtype=float).copy()
    if dim == 1:
        f, _ = fun_grad(x)
        return BoundedOptimum(x, f, f, 0)
    best_lower = -np.inf
    f, g = fun_grad(x)
    for it in range(1, max_iter + 1):
        s = int(np.argmin(g))
        fw_gap = float(g @ x - g[s])
        best_lower = max(best_lower, f - fw_gap)
        if f - best_lower <= tol:
            return BoundedOptimum(x, f, best_lower, it)
        support = np.flatnonzero(x > 0)
        a = int(support[np.argmax(g[support])])
        if a == s:
            return BoundedOptimum(x, f, best_lower, it)
        step_max = x[a]
        direction = np.zeros(dim)
        direction[s] += 1.0
        direction[a] -= 1.0

        def along(gamma: float) -> float:
            y = x + gamma * direction
            y[a] = max(y[a], 0.0)
            return fun_grad(y)[0]

        res = minimize_scalar(along, bounds=(0.0, step_max), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, step_max)})
        gamma = float(res.x)
        # bounded Brent never probes the endpoints; check the drop step explicitly
        f_end = along(step_max)
        if f_end <= res.fun:
            gamma = step_max
        y = x + gamma * direction
        if gamma == step_max:
            y[a] = 0.0
        y = np.clip(y, 0.0, None)
        y /= y.sum()
        f_new, g_new = fun_grad(y)
        if f_new > f:
            # no descent along the pairwise direction within float precision
            return BoundedOptimum(x, f, best_lower, it)
        x, f, g = y, f_new, g_new
    return BoundedOptimum(x, f, best_lower, max_iter)
