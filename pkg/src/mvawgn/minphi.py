"""Minimum expected Gaussian CDF over mean/variance-constrained point masses.

The central object is

    min E[Phi(P)]  over discrete P with  E[P] = r,  Var(P) = v,

restricted to 2 or 3 support points (a minimizer of that form always exists,
and for v > 0 one with at least two atoms beats the single atom at r).  The
two-point family is parametrized by the mass p on the upper atom,

    upper = r + sqrt(v*(1-p)/p)   with mass p,
    lower = r - sqrt(v*p/(1-p))   with mass 1-p,

which satisfies both moment constraints identically, so the search is one
dimensional.  The three-point family is searched over atom locations with the
probabilities recovered from the 3x3 linear moment system (mass, mean, second
moment); location triples whose recovered probabilities are negative are
discarded.

On top of the minimization sit the operating-point solvers: the optimal
second-order coding rate (`socr`) and the matching asymptotic error
probability (`error_probability_bound`) for a channel with mean power budget
gamma and cost-variance budget V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import ndtr, ndtri

from ._util import parallel_map
from .channel import ChannelSpec, capacity_cost_derivative, dispersion

STATUS_CONVERGED = "converged"
STATUS_BOUNDARY = "boundary"
STATUS_DEGENERATE = "degenerate"

# Mass on the upper two-point atom is kept away from {0, 1}: at the clamp the
# paired atom escapes to +/- infinity.
_P_CLAMP = 1e-9


class ConvergenceError(RuntimeError):
    """Raised when a bracketing or refinement loop fails to converge."""


@dataclass(frozen=True)
class PointMassDistribution:
    """Discrete distribution given as ((point, prob), ...), points increasing."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not 1 <= len(self.atoms) <= 3:
            raise ValueError("need 1 to 3 atoms")
        pts = [a[0] for a in self.atoms]
        probs = [a[1] for a in self.atoms]
        if any(not math.isfinite(p) for p in pts):
            raise ValueError("atom locations must be finite")
        if any(q <= 0 for q in probs):
            raise ValueError("probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")
        if any(pts[i] >= pts[i + 1] for i in range(len(pts) - 1)):
            raise ValueError("points must be strictly increasing")

    @property
    def points(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])

    def mean(self) -> float:
        return float(np.dot(self.points, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.points - m) ** 2, self.probs))

    def expect_phi(self) -> float:
        return float(np.dot(ndtr(self.points), self.probs))


@dataclass(frozen=True)
class MinPhiResult:
    """Value and argmin of the constrained Phi-expectation minimization."""

    r: float
    v: float
    value: float
    minimizer: PointMassDistribution
    solver_status: str


def _two_point_dist(r: float, v: float, p: float) -> PointMassDistribution:
    upper = r + math.sqrt(v * (1.0 - p) / p)
    lower = r - math.sqrt(v * p / (1.0 - p))
    return PointMassDistribution(((lower, 1.0 - p), (upper, p)))


def _two_point_values(r: float, v: float, p: np.ndarray) -> np.ndarray:
    upper = r + np.sqrt(v * (1.0 - p) / p)
    lower = r - np.sqrt(v * p / (1.0 - p))
    return p * ndtr(upper) + (1.0 - p) * ndtr(lower)


def _two_point_grid() -> np.ndarray:
    # Log-spaced tails matter: optimal upper-atom masses can sit at 1e-5 or
    # below when r is far in the left tail.
    body = np.linspace(0.002, 0.998, 499)
    tail = np.geomspace(_P_CLAMP * 10, 0.002, 160, endpoint=False)
    return np.concatenate([tail, body, 1.0 - tail[::-1]])


def _minimize_two_point(r: float, v: float):
    grid = _two_point_grid()
    vals = _two_point_values(r, v, grid)
    order = np.argsort(vals)
    best_p, best_val = None, np.inf
    for idx in order[:5]:
        lo = grid[max(0, idx - 1)]
        hi = grid[min(len(grid) - 1, idx + 1)]
        lo, hi = max(lo, _P_CLAMP), min(hi, 1.0 - _P_CLAMP)
        res = minimize_scalar(
            lambda p: float(_two_point_values(r, v, np.array([p]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        if res.fun < best_val:
            best_val, best_p = float(res.fun), float(res.x)
    return best_p, best_val


def _three_point_probs(r, v, a, b, c):
    # Probabilities making the atoms (a, b, c) match mass 1, mean r and
    # second moment r^2 + v; Lagrange form of the 3x3 Vandermonde solve.
    pa = ((r - b) * (r - c) + v) / ((a - b) * (a - c))
    pb = ((r - a) * (r - c) + v) / ((b - a) * (b - c))
    pc = ((r - a) * (r - b) + v) / ((c - a) * (c - b))
    return pa, pb, pc


def _three_point_objective(r: float, v: float):
    def objective(x):
        a, b, c = np.sort(x)
        if (b - a) < 1e-12 or (c - b) < 1e-12:
            return 2.0
        pa, pb, pc = _three_point_probs(r, v, a, b, c)
        if pa < 0.0 or pb < 0.0 or pc < 0.0:
            return 2.0
        return float(pa * ndtr(a) + pb * ndtr(b) + pc * ndtr(c))

    return objective


def _three_point_seeds(r, v, two_point_p, per_axis=40):
    s = math.sqrt(v)
    axis = r + s * np.linspace(-8.0, 8.0, per_axis)
    a, b, c = np.meshgrid(axis, axis, axis, indexing="ij")
    mask = (a < b) & (b < c)
    a, b, c = a[mask], b[mask], c[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        pa, pb, pc = _three_point_probs(r, v, a, b, c)
    feasible = (pa >= 0) & (pb >= 0) & (pc >= 0)
    seeds = []
    if feasible.any():
        phi = ndtr(axis)
        ia = np.searchsorted(axis, a[feasible])
        ib = np.searchsorted(axis, b[feasible])
        ic = np.searchsorted(axis, c[feasible])
        vals = pa[feasible] * phi[ia] + pb[feasible] * phi[ib] + pc[feasible] * phi[ic]
        order = np.argsort(vals)[:5]
        seeds += [
            np.array([a[feasible][i], b[feasible][i], c[feasible][i]]) for i in order
        ]
    # Splittings of the polished two-point solution.
    two = _two_point_dist(r, v, two_point_p)
    lo, hi = two.points
    gap = 0.5 * s
    seeds += [
        np.array([lo - gap, lo + gap, hi]),
        np.array([lo, hi - gap, hi + gap]),
        np.array([lo, 0.5 * (lo + hi), hi]),
    ]
    return seeds


def _minimize_three_point(r: float, v: float, two_point_p: float):
    objective = _three_point_objective(r, v)
    best_x, best_val = None, np.inf
    for x0 in _three_point_seeds(r, v, two_point_p):
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-11, "fatol": 1e-12, "maxiter": 600},
        )
        if res.fun < best_val:
            best_val, best_x = float(res.fun), np.sort(res.x)
    return best_x, best_val


def min_expected_phi(r: float, v: float) -> MinPhiResult:
    """Minimize E[Phi(P)] over point masses with mean r and variance v.

    v = 0 forces the single atom at r; for v > 0 the two- and three-point
    families are searched and the better one is returned, preferring the
    two-point minimizer on ties within 1e-9.
    """
    if not (math.isfinite(r) and math.isfinite(v)):
        raise ValueError("r and v must be finite")
    if v < 0:
        raise ValueError("v must be nonnegative")
    if v == 0.0:
        dist = PointMassDistribution(((r, 1.0),))
        return MinPhiResult(r, v, float(ndtr(r)), dist, STATUS_DEGENERATE)

    best_p, val2 = _minimize_two_point(r, v)
    x3, val3 = _minimize_three_point(r, v, best_p)

    if x3 is not None and val3 < val2 - 1e-9:
        a, b, c = x3
        pa, pb, pc = _three_point_probs(r, v, a, b, c)
        total = pa + pb + pc
        dist = PointMassDistribution(
            (
                (float(a), float(pa / total)),
                (float(b), float(pb / total)),
                (float(c), float(pc / total)),
            )
        )
        return MinPhiResult(r, v, dist.expect_phi(), dist, STATUS_CONVERGED)

    status = STATUS_CONVERGED
    if best_p <= 2.0 * _P_CLAMP or best_p >= 1.0 - 2.0 * _P_CLAMP:
        status = STATUS_BOUNDARY
    dist = _two_point_dist(r, v, best_p)
    return MinPhiResult(r, v, dist.expect_phi(), dist, status)


def min_phi_minimizer(r: float, v: float) -> PointMassDistribution:
    """The achieving distribution of min_expected_phi; requires v > 0."""
    if not v > 0:
        raise ValueError("v must be positive")
    return min_expected_phi(r, v).minimizer


def error_probability_bound(spec: ChannelSpec, r: float) -> float:
    """Asymptotically exact average error probability at second-order rate r.

    Equals min_expected_phi(r / sqrt(Vd), Cd^2 * V / Vd) with Vd the channel
    dispersion and Cd the capacity-cost slope; at V = 0 this collapses to
    Phi(r / sqrt(Vd)).
    """
    vd = dispersion(spec)
    cd = capacity_cost_derivative(spec)
    return min_expected_phi(r / math.sqrt(vd), cd * cd * spec.var_budget / vd).value


def socr(
    spec: ChannelSpec,
    eps: float,
    tol: float = 1e-6,
    max_expansions: int = 40,
) -> float:
    """Optimal second-order coding rate at average error probability eps.

    Solves error_probability_bound(spec, r) = eps for r by bisection; the
    solution is unique because the underlying minimum is continuous and
    strictly increasing in r.  With V = 0 the closed form
    sqrt(dispersion)*ndtri(eps) is returned directly.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    vd = dispersion(spec)
    if spec.var_budget == 0.0:
        return float(math.sqrt(vd) * ndtri(eps))

    cd = capacity_cost_derivative(spec)
    v_arg = cd * cd * spec.var_budget / vd
    sqrt_vd = math.sqrt(vd)

    def excess(r: float) -> float:
        return min_expected_phi(r / sqrt_vd, v_arg).value - eps

    lo = sqrt_vd * float(ndtri(eps))  # min value here is <= eps always
    width = 10.0 * math.sqrt(vd * (1.0 + v_arg))
    hi = lo + width
    expansions = 0
    while excess(hi) <= 0.0:
        lo = hi
        width *= 2.0
        hi = lo + width
        expansions += 1
        if expansions > max_expansions:
            raise ConvergenceError("bracket expansion exceeded configured width")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SweepRow:
    v: float
    minimizer: PointMassDistribution | None
    status: str


def minimizer_sweep(r: float, v_grid) -> list[SweepRow]:
    """Per-v minimizers along an increasing grid; failures are flagged rows."""

    def solve(v: float) -> SweepRow:
        try:
            res = min_expected_phi(r, v)
            return SweepRow(v=v, minimizer=res.minimizer, status=res.solver_status)
        except Exception:
            return SweepRow(v=v, minimizer=None, status="failed")

    return parallel_map(solve, list(v_grid))
