"""Closed-form AWGN channel quantities under a quadratic cost c(x) = x^2.

All information measures are in nats. The capacity-achieving input for mean
power budget `gamma` is N(0, gamma); the induced output is N(0, gamma + noise).
The n-letter information-density sum against that output law reduces, after
centering, to an affine function of a noncentral chi-squared variable, which
is what `sample_info_density_sum` draws from.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt

import numpy as np


@dataclass(frozen=True)
class ChannelSpec:
    """AWGN channel with mean power budget and block-cost variance budget.

    noise_variance : per-letter Gaussian noise variance (> 0)
    gamma          : mean cost budget, E[c(X)] <= gamma (> 0)
    var_budget     : variance budget V; Var(c(X)) <= V/n at blocklength n (>= 0)
    """

    noise_variance: float
    gamma: float
    var_budget: float = 0.0

    def __post_init__(self):
        if not (self.noise_variance > 0):
            raise ValueError("noise_variance must be positive")
        if not (self.gamma > 0):
            raise ValueError("gamma must be positive")
        if not (self.var_budget >= 0):
            raise ValueError("var_budget must be nonnegative")


@dataclass(frozen=True)
class InfoDensitySumSample:
    """One centered draw of the n-letter information-density sum."""

    value: float
    blocklength: int
    cost: float


def capacity_cost(spec: ChannelSpec) -> float:
    """Capacity (nats/use) at mean power budget gamma: 0.5*ln(1 + gamma/N)."""
    return 0.5 * log(1.0 + spec.gamma / spec.noise_variance)


def capacity_cost_derivative(spec: ChannelSpec) -> float:
    """d/dgamma of capacity_cost: 1 / (2*(gamma + N))."""
    return 0.5 / (spec.gamma + spec.noise_variance)


def dispersion(spec: ChannelSpec) -> float:
    """Variance of the per-letter information density under the optimal input.

    Equals (gamma^2 + 2*gamma*N) / (2*(gamma + N)^2); lies in (0, 1/2).
    """
    g, n = spec.gamma, spec.noise_variance
    return (g * g + 2.0 * g * n) / (2.0 * (g + n) ** 2)


def info_density_variance_at(spec: ChannelSpec, x: float) -> float:
    """Per-letter conditional information-density variance at input x."""
    g, n = spec.gamma, spec.noise_variance
    return (g * g + 2.0 * x * x * n) / (2.0 * (g + n) ** 2)


def info_density_mean(spec: ChannelSpec, cost: float, n: int) -> float:
    """Mean of the n-letter information-density sum for any input of average
    power `cost`: n*(C(gamma) - C'(gamma)*(gamma - cost))."""
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    return n * (capacity_cost(spec) - capacity_cost_derivative(spec) * (spec.gamma - cost))


def info_density_sum_variance(spec: ChannelSpec, cost: float, n: int) -> float:
    """Exact variance of the centered n-letter information-density sum."""
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    g, nv = spec.gamma, spec.noise_variance
    return (n * g * g + 2.0 * nv * n * cost) / (2.0 * (g + nv) ** 2)


def _sample_noncentral_chi2(n: int, lam: float, size: int, rng: np.random.Generator) -> np.ndarray:
    # (G + sqrt(lam))^2 + chi2_{n-1}; exact for any lam, no Poisson mixing.
    shifted = (rng.standard_normal(size) + sqrt(lam)) ** 2
    if n > 1:
        shifted += rng.chisquare(n - 1, size)
    return shifted


def sample_info_density_sums(
    spec: ChannelSpec, cost: float, n: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized centered draws of the n-letter information-density sum.

    Uses the exact reduction to a noncentral chi-squared variable with n
    degrees of freedom and noncentrality N*n*cost/gamma^2; the returned values
    have population mean 0 and variance info_density_sum_variance(...).
    """
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    g, nv = spec.gamma, spec.noise_variance
    lam = nv * n * cost / (g * g)
    big_lambda = _sample_noncentral_chi2(n, lam, size, rng)
    scale = g / (2.0 * (g + nv))
    shift = nv * n * cost / (2.0 * g * (g + nv)) + n * g / (2.0 * (g + nv))
    return -scale * big_lambda + shift


def sample_info_density_sum(
    spec: ChannelSpec, cost: float, n: int, rng: np.random.Generator
) -> InfoDensitySumSample:
    """Single centered draw of the n-letter information-density sum."""
    value = float(sample_info_density_sums(spec, cost, n, 1, rng)[0])
    return InfoDensitySumSample(value=value, blocklength=n, cost=cost)
