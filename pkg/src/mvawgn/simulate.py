"""Shell-mixture random coding and Monte Carlo estimation of its error terms.

The achievable input at blocklength n is a mixture of at most three uniform
distributions on spheres.  The shell power levels come from mapping each atom
of the constrained Phi-minimizer through

    gamma_j = gamma - sqrt(Vd)/(Cd*sqrt(n)) * pi_j + r/(Cd*sqrt(n)),

with Vd the channel dispersion and Cd the capacity-cost slope, so the mixture
meets the mean cost budget with equality and the cost-variance budget by
construction (cost on a shell is deterministic).

The Monte Carlo estimators run the channel in full vector space, codeword
vectors plus noise vectors, with trials grouped into fixed-size batches, each
batch on its own counter-based stream; a root seed therefore reproduces every
estimate bit for bit regardless of thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ._util import parallel_map, philox_stream, spawn_streams, wilson_interval
from .channel import (
    ChannelSpec,
    capacity_cost,
    capacity_cost_derivative,
    dispersion,
    info_density_sum_variance,
    sample_info_density_sums,
)
from .minphi import min_expected_phi
from .shell_density import ShellOutputDensity, log_mixture_density

BATCH_SIZE = 4096  # part of the reproducibility contract
_CHUNK_ELEMENTS = 1 << 21
_COMPENSATED_MIN_N = 100_000
_BLOCK_COLS = 1 << 15


class BlocklengthTooSmall(ValueError):
    """A mapped shell power level came out nonpositive at this blocklength."""


@dataclass(frozen=True)
class Shell:
    gamma: float
    radius: float
    weight: float


@dataclass(frozen=True)
class SphereMixtureCode:
    """Mixture-of-spheres channel input: up to three shells, weights sum to 1."""

    blocklength: int
    shells: tuple[Shell, ...]
    rate_offset: float

    def __post_init__(self):
        if not 1 <= len(self.shells) <= 3:
            raise ValueError("need 1 to 3 shells")
        weights = [s.weight for s in self.shells]
        if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        for s in self.shells:
            if s.gamma <= 0:
                raise ValueError("shell power must be positive")
            expected = math.sqrt(self.blocklength * s.gamma)
            if abs(s.radius - expected) > 1e-9 * max(1.0, expected):
                raise ValueError("radius inconsistent with blocklength * gamma")
        gammas = [s.gamma for s in self.shells]
        if any(gammas[i] >= gammas[i + 1] for i in range(len(gammas) - 1)):
            raise ValueError("shells must be in increasing power order")

    def mean_cost(self) -> float:
        return sum(s.weight * s.gamma for s in self.shells)

    def cost_variance(self) -> float:
        m = self.mean_cost()
        return sum(s.weight * (s.gamma - m) ** 2 for s in self.shells)

    def output_components(self, noise_variance: float):
        return [
            (s.weight, ShellOutputDensity(self.blocklength, s.radius, noise_variance))
            for s in self.shells
        ]


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int

    def __post_init__(self):
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError("interval must contain the estimate")


def build_mixture(
    spec: ChannelSpec, n: int, r: float | None = None, eps: float | None = None
) -> SphereMixtureCode:
    """Construct the achievability input for blocklength n at rate offset r.

    If r is omitted it is solved from the target error probability eps via
    `socr`.  Raises BlocklengthTooSmall when a mapped power level is not
    positive, naming the offending atom; clamping would silently break the
    cost constraints.
    """
    if r is None:
        if eps is None:
            raise ValueError("provide r or eps")
        from .minphi import socr

        r = socr(spec, eps)
    vd = dispersion(spec)
    cd = capacity_cost_derivative(spec)
    minimizer = min_expected_phi(r / math.sqrt(vd), cd * cd * spec.var_budget / vd).minimizer

    scale = math.sqrt(vd) / (cd * math.sqrt(n))
    offset = r / (cd * math.sqrt(n))
    shells = []
    for pi_j, weight in zip(minimizer.points, minimizer.probs):
        gamma_j = float(spec.gamma - scale * pi_j + offset)
        if gamma_j <= 0:
            raise BlocklengthTooSmall(
                f"blocklength too small: atom at {pi_j:.6g} maps to power {gamma_j:.6g}"
            )
        shells.append(Shell(gamma=gamma_j, radius=math.sqrt(n * gamma_j), weight=float(weight)))
    shells.sort(key=lambda s: s.gamma)
    return SphereMixtureCode(blocklength=n, shells=tuple(shells), rate_offset=float(r))


def sample_codeword(code: SphereMixtureCode, rng: np.random.Generator) -> np.ndarray:
    """One codeword: pick a shell by weight, then a uniform point on it."""
    weights = [s.weight for s in code.shells]
    idx = rng.choice(len(code.shells), p=weights)
    g = rng.standard_normal(code.blocklength)
    return code.shells[idx].radius * g / np.linalg.norm(g)


def _row_sq_norms(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[1]
    if n < _COMPENSATED_MIN_N:
        return np.einsum("ij,ij->i", mat, mat)
    # Exact compensated combination of per-block partial sums.
    partials = [
        np.einsum("ij,ij->i", mat[:, j : j + _BLOCK_COLS], mat[:, j : j + _BLOCK_COLS])
        for j in range(0, n, _BLOCK_COLS)
    ]
    stacked = np.stack(partials, axis=1)
    return np.array([math.fsum(row) for row in stacked])


def _batch_count(code, spec, threshold, batch, rng):
    n = code.blocklength
    nv = spec.noise_variance
    radii = np.array([s.radius for s in code.shells])
    weights = np.array([s.weight for s in code.shells])
    components = code.output_components(nv)
    log_w_const = -0.5 * n * math.log(2.0 * math.pi * nv)

    idx = rng.choice(len(radii), size=batch, p=weights)
    rows = max(1, _CHUNK_ELEMENTS // n)
    count = 0
    for start in range(0, batch, rows):
        stop = min(start + rows, batch)
        g = rng.standard_normal((stop - start, n))
        g *= (radii[idx[start:stop]] / np.sqrt(_row_sq_norms(g)))[:, None]
        z = math.sqrt(nv) * rng.standard_normal((stop - start, n))
        y = g + z
        log_w = log_w_const - _row_sq_norms(z) / (2.0 * nv)
        log_pw = np.asarray(log_mixture_density(components, _row_sq_norms(y)))
        vals = (log_w - log_pw) / n
        count += int(np.count_nonzero(vals <= threshold))
    return count


def _tail_estimate(code, spec, trials, seed, threshold) -> MonteCarloEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sizes = [BATCH_SIZE] * (trials // BATCH_SIZE)
    if trials % BATCH_SIZE:
        sizes.append(trials % BATCH_SIZE)
    streams = spawn_streams(seed, len(sizes))
    counts = parallel_map(
        lambda i: _batch_count(code, spec, threshold, sizes[i], streams[i]),
        range(len(sizes)),
    )
    total = sum(counts)
    lo, hi = wilson_interval(total, trials)
    return MonteCarloEstimate(
        estimate=total / trials, ci_low=lo, ci_high=hi, trials=trials, seed=seed
    )


def estimate_error_functional(
    code: SphereMixtureCode, spec: ChannelSpec, trials: int, seed: int
) -> MonteCarloEstimate:
    """Probability that the normalized information density of the mixture
    falls at or below the operating rate C(gamma) + r/sqrt(n)."""
    n = code.blocklength
    threshold = capacity_cost(spec) + code.rate_offset / math.sqrt(n)
    return _tail_estimate(code, spec, trials, seed, threshold)


def achievability_error_bound(
    code: SphereMixtureCode,
    spec: ChannelSpec,
    trials: int,
    seed: int,
    theta_exponent: float = 0.6,
) -> MonteCarloEstimate:
    """Complete random-coding upper bound on the average error probability.

    The information-density threshold is enlarged by theta = n^(-vartheta)
    with 1/2 < vartheta < 1, and the slack exp(-n^(1-vartheta)) is added to
    the estimate and its interval.
    """
    if not 0.5 < theta_exponent < 1.0:
        raise ValueError("theta_exponent must lie in (1/2, 1)")
    n = code.blocklength
    theta = n ** (-theta_exponent)
    threshold = capacity_cost(spec) + code.rate_offset / math.sqrt(n) + theta
    base = _tail_estimate(code, spec, trials, seed, threshold)
    slack = math.exp(-(n ** (1.0 - theta_exponent)))
    return MonteCarloEstimate(
        estimate=min(1.0, base.estimate + slack),
        ci_low=min(1.0, base.ci_low + slack),
        ci_high=min(1.0, base.ci_high + slack),
        trials=trials,
        seed=seed,
    )


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical CDF of normalized information-density sums on a probe grid."""

    probe: np.ndarray
    ecdf: np.ndarray
    ks_vs_normal: float
    sample_mean: float
    sample_variance: float
    normalizing_variance: float
    trials: int
    seed: int


def empirical_cdf_info_density(
    spec: ChannelSpec,
    cost: float,
    n: int,
    trials: int,
    seed: int,
    probe: np.ndarray | None = None,
) -> EmpiricalCdf:
    """Sample the centered information-density sum, normalize to unit
    variance, and tabulate its empirical CDF against a fixed probe grid."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if probe is None:
        probe = np.linspace(-4.0, 4.0, 161)
    var = info_density_sum_variance(spec, cost, n)
    rng = philox_stream(seed)
    samples = sample_info_density_sums(spec, cost, n, trials, rng) / math.sqrt(var)
    samples.sort()
    ecdf = np.searchsorted(samples, probe, side="right") / trials

    grid = ndtr(samples)
    up = np.arange(1, trials + 1) / trials
    down = np.arange(0, trials) / trials
    ks = float(max(np.max(up - grid), np.max(grid - down)))
    return EmpiricalCdf(
        probe=probe,
        ecdf=ecdf,
        ks_vs_normal=ks,
        sample_mean=float(samples.mean()),
        sample_variance=float(samples.var(ddof=1)),
        normalizing_variance=var,
        trials=trials,
        seed=seed,
    )
