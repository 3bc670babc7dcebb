"""Phase-averaging noise: shot noise plus exponentially correlated technical noise.

Per-sample noise has covariance

    <eta_i eta_j> = shot_var * [i == j] + eta_bar^2 * r^|i - j|,   r = exp(-1/(rate * tau_c))

and the averaged phase over ``N`` samples has variance ``sum_ij <eta_i eta_j> / N^2``.
``variance_analytic`` evaluates that double sum in closed form; the Monte Carlo
engine draws the technical noise as an Ornstein-Uhlenbeck process sampled at the
event times, which reproduces the same kernel for evenly spaced events.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import EmptyRun, InvalidArgument
from .model import SetupParams, post_select

VARIANTS = ("non_post_selected", "post_selected", "quantum_limited")


@dataclass(frozen=True)
class NoiseModel:
    eta_bar: float
    tau_c: float
    shot_var: float

    def __post_init__(self):
        for name in ("eta_bar", "tau_c", "shot_var"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidArgument(f"noise.{name} must be finite")
            object.__setattr__(self, name, v)
        if self.eta_bar < 0 or self.shot_var < 0:
            raise InvalidArgument("noise amplitudes must be non-negative")
        if self.tau_c <= 0:
            raise InvalidArgument("noise.tau_c must be positive")

    @classmethod
    def for_probe(cls, alpha2: float, tau_c: float, eta_ratio: float = 10.0):
        """Shot variance ``1/(2|alpha|^2)`` and ``eta_bar = eta_ratio * sqrt(shot_var)``."""
        shot = 1.0 / (2.0 * alpha2)
        return cls(eta_ratio * math.sqrt(shot), tau_c, shot)


@dataclass(frozen=True)
class RunConfig:
    gamma: float
    total_time: float
    post_prob: float = 1.0
    seed: int = 0
    realizations: int = 1

    def __post_init__(self):
        if not (self.gamma > 0 and self.total_time > 0):
            raise InvalidArgument("run.gamma and run.total_time must be positive")
        if not 0.0 < self.post_prob <= 1.0:
            raise InvalidArgument("run.post_prob must lie in (0, 1]")
        if self.realizations < 1:
            raise InvalidArgument("run.realizations must be >= 1")
        if self.gamma * self.total_time < 1:
            raise InvalidArgument("run needs gamma * total_time >= 1")
        if self.post_prob < 1.0 and self.post_prob * self.gamma * self.total_time < 1:
            raise InvalidArgument("post-selected run needs post_prob * gamma * total_time >= 1")

    @property
    def n_events(self) -> int:
        return int(round(self.gamma * self.total_time))


@dataclass(frozen=True)
class SnrPoint:
    gamma: float
    snr: float
    snr_stderr: float
    variant: str
    n_samples: float = math.nan


def correlation_ratio(rate: float, tau_c: float) -> float:
    """Nearest-neighbour correlation ``exp(-1/(rate tau_c))`` of evenly spaced samples."""
    return math.exp(-1.0 / (rate * tau_c))


def kernel_sum(n: float, r: float) -> float:
    """sum_{i,j=1..n} r^|i-j| = n + 2 (r n/(1-r) - r (1 - r^n)/(1-r)^2)."""
    if r == 0.0:
        return float(n)
    q = 1.0 - r
    one_minus_rn = -math.expm1(n * math.log(r))
    return n + 2.0 * (r * n / q - r * one_minus_rn / (q * q))


def variance_analytic(n_samples: float, r: float, noise: NoiseModel) -> float:
    """Variance of the mean of ``n_samples`` evenly spaced phase samples.

    ``n_samples`` may be non-integer; SNR curves use the expected sample count
    ``P Gamma T`` directly.
    """
    n = float(n_samples)
    if not n > 0:
        raise InvalidArgument("n_samples must be positive")
    if not 0.0 <= r < 1.0:
        raise InvalidArgument(f"correlation ratio must lie in [0, 1), got {r!r}")
    return noise.shot_var / n + noise.eta_bar**2 / (n * n) * kernel_sum(n, r)


def variance_direct(n_samples: int, r: float, noise: NoiseModel) -> float:
    """O(N^2) summation of the covariance matrix, for cross-checking."""
    idx = np.arange(n_samples)
    cov = noise.eta_bar**2 * r ** np.abs(idx[:, None] - idx[None, :])
    cov[idx, idx] += noise.shot_var
    return float(cov.sum()) / n_samples**2


def _rng(seed: int, realization: int):
    return np.random.default_rng([int(seed), int(realization)])


def simulate_run(noise: NoiseModel, run: RunConfig, true_phase: float, realization: int = 0) -> float:
    """Mean measured phase of one simulated run.

    Events arrive evenly spaced at rate ``gamma``; each is kept with
    probability ``post_prob``. Technical noise is an OU process with variance
    ``eta_bar^2`` and correlation ``exp(-dt/tau_c)`` evaluated at every event
    time, so the kept samples see the exact correlation of their true spacing.
    Randomness is keyed on ``(seed, realization)``.
    """
    n = run.n_events
    rng = _rng(run.seed, realization)
    tech = rng.standard_normal(n)
    shot = rng.standard_normal(n)
    keep = rng.random(n) < run.post_prob if run.post_prob < 1.0 else None

    rho = correlation_ratio(run.gamma, noise.tau_c)
    drive = tech * (noise.eta_bar * math.sqrt(-math.expm1(-2.0 / (run.gamma * noise.tau_c))))
    drive[0] = tech[0] * noise.eta_bar
    samples = lfilter([1.0], [1.0, -rho], drive) + shot * math.sqrt(noise.shot_var)
    if keep is not None:
        samples = samples[keep]
    if samples.size == 0:
        raise EmptyRun("post-selection kept no events")
    return true_phase + math.fsum(samples) / samples.size


def default_workers() -> int:
    env = os.environ.get("WVA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidArgument(f"WVA_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def simulate_ensemble(noise, run, true_phase, workers=None) -> np.ndarray:
    """``run.realizations`` independent run means, index-ordered."""
    workers = default_workers() if workers is None else workers
    idx = range(run.realizations)
    if workers <= 1 or run.realizations < 64:
        return np.array([simulate_run(noise, run, true_phase, i) for i in idx])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(lambda i: simulate_run(noise, run, true_phase, i), idx)))


@dataclass(frozen=True)
class EnsembleStats:
    mean: float
    mean_stderr: float
    variance: float
    variance_stderr: float
    count: int


def ensemble_stats(values) -> EnsembleStats:
    """Sample mean/variance with standard errors; sums are exactly rounded."""
    x = [float(v) for v in values]
    m = len(x)
    if m < 2:
        raise InvalidArgument("need at least two realizations")
    mean = math.fsum(x) / m
    dev = [v - mean for v in x]
    var = math.fsum(d * d for d in dev) / (m - 1)
    m4 = math.fsum(d**4 for d in dev) / m
    var_se = math.sqrt(max(m4 - (m - 3) / (m - 1) * var * var, 0.0) / m)
    return EnsembleStats(mean, math.sqrt(var / m), var, var_se, m)


def _signal_and_rate(setup: SetupParams, variant: str):
    if variant == "post_selected":
        p = post_select(setup).p_exact
        return setup.delta / (2.0 * p) * setup.phi0, p
    if variant in ("non_post_selected", "quantum_limited"):
        return setup.phi0, 1.0
    raise InvalidArgument(f"unknown SNR variant {variant!r}")


def snr_curve(setup: SetupParams, noise: NoiseModel, run_template: RunConfig, gammas,
              variant: str, monte_carlo: bool = False, workers=None) -> list[SnrPoint]:
    """SNR of the averaged phase versus photon rate.

    Non-post-selected: signal ``phi0``, ``N = Gamma T``. Post-selected: signal
    ``(delta/2P) phi0`` with ``P`` the exact post-selection probability,
    ``N = P Gamma T`` and correlation ``exp(-1/(P Gamma tau_c))``. The
    quantum-limited curve drops the technical noise. With ``monte_carlo`` the
    variance comes from a seeded ensemble instead of the closed form.
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise InvalidArgument("gamma grid is empty")
    signal, p = _signal_and_rate(setup, variant)
    if variant == "quantum_limited":
        noise = NoiseModel(0.0, noise.tau_c, noise.shot_var)
    out = []
    for g in gammas:
        n = p * g * run_template.total_time
        if monte_carlo:
            run = RunConfig(g, run_template.total_time, p, run_template.seed, run_template.realizations)
            stats = ensemble_stats(simulate_ensemble(noise, run, signal, workers))
            snr = abs(signal) / math.sqrt(stats.variance)
            stderr = snr * stats.variance_stderr / (2.0 * stats.variance)
        else:
            var = variance_analytic(n, correlation_ratio(p * g, noise.tau_c), noise)
            snr = abs(signal) / math.sqrt(var)
            stderr = math.nan
        out.append(SnrPoint(g, snr, stderr, variant, n))
    return out


def find_knee(gammas, snrs) -> float:
    """Rate where the low-rate sqrt(Gamma) asymptote meets the high-rate plateau.

    The asymptote is anchored at the lowest-rate point and the plateau is the
    highest-rate value, so the grid must reach into both regimes.
    """
    g = np.asarray(gammas, dtype=float)
    s = np.asarray(snrs, dtype=float)
    order = np.argsort(g)
    g, s = g[order], s[order]
    slope = s[0] / math.sqrt(g[0])
    return float((s[-1] / slope) ** 2)
