"""Brute-force check of the coherent-state results in a truncated Fock space.

The joint state lives in ``C^2 (system: a, b) x C^(cutoff+1) (probe)``. The
probe's coherent state is produced by exponentiating the displacement
generator on a padded space, the cross-Kerr coupling is the diagonal
``exp(i phi0 n_b n_c)``, and post-selection is the explicit contraction with
``t<b| + r<a|``. Nothing here uses closed-form coherent overlaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import coherent_core as cs
from .errors import CutoffTooSmall, DegeneratePostSelection, InvalidArgument
from .model import (
    DEGENERATE_P,
    SetupParams,
    mz_readout,
    post_select,
    readout_from_moments,
)

ORACLE_MAX_ALPHA = 5.0
ORACLE_TOL = 1e-8
PAD = 40


@dataclass(frozen=True)
class OracleReport:
    p_exact_oracle: float
    phase_oracle: float
    state_distance: float
    p_exact: float
    phase_exact: float
    cutoff: int

    @property
    def p_deviation(self) -> float:
        return abs(self.p_exact_oracle - self.p_exact) / self.p_exact

    @property
    def phase_deviation(self) -> float:
        return abs(self.phase_oracle - self.phase_exact)

    @property
    def max_deviation(self) -> float:
        return max(self.p_deviation, self.phase_deviation, abs(self.state_distance))

    @property
    def ok(self) -> bool:
        return self.max_deviation < ORACLE_TOL


def _coherent_by_expm(alpha: complex, cutoff: int) -> np.ndarray:
    dim = cutoff + 1 + PAD
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    return (expm(gen) @ vac)[: cutoff + 1]


def fock_oracle(params: SetupParams, cutoff: int | None = None) -> OracleReport:
    if abs(params.alpha) > ORACLE_MAX_ALPHA:
        raise InvalidArgument(
            f"Fock oracle is limited to |alpha| <= {ORACLE_MAX_ALPHA:g} "
            f"(got |alpha|^2 = {params.alpha2:.4g})"
        )
    probe_in = cs.coherent(params.alpha)
    if cutoff is None:
        cutoff = cs.auto_cutoff(probe_in)
    tail = cs.poisson_tail(params.alpha2, cutoff)
    if tail >= cs.FOCK_TAIL_TOL:
        need = cs.required_cutoff(probe_in)
        raise CutoffTooSmall(
            f"oracle cutoff {cutoff} leaves tail {tail:.3e}; use cutoff >= {need}",
            required_cutoff=need,
        )

    n = np.arange(cutoff + 1, dtype=float)
    system = np.array([-1.0, 1.0]) / math.sqrt(2.0)  # (|b> - |a>)/sqrt(2), order (a, b)
    joint = np.kron(system, _coherent_by_expm(params.alpha, cutoff))

    n_b = np.array([0.0, 1.0])
    joint = joint * np.exp(1j * params.phi0 * np.kron(n_b, n))
    if params.compensate_back_phase:
        shifter = np.array([1.0, np.exp(-1j * params.alpha2 * params.phi0)])
        joint = joint * np.kron(shifter, np.ones_like(n))

    t, r = params.t, params.r
    projector = np.kron(np.array([r, t]), np.eye(cutoff + 1))
    probe = projector @ joint
    p = float(np.vdot(probe, probe).real)
    if p < DEGENERATE_P:
        raise DegeneratePostSelection(f"oracle post-selection probability {p:.3e} vanishes")
    probe = probe / math.sqrt(p)

    fock = cs.FockVector(cutoff, probe, tail)
    _, _, phase = readout_from_moments(fock.expect_a(), fock.expect_n(), params.alpha, params.theta)

    post = post_select(params)
    analytic = cs.to_fock(post.probe_state, cutoff)
    distance = 1.0 - abs(fock.inner(analytic))
    return OracleReport(
        p_exact_oracle=p,
        phase_oracle=phase,
        state_distance=distance,
        p_exact=post.p_exact,
        phase_exact=mz_readout(params, post).phase_exact,
        cutoff=cutoff,
    )


def random_params(rng, alpha=None, phi0=None) -> SetupParams:
    """One small-scale parameter draw: |alpha|^2 <= 25, 0 < phi0 <= 0.1, delta <= 0.5."""
    if alpha is None:
        alpha = math.sqrt(rng.uniform(0.01, 25.0)) * complex(np.exp(2j * math.pi * rng.random()))
    if phi0 is None:
        phi0 = rng.uniform(1e-4, 0.1)
    delta = float(np.exp(rng.uniform(math.log(1e-3), math.log(0.5))))
    return SetupParams(
        phi0=phi0,
        alpha=alpha,
        delta=delta,
        compensate_back_phase=bool(rng.random() < 0.5),
        theta=rng.uniform(math.pi / 4, 3 * math.pi / 4),
    )


def oracle_battery(draws: int, seed: int = 0, alpha=None, phi0=None, base: SetupParams | None = None):
    """Reports for ``draws`` random parameter sets (plus ``base`` first, if given)."""
    rng = np.random.default_rng(seed)
    params = [base] if base is not None else []
    params += [random_params(rng, alpha, phi0) for _ in range(draws)]
    return [(p, fock_oracle(p)) for p in params]
