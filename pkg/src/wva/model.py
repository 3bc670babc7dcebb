"""Cross-Kerr weak-value amplification setup.

One system photon enters the upper interferometer in ``(|b> - |a>)/sqrt(2)``.
Arm ``b`` imprints ``exp(i phi0 n_c)`` on a coherent probe ``|alpha>``; the
system is then projected onto ``<f| = t<b| + r<a|`` with
``delta = (t - r)/sqrt(2)``. The conditional probe is the two-term
superposition ``(t|alpha e^{i phi0}> - r|alpha>)/sqrt(2)`` (unnormalized), and
its squared norm is the post-selection probability.

The lower Mach-Zehnder splits a ``sqrt(2) alpha`` beam 50/50: the Kerr arm
carries the post-selected probe, the reference arm ``|alpha e^{i theta}>``.
For a coherent reference the detector moments reduce to

    M_+ = <n_c> + |alpha|^2
    M_- = n_3 - n_2 = 2 Re(<a_c>* alpha e^{i theta})

and the measured phase is defined by ``M_-/M_+ = sin(phase - theta + pi/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import coherent_core as cs
from .errors import DegeneratePostSelection, InvalidArgument, NoLight

DELTA_MAX = 1.0 / math.sqrt(2.0)
PHI0_MAX = 0.1
WEAK_REGIME_RATIO = 10.0
DEGENERATE_P = 1e-30
ARGMAX_POINTS_PER_DECADE = 200


@dataclass(frozen=True)
class SetupParams:
    """Physical knobs of the two-interferometer setup.

    ``phi0`` is the cross-phase per photon, ``alpha`` the probe amplitude in
    the Kerr arm, ``delta`` the post-selection parameter, ``theta`` the
    readout phase of the reference arm. With ``compensate_back_phase`` a
    system-side phase shifter removes the mean back-action ``|alpha|^2 phi0``.
    """

    phi0: float
    alpha: complex
    delta: float
    compensate_back_phase: bool = False
    theta: float = math.pi / 2

    def __post_init__(self):
        object.__setattr__(self, "alpha", cs.as_amp(self.alpha, "alpha"))
        for name in ("phi0", "delta", "theta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidArgument(f"{name} must be finite")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "compensate_back_phase", bool(self.compensate_back_phase))
        if abs(self.phi0) > PHI0_MAX:
            raise InvalidArgument(f"|phi0| must be <= {PHI0_MAX}, got {self.phi0!r}")
        if not 0.0 <= self.delta < DELTA_MAX:
            raise InvalidArgument(f"delta must lie in [0, 1/sqrt(2)), got {self.delta!r}")

    @classmethod
    def from_alpha2(cls, phi0, alpha2, delta, **kw):
        if alpha2 < 0:
            raise InvalidArgument("alpha2 must be non-negative")
        return cls(phi0=phi0, alpha=math.sqrt(alpha2), delta=delta, **kw)

    @property
    def alpha2(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def t(self) -> float:
        return _beam_splitter(self.delta)[0]

    @property
    def r(self) -> float:
        return _beam_splitter(self.delta)[1]

    def replace(self, **changes) -> "SetupParams":
        return replace(self, **changes)

    def with_alpha2(self, alpha2: float) -> "SetupParams":
        if alpha2 < 0:
            raise InvalidArgument("alpha2 must be non-negative")
        unit = self.alpha / abs(self.alpha) if self.alpha != 0 else 1.0
        return replace(self, alpha=math.sqrt(alpha2) * unit)


def _beam_splitter(delta):
    # t + r = sqrt(2 - 2 delta^2), t - r = sqrt(2) delta, t^2 + r^2 = 1
    s = math.sqrt(2.0 - 2.0 * delta * delta)
    d = math.sqrt(2.0) * delta
    return (s + d) / 2.0, (s - d) / 2.0


@dataclass(frozen=True, eq=False)
class PostSelectionResult:
    p_exact: float
    p_approx: float
    epsilon: float
    probe_state: cs.CoherentSuperposition
    weak_regime: bool


@dataclass(frozen=True)
class ReadoutResult:
    m_minus: float
    m_plus: float
    phase_exact: float
    phase_eq5: float
    enhancement: float


def epsilon_of(params: SetupParams) -> float:
    """Back-action phase ``|alpha|^2 phi0`` reduced to (-pi, pi]; 0 if compensated."""
    if params.compensate_back_phase or params.phi0 == 0.0:
        return 0.0
    eps = math.remainder(params.alpha2 * params.phi0, 2.0 * math.pi)
    return math.pi if eps == -math.pi else eps


def weak_value_nb(delta: float) -> tuple[float, float]:
    """Weak value of the arm-``b`` photon number: ``(t/(sqrt(2) delta), 1/(2 delta))``."""
    delta = float(delta)
    if not (delta > 0.0 and delta <= DELTA_MAX + 1e-15):
        raise InvalidArgument(f"weak value needs 0 < delta <= 1/sqrt(2), got {delta!r}")
    delta = min(delta, DELTA_MAX)
    t, _ = _beam_splitter(delta)
    return t / (math.sqrt(2.0) * delta), 1.0 / (2.0 * delta)


def weak_regime(params: SetupParams, epsilon: float | None = None) -> bool:
    eps = epsilon_of(params) if epsilon is None else epsilon
    back_action = (eps * eps + params.alpha2 * params.phi0**2) / 4.0
    return params.delta**2 > WEAK_REGIME_RATIO * back_action


def unnormalized_probe(params: SetupParams) -> cs.CoherentSuperposition:
    """``<f|Psi>`` as a coherent superposition (norm^2 = post-selection probability)."""
    t, r = _beam_splitter(params.delta)
    c_b = t / math.sqrt(2.0)
    if params.compensate_back_phase:
        c_b = c_b * complex(np.exp(-1j * params.alpha2 * params.phi0))
    c_a = -r / math.sqrt(2.0)
    kicked = params.alpha * complex(np.exp(1j * params.phi0))
    return cs.merge_terms(cs.CoherentSuperposition([c_b, c_a], [kicked, params.alpha]))


def post_select(params: SetupParams) -> PostSelectionResult:
    unnorm = unnormalized_probe(params)
    p = cs.norm_squared(unnorm)
    if p < DEGENERATE_P:
        raise DegeneratePostSelection(
            f"post-selection probability {p:.3e} vanishes (perfectly dark port)"
        )
    eps = epsilon_of(params)
    p_approx = params.alpha2 * params.phi0**2 / 4.0 + params.delta**2 + eps * eps / 4.0
    probe = cs.CoherentSuperposition(unnorm.coeffs / math.sqrt(p), unnorm.amps, normalized=True)
    return PostSelectionResult(p, p_approx, eps, probe, weak_regime(params, eps))


def displaced_probe(params: SetupParams) -> cs.CoherentSuperposition:
    """Post-selected probe shifted back to the origin, ``D(alpha)^dagger |psi>``."""
    return cs.displace(post_select(params).probe_state, params.alpha)


def readout_from_moments(mean_a: complex, mean_n: float, alpha: complex, theta: float):
    """Detector moments and inferred phase for a Kerr-arm state with moments ``<a>``, ``<n>``."""
    # offset from the theta = pi/2 operating point; e^{i theta} = i e^{i offset}
    offset = theta - math.pi / 2
    ref = alpha * complex(np.exp(1j * offset)) if offset else alpha
    m_plus = mean_n + abs(alpha) ** 2
    m_minus = -2.0 * (mean_a.conjugate() * ref).imag + 0.0  # no signed zero
    if m_plus <= 0.0:
        raise NoLight("no light reaches the readout detectors")
    # |M_-| <= M_+ by Cauchy-Schwarz; clip rounding only
    ratio = min(1.0, max(-1.0, m_minus / m_plus))
    return m_minus, m_plus, offset + math.asin(ratio)


def mz_readout(params: SetupParams, post: PostSelectionResult | None = None) -> ReadoutResult:
    post = post_select(params) if post is None else post
    probe = post.probe_state
    m_minus, m_plus, phase = readout_from_moments(
        cs.expect_a(probe), cs.expect_n(probe), params.alpha, params.theta
    )
    phase_eq5 = params.delta / (2.0 * post.p_exact) * params.phi0
    if params.phi0 != 0.0:
        enhancement = phase / params.phi0
    else:
        # phi0 -> 0 limit of phase/phi0 is the exact weak value
        enhancement = weak_value_nb(params.delta)[0]
    return ReadoutResult(m_minus, m_plus, phase, phase_eq5, enhancement)


def delta_opt(params: SetupParams) -> float:
    eps = epsilon_of(params)
    return math.sqrt(params.alpha2 * params.phi0**2 + eps * eps) / 2.0


def delta_grid(center: float, span: float = 100.0, per_decade: int = ARGMAX_POINTS_PER_DECADE):
    """Log grid on ``[center/span, min(center*span, ~1/sqrt(2))]``."""
    lo = center / span
    hi = min(center * span, DELTA_MAX * (1 - 1e-9))
    n = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    return np.geomspace(lo, hi, n)


def delta_opt_numeric(params: SetupParams, span: float = 100.0) -> float:
    """Argmax of the exact enhancement over a log grid around ``delta_opt``."""
    center = delta_opt(params)
    if center == 0.0:
        return 0.0
    grid = delta_grid(center, span)
    values = [mz_readout(params.replace(delta=float(d))).enhancement for d in grid]
    return float(grid[int(np.argmax(values))])


@dataclass(frozen=True)
class SweepRow:
    x: float
    enhancement_exact: float
    enhancement_weak_prediction: float


def enhancement_sweep(base: SetupParams, axis: str, grid) -> list[SweepRow]:
    """Exact enhancement along ``axis`` ("alpha2" or "delta"), one row per grid point."""
    grid = [float(x) for x in grid]
    if not grid:
        raise InvalidArgument("sweep grid is empty")
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise InvalidArgument("sweep grid must be strictly monotone")
    if axis == "alpha2":
        make = base.with_alpha2
    elif axis == "delta":
        make = lambda d: base.replace(delta=d)  # noqa: E731
    else:
        raise InvalidArgument(f"unknown sweep axis {axis!r}")
    rows = []
    for x in grid:
        p = make(x)
        weak = 1.0 / (2.0 * p.delta) if p.delta > 0 else math.inf
        rows.append(SweepRow(x, mz_readout(p).enhancement, weak))
    return rows
