"""Finite superpositions of coherent states.

A state is stored as parallel arrays of complex coefficients ``c_k`` and
coherent amplitudes ``beta_k`` representing ``sum_k c_k |beta_k>``. All
quantities (overlaps, norms, moments of the annihilation and number
operators, displacement) are evaluated in closed form from pairwise
overlaps, so there is no truncation anywhere on this path.

``to_fock`` converts to a truncated photon-number vector. It exists only to
feed brute-force cross-checks and refuses amplitudes above ``FOCK_MAX_AMPLITUDE``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from .errors import CutoffTooSmall, InvalidArgument, NumericalDegeneracy

EXACT_TOL = 1e-12
NORMALIZED_TOL = 1e-10
FOCK_TAIL_TOL = 1e-12
FOCK_MAX_AMPLITUDE = 30.0


def as_amp(x, name="amplitude") -> complex:
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidArgument(f"{name} must be finite, got {z!r}")
    return z


def _as_array(values, name):
    arr = np.atleast_1d(np.asarray(values, dtype=np.complex128)).copy()
    if arr.ndim != 1:
        raise InvalidArgument(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CoherentSuperposition:
    """``sum_k coeffs[k] |amps[k]>``; immutable."""

    coeffs: np.ndarray
    amps: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        coeffs = _as_array(self.coeffs, "coefficients")
        amps = _as_array(self.amps, "amplitudes")
        if coeffs.shape != amps.shape:
            raise InvalidArgument("coefficients and amplitudes differ in length")
        if coeffs.size == 0:
            raise InvalidArgument("a superposition needs at least one term")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "amps", amps)
        if self.normalized:
            n = norm(self)
            if abs(n - 1.0) > NORMALIZED_TOL:
                raise InvalidArgument(f"state flagged normalized has norm {n!r}")

    @classmethod
    def from_terms(cls, terms, normalized=False):
        terms = list(terms)
        return cls([c for c, _ in terms], [b for _, b in terms], normalized)

    @property
    def terms(self):
        return list(zip(self.coeffs.tolist(), self.amps.tolist()))

    def __len__(self):
        return self.coeffs.size

    def __repr__(self):
        body = " + ".join(f"({c:.6g})|{b:.6g}>" for c, b in self.terms)
        return f"CoherentSuperposition({body})"


def merge_terms(s: CoherentSuperposition) -> CoherentSuperposition:
    """Combine terms whose amplitudes are exactly equal."""
    coeffs, amps = [], []
    for c, b in zip(s.coeffs.tolist(), s.amps.tolist()):
        if b in amps:
            coeffs[amps.index(b)] += c
        else:
            coeffs.append(c)
            amps.append(b)
    if len(amps) == len(s):
        return s
    return CoherentSuperposition(coeffs, amps)


def coherent(beta) -> CoherentSuperposition:
    return CoherentSuperposition([1.0], [as_amp(beta)], normalized=True)


def vacuum() -> CoherentSuperposition:
    return coherent(0.0)


def coherent_overlap(a, b) -> complex:
    """<a|b> for coherent states.

    Written as ``exp(-|a-b|^2/2 + i Im(a* b))``, which equals
    ``exp(-|a|^2/2 - |b|^2/2 + a* b)`` but does not lose precision when
    ``a`` and ``b`` are large and close together.
    """
    a = as_amp(a, "a")
    b = as_amp(b, "b")
    d = a - b
    im = a.real * b.imag - a.imag * b.real
    return complex(np.exp(complex(-0.5 * (d.real * d.real + d.imag * d.imag), im)))


def gram(amps) -> np.ndarray:
    """Matrix of pairwise overlaps ``G[j, k] = <amps[j]|amps[k]>``."""
    amps = np.asarray(amps, dtype=np.complex128)
    a = amps[:, None]
    b = amps[None, :]
    d = a - b
    im = a.real * b.imag - a.imag * b.real
    return np.exp(-0.5 * (d.real**2 + d.imag**2) + 1j * im)


def gram_minus_one(amps) -> np.ndarray:
    """``G - 1`` computed without cancellation for nearly equal amplitudes."""
    amps = np.asarray(amps, dtype=np.complex128)
    a = amps[:, None]
    b = amps[None, :]
    d = a - b
    x = -0.5 * (d.real**2 + d.imag**2)
    y = a.real * b.imag - a.imag * b.real
    # e^{x+iy} - 1 = expm1(x) e^{iy} + (e^{iy} - 1)
    turn = -2.0 * np.sin(0.5 * y) ** 2 + 1j * np.sin(y)
    return np.expm1(x) * np.exp(1j * y) + turn


def _quadratic(s: CoherentSuperposition, weights_left, weights_right):
    """sum_jk conj(c_j w_j) c_k v_k G_jk, plus the scale of its largest term.

    Split as ``conj(sum l) sum r + sum conj(l_j) r_k (G_jk - 1)`` so that a
    near-cancelling pair (small post-selection probability) keeps its digits.
    """
    left = s.coeffs * weights_left
    right = s.coeffs * weights_right
    outer = np.conj(left)[:, None] * right[None, :]
    scale = float(np.sum(np.abs(outer * gram(s.amps))))
    value = np.conj(left.sum()) * right.sum() + (outer * gram_minus_one(s.amps)).sum()
    return complex(value), scale


def norm_squared(s: CoherentSuperposition) -> float:
    ones = np.ones_like(s.coeffs)
    value, scale = _quadratic(s, ones, ones)
    tol = EXACT_TOL * max(scale, 1.0)
    if abs(value.imag) > tol:
        raise NumericalDegeneracy(f"Gram sum has imaginary residue {value.imag:.3e}")
    if value.real < -tol:
        raise NumericalDegeneracy(f"Gram sum is negative ({value.real:.3e})")
    return max(value.real, 0.0)


def norm(s: CoherentSuperposition) -> float:
    return math.sqrt(norm_squared(s))


def normalize(s: CoherentSuperposition) -> CoherentSuperposition:
    n = norm(s)
    if n == 0.0:
        raise NumericalDegeneracy("cannot normalize a zero-norm superposition")
    return CoherentSuperposition(s.coeffs / n, s.amps, normalized=True)


def _require_normalized(s: CoherentSuperposition) -> float:
    n2 = norm_squared(s)
    if abs(n2 - 1.0) > NORMALIZED_TOL:
        raise InvalidArgument(f"state is not normalized (norm^2 = {n2!r})")
    return n2


def expect_a(s: CoherentSuperposition) -> complex:
    """<psi|a|psi> using a|beta> = beta|beta>."""
    n2 = _require_normalized(s)
    value, _ = _quadratic(s, np.ones_like(s.coeffs), s.amps)
    return value / n2


def expect_n(s: CoherentSuperposition) -> float:
    """<psi|a^dag a|psi> from <b_j|n|b_k> = conj(b_j) b_k <b_j|b_k>."""
    n2 = _require_normalized(s)
    value, scale = _quadratic(s, s.amps, s.amps)
    if value.real < -EXACT_TOL * max(scale, 1.0):
        raise NumericalDegeneracy(f"negative photon number {value.real:.3e}")
    return max(value.real, 0.0) / n2


def displace(s: CoherentSuperposition, g) -> CoherentSuperposition:
    """Apply D(g)^dagger termwise.

    Convention: ``D(g)^dagger |beta> = exp(i Im(beta g*)) |beta - g>``, which
    follows from ``D(g) = exp(g a^dag - g* a)`` and the BCH factorisation.
    """
    g = as_amp(g, "displacement")
    phase = np.exp(1j * (s.amps * np.conj(g)).imag)
    return CoherentSuperposition(s.coeffs * phase, s.amps - g, normalized=s.normalized)


def coherent_fock_amplitudes(beta, n_max: int) -> np.ndarray:
    """<n|beta> = exp(-|beta|^2/2) beta^n / sqrt(n!) for n = 0..n_max."""
    beta = as_amp(beta)
    out = np.empty(n_max + 1, dtype=np.complex128)
    out[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * beta / math.sqrt(n)
    return out


def fock_amplitudes(s: CoherentSuperposition, n_max: int) -> np.ndarray:
    """Leading photon-number amplitudes of ``s`` without any tail check."""
    out = np.zeros(n_max + 1, dtype=np.complex128)
    for c, b in zip(s.coeffs, s.amps):
        out += c * coherent_fock_amplitudes(b, n_max)
    return out


def auto_cutoff(s: CoherentSuperposition) -> int:
    r = float(np.max(np.abs(s.amps)))
    return int(math.ceil(r * r + 10.0 * r + 20.0))


def poisson_tail(mean_photons: float, cutoff: int) -> float:
    """Probability mass of a coherent state beyond photon number ``cutoff``."""
    if mean_photons == 0.0:
        return 0.0
    return float(poisson.sf(cutoff, mean_photons))


def required_cutoff(s: CoherentSuperposition, tol=FOCK_TAIL_TOL) -> int:
    k = auto_cutoff(s)
    mu = float(np.max(np.abs(s.amps))) ** 2
    while poisson_tail(mu, k) >= tol:
        k += max(1, k // 8)
    return k


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated number-basis amplitudes ``amps[n] = <n|psi>``, n <= cutoff."""

    cutoff: int
    amps: np.ndarray
    tail: float = 0.0
    tolerance: float = FOCK_TAIL_TOL
    _n: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.cutoff + 1,):
            raise InvalidArgument("FockVector needs cutoff + 1 amplitudes")
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "_n", np.arange(self.cutoff + 1, dtype=float))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def inner(self, other: "FockVector") -> complex:
        m = min(self.cutoff, other.cutoff) + 1
        return complex(np.vdot(self.amps[:m], other.amps[:m]))

    def expect_a(self) -> complex:
        a = self.amps
        num = np.sum(np.conj(a[:-1]) * np.sqrt(self._n[1:]) * a[1:])
        return complex(num / np.sum(np.abs(a) ** 2))

    def expect_n(self) -> float:
        w = np.abs(self.amps) ** 2
        return float(np.sum(self._n * w) / np.sum(w))


def to_fock(s: CoherentSuperposition, cutoff: int | None = None, tol=FOCK_TAIL_TOL) -> FockVector:
    """Expand ``s`` in the photon-number basis up to ``cutoff``.

    With ``cutoff=None`` the cutoff is ``max_k(|b_k|^2 + 10|b_k| + 20)``.
    Raises ``CutoffTooSmall`` (carrying a workable cutoff) when the Poisson
    tail of any term exceeds ``tol``.
    """
    r = float(np.max(np.abs(s.amps)))
    if r > FOCK_MAX_AMPLITUDE:
        raise InvalidArgument(
            f"Fock expansion refuses |beta| = {r:.3g} > {FOCK_MAX_AMPLITUDE:g}"
        )
    if cutoff is None:
        cutoff = auto_cutoff(s)
    if cutoff < 0:
        raise InvalidArgument("cutoff must be non-negative")
    tail = max(poisson_tail(abs(b) ** 2, cutoff) for b in s.amps)
    if tail >= tol:
        need = required_cutoff(s, tol)
        raise CutoffTooSmall(
            f"cutoff {cutoff} leaves tail mass {tail:.3e} >= {tol:.1e}; use cutoff >= {need}",
            required_cutoff=need,
        )
    return FockVector(cutoff, fock_amplitudes(s, cutoff), tail, tol)
