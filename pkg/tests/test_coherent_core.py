import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from wva import coherent_core as cs
from wva.errors import CutoffTooSmall, InvalidArgument, NumericalDegeneracy
from wva.model import SetupParams, mz_readout, post_select

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
small_amp = st.builds(complex, finite, finite).filter(lambda z: abs(z) <= 2.0)
big_amp = st.builds(complex, st.floats(-14, 14), st.floats(-14, 14))
coeff = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


def superpositions(amps=small_amp, max_terms=4):
    return st.lists(st.tuples(coeff, amps), min_size=1, max_size=max_terms).map(
        cs.CoherentSuperposition.from_terms
    )


def normalized(s):
    assume(cs.norm(s) > 1e-3)
    return cs.normalize(s)


def displacement_matrix(g, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    return expm(g * a.conj().T - np.conj(g) * a)


# --- overlaps -------------------------------------------------------------

def test_overlap_vacuum():
    assert cs.coherent_overlap(0, 0) == 1 + 0j


@given(big_amp)
def test_overlap_self_is_one(a):
    assert cs.coherent_overlap(a, a) == pytest.approx(1.0, abs=1e-12)


def test_overlap_large_close_amplitudes():
    alpha2, phi0 = 1e5, 2 * math.pi * 1e-5
    a = math.sqrt(alpha2)
    ov = cs.coherent_overlap(a, a * cmath.exp(1j * phi0))
    # magnitude: exp(-|a|^2 (1 - cos phi0)) ~ exp(-|a|^2 phi0^2 / 2)
    assert abs(ov) == pytest.approx(math.exp(-alpha2 * phi0**2 / 2), rel=1e-9)
    assert abs(ov) == pytest.approx(0.9998026, abs=1e-7)
    # phase: |a|^2 sin(phi0), compared as unit phasors
    assert abs(ov / abs(ov) - cmath.exp(1j * alpha2 * math.sin(phi0))) < 1e-9


@given(big_amp, big_amp)
def test_overlap_symmetry_exact(a, b):
    assert cs.coherent_overlap(a, b) == cs.coherent_overlap(b, a).conjugate()


@given(big_amp, big_amp)
def test_overlap_bounded_and_matches_textbook(a, b):
    ov = cs.coherent_overlap(a, b)
    assert abs(ov) <= 1.0 + 1e-15
    textbook = cmath.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + a.conjugate() * b)
    assert ov == pytest.approx(textbook, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("bad", [math.nan, math.inf, complex(0, math.inf)])
def test_overlap_rejects_non_finite(bad):
    with pytest.raises(InvalidArgument):
        cs.coherent_overlap(bad, 0)


# --- norm -----------------------------------------------------------------

def test_norm_single_term():
    assert cs.norm(cs.coherent(2.5 - 1j)) == pytest.approx(1.0, abs=1e-12)


def test_norm_two_identical_halves():
    s = cs.CoherentSuperposition([0.5, 0.5], [1.3j, 1.3j])
    assert cs.norm(s) == pytest.approx(1.0, abs=1e-12)


def test_norm_destructive_interference():
    s = cs.CoherentSuperposition([1.0, -1.0], [0.7, 0.7])
    assert cs.norm(s) == pytest.approx(0.0, abs=1e-7)


@given(superpositions(big_amp, 5))
def test_gram_positivity(s):
    n2, scale = cs._quadratic(s, np.ones_like(s.coeffs), np.ones_like(s.coeffs))
    assert n2.real >= -1e-12 * max(scale, 1.0)
    assert cs.norm_squared(s) >= 0.0


def test_norm_near_cancellation_and_zero():
    s = cs.CoherentSuperposition([1.0, -1.0 + 1e-3j], [0.0, 0.0])
    assert cs.norm(s) == pytest.approx(1e-3, rel=1e-9)
    assert cs.norm(cs.CoherentSuperposition([1.0, 1.0], [0.0, 0.0])) == pytest.approx(2.0)
    with pytest.raises(NumericalDegeneracy):
        cs.normalize(cs.CoherentSuperposition([1.0, -1.0], [0.0, 0.0]))


def test_construction_validates():
    with pytest.raises(InvalidArgument):
        cs.CoherentSuperposition([], [])
    with pytest.raises(InvalidArgument):
        cs.CoherentSuperposition([1.0, 2.0], [0.0])
    with pytest.raises(InvalidArgument):
        cs.CoherentSuperposition([math.nan], [0.0])
    with pytest.raises(InvalidArgument):
        cs.CoherentSuperposition([2.0], [0.0], normalized=True)


def test_merge_terms():
    s = cs.merge_terms(cs.CoherentSuperposition([0.25, 0.5, 0.25], [1.0, 2.0, 1.0]))
    assert len(s) == 2
    assert s.terms == [(0.5 + 0j, 1 + 0j), (0.5 + 0j, 2 + 0j)]


# --- expectation values -----------------------------------------------------

def test_expect_single_coherent():
    beta = 1.7 - 0.4j
    assert cs.expect_a(cs.coherent(beta)) == pytest.approx(beta, abs=1e-12)
    assert cs.expect_n(cs.coherent(beta)) == pytest.approx(abs(beta) ** 2, abs=1e-12)


def test_expect_vacuum():
    assert cs.expect_a(cs.vacuum()) == 0
    assert cs.expect_n(cs.vacuum()) == 0


def test_expect_requires_normalized():
    with pytest.raises(InvalidArgument):
        cs.expect_a(cs.CoherentSuperposition([2.0], [1.0]))
    with pytest.raises(InvalidArgument):
        cs.expect_n(cs.CoherentSuperposition([0.5], [1.0]))


def test_expect_a_tracks_first_order_phase():
    params = SetupParams.from_alpha2(2 * math.pi * 1e-5, 1e5, 0.1, compensate_back_phase=True)
    post = post_select(params)
    shift = cmath.phase(cs.expect_a(post.probe_state) / params.alpha)
    predicted = params.delta / (2 * post.p_exact) * params.phi0
    assert shift == pytest.approx(predicted, rel=0.10)


@settings(max_examples=60, deadline=None)
@given(superpositions())
def test_fock_and_analytic_moments_agree(s):
    s = normalized(s)
    fock = cs.to_fock(s)
    assert fock.tail < 1e-12
    assert fock.expect_a() == pytest.approx(cs.expect_a(s), abs=1e-8)
    assert fock.expect_n() == pytest.approx(cs.expect_n(s), abs=1e-8)


@given(superpositions(big_amp), st.floats(-math.pi, math.pi))
def test_phase_covariance(s, phi):
    s = normalized(s)
    rot = cmath.exp(1j * phi)
    turned = cs.CoherentSuperposition(s.coeffs, s.amps * rot)
    assert cs.expect_a(turned) == pytest.approx(rot * cs.expect_a(s), abs=1e-12 * (1 + abs(cs.expect_a(s))))
    assert cs.expect_n(turned) == pytest.approx(cs.expect_n(s), abs=1e-12 * (1 + cs.expect_n(s)))


# --- displacement -----------------------------------------------------------

def test_displace_coherent_to_vacuum():
    g = 2.0 - 1.5j
    out = cs.displace(cs.coherent(g), g)
    assert out.amps[0] == 0
    # global phase only: the overlap with |0> has unit modulus
    overlap = out.coeffs[0] * cs.coherent_overlap(0, out.amps[0])
    assert abs(abs(overlap) - 1.0) < 1e-12


def test_displace_identity():
    out = cs.displace(cs.vacuum(), 0)
    assert out.terms == [(1 + 0j, 0j)]


@given(superpositions(big_amp), st.builds(complex, st.floats(-14, 14), st.floats(-14, 14)))
def test_displacement_preserves_norm(s, g):
    assume(abs(g) <= 20)
    assert abs(cs.norm(cs.displace(s, g)) - cs.norm(s)) < 1e-12 * max(1.0, cs.norm(s))


@pytest.mark.parametrize("g", [0.8, -0.3 + 0.9j, 1.1j])
@pytest.mark.parametrize("beta", [0.0, 0.5 - 0.2j, -1.0 + 0.7j])
def test_displace_phase_convention_against_matrix(g, beta):
    """D(g)^dagger |beta> = exp(i Im(beta g*)) |beta - g>, checked with expm."""
    dim = 80
    psi = cs.fock_amplitudes(cs.coherent(beta), dim - 1)
    via_matrix = displacement_matrix(g, dim).conj().T @ psi
    ours = cs.fock_amplitudes(cs.displace(cs.coherent(beta), g), dim - 1)
    assert np.max(np.abs(ours[:40] - via_matrix[:40])) < 1e-12


def test_displaced_probe_first_order_amplitudes():
    # post-selected probe at delta = 0.01, |alpha|^2 = 1e5, phi0 = 2 pi 1e-5 (epsilon = 0)
    params = SetupParams.from_alpha2(2 * math.pi * 1e-5, 1e5, 0.01)
    post = post_select(params)
    chi = cs.displace(post.probe_state, params.alpha)
    amps = cs.fock_amplitudes(chi, 1) * math.sqrt(post.p_exact)
    predicted = [params.delta, 1j * params.alpha * params.phi0 / 2]
    for got, want in zip(amps, predicted):
        assert abs(got - want) / abs(want) < 1e-2


# --- Fock conversion --------------------------------------------------------

def test_to_fock_vacuum():
    f = cs.to_fock(cs.vacuum(), 0)
    assert f.cutoff == 0
    assert f.amps.tolist() == [1 + 0j]


def test_to_fock_unit_amplitude():
    f = cs.to_fock(cs.coherent(1.0), 20)
    expected = [math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(21)]
    assert np.allclose(f.amps, expected, rtol=1e-13, atol=0)
    assert f.tail < 1e-18


def test_to_fock_norm_matches_gram_norm():
    params = SetupParams.from_alpha2(0.05, 4.0, 0.1)
    unnorm = post_select(params).probe_state
    f = cs.to_fock(unnorm)
    assert f.norm() == pytest.approx(cs.norm(unnorm), abs=1e-10)


def test_to_fock_cutoff_too_small_reports_estimate():
    s = cs.coherent(3.0)
    with pytest.raises(CutoffTooSmall) as info:
        cs.to_fock(s, 10)
    need = info.value.required_cutoff
    assert need is not None
    assert cs.to_fock(s, need).tail < 1e-12


def test_to_fock_refuses_large_amplitude():
    with pytest.raises(InvalidArgument):
        cs.to_fock(cs.coherent(31.0))


def test_auto_cutoff_formula():
    s = cs.CoherentSuperposition([1, 1], [2.0, 3.0j])
    assert cs.auto_cutoff(s) == math.ceil(9 + 30 + 20)


def test_readout_moments_do_not_need_fock():
    # large-alpha path stays analytic
    res = mz_readout(SetupParams.from_alpha2(2 * math.pi * 1e-5, 1e5, 0.1))
    assert res.m_plus > 0


@pytest.mark.parametrize("delta,phi0", [(1e-4, 1e-9), (1e-6, 1e-12), (3e-3, 2e-5)])
def test_small_probability_keeps_digits(delta, phi0):
    # cancellation-free closed form of the two-term norm at large |alpha|
    params = SetupParams.from_alpha2(phi0, 1e5, delta)
    t, r, a = params.t, params.r, params.alpha
    x = abs(a * (cmath.exp(1j * phi0) - 1)) ** 2 / 2
    y = a.real**2 * math.sin(phi0)
    one_minus = -math.expm1(-x) + math.exp(-x) * 2 * math.sin(y / 2) ** 2
    expected = ((t - r) ** 2 + 2 * t * r * one_minus) / 2
    assert post_select(params).p_exact == pytest.approx(expected, rel=1e-9)


def test_gram_minus_one_matches_gram():
    amps = np.array([0.3 + 0.1j, -1.2j, 2.0])
    assert np.allclose(cs.gram_minus_one(amps), cs.gram(amps) - 1, atol=1e-15)
