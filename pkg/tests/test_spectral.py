import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import ndtr

from qclock.core import ChannelSpec
from qclock.spectral import (BranchAmbiguityError, PoleError, WavepacketSpec, branch_q,
                             branch_q_on_cut, clock_gaussian, clock_gaussian_ft,
                             free_evolution, mode_amplitudes, mode_phi, particle_amplitude,
                             truncated_sine, truncated_sine_ft)

P2 = ChannelSpec(2.0)


def quad_ft(k, a, b):
    """G(k) by adaptive quadrature of the defining integral."""
    f = lambda x: truncated_sine(x, a, b) * np.exp(-1j * k * x)
    re = integrate.quad(lambda x: f(x).real, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda x: f(x).imag, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return re + 1j * im


# --- branch of q ---------------------------------------------------------

def test_branch_examples():
    assert branch_q(3.0, ChannelSpec(0.0)) == 3.0
    assert branch_q(1.0, P2) == pytest.approx(math.sqrt(5.0), rel=1e-15)
    assert abs(branch_q(2j, P2)) < 1e-15          # cut tip


def test_on_cut_values():
    assert branch_q_on_cut(1e-12, "right", P2) == pytest.approx(2.0)
    assert branch_q_on_cut(2.0, "left", P2) == 0.0
    assert branch_q_on_cut(2.0, "right", P2) == 0.0
    r, l = branch_q_on_cut(1.0, "right", P2), branch_q_on_cut(1.0, "left", P2)
    assert abs(r) == pytest.approx(math.sqrt(3.0)) and np.sign(l) == -np.sign(r)


def test_open_cut_is_ambiguous():
    with pytest.raises(BranchAmbiguityError):
        branch_q(1j, P2)
    with pytest.raises(ValueError):
        branch_q_on_cut(2.5, "right", P2)
    with pytest.raises(ValueError):
        branch_q_on_cut(1.0, "up", P2)


def test_sides_are_limits_of_branch_q():
    eps = 1e-9
    for kappa in (0.3, 1.0, 1.9):
        assert branch_q(eps + 1j * kappa, P2) == pytest.approx(branch_q_on_cut(kappa, "right", P2), abs=1e-7)
        assert branch_q(-eps + 1j * kappa, P2) == pytest.approx(branch_q_on_cut(kappa, "left", P2), abs=1e-7)


def test_branch_continuity_on_a_loop_around_the_cut():
    # ellipse enclosing the whole cut: q is single-valued and continuous on it
    s = np.linspace(0, 2 * np.pi, 4001)
    k = 1.0 * np.cos(s) + 1j * 3.0 * np.sin(s)
    q = branch_q(k, P2)
    assert np.max(np.abs(np.diff(q))) < 0.01
    assert abs(q[0] - q[-1]) < 1e-12
    # q -> k far away
    assert abs(branch_q(1e6 + 1e6j, P2) / (1e6 + 1e6j) - 1) < 1e-11


def test_crossing_the_cut_flips_sign():
    for kappa in (0.5, 1.5):
        a, b = branch_q(-1e-10 + 1j * kappa, P2), branch_q(1e-10 + 1j * kappa, P2)
        assert a == pytest.approx(-b, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(k=st.floats(0.1, 10.0), p=st.sampled_from([0.5, 2.0, 8.0]), sign=st.sampled_from([-1.0, 1.0]))
def test_flux_conservation(k, p, sign):
    ch = ChannelSpec(p)
    k = sign * k
    amp = mode_amplitudes(k, ch)
    q = amp.q.real
    assert abs(abs(amp.r) ** 2 + (q / k) * abs(amp.tr) ** 2 - 1.0) < 1e-12


def test_matching_at_random_complex_k(rng):
    k = rng.uniform(-10, 10, 1000) + 1j * rng.uniform(-10, 10, 1000)
    k = k[~((np.abs(k.real) < 1e-3) & (np.abs(k.imag) < 2.1))]
    amp = mode_amplitudes(k, P2)
    assert np.max(np.abs(1 + amp.r - amp.tr)) < 1e-13


def test_amplitude_examples():
    free = mode_amplitudes(np.array([0.5, 3.0, -2.0]), ChannelSpec(0.0))
    assert np.allclose(free.r, 0.0) and np.allclose(free.tr, 1.0)
    tip = mode_amplitudes(2j, P2, q=0.0)
    assert tip.r == pytest.approx(1.0) and tip.tr == pytest.approx(2.0)
    one = mode_amplitudes(1.0, P2)
    s5 = math.sqrt(5.0)
    assert one.r == pytest.approx((1 - s5) / (1 + s5), rel=1e-14)
    assert one.tr == pytest.approx(2 / (1 + s5), rel=1e-14)
    with pytest.raises(PoleError):
        mode_amplitudes(0.0, ChannelSpec(0.0))


def test_mode_phi():
    x = np.linspace(-3, 3, 7)
    # matching at x = 0 from both sides
    amp = mode_amplitudes(1.3, P2)
    left = (np.exp(0) + amp.r) / (2 * np.pi)
    assert mode_phi(1.3, P2, 0.0) == pytest.approx(left)
    assert mode_phi(1.3, P2, 1e-12) == pytest.approx(amp.tr / (2 * np.pi), abs=1e-12)
    # free plane wave
    assert np.allclose(mode_phi(0.7, ChannelSpec(0.0), x), np.exp(0.7j * x) / (2 * np.pi))
    # hand evaluation at p = 2, k = 1, x = -1
    s5 = math.sqrt(5.0)
    r = (1 - s5) / (1 + s5)
    expect = (cmath.exp(-1j) + r * cmath.exp(1j)) / (2 * math.pi)
    assert mode_phi(1.0, P2, -1.0) == pytest.approx(expect, rel=1e-14)
    # clock phase exp(i p y - i (p + k^2/2) t)
    got = mode_phi(1.0, P2, -1.0, y=0.5, t=0.25)
    assert got == pytest.approx(expect * cmath.exp(1j * 2.0 * 0.5 - 1j * 2.5 * 0.25), rel=1e-14)


# --- particle and clock amplitudes -------------------------------------

def test_ft_at_zero():
    assert truncated_sine_ft(0.0, -2.0, 0.0) == pytest.approx(4.0 / math.pi, rel=1e-15)


def test_ft_matches_quadrature_at_random_complex_k(rng):
    a, b = -2.01, -0.01
    r = rng.uniform(0, 5, 20)
    phi = rng.uniform(0, 2 * np.pi, 20)
    for k in r * np.exp(1j * phi):
        ref = quad_ft(k, a, b)
        assert abs(truncated_sine_ft(k, a, b) - ref) < 1e-10 * abs(ref)


def test_ft_near_the_removable_points():
    a, b = -2.01, -0.01
    L = b - a
    for k in (math.pi / L, -math.pi / L, math.pi / L * (1 + 1e-9), math.pi / L + 1e-4):
        ref = quad_ft(k, a, b)
        assert abs(truncated_sine_ft(k, a, b) - ref) < 1e-10 * abs(ref)


def test_ft_in_upper_half_plane():
    a, b = -2.01, -0.01
    bound = math.sqrt(2 * (b - a)) * 2 / math.pi
    for kappa in (0.5, 2.0, 5.0, 10.0):
        G = truncated_sine_ft(1j * kappa, a, b)
        assert abs(G - quad_ft(1j * kappa, a, b)) < 1e-10 * abs(G)
        assert np.isfinite(G) and abs(G) <= bound * math.exp(abs(a) * kappa)


def test_particle_amplitude_is_unit_normalised(wp):
    val = integrate.quad(lambda k: abs(particle_amplitude(k, wp)) ** 2, -np.inf, np.inf,
                         limit=2000, epsabs=1e-12)[0]
    assert val == pytest.approx(1.0, abs=1e-8)


def test_free_evolution_matches_quadrature(wp):
    x = np.array([-5.0, -1.0, 0.0, 2.5, 8.0])
    t = 3.0
    ref = []
    for xi in x:
        f = lambda k: particle_amplitude(k, wp) * np.exp(1j * k * xi - 0.5j * k * k * t) / math.sqrt(2 * math.pi)
        re = integrate.quad(lambda k: f(k).real, -80, 80, limit=4000, epsabs=1e-13)[0]
        im = integrate.quad(lambda k: f(k).imag, -80, 80, limit=4000, epsabs=1e-13)[0]
        ref.append(re + 1j * im)
    assert np.allclose(free_evolution(x, t, wp.a, wp.b), ref, atol=2e-6)
    assert np.allclose(free_evolution(x, 0.0, wp.a, wp.b), truncated_sine(x, wp.a, wp.b))


def test_clock_amplitudes(wp):
    norm = integrate.quad(lambda p: abs(clock_gaussian_ft(p, wp)) ** 2, -np.inf, np.inf)[0]
    assert norm == pytest.approx(1.0, abs=1e-12)
    assert wp.dp == pytest.approx(0.4545, abs=1e-4)
    neg = ndtr(-wp.p0 / wp.dp)
    assert 4e-6 < neg < 1e-5
    ynorm = integrate.quad(lambda y: abs(clock_gaussian(y, wp)) ** 2, -np.inf, np.inf)[0]
    assert ynorm == pytest.approx(1.0, abs=1e-12)
    # f is the transform of the y profile
    y0 = 0.7
    ref = integrate.quad(lambda p: (clock_gaussian_ft(p, wp) * np.exp(1j * p * y0)).real, -20, 20)[0]
    assert ref / math.sqrt(2 * math.pi) == pytest.approx(clock_gaussian(y0, wp).real, abs=1e-10)


def test_wavepacket_validation():
    with pytest.raises(ValueError):
        WavepacketSpec(-1.0, 0.5)
    with pytest.raises(ValueError):
        WavepacketSpec(-1.0, -2.0)
    with pytest.raises(ValueError):
        WavepacketSpec(-2.0, -1.0, dy=0.0)
