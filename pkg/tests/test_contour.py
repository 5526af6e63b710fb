import numpy as np
import pytest

from qclock.contour import ContourError, build_contour, rectangular_detour
from qclock.core import ChannelSpec, ComponentTag
from qclock.spectral import branch_q

S, E, T = ComponentTag.SCATTERING, ComponentTag.EVANESCENT, ComponentTag.TOTAL


def test_free_channel_has_no_cut():
    c = build_contour(ChannelSpec(0.0), 12.0)
    k, dk, q, dq = c.select(E)
    assert k.size == 0
    k, dk, _, _ = c.select(S)
    assert np.all(k.imag == 0)
    assert dk.real.sum() == pytest.approx(24.0, rel=1e-13)


def test_cut_panels_cover_both_sides():
    ch = ChannelSpec(2.0)
    c = build_contour(ch, 12.0, n_panels_cut=4)
    k, dk, q, dq = c.select(E)
    assert np.all(np.abs(k.real) == 0) and np.all((k.imag > 0) & (k.imag <= 2.0))
    # up the left side, down the right: net displacement zero, each side spans (0, 2i)
    assert abs(dk.sum()) < 1e-13
    left = q.real < 0
    assert np.sum(left) == np.sum(~left) == 4 * 64
    assert np.abs(dk[left]).sum() == pytest.approx(2.0, rel=1e-12)
    assert np.abs(dk[~left]).sum() == pytest.approx(2.0, rel=1e-12)
    # q on the nodes satisfies q^2 = k^2 + 2p
    assert np.allclose(q * q, k * k + 4.0, atol=1e-12)


def test_real_axis_q_comes_from_the_branch():
    ch = ChannelSpec(8.0)
    c = build_contour(ch, 13.0, t=2.0, reach=30.0)
    k, _, q, dq = c.select(S)
    assert np.allclose(q, branch_q(k, ch), rtol=1e-13)


def test_ray_tails_and_truncation():
    ch = ChannelSpec(2.0)
    rays = build_contour(ch, 12.0, t=10.0, reach=50.0)
    assert rays.tails == "rays"
    k, _, _, _ = rays.select(S)
    assert np.any(k.imag < 0)
    # reach too large for the rays: truncated
    assert build_contour(ch, 12.0, t=1.0, reach=50.0).tails == "truncate"
    assert build_contour(ch, 12.0).tails == "truncate"


def test_phase_budget_refines_panels():
    ch = ChannelSpec(2.0)
    coarse = build_contour(ch, 12.0, tails="truncate")
    fine = build_contour(ch, 12.0, t=10.0, reach=45.0, tails="truncate")
    assert fine.n_nodes > coarse.n_nodes


def test_detour_geometry():
    ch = ChannelSpec(2.0)
    d = rectangular_detour(ch, 12.0, 3.0)
    k, dk, q, dq = d.select(T)
    assert d.kind == "detour" and d.detour_height == 3.0
    assert k.imag.max() == pytest.approx(3.0)
    # nothing on the cut; total displacement -k_max -> +k_max
    assert not np.any((np.abs(k.real) < 1e-12) & (k.imag < 2.0))
    assert dk.sum() == pytest.approx(24.0, rel=1e-12)


def test_preconditions():
    ch = ChannelSpec(2.0)
    with pytest.raises(ContourError):
        rectangular_detour(ch, 12.0, 2.0)      # tip at 2i, no clearance
    with pytest.raises(ContourError):
        build_contour(ch, 5.0)                # k_max below 3 sqrt(2p)
    with pytest.raises(ContourError):
        build_contour(ch, 12.0, nodes_per_panel=4)
    with pytest.raises(ContourError):
        build_contour(ch, 12.0, n_panels_cut=0)


def test_contour_is_immutable():
    c = build_contour(ChannelSpec(2.0), 12.0)
    with pytest.raises(ValueError):
        c.panels[0].nodes[0] = 0.0
