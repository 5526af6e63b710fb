import numpy as np
import pytest

from qclock.core import (ChannelSpec, ComponentTag, DistributionKind, DistributionSeries,
                         FieldSlice, Grid1D, Grid2D, UnitSystem, gauss_legendre, l2_norm,
                         relative_l2, trapezoid, trapezoid_weights)
from qclock.spectral import truncated_sine


def test_unit_box_norm():
    g = Grid1D(0.0, 1.0, 1001)
    assert l2_norm(FieldSlice(g, np.ones(g.n), 0.0)) == pytest.approx(1.0, abs=1e-12)


def test_zero_field_norm():
    g = Grid1D(0.0, 1.0, 11)
    assert l2_norm(FieldSlice(g, np.zeros(g.n), 0.0)) == 0.0


def test_sine_profile_is_normalised():
    g = Grid1D(-2.01, -0.01, 2001)
    f = FieldSlice(g, truncated_sine(g.nodes, -2.01, -0.01), 0.0)
    assert l2_norm(f) == pytest.approx(1.0, abs=1e-6)


def test_norm_converges_under_refinement():
    x = lambda n: Grid1D(-8.0, 8.0, n)
    gauss = lambda g: np.exp(-g.nodes ** 2 / 2 + 1j * g.nodes)
    n1 = l2_norm(FieldSlice(x(801), gauss(x(801)), 0.0))
    n2 = l2_norm(FieldSlice(x(1601), gauss(x(1601)), 0.0))
    assert abs(n1 - n2) / n2 < 1e-6


def test_2d_norm_is_product_of_1d_norms():
    gx, gy = Grid1D(-1, 1, 41), Grid1D(0, 3, 31)
    a, b = np.cos(gx.nodes), np.exp(-gy.nodes)
    f2 = FieldSlice(Grid2D(gx, gy), np.outer(a, b), 0.0)
    expect = l2_norm(FieldSlice(gx, a, 0.0)) * l2_norm(FieldSlice(gy, b, 0.0))
    assert l2_norm(f2) == pytest.approx(expect, rel=1e-13)


def test_trapezoid_examples():
    g = Grid1D(0.0, 2.0, 101)
    half = DistributionSeries(g, np.full(g.n, 0.5), 0.0, "unconditional")
    assert trapezoid(half) == pytest.approx(1.0, abs=1e-14)
    assert trapezoid(DistributionSeries(g, np.zeros(g.n), 0.0, "conditional")) == 0.0


def test_grid_helpers():
    g = Grid1D.from_spacing(-40.0, 40.0, 0.04)
    assert g.n == 2001 and g.index_of(0.0) == 1000
    assert Grid1D(-1.0, 1.0, 4).index_of(0.0) is None
    assert trapezoid_weights(g).sum() == pytest.approx(80.0)
    with pytest.raises(ValueError):
        Grid1D(1.0, 0.0, 5)


def test_value_types_are_immutable():
    g = Grid1D(0, 1, 3)
    f = FieldSlice(g, [1, 2, 3], 0.0, "scattering")
    assert f.component is ComponentTag.SCATTERING
    with pytest.raises(ValueError):
        f.values[0] = 0
    s = DistributionSeries(g, [0.0, 1.0, 0.0], 1.0, "conditional")
    assert s.kind is DistributionKind.CONDITIONAL
    with pytest.raises(ValueError):
        DistributionSeries(g, [0.0, -1.0, 0.0], 1.0, "conditional")
    with pytest.raises(ValueError):
        FieldSlice(g, [1.0, np.nan, 0.0], 0.0)
    with pytest.raises(ValueError):
        FieldSlice(g, [1.0, 2.0], 0.0)


def test_channel_and_units():
    assert ChannelSpec(2.0).cut_tip == pytest.approx(2.0)
    assert ChannelSpec(0.0).cut_tip == 0.0
    with pytest.raises(ValueError, match="out of scope"):
        ChannelSpec(-0.5)
    with pytest.raises(ValueError):
        UnitSystem(hbar=1.05)


def test_relative_l2_and_quadrature():
    assert relative_l2(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == 0.0
    with pytest.raises(ValueError):
        relative_l2(np.ones(2), np.zeros(2))
    x, w = gauss_legendre(16)
    assert np.sum(w * x ** 10) == pytest.approx(2.0 / 11.0, rel=1e-14)
    assert gauss_legendre(16)[0] is x
