"""Crank-Nicolson oracle against closed forms, before it is trusted as a
reference for the contour propagation."""
import numpy as np
import pytest
from scipy.linalg import solve_banded

from qclock.core import ChannelSpec, FieldSlice, l2_norm, relative_l2
from qclock.oracle import (BoundaryContaminationError, OracleConfig, OracleError, PlateauError,
                           cn_propagate, initial_state, mean_energy, momentum_quantile,
                           oracle_transmission, thomas_solve, transmitted_probability)


def gauss(x, t, x0=-10.0, k0=2.0, s=1.0):
    """Free Gaussian packet (hbar = m = 1), closed form."""
    tau = t / (2 * s * s)
    return ((2 * np.pi * s * s) ** -0.25 / np.sqrt(1 + 1j * tau)
            * np.exp(-(x - x0 - k0 * t) ** 2 / (4 * s * s * (1 + 1j * tau)) + 1j * k0 * x - 0.5j * k0 * k0 * t))


def box(X, dx, dt, p=0.0, scheme="compact", **kw):
    return OracleConfig(X, int(round(2 * X / dx)) + 1, dt, ChannelSpec(p), scheme=scheme, **kw)


def run_gauss(cfg, t, **kw):
    x = cfg.grid.nodes
    return cn_propagate(FieldSlice(cfg.grid, gauss(x, 0, **kw), 0.0), cfg, t)


def test_thomas_matches_banded_solver(rng):
    n = 50
    lo, up = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1), rng.normal(size=n - 1)
    d = 4 + rng.normal(size=n) + 1j
    rhs = rng.normal(size=n) + 1j * rng.normal(size=n)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:], ab[1], ab[2, :-1] = up, d, lo
    assert np.allclose(thomas_solve(lo, d, up, rhs), solve_banded((1, 1), ab, rhs), rtol=1e-12)


def test_free_gaussian_spreading():
    cfg = box(40.0, 0.01, 5e-4)
    f = run_gauss(cfg, 5.0)
    assert relative_l2(f.values, gauss(cfg.grid.nodes, 5.0)) < 1e-6


def test_norm_drift_over_many_steps():
    # the walls reflect but do not break unitarity, so the detector is off here
    cfg = box(20.0, 0.02, 1e-3, p=2.0, wall_tol=1.0)
    x = cfg.grid.nodes
    f0 = FieldSlice(cfg.grid, gauss(x, 0, x0=-3.0, k0=1.0), 0.0)
    f = cn_propagate(f0, cfg, 10.0)       # 1e4 steps
    assert f.meta["steps"] == 10000
    assert abs(l2_norm(f) ** 2 - l2_norm(f0) ** 2) < 1e-10


@pytest.mark.parametrize("scheme", ["compact", "standard"])
def test_second_order_in_time(scheme):
    ref = run_gauss(box(30.0, 0.05, 2.5e-4, scheme=scheme), 2.0).values
    dev = [relative_l2(run_gauss(box(30.0, 0.05, dt, scheme=scheme), 2.0).values, ref) for dt in (8e-3, 4e-3)]
    assert 3.5 < dev[0] / dev[1] < 4.5


def test_spatial_order():
    def err(dx, scheme):
        cfg = box(32.0, dx, 2.5e-4, scheme=scheme)
        return relative_l2(run_gauss(cfg, 2.0).values, gauss(cfg.grid.nodes, 2.0))
    # three-point Laplacian: second order
    assert 3.5 < err(0.04, "standard") / err(0.02, "standard") < 4.5
    # compact Laplacian: fourth order
    assert err(0.16, "compact") / err(0.08, "compact") > 12


def test_energy_reference_is_the_packet_energy():
    cfg = box(40.0, 0.01, 1e-3)
    psi = gauss(cfg.grid.nodes, 0.0)[1:-1]
    assert mean_energy(psi, cfg) == pytest.approx(2.0 + 1.0 / 8.0, rel=1e-4)


def test_wall_detector_trips():
    cfg = box(15.0, 0.05, 2e-3)
    with pytest.raises(BoundaryContaminationError):
        run_gauss(cfg, 8.0, x0=0.0, k0=4.0)


def test_config_validation(wp):
    with pytest.raises(ValueError):
        OracleConfig(10.0, 100, 1e-3)         # x = 0 must be a node
    with pytest.raises(ValueError):
        OracleConfig(10.0, 101, 1e-3, scheme="explicit")
    with pytest.raises(OracleError):
        OracleConfig(120.0, 24001, 2e-3).validate(wp, 10.0)      # box too small
    with pytest.raises(OracleError):
        OracleConfig(400.0, 40001, 0.02).validate(wp, 10.0)      # dt too large
    cfg = OracleConfig.sized_for(wp, ChannelSpec(2.0), 10.0)
    cfg.validate(wp, 10.0)
    assert cfg.grid.index_of(0.0) is not None
    with pytest.raises(ValueError):
        cn_propagate(initial_state(wp, cfg), cfg, 1.0005)


def test_momentum_quantile(wp):
    k = momentum_quantile(wp)
    assert 15 < k < 20
    assert momentum_quantile(wp, mass=1e-3) < k


def test_initial_state_is_normalised(wp):
    cfg = OracleConfig.sized_for(wp, ChannelSpec(2.0), 1.0)
    assert l2_norm(initial_state(wp, cfg)) == pytest.approx(1.0, abs=1e-6)
    assert transmitted_probability(initial_state(wp, cfg)) == 0.0


def test_free_transmission_of_right_moving_packet():
    cfg = box(150.0, 0.05, 4e-3)
    psi0 = FieldSlice(cfg.grid, gauss(cfg.grid.nodes, 0.0, x0=-20.0, k0=5.0, s=2.0), 0.0)
    out = oracle_transmission(None, cfg, 20.0, psi0=psi0)
    assert out["transmission"] == pytest.approx(1.0, abs=1e-6)


def test_plateau_not_reached(wp):
    cfg = OracleConfig.sized_for(wp, ChannelSpec(2.0), 4.0, dx=0.04, dt=2.5e-3)
    with pytest.raises(PlateauError):
        oracle_transmission(wp, cfg, 4.0, plateau_window=1.0)


def test_upward_step_out_of_scope():
    with pytest.raises(ValueError):
        OracleConfig(10.0, 101, 1e-3, ChannelSpec(-3.0))
