"""Crank-Nicolson reference propagator for one fixed-p channel.

H_p = -1/2 d^2/dx^2 + p * theta(-x) on [-X, X] with Dirichlet walls,
V(0) = p/2.  Two spatial discretisations share the same implicit step
(M + i dt/2 K) psi' = (M - i dt/2 K) psi:

* ``standard``: second-order three-point Laplacian, M = 1.
* ``compact`` (default): the fourth-order compact (Numerov) Laplacian,
  M = (1, 10, 1)/12 and K = -1/(2 dx^2) (1, -2, 1) + M V.  It is still
  tridiagonal, and it moves the lattice dispersion error from O(k^4 dx^2)
  to O(k^6 dx^4).

Energies are measured from the mean energy of the initial state (the CN phase
error grows like E^3 dt^2) and the exact phase exp(-i E_ref t) is put back at
the end.  The system is factorised once (LAPACK gttrf, the two-sweep
elimination with partial pivoting) and back-substituted each step.  The
oracle shares nothing with the contour code except the closed-form initial
state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from .core import ChannelSpec, ComponentTag, FieldSlice, Grid1D, trapezoid_weights
from .spectral import WavepacketSpec, particle_amplitude, truncated_sine


class OracleError(RuntimeError):
    pass


class BoundaryContaminationError(OracleError):
    pass


class PlateauError(OracleError):
    pass


WALL_NODES = 5
WALL_TOL = 1e-8


def thomas_solve(lower, diag, upper, rhs):
    """Plain two-sweep (Thomas) solve; reference for the LAPACK path."""
    n = len(diag)
    c = np.zeros(n, dtype=complex)
    d = np.zeros(n, dtype=complex)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / m
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m
    x = np.zeros(n, dtype=complex)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def momentum_quantile(spec: WavepacketSpec, mass: float = 1e-4, k_hi: float = 2000.0) -> float:
    """Smallest K with int_{|k|>K} |g|^2 dk <= mass (two-sided)."""
    k = np.linspace(0.0, k_hi, 400001)
    dens = 2.0 * np.abs(particle_amplitude(k, spec)) ** 2
    dk = k[1] - k[0]
    tail = np.concatenate((np.cumsum((0.5 * (dens[1:] + dens[:-1]) * dk)[::-1])[::-1], [0.0]))
    # analytic |g|^2 ~ 1/k^4 beyond k_hi
    tail += 2.0 * dens[-1] * k_hi / 6.0
    return float(k[np.argmax(tail <= mass)])


@dataclass(frozen=True)
class OracleConfig:
    X: float = 120.0
    N: int = 24001
    dt: float = 2e-3
    channel: ChannelSpec = ChannelSpec(2.0)
    wall_tol: float = WALL_TOL
    scheme: str = "compact"

    def __post_init__(self):
        if self.scheme not in ("compact", "standard"):
            raise ValueError("scheme must be 'compact' or 'standard'")
        if self.N < 5 or self.N % 2 == 0:
            raise ValueError("N must be odd (x = 0 is a node) and >= 5")
        if not (self.X > 0 and self.dt > 0):
            raise ValueError("X and dt must be positive")

    @property
    def grid(self) -> Grid1D:
        return Grid1D(-self.X, self.X, self.N)

    @property
    def dx(self) -> float:
        return 2.0 * self.X / (self.N - 1)

    def energy_limit(self, spec: WavepacketSpec) -> float:
        """Largest energy carried by the packet: step height plus the
        kinetic energy at the 1e-4 two-sided momentum quantile."""
        kq = momentum_quantile(spec)
        return self.channel.p + 0.5 * min(kq, math.pi / self.dx) ** 2

    def validate(self, spec: WavepacketSpec, t: float):
        kq = momentum_quantile(spec)
        need = abs(spec.a) + kq * t
        if self.X < need:
            raise OracleError(
                f"box X = {self.X} smaller than |a| + v_max t = {need:.4g}")
        e = self.energy_limit(spec)
        if self.dt * e >= 0.1 * 2.0 * math.pi:
            raise OracleError(f"dt * E_max = {self.dt * e:.3g} too large")

    @classmethod
    def sized_for(cls, spec: WavepacketSpec, channel: ChannelSpec, t: float,
                  dx: float = 0.02, dt: float = 2e-3, margin: float = 20.0,
                  speed_factor: float = 1.5, wall_tol: float = WALL_TOL,
                  scheme: str = "compact") -> "OracleConfig":
        """Box wide enough that the 1e-4 momentum quantile, moving at
        ``speed_factor`` times its speed, stays inside until t."""
        X = abs(spec.a) + speed_factor * momentum_quantile(spec) * t + margin
        n_half = int(math.ceil(X / dx))
        return cls(n_half * dx, 2 * n_half + 1, dt, channel, wall_tol, scheme)


def initial_state(spec: WavepacketSpec, config: OracleConfig) -> FieldSlice:
    g = config.grid
    return FieldSlice(g, truncated_sine(g.nodes, spec.a, spec.b), 0.0,
                      ComponentTag.TOTAL, config.channel)


def _potential(config: OracleConfig, x: np.ndarray) -> np.ndarray:
    p = config.channel.p
    v = np.where(x < 0, p, 0.0)
    v[np.abs(x) < 1e-9 * config.dx] = 0.5 * p
    return v


class _CNStepper:
    def __init__(self, config: OracleConfig, e_ref: float = 0.0):
        x = config.grid.nodes[1:-1]
        v = _potential(config, x) - e_ref
        a = 0.5 / config.dx ** 2
        if config.scheme == "compact":
            m_diag, m_off = 10.0 / 12.0, 1.0 / 12.0
        else:
            m_diag, m_off = 1.0, 0.0
        k_diag = 2.0 * a + m_diag * v
        k_lo = -a + m_off * v[:-1]
        k_up = -a + m_off * v[1:]
        z = 0.5j * config.dt
        # A psi' = B psi with A + B = 2M, so psi' = 2 A^-1 (M psi) - psi
        dl, d, du, du2, ipiv, info = lapack.zgttrf(m_off + z * k_lo, m_diag + z * k_diag,
                                                   m_off + z * k_up)
        if info != 0:
            raise OracleError(f"tridiagonal factorisation failed (info={info})")
        self._lu = (dl, d, du, du2, ipiv)
        self._m = (m_diag, m_off)

    def step(self, psi: np.ndarray) -> np.ndarray:
        m_diag, m_off = self._m
        rhs = (2.0 * m_diag) * psi
        if m_off:
            rhs[:-1] += (2.0 * m_off) * psi[1:]
            rhs[1:] += (2.0 * m_off) * psi[:-1]
        out, info = lapack.zgttrs(*self._lu, rhs, overwrite_b=1)
        if info != 0:
            raise OracleError(f"tridiagonal solve failed (info={info})")
        out -= psi
        return out


def mean_energy(psi: np.ndarray, config: OracleConfig) -> float:
    """<psi|H|psi> / <psi|psi> with the three-point Laplacian (interior nodes)."""
    x = config.grid.nodes[1:-1]
    lap = -2.0 * psi
    lap[:-1] += psi[1:]
    lap[1:] += psi[:-1]
    h = -0.5 * lap / config.dx ** 2 + _potential(config, x) * psi
    nrm = float(np.vdot(psi, psi).real)
    return float(np.vdot(psi, h).real / nrm) if nrm > 0 else 0.0


def _wall_mass(psi: np.ndarray, dx: float) -> float:
    return float(dx * (np.sum(np.abs(psi[:WALL_NODES]) ** 2)
                       + np.sum(np.abs(psi[-WALL_NODES:]) ** 2)))


def cn_propagate(psi0: FieldSlice, config: OracleConfig, t: float,
                 check_every: int = 200, snapshots=()):
    """Evolve ``psi0`` (sampled on ``config.grid``) to time t.

    The wall probability (five nodes at either end) is checked every
    ``check_every`` steps; BoundaryContaminationError is raised once it exceeds
    ``config.wall_tol``.  With ``snapshots`` (times) a dict {time: FieldSlice}
    is returned as well.
    """
    if psi0.grid != config.grid:
        raise ValueError("psi0 must be sampled on the oracle grid")
    n_steps = _steps(t, config.dt)
    wanted = {_steps(s, config.dt): s for s in snapshots}
    psi = np.array(psi0.values[1:-1])
    e_ref = mean_energy(psi, config)
    stepper = _CNStepper(config, e_ref)
    meta = {"dt": config.dt, "dx": config.dx, "X": config.X, "scheme": config.scheme,
            "e_ref": e_ref, "phase": "includes exp(-i p t)"}

    def as_field(n, values):
        vals = np.concatenate(([0.0], values * np.exp(-1j * e_ref * n * config.dt), [0.0]))
        return FieldSlice(config.grid, vals, n * config.dt, ComponentTag.TOTAL,
                          config.channel, dict(meta, steps=n))

    taken = {}
    if 0 in wanted:
        taken[wanted[0]] = as_field(0, psi)
    for n in range(1, n_steps + 1):
        psi = stepper.step(psi)
        if n % check_every == 0 or n == n_steps:
            wm = _wall_mass(psi, config.dx)
            if wm > config.wall_tol:
                raise BoundaryContaminationError(
                    f"wall probability {wm:.2e} > {config.wall_tol:g} at t = {n * config.dt:.4g}")
        if n in wanted:
            taken[wanted[n]] = as_field(n, psi)
    out = as_field(n_steps, psi)
    return (out, taken) if snapshots else out


def _steps(t: float, dt: float) -> int:
    n = int(round(t / dt))
    if n < 0 or abs(n * dt - t) > 1e-9 * max(1.0, t):
        raise ValueError(f"t = {t} is not a non-negative multiple of dt = {dt}")
    return n


def transmitted_probability(field: FieldSlice) -> float:
    """Trapezoid integral of |psi|^2 over x >= 0 (x = 0 at half weight)."""
    g = field.grid
    j0 = g.index_of(0.0)
    if j0 is None:
        raise ValueError("grid has no node at x = 0")
    sub = Grid1D(0.0, g.stop, g.n - j0)
    return float(np.sum(trapezoid_weights(sub) * field.density[j0:]))


def oracle_transmission(spec: Optional[WavepacketSpec], config: OracleConfig, t_final: float,
                        plateau_window: float = 2.0, plateau_tol: float = 1e-5,
                        psi0: Optional[FieldSlice] = None) -> dict:
    """int_0^X |chi(x, t_final)|^2 dx, with a plateau check over the last
    ``plateau_window`` time units (rate below ``plateau_tol`` per unit time).

    The initial state is the truncated sine of ``spec`` unless ``psi0`` is
    given (sampled on ``config.grid``).
    """
    if psi0 is None:
        config.validate(spec, t_final)
        psi0 = initial_state(spec, config)
    t_early = t_final - plateau_window
    if t_early < 0:
        raise ValueError("plateau window longer than t_final")
    field, snaps = cn_propagate(psi0, config, t_final, snapshots=(t_early,))
    p_final = transmitted_probability(field)
    p_early = transmitted_probability(snaps[t_early])
    rate = abs(p_final - p_early) / plateau_window
    if rate > plateau_tol:
        raise PlateauError(f"transmission still changing: {rate:.2e} per a.u. > {plateau_tol:g}")
    return {"transmission": p_final, "rate": rate, "t_final": t_final,
            "X": config.X, "dx": config.dx, "dt": config.dt}
