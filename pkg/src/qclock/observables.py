"""Densities, dwell-time distributions, transmission probability and peak
diagnostics.

rho_c(y, t) = int_0^inf |psi(x, y, t)|^2 dx   (not normalised)
rho_u(y, t) = int_R    |psi(x, y, t)|^2 dx

Half-line integrals put the x = 0 node at half trapezoid weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import signal

from .core import (ChannelSpec, ComponentTag, DistributionKind, DistributionSeries,
                   FieldSlice, Grid1D, Grid2D, gauss_legendre, trapezoid,
                   trapezoid_weights)
from .spectral import WavepacketSpec, particle_amplitude

PEAK_PROMINENCE = 0.02


def half_line_weights(grid: Grid1D) -> np.ndarray:
    """Trapezoid weights for x >= 0 on ``grid`` (zero for x < 0).

    The x = 0 node must exist and carries half weight.
    """
    j0 = grid.index_of(0.0)
    if j0 is None:
        raise ValueError("x grid has no node at x = 0")
    w = trapezoid_weights(grid).copy()
    w[:j0] = 0.0
    if j0 < grid.n - 1:
        w[j0] = 0.5 * grid.spacing
    return w


def _check_2d(state: FieldSlice) -> Grid2D:
    if not isinstance(state.grid, Grid2D):
        raise ValueError("a two-dimensional (x, y) state is required")
    return state.grid


def rho_conditional(state: FieldSlice) -> DistributionSeries:
    grid = _check_2d(state)
    vals = half_line_weights(grid.x) @ state.density
    return DistributionSeries(grid.y, vals, state.t, DistributionKind.CONDITIONAL,
                              state.component)


def rho_unconditional(state: FieldSlice) -> DistributionSeries:
    grid = _check_2d(state)
    if grid.x.index_of(0.0) is None:
        raise ValueError("x grid has no node at x = 0")
    vals = trapezoid_weights(grid.x) @ state.density
    return DistributionSeries(grid.y, vals, state.t, DistributionKind.UNCONDITIONAL,
                              state.component)


def interference_mass(scattering: FieldSlice, evanescent: FieldSlice) -> dict:
    """Split ||s + e||^2 - ||s||^2 into the evanescent self term and the
    cross term 2 Re(s conj(e)), each integrated over the full grid."""
    if scattering.grid != evanescent.grid:
        raise ValueError("components live on different grids")
    grid = scattering.grid
    if isinstance(grid, Grid2D):
        w = np.multiply.outer(trapezoid_weights(grid.x), trapezoid_weights(grid.y))
    else:
        w = trapezoid_weights(grid)
    s, e = scattering.values, evanescent.values
    self_term = float(np.sum(w * np.abs(e) ** 2))
    cross = float(np.sum(w * 2.0 * np.real(s * np.conj(e))))
    return {"evanescent_self": self_term, "interference": cross,
            "deficit": self_term + cross}


# --- transmission --------------------------------------------------------

@dataclass(frozen=True)
class TransmissionSplit:
    total: float
    evanescent: float
    propagating: float


def evanescent_kernel(q, channel: ChannelSpec):
    """|2q/(q+k)|^2 on 0 <= q < sqrt(2mp) with k = i sqrt(2mp - q^2)."""
    q = np.asarray(q, dtype=float)
    c = channel.cut_tip
    k = 1j * np.sqrt(np.maximum(c * c - q * q, 0.0))
    return np.abs(2.0 * q / (q + k)) ** 2


def transmission_asymptotic(spec: WavepacketSpec, channel: ChannelSpec,
                            n_nodes: int = 32, k_hi: float = 1.0e4) -> TransmissionSplit:
    """Long-time probability at x > 0 from the momentum distribution.

    P_T = int_0^inf dq |2q/(q+k) g(k)|^2.  The evanescent segment
    q < sqrt(2mp) is integrated in q = c sin(phi); the propagating segment is
    rewritten over real k > 0, where dq = (k/q) dk.  The neglected tail
    beyond ``k_hi`` carries O(k_hi^-3) probability.
    """
    p = channel.p
    if p < 0:
        raise ValueError("transmission for p < 0 channels is out of scope")
    c = channel.cut_tip
    xg, wg = gauss_legendre(n_nodes)

    ev = 0.0
    if c > 0:
        phi = 0.25 * np.pi * (xg + 1.0)
        wphi = 0.25 * np.pi * wg
        q = c * np.sin(phi)
        k = 1j * c * np.cos(phi)
        g2 = np.abs(particle_amplitude(k, spec)) ** 2
        ev = float(np.sum(wphi * c * np.cos(phi) * (4.0 * q * q / (c * c)) * g2))

    # propagating segment over k; panels about half an oscillation of |g|^2 wide
    width = min(1.0, math.pi / (2.0 * spec.width))
    edges = np.concatenate((np.linspace(0.0, 20.0, int(20.0 / width) + 1)[:-1],
                            np.geomspace(20.0, k_hi, 200)))
    prop = 0.0
    for k0, k1 in zip(edges[:-1], edges[1:]):
        k = 0.5 * (k0 + k1) + 0.5 * (k1 - k0) * xg
        q = np.sqrt(k * k + c * c)
        kern = 4.0 * k * q / (q + k) ** 2
        prop += float(np.sum(0.5 * (k1 - k0) * wg * kern * np.abs(particle_amplitude(k, spec)) ** 2))
    return TransmissionSplit(ev + prop, ev, prop)


def transmission_direct(state, component=ComponentTag.TOTAL) -> float:
    """int_0^x_max |chi(x, t)|^2 dx for a channel state (or 1D field)."""
    if isinstance(state, FieldSlice):
        grid, dens = state.grid, state.density
    else:
        grid, dens = state.x_grid, np.abs(state[component]) ** 2
    return float(half_line_weights(grid) @ dens)


# --- peaks ------------------------------------------------------------

@dataclass(frozen=True)
class PeakReport:
    peak_locations: List[float]
    peak_masses: List[float]
    basins: List[tuple] = field(default_factory=list)
    indices: List[int] = field(default_factory=list)
    method: dict = field(default_factory=dict)

    def __post_init__(self):
        if list(self.peak_locations) != sorted(self.peak_locations):
            raise ValueError("peak locations must be sorted")
        if any(m < 0 for m in self.peak_masses):
            raise ValueError("peak masses must be non-negative")

    def __len__(self):
        return len(self.peak_locations)


def _basin_mass(y_grid: Grid1D, values: np.ndarray, lo: int, hi: int) -> float:
    if hi <= lo:
        return 0.0
    sub = Grid1D(y_grid.nodes[lo], y_grid.nodes[hi], hi - lo + 1)
    return float(trapezoid_weights(sub) @ values[lo:hi + 1])


def find_peaks(series: DistributionSeries, min_prominence: Optional[float] = None) -> PeakReport:
    """Local maxima with prominence above ``min_prominence`` (default
    0.02 * max).  Each peak's basin runs between the lowest points separating
    it from its neighbours (or the grid ends)."""
    v = series.values
    vmax = float(v.max()) if v.size else 0.0
    prom = PEAK_PROMINENCE * vmax if min_prominence is None else float(min_prominence)
    if vmax <= 0:
        return PeakReport([], [], method={"prominence": prom})
    idx, _ = signal.find_peaks(v, prominence=prom if prom > 0 else None)
    idx = [int(i) for i in idx]
    bounds = [0]
    for i0, i1 in zip(idx[:-1], idx[1:]):
        bounds.append(i0 + int(np.argmin(v[i0:i1 + 1])))
    bounds.append(v.size - 1)
    y = series.y_grid.nodes
    basins, masses = [], []
    for j in range(len(idx)):
        lo, hi = bounds[j], bounds[j + 1]
        basins.append((float(y[lo]), float(y[hi])))
        masses.append(_basin_mass(series.y_grid, v, lo, hi))
    return PeakReport([float(y[i]) for i in idx], masses, basins, idx,
                      {"prominence": prom, "finder": "scipy.signal.find_peaks",
                       "basin": "minimum between neighbouring peaks"})


def basin_mass(series: DistributionSeries, basin: tuple) -> float:
    """Trapezoid mass of ``series`` over the y interval ``basin``."""
    g = series.y_grid
    lo = g.index_of(basin[0], tol=1e-6)
    hi = g.index_of(basin[1], tol=1e-6)
    if lo is None or hi is None:
        raise ValueError("basin edges must be y grid nodes")
    return _basin_mass(g, series.values, lo, hi)


def shape_distance(s1: DistributionSeries, s2: DistributionSeries) -> float:
    """Relative L2 distance after normalising each series to unit integral."""
    if s1.y_grid != s2.y_grid:
        raise ValueError("series must share a y grid")
    m1, m2 = trapezoid(s1), trapezoid(s2)
    if m1 <= 0 or m2 <= 0:
        raise ValueError("cannot normalise a zero-mass series")
    a, b = s1.values / m1, s2.values / m2
    w = trapezoid_weights(s1.y_grid)
    return math.sqrt(float(w @ (a - b) ** 2) / float(w @ b ** 2))


def scale_distance(s1: DistributionSeries, s2: DistributionSeries) -> float:
    """Relative L2 distance without normalisation (companion to shape_distance)."""
    if s1.y_grid != s2.y_grid:
        raise ValueError("series must share a y grid")
    w = trapezoid_weights(s1.y_grid)
    den = float(w @ s2.values ** 2)
    if den <= 0:
        raise ValueError("reference series has zero mass")
    return math.sqrt(float(w @ (s1.values - s2.values) ** 2) / den)
