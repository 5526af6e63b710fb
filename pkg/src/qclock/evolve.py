"""Fixed-p channel propagation by contour quadrature, and assembly of
psi(x, y, t) by Gauss-Legendre quadrature over the clock momentum.

Within a channel the amplitude (clock phase exp(i p y - i p t) factored out)
is

    x <= 0:  chi = F(x, t) + s * int_G dk g(k) R(k) exp(-i k x - i k^2 t/2)
    x >= 0:  chi = exp(i p t) F(x, t)
                   + s * int_G dk [g(k) T(k) - g(q) k/q] exp(i q x - i k^2 t/2)

with s = (2 pi)^(-1/2) and F the closed-form free evolution of the initial
state.  The incident wave is entire in k, so its integral over the path is
F itself, and its cut-wrap contribution vanishes identically.  On x > 0 the
free part exp(i p t) F equals s * int dq g(q) exp(i q x - i q^2 t/2).  It is
subtracted under the integral, which leaves an integrand decaying like
|k|^-3.  The subtracted piece is entire in q, so it is charged to the
scattering component.  The evanescent component is exactly the cut panels'
share of the reflected and transmitted terms.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.special import ndtr

from .core import (ChannelSpec, ComponentTag, FieldSlice, Grid1D, Grid2D,
                   gauss_legendre)
from .contour import ContourSpec, build_contour
from .spectral import (SQRT_2PI, WavepacketSpec, clock_gaussian_ft,
                       free_evolution, particle_amplitude)

TAIL_TOL = 1e-6
T0_K_MAX = 200.0
_CHUNK = 1 << 21

S, E, TOT = ComponentTag.SCATTERING, ComponentTag.EVANESCENT, ComponentTag.TOTAL


class ConvergenceWarning(UserWarning):
    pass


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelState:
    channel: ChannelSpec
    t: float
    x_grid: Grid1D
    amplitudes: Dict[ComponentTag, np.ndarray]
    meta: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, tag) -> np.ndarray:
        return self.amplitudes[ComponentTag(tag)]

    def field(self, tag=TOT) -> FieldSlice:
        return FieldSlice(self.x_grid, self[tag], self.t, ComponentTag(tag),
                          self.channel, dict(self.meta))


def reach_of(spec: WavepacketSpec, x: np.ndarray) -> float:
    """Largest |x - x'| between an output node and the initial support."""
    return float(max(np.max(np.abs(x - spec.a)), np.max(np.abs(x - spec.b))))


def contour_for(channel: ChannelSpec, spec: WavepacketSpec, t: float, x_grid: Grid1D,
                k_max: Optional[float] = None, **kw) -> ContourSpec:
    """Canonical contour with k_max sized so the tails close on rays (t > 0)."""
    reach = reach_of(spec, x_grid.nodes)
    if k_max is None:
        if t > 0:
            k_max = max(12.0, (reach + 6.0) / t)
        else:
            k_max = T0_K_MAX
        k_max = max(k_max, 3.0 * channel.cut_tip + 1.0)
    return build_contour(channel, k_max, t=t, reach=reach, **kw)


def _integrate(exponent_factor: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sum_j v_j exp(exponent_factor_j * x_i) for uniformly spaced x.

    x is cut into blocks of B nodes starting at x_b; then
    exp(f (x_b + m dx)) = exp(f x_b) * exp(f m dx), so the whole sum is one
    matrix product of a (B x n_k) table with an (n_k x n_blocks) table.  On
    the tail rays |v_j| is tiny while exp(f x) can overflow, so the weight is
    folded into the exponent as log(v_j).
    """
    n = x.size
    out = np.zeros(n, dtype=complex)
    keep = v != 0
    if not np.any(keep) or n == 0:
        return out
    f, logv = exponent_factor[keep], np.log(v[keep])
    if n == 1:
        return np.exp(x[0] * f + logv).sum()[None]
    dx = (x[-1] - x[0]) / (n - 1)
    block = max(1, min(n, int(math.sqrt(n)) + 1))
    n_blocks = -(-n // block)
    starts = x[0] + dx * block * np.arange(n_blocks)
    inner = np.exp(np.multiply.outer(dx * np.arange(block), f))          # (B, n_k)
    step = max(1, _CHUNK // f.size)
    res = np.empty((block, n_blocks), dtype=complex)
    for i in range(0, n_blocks, step):
        outer = np.exp(np.multiply.outer(f, starts[i:i + step]) + logv[:, None])
        res[:, i:i + step] = inner @ outer
    return res.T.reshape(-1)[:n]


def propagate_channel(spec: WavepacketSpec, channel: ChannelSpec, t: float, x_grid: Grid1D,
                      contour: Optional[ContourSpec] = None,
                      components: Iterable = (TOT, S, E),
                      strict: bool = False) -> ChannelState:
    """chi_p(x, t) on ``x_grid`` for the requested components.

    A canonical contour yields all three components; a detour contour only
    the total.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if contour is None:
        contour = contour_for(channel, spec, t, x_grid)
    if contour.channel != channel:
        raise ValueError("contour was built for a different channel")
    comps = {ComponentTag(c) for c in components}
    if contour.kind != "canonical" and comps - {TOT}:
        raise ValueError("a detour contour only yields the total component")

    x = x_grid.nodes
    left = x <= 0.0
    xl, xr = x[left], x[~left]
    p = channel.p
    F = free_evolution(x, t, spec.a, spec.b)

    def sums(k, dk, q, dq, subtract=True, incident_only=False):
        # (reflected sum on x <= 0, transmitted sum on x > 0) over the given nodes
        tphase = np.exp(-0.5j * k * k * t) / SQRT_2PI
        free = particle_amplitude(q, spec) * dq * tphase
        if incident_only:
            return None, _integrate(1j * q, xr, -free)
        gk = particle_amplitude(k, spec) * dk * tphase
        r = (k - q) / (k + q)
        tr = 2.0 * k / (k + q)
        v_right = gk * tr - free if subtract else gk * tr
        return _integrate(-1j * k, xl, gk * r), _integrate(1j * q, xr, v_right)

    out = {}
    if contour.kind == "canonical":
        sl, sr = sums(*contour.select(S))
        el, er = sums(*contour.select(E), subtract=False)
        sr = sr + sums(*contour.select(E), incident_only=True)[1]
        scat = np.empty(x.size, dtype=complex)
        evan = np.empty(x.size, dtype=complex)
        scat[left] = F[left] + sl
        scat[~left] = np.exp(1j * p * t) * F[~left] + sr
        evan[left], evan[~left] = el, er
        out[S], out[E] = scat, evan
        out[TOT] = scat + evan
    else:
        tl, tr_ = sums(*contour.select(TOT))
        tot = np.empty(x.size, dtype=complex)
        tot[left] = F[left] + tl
        tot[~left] = np.exp(1j * p * t) * F[~left] + tr_
        out[TOT] = tot

    tail = 0.0
    if contour.tails != "rays":
        # measured k_max sensitivity: the band k_max/2 <= |k| <= k_max, scaled
        # by 1/3 (the ratio of the tail beyond k_max for a |k|^-3 integrand)
        k, dk, q, dq = contour.select(S if contour.kind == "canonical" else TOT)
        band = (k.imag == 0) & (np.abs(k.real) >= 0.5 * contour.k_max * (1 - 1e-12))
        bl, br = sums(k[band], dk[band], q[band], dq[band])
        tail = float(max(np.max(np.abs(bl), initial=0.0), np.max(np.abs(br), initial=0.0))) / 3.0
    meta = {"clock_phase": f"exp(i p y - i p t), p={p!r}", "k_max": contour.k_max,
            "tails": contour.tails, "n_nodes": contour.n_nodes,
            "tail_estimate": tail, "converged": tail < TAIL_TOL}
    if not meta["converged"]:
        msg = f"k_max={contour.k_max} tail estimate {tail:.2e} exceeds {TAIL_TOL:g}"
        if strict:
            raise ConvergenceWarning(msg)
        import warnings
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    return ChannelState(channel, t, x_grid, {c: out[c] for c in out if c in comps}, meta)


# --- clock momentum quadrature ----------------------------------------

@dataclass(frozen=True)
class ClockQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    coverage: float
    window: tuple


COVERAGE_TOL = 1e-5


def build_clock_quadrature(spec: WavepacketSpec, n_p: int = 96) -> ClockQuadrature:
    """Gauss-Legendre nodes on [max(1e-3, p0 - 6 dp), p0 + 6 dp]."""
    dp = spec.dp
    lo = max(1e-3, spec.p0 - 6.0 * dp)
    hi = spec.p0 + 6.0 * dp
    if not hi > lo:
        raise CoverageError("clock momentum window is empty")
    coverage = float(ndtr((hi - spec.p0) / dp) - ndtr((lo - spec.p0) / dp))
    if coverage < 1.0 - COVERAGE_TOL:
        raise CoverageError(
            f"clock window [{lo:.4g}, {hi:.4g}] holds only {coverage:.8f} of |f|^2; "
            "negative-p channels are out of scope")
    x, w = gauss_legendre(n_p)
    nodes = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
    weights = 0.5 * (hi - lo) * w
    return ClockQuadrature(nodes, weights, coverage, (lo, hi))


def assemble_components(spec: WavepacketSpec, t: float, grid: Grid2D, n_p: int = 96,
                        components: Iterable = (TOT, S, E), threads: int = 1,
                        contour_kw: Optional[dict] = None) -> Dict[ComponentTag, FieldSlice]:
    """psi(x, y, t) = sum_j w_j f(p_j) exp(i p_j (y - t)) chi_{p_j}(x, t) / sqrt(2 pi).

    Channels are independent; the reduction over p runs in node order so the
    result does not depend on ``threads``.
    """
    comps = [ComponentTag(c) for c in components]
    quad = build_clock_quadrature(spec, n_p)
    contour_kw = contour_kw or {}
    y = grid.y.nodes

    def run(p):
        ch = ChannelSpec(float(p))
        return propagate_channel(spec, ch, t, grid.x,
                                 contour_for(ch, spec, t, grid.x, **contour_kw), comps)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            states = list(pool.map(run, quad.nodes))
    else:
        states = [run(p) for p in quad.nodes]

    coef = quad.weights * clock_gaussian_ft(quad.nodes, spec) * np.exp(-1j * quad.nodes * t) / SQRT_2PI
    ymat = np.exp(1j * np.multiply.outer(quad.nodes, y))
    meta = {"n_p": n_p, "coverage": quad.coverage, "window": quad.window,
            "converged": all(s.meta["converged"] for s in states),
            "max_tail_estimate": max(s.meta["tail_estimate"] for s in states)}
    out = {}
    for c in comps:
        psi = np.zeros(grid.shape, dtype=complex)
        for j, st in enumerate(states):
            psi += np.multiply.outer(coef[j] * st[c], ymat[j])
        out[c] = FieldSlice(grid, psi, t, c, None, dict(meta))
    return out


def assemble_state(spec: WavepacketSpec, t: float, grid: Grid2D, component=TOT,
                   n_p: int = 96, **kw) -> FieldSlice:
    return assemble_components(spec, t, grid, n_p, (component,), **kw)[ComponentTag(component)]
