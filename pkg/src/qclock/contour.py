"""Quadrature discretisations of the evolution path in the complex k plane.

The canonical path runs along the real axis, and at the origin it wraps the branch
cut: up the left side of [0, i sqrt(2mp)], round the tip, down the right
side.  On the cut we parametrise

    k = i c cos(theta),  q = c sin(theta),  theta in [-pi/2, pi/2]

(c = sqrt(2mp)); theta < 0 is the left side, theta > 0 the right side.  In
this variable R = exp(2 i theta) and T = 2 cos(theta) exp(i theta), so the
cut integrand is smooth, and plain Gauss-Legendre panels converge
geometrically without grading toward the tip.

For t > 0 the real-axis tails beyond +-k_max are rotated onto the rays
k_max + r exp(-i pi/4) and -k_max + r exp(3 i pi/4), along which
exp(-i k^2 t / 2) decays like a Gaussian.  This is only valid when
k_max * t exceeds the reach (largest |x| plus the packet extent);
`build_contour` falls back to plain truncation otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .core import ChannelSpec, ComponentTag, gauss_legendre
from .spectral import branch_q

MAX_PANEL_PHASE = 40.0
RAY_DECAY = 46.0


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class Panel:
    nodes: np.ndarray      # complex k
    weights: np.ndarray    # complex dk
    q: np.ndarray          # branch value at each node (side-resolved on the cut)
    dq: np.ndarray         # complex dq along the same path
    tag: ComponentTag

    def __post_init__(self):
        for name in ("nodes", "weights", "q", "dq"):
            a = np.array(getattr(self, name), dtype=complex)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class ContourSpec:
    channel: ChannelSpec
    k_max: float
    panels: List[Panel]
    nodes_per_panel: int
    kind: str = "canonical"             # or "detour"
    detour_height: Optional[float] = None
    tails: str = "truncate"             # or "rays"
    meta: dict = field(default_factory=dict, compare=False)

    def select(self, tag: ComponentTag):
        """Concatenated (k, dk, q, dq) over panels carrying ``tag``."""
        ps = [p for p in self.panels if p.tag == tag]
        if not ps:
            e = np.empty(0, dtype=complex)
            return e, e, e, e
        return tuple(np.concatenate([getattr(p, a) for p in ps])
                     for a in ("nodes", "weights", "q", "dq"))

    @property
    def n_nodes(self) -> int:
        return sum(p.nodes.size for p in self.panels)

    @property
    def total_abs_weight(self) -> float:
        return float(sum(np.abs(p.weights).sum() for p in self.panels))


# --- panel primitives ------------------------------------------------------

def _segment(z0: complex, z1: complex, n: int):
    x, w = gauss_legendre(n)
    half = 0.5 * (z1 - z0)
    return 0.5 * (z0 + z1) + half * x, half * w


def _phase_rate(k: complex, reach: float, t: float) -> float:
    # bound on |d/dk| of the exponent (i k x - i k^2 t / 2) plus growth terms
    return reach + abs(k) * t


def _split_segment(z0, z1, reach, t, max_phase):
    """Equal sub-segments of [z0, z1] each spanning at most max_phase radians."""
    length = abs(z1 - z0)
    rate = max(_phase_rate(z0, reach, t), _phase_rate(z1, reach, t))
    m = max(1, int(math.ceil(length * rate / max_phase)))
    return [(z0 + (z1 - z0) * j / m, z0 + (z1 - z0) * (j + 1) / m) for j in range(m)]


def _line_panels(breaks, n, channel, tag, reach, t, max_phase):
    panels = []
    for z0, z1 in zip(breaks[:-1], breaks[1:]):
        for s0, s1 in _split_segment(complex(z0), complex(z1), reach, t, max_phase):
            k, w = _segment(s0, s1, n)
            q = branch_q(k, channel)
            dq = np.where(q == 0, 0.0, k / np.where(q == 0, 1.0, q)) * w
            panels.append(Panel(k, w, q, dq, tag))
    return panels


def _cut_panels(channel, n, n_panels, reach, t, max_phase):
    """Cut wrap in theta: up the left side (theta<0), down the right (theta>0)."""
    c = channel.cut_tip
    rate = c * (reach + c * t)
    per_side = max(n_panels, int(math.ceil(0.5 * math.pi * rate / max_phase)))
    edges = np.linspace(-0.5 * math.pi, 0.5 * math.pi, 2 * per_side + 1)
    x, w = gauss_legendre(n)
    panels = []
    for th0, th1 in zip(edges[:-1], edges[1:]):
        half = 0.5 * (th1 - th0)
        th = 0.5 * (th0 + th1) + half * x
        wt = half * w
        k = 1j * c * np.cos(th)
        dk = -1j * c * np.sin(th) * wt
        q = c * np.sin(th)
        dq = c * np.cos(th) * wt
        panels.append(Panel(k, dk, q, dq, ComponentTag.EVANESCENT))
    return panels


def _graded_breaks(k_max: float, c: float, n_panels: int) -> np.ndarray:
    """0 < ... < k_max, halving toward the origin down to ~min(c, 1)/2."""
    floor = 0.5 * min(c, 1.0) if c > 0 else k_max
    levels = n_panels - 1
    if c > 0:
        levels = max(levels, int(math.ceil(math.log2(k_max / floor))))
    return np.concatenate(([0.0], k_max * 0.5 ** np.arange(levels, -1, -1)))


def _ray_length(k_max: float, reach: float, t: float) -> float:
    # solve r^2 t/2 + r (k_max t - reach)/sqrt(2) = RAY_DECAY
    b = max(k_max * t - reach, 0.0) / math.sqrt(2.0)
    a = 0.5 * t
    return (-b + math.sqrt(b * b + 4 * a * RAY_DECAY)) / (2 * a)


def _tail_mode(tails: str, k_max: float, reach: float, t: float) -> str:
    if tails == "auto":
        return "rays" if t > 0 and k_max * t >= reach + 4.0 else "truncate"
    if tails == "rays" and not (t > 0 and k_max * t > reach):
        raise ContourError(
            f"ray tails need k_max*t > reach ({k_max}*{t} <= {reach})")
    if tails not in ("rays", "truncate"):
        raise ContourError(f"unknown tail treatment {tails!r}")
    return tails


def _ray_panels(channel, k_max, n, reach, t, max_phase, tag):
    r = _ray_length(k_max, reach, t)
    right = k_max + r * np.exp(-0.25j * np.pi)
    left = -k_max + r * np.exp(0.75j * np.pi)
    # left ray is traversed inward (from infinity toward -k_max)
    return (_line_panels([left, -k_max], n, channel, tag, reach, t, max_phase),
            _line_panels([k_max, right], n, channel, tag, reach, t, max_phase))


def _check_common(channel, k_max, nodes_per_panel):
    if nodes_per_panel < 8:
        raise ContourError("nodes_per_panel must be >= 8")
    c = channel.cut_tip
    if not k_max > 3.0 * c:
        raise ContourError(f"k_max = {k_max} must exceed 3*sqrt(2mp) = {3 * c:.6g}")


# --- public builders -----------------------------------------------------

def build_contour(channel: ChannelSpec, k_max: float = 12.0, nodes_per_panel: int = 64,
                  n_panels_real: int = 8, n_panels_cut: int = 4, *,
                  t: float = 0.0, reach: float = 0.0, tails: str = "auto",
                  max_phase: float = MAX_PANEL_PHASE) -> ContourSpec:
    """Canonical path: real axis plus the wrap around the branch cut.

    ``n_panels_real`` panels per half-axis are graded geometrically toward the
    origin; ``n_panels_cut`` panels per side of the cut.  ``t`` and ``reach``
    (largest |x - x'| the result must resolve) refine panels so no panel
    spans more than ``max_phase`` radians of oscillation.
    """
    _check_common(channel, k_max, nodes_per_panel)
    if n_panels_real < 1 or n_panels_cut < 1:
        raise ContourError("panel counts must be positive")
    mode = _tail_mode(tails, k_max, reach, t)
    c = channel.cut_tip
    n = nodes_per_panel
    pos = _graded_breaks(k_max, c, n_panels_real)
    S = ComponentTag.SCATTERING
    left_real = _line_panels(-pos[::-1], n, channel, S, reach, t, max_phase)
    right_real = _line_panels(pos, n, channel, S, reach, t, max_phase)
    cut = _cut_panels(channel, n, n_panels_cut, reach, t, max_phase) if c > 0 else []
    panels = left_real + cut + right_real
    if mode == "rays":
        lr, rr = _ray_panels(channel, k_max, n, reach, t, max_phase, S)
        panels = lr + panels + rr
    return ContourSpec(channel, k_max, panels, n, "canonical", None, mode,
                       {"t": t, "reach": reach, "max_phase": max_phase})


def rectangular_detour(channel: ChannelSpec, k_max: float = 12.0, h: float = 3.0,
                       nodes_per_panel: int = 64, n_panels_real: int = 8, *,
                       w: float = 0.2, t: float = 0.0, reach: float = 0.0,
                       tails: str = "auto",
                       max_phase: float = MAX_PANEL_PHASE) -> ContourSpec:
    """-k_max -> -w -> -w+ih -> w+ih -> w -> k_max, passing above the cut.

    No node touches the cut, so q comes straight from `branch_q`.  Vertical
    legs are graded toward the height of the cut tip, where they pass at
    distance w from the branch point.  Panels are tagged TOTAL: only the
    sum over the whole path is meaningful.
    """
    _check_common(channel, k_max, nodes_per_panel)
    c = channel.cut_tip
    if not h > c:
        raise ContourError(f"detour height {h} must exceed the cut tip {c}")
    if not 0 < w < k_max:
        raise ContourError("need 0 < w < k_max")
    mode = _tail_mode(tails, k_max, reach, t)
    n = nodes_per_panel
    T = ComponentTag.TOTAL
    pos = _graded_breaks(k_max, c, n_panels_real)
    pos = np.concatenate(([w], pos[pos > w]))
    # vertical breakpoints graded toward kappa = c from both sides
    ks = {0.0, h}
    if c > 0:
        d = w
        while d < max(c, h - c):
            for v in (c - d, c + d):
                if 0 < v < h:
                    ks.add(v)
            d *= 2.0
        ks.add(c)
    ks = np.array(sorted(ks))
    up = -w + 1j * ks
    down = (w + 1j * ks)[::-1]
    panels = (_line_panels(-pos[::-1], n, channel, T, reach, t, max_phase)
              + _line_panels(up, n, channel, T, reach, t, max_phase)
              + _line_panels([-w + 1j * h, w + 1j * h], n, channel, T, reach, t, max_phase)
              + _line_panels(down, n, channel, T, reach, t, max_phase)
              + _line_panels(pos, n, channel, T, reach, t, max_phase))
    if mode == "rays":
        lr, rr = _ray_panels(channel, k_max, n, reach, t, max_phase, T)
        panels = lr + panels + rr
    return ContourSpec(channel, k_max, panels, n, "detour", h, mode,
                       {"t": t, "reach": reach, "w": w, "max_phase": max_phase})
