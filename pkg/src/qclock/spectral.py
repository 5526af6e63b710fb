"""Initial states, their transforms, the branch function q(k) and the
stationary step-potential modes.

Transform convention: g(k) = (2 pi)^(-1/2) * int dx exp(-i k x) psi(x), and
likewise f(p) for the clock, so that int |g|^2 dk = int |f|^2 dp = 1.  The
two-dimensional expansion prefactor 1/(2 pi) is then the product of the two
one-dimensional factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .core import ChannelSpec

SQRT_2PI = math.sqrt(2.0 * math.pi)
_ROT = np.exp(-0.25j * np.pi)


class BranchAmbiguityError(ValueError):
    """Raised when q(k) is requested exactly on the open branch cut."""


class PoleError(ZeroDivisionError):
    """Raised when k + q vanishes."""


@dataclass(frozen=True)
class WavepacketSpec:
    """Truncated sine on [a, b] for the particle, minimum-uncertainty
    Gaussian (centre y0, momentum p0, position spread dy) for the clock."""

    a: float
    b: float
    p0: float = 2.0
    y0: float = 0.0
    dy: float = 1.1

    def __post_init__(self):
        if not (self.a < self.b <= 0.0):
            raise ValueError(f"need a < b <= 0, got a={self.a}, b={self.b}")
        if not self.dy > 0:
            raise ValueError("clock spread dy must be positive")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def dp(self) -> float:
        """Clock momentum spread (minimum uncertainty: dy * dp = 1/2)."""
        return 0.5 / self.dy


@dataclass(frozen=True)
class ModeAmplitudes:
    r: complex
    tr: complex
    q: complex


# --- branch of q = sqrt(k^2 + 2 m p) ------------------------------------

def branch_q(k, channel: ChannelSpec):
    """q(k) with q -> k at infinity and a cut on [-i sqrt(2mp), i sqrt(2mp)].

    Evaluated as k * sqrt(1 + 2mp / k^2) with the principal root: the
    argument is negative real exactly when k lies on the open cut, so the
    result is continuous everywhere else.
    """
    k = np.asarray(k, dtype=complex)
    c = channel.cut_tip
    if c == 0.0:
        return k.copy() if k.ndim else complex(k)
    on_cut = (k.real == 0.0) & (np.abs(k.imag) < c)
    if np.any(on_cut):
        raise BranchAmbiguityError(
            "k lies on the open branch cut; use branch_q_on_cut with a side")
    q = k * np.sqrt(1.0 + c * c / (k * k))
    return q if q.ndim else complex(q)


def branch_q_on_cut(kappa, side: str, channel: ChannelSpec):
    """q at k = i*kappa on the given side ('left': Re k = 0-, 'right': 0+).

    The right side continues the positive real axis (q -> +sqrt(2mp) as
    kappa -> 0); the left side carries the opposite sign.
    """
    c = channel.cut_tip
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0) or np.any(kappa > c):
        raise ValueError(f"kappa must lie in [0, {c}]")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    q = np.sqrt(np.maximum(c * c - kappa * kappa, 0.0))
    q = q if side == "right" else -q
    return q if q.ndim else float(q)


def mode_amplitudes(k, channel: ChannelSpec, q=None) -> ModeAmplitudes:
    """Reflection (k-q)/(k+q) and transmission 2k/(k+q) amplitudes.

    Pass ``q`` explicitly for points on the cut (side-flagged values).
    """
    k = np.asarray(k, dtype=complex)
    q = branch_q(k, channel) if q is None else np.asarray(q, dtype=complex)
    s = k + q
    if np.any(np.abs(s) < 1e-14 * np.maximum(np.abs(k), np.finfo(float).tiny)):
        raise PoleError("k + q = 0")
    r = (k - q) / s
    tr = 2.0 * k / s
    if r.ndim == 0:
        return ModeAmplitudes(complex(r), complex(tr), complex(q))
    return ModeAmplitudes(r, tr, q)


def mode_phi(k, channel: ChannelSpec, x, y=0.0, t=0.0, q=None):
    """Stationary mode phi_kp(x, y, t), normalised with 1/(2 pi hbar)."""
    amp = mode_amplitudes(k, channel, q)
    k = np.asarray(k, dtype=complex)
    x = np.asarray(x, dtype=float)
    phase = np.exp(1j * channel.p * y - 1j * (channel.p + 0.5 * k * k) * t) / (2.0 * np.pi)
    left = np.exp(1j * k * x) + amp.r * np.exp(-1j * k * x)
    right = amp.tr * np.exp(1j * amp.q * x)
    out = np.where(x <= 0.0, left, right) * phase
    return out if out.ndim else complex(out)


# --- particle: truncated sine ---------------------------------------------

def truncated_sine(x, a: float, b: float):
    """(2/L)^(1/2) sin(pi (x - a)/L) on [a, b], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    L = b - a
    inside = (x >= a) & (x <= b)
    return np.where(inside, math.sqrt(2.0 / L) * np.sin(np.pi * (x - a) / L), 0.0)


def _sinc(u):
    u = np.asarray(u, dtype=complex)
    safe = np.where(u == 0, 1.0, u)
    return np.where(u == 0, 1.0, np.sin(safe) / safe)


def truncated_sine_ft(k, a: float, b: float):
    """G(k) = int_a^b dx exp(-i k x) psi0(x), closed form (entire in k).

    The two poles at k L = +-pi are cancelled analytically by writing the
    result as a sum of two sinc functions, so no special handling is needed
    near them.
    """
    k = np.asarray(k, dtype=complex)
    L = b - a
    mid = 0.5 * (a + b)
    u = 0.5 * k * L
    G = (math.sqrt(2.0 / L) * 0.5 * L * np.exp(-1j * k * mid)
         * (_sinc(0.5 * np.pi - u) + _sinc(0.5 * np.pi + u)))
    return G if G.ndim else complex(G)


def particle_amplitude(k, spec: WavepacketSpec):
    """Unit-normalised momentum amplitude g(k) = G(k) / sqrt(2 pi)."""
    return truncated_sine_ft(k, spec.a, spec.b) / SQRT_2PI


def free_evolution(x, t: float, a: float, b: float):
    """Free-particle evolution of the truncated sine, in closed form.

    Each of the two plane-wave pieces exp(+-i w x) restricted to [a, b]
    evolves into a difference of error functions along the 45-degree line.
    """
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        return truncated_sine(x, a, b).astype(complex)
    if t < 0:
        raise ValueError("t must be non-negative")
    L = b - a
    w = np.pi / L
    scale = 1.0 / math.sqrt(2.0 * t)
    out = np.zeros(x.shape, dtype=complex)
    for sgn in (1.0, -1.0):
        kap = sgn * w
        u = x - kap * t
        piece = 0.5 * (erf(_ROT * (b - u) * scale) - erf(_ROT * (a - u) * scale))
        # exp(i kap (x - a)) restricted to [a, b], freely evolved
        out += sgn * np.exp(1j * kap * (x - a) - 0.5j * kap * kap * t) * piece
    return math.sqrt(2.0 / L) / 2j * out


# --- clock: minimum-uncertainty Gaussian ---------------------------------

def clock_gaussian(y, spec: WavepacketSpec):
    y = np.asarray(y, dtype=float)
    s = spec.dy
    return ((2.0 * np.pi * s * s) ** -0.25
            * np.exp(-(y - spec.y0) ** 2 / (4.0 * s * s) + 1j * spec.p0 * y))


def clock_gaussian_ft(p, spec: WavepacketSpec):
    """f(p) for the clock Gaussian; int |f|^2 dp = 1, spread dp = 1/(2 dy)."""
    p = np.asarray(p, dtype=float)
    s = spec.dp
    f = ((2.0 * np.pi * s * s) ** -0.25
         * np.exp(-(p - spec.p0) ** 2 / (4.0 * s * s) - 1j * (p - spec.p0) * spec.y0))
    return f if f.ndim else complex(f)
