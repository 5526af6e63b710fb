"""Shared value types, grids and quadrature helpers.

Everything is in atomic units (hbar = m = 1).  Types are frozen dataclasses;
numpy arrays stored on them are made read-only at construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

HBAR = 1.0
MASS = 1.0


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = HBAR
    mass: float = MASS

    def __post_init__(self):
        if self.hbar != 1.0 or self.mass != 1.0:
            raise ValueError("only atomic units (hbar = m = 1) are supported")


class ComponentTag(str, Enum):
    TOTAL = "total"
    SCATTERING = "scattering"
    EVANESCENT = "evanescent"


@dataclass(frozen=True)
class ChannelSpec:
    """One conserved clock-momentum channel: a downward step of height p."""

    p: float
    m: float = MASS
    hbar: float = HBAR

    def __post_init__(self):
        if not np.isfinite(self.p):
            raise ValueError("channel momentum p must be finite")
        if self.p < 0:
            raise ValueError(
                f"p = {self.p} < 0: upward-step channels are out of scope")
        if self.m != MASS or self.hbar != HBAR:
            raise ValueError("only atomic units (hbar = m = 1) are supported")

    @property
    def cut_tip(self) -> float:
        """sqrt(2 m p): the branch cut runs from -i*cut_tip to +i*cut_tip."""
        return math.sqrt(2.0 * self.m * self.p)


def _frozen(a, dtype=None) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid1D:
    start: float
    stop: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a grid needs at least two nodes")
        if not self.stop > self.start:
            raise ValueError("grid must be strictly increasing")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n - 1)

    def index_of(self, value: float, tol: float = 1e-9) -> Optional[int]:
        """Index of the node equal to ``value`` (within tol*spacing), else None."""
        j = int(round((value - self.start) / self.spacing))
        if 0 <= j < self.n and abs(self.start + j * self.spacing - value) <= tol * self.spacing:
            return j
        return None

    @classmethod
    def from_spacing(cls, start: float, stop: float, dx: float) -> "Grid1D":
        return cls(start, stop, int(round((stop - start) / dx)) + 1)


@dataclass(frozen=True)
class Grid2D:
    x: Grid1D
    y: Grid1D

    @property
    def shape(self):
        return (self.x.n, self.y.n)


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n, grid.spacing)
    w[0] = w[-1] = 0.5 * grid.spacing
    return w


@dataclass(frozen=True)
class FieldSlice:
    grid: Union[Grid1D, Grid2D]
    values: np.ndarray
    t: float
    component: ComponentTag = ComponentTag.TOTAL
    channel: Optional[ChannelSpec] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        shape = (self.grid.n,) if isinstance(self.grid, Grid1D) else self.grid.shape
        values = _frozen(self.values, complex)
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} != grid shape {shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "component", ComponentTag(self.component))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


class DistributionKind(str, Enum):
    CONDITIONAL = "conditional"
    UNCONDITIONAL = "unconditional"


@dataclass(frozen=True)
class DistributionSeries:
    y_grid: Grid1D
    values: np.ndarray
    t: float
    kind: DistributionKind
    component: ComponentTag = ComponentTag.TOTAL

    def __post_init__(self):
        values = _frozen(self.values, float)
        if values.shape != (self.y_grid.n,):
            raise ValueError("values length must match the y grid")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("a distribution must be finite and non-negative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        object.__setattr__(self, "component", ComponentTag(self.component))


def l2_norm(field: FieldSlice) -> float:
    """sqrt of the trapezoid integral of |values|^2 over the field's grid."""
    dens = field.density
    if isinstance(field.grid, Grid1D):
        return math.sqrt(float(np.sum(trapezoid_weights(field.grid) * dens)))
    wx = trapezoid_weights(field.grid.x)
    wy = trapezoid_weights(field.grid.y)
    return math.sqrt(float(np.sum(wx * np.sum(dens * wy, axis=1))))


def trapezoid(series: DistributionSeries) -> float:
    return float(np.sum(trapezoid_weights(series.y_grid) * series.values))


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b|| / ||b|| on a shared uniform grid (discrete 2-norm)."""
    den = np.linalg.norm(b)
    if den == 0:
        raise ValueError("reference has zero norm")
    return float(np.linalg.norm(a - b) / den)


def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = tuple(_frozen(v) for v in np.polynomial.legendre.leggauss(n))
    return _GL_CACHE[n]


_GL_CACHE: dict = {}
