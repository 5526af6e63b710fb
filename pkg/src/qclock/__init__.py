"""Quantum-clock time-of-arrival model: contour propagation of a particle
over a clock-driven step, dwell-time distributions and a grid oracle."""
from .core import (ChannelSpec, ComponentTag, DistributionKind, DistributionSeries,
                   FieldSlice, Grid1D, Grid2D, UnitSystem, l2_norm, relative_l2,
                   trapezoid)
from .spectral import (WavepacketSpec, branch_q, branch_q_on_cut, clock_gaussian_ft,
                       mode_amplitudes, mode_phi, truncated_sine, truncated_sine_ft)
from .contour import build_contour, rectangular_detour
from .evolve import (assemble_components, assemble_state, build_clock_quadrature,
                     propagate_channel)
from .observables import (find_peaks, rho_conditional, rho_unconditional,
                          shape_distance, transmission_asymptotic, transmission_direct)
from .oracle import OracleConfig, cn_propagate, oracle_transmission

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec", "ComponentTag", "DistributionKind", "DistributionSeries", "FieldSlice",
    "Grid1D", "Grid2D", "UnitSystem", "l2_norm", "relative_l2", "trapezoid",
    "WavepacketSpec", "branch_q", "branch_q_on_cut", "clock_gaussian_ft", "mode_amplitudes",
    "mode_phi", "truncated_sine", "truncated_sine_ft", "build_contour", "rectangular_detour",
    "assemble_components", "assemble_state", "build_clock_quadrature", "propagate_channel",
    "find_peaks", "rho_conditional", "rho_unconditional", "shape_distance",
    "transmission_asymptotic", "transmission_direct", "OracleConfig", "cn_propagate",
    "oracle_transmission",
]
