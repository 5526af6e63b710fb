"""Scenario files: INI sections [particle], [clock], [grids], [contour], [run].

Every key has a default, so a scenario only states what it changes.  All
sub-module preconditions are checked by `load_scenario` before any compute.
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

from .core import ChannelSpec, ComponentTag, Grid1D, Grid2D
from .spectral import WavepacketSpec

SCENARIO_DIR = Path(__file__).with_name("scenarios")

DEFAULTS = {
    "particle": {"a": "-2.01", "b": "-0.01"},
    "clock": {"p0": "2.0", "y0": "0.0", "dy": "1.1"},
    "grids": {"x_min": "-40", "x_max": "40", "x_nodes": "2001",
              "y_min": "-10", "y_max": "30", "y_nodes": "801", "n_p": "96"},
    "contour": {"k_max": "auto", "nodes_per_panel": "64", "n_panels_real": "8",
                "n_panels_cut": "4", "detour_height": "3.0"},
    "run": {"p": "2.0", "times": "10", "component": "all",
            "transmission_times": "20, 40", "transmission_dx": "0.05",
            "oracle_dx": "0.02", "oracle_dt": "0.002", "oracle_t_final": "50",
            "oracle_transmission_dx": "0.04", "oracle_transmission_dt": "0.0025",
            "verify_oracle": "yes"},
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    wavepacket: WavepacketSpec
    p: float
    times: Tuple[float, ...]
    x_grid: Grid1D
    y_grid: Grid1D
    n_p: int
    contour: dict
    component: str
    run: dict
    source: str = ""
    path: str = ""
    digest: str = ""

    @property
    def channel(self) -> ChannelSpec:
        return ChannelSpec(self.p)

    @property
    def grid2d(self) -> Grid2D:
        return Grid2D(self.x_grid, self.y_grid)

    def components(self) -> Tuple[ComponentTag, ...]:
        if self.component == "all":
            return (ComponentTag.TOTAL, ComponentTag.SCATTERING, ComponentTag.EVANESCENT)
        return (ComponentTag(self.component),)

    def contour_kw(self) -> dict:
        kw = {k: self.contour[k] for k in ("nodes_per_panel", "n_panels_real", "n_panels_cut")}
        if self.contour["k_max"] is not None:
            kw["k_max"] = self.contour["k_max"]
        return kw

    def echo(self):
        """Flat (key, value) pairs of every resolved parameter, in file order."""
        wp = self.wavepacket
        out = [("particle.a", wp.a), ("particle.b", wp.b), ("clock.p0", wp.p0),
               ("clock.y0", wp.y0), ("clock.dy", wp.dy),
               ("grids.x", f"[{self.x_grid.start}, {self.x_grid.stop}] x {self.x_grid.n}"),
               ("grids.y", f"[{self.y_grid.start}, {self.y_grid.stop}] x {self.y_grid.n}"),
               ("grids.n_p", self.n_p)]
        out += [(f"contour.{k}", v) for k, v in self.contour.items()]
        out += [("run.p", self.p), ("run.times", ", ".join(_fmt(t) for t in self.times)),
                ("run.component", self.component)]
        out += [(f"run.{k}", v) for k, v in self.run.items()]
        out += [("units", "atomic (hbar = m = 1)")]
        return out


def _fmt(v) -> str:
    return format(v, ".12g") if isinstance(v, float) else str(v)


def _floats(text: str, key: str) -> Tuple[float, ...]:
    parts = [s for s in text.replace(",", " ").split() if s]
    try:
        return tuple(float(s) for s in parts)
    except ValueError:
        raise ScenarioError(f"{key}: expected a list of numbers, got {text!r}") from None


def _get(cp, sec, key, conv, what):
    raw = cp.get(sec, key)
    try:
        return conv(raw)
    except ValueError:
        raise ScenarioError(f"[{sec}] {key} = {raw!r}: expected {what}") from None


def _yes(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("yes", "true", "1", "on"):
        return True
    if v in ("no", "false", "0", "off"):
        return False
    raise ValueError(raw)


def parse_scenario(text: str, path: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read_dict(DEFAULTS)
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    unknown = [s for s in cp.sections() if s not in DEFAULTS]
    if unknown:
        raise ScenarioError(f"{path}: unknown section(s) {unknown}; allowed {list(DEFAULTS)}")
    for sec in DEFAULTS:
        extra = set(cp[sec]) - set(DEFAULTS[sec])
        if extra:
            raise ScenarioError(f"[{sec}] unknown key(s) {sorted(extra)}")

    f = lambda s, k: _get(cp, s, k, float, "a number")
    i = lambda s, k: _get(cp, s, k, int, "an integer")
    try:
        wp = WavepacketSpec(f("particle", "a"), f("particle", "b"), f("clock", "p0"),
                            f("clock", "y0"), f("clock", "dy"))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"[particle]/[clock]: {exc}") from None

    times = _floats(cp.get("run", "times"), "[run] times")
    if not times:
        raise ScenarioError("[run] times is empty: give at least one evaluation time")
    if any(t < 0 or not math.isfinite(t) for t in times):
        raise ScenarioError("[run] times must be finite and non-negative")

    p = f("run", "p")
    try:
        ChannelSpec(p)
    except ValueError as exc:
        raise ScenarioError(f"[run] p: {exc}") from None

    try:
        xg = Grid1D(f("grids", "x_min"), f("grids", "x_max"), i("grids", "x_nodes"))
        yg = Grid1D(f("grids", "y_min"), f("grids", "y_max"), i("grids", "y_nodes"))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"[grids]: {exc}") from None
    if xg.index_of(0.0) is None:
        raise ScenarioError("[grids] the x grid must contain x = 0 as a node "
                            "(choose x_min, x_max, x_nodes accordingly)")
    n_p = i("grids", "n_p")
    if n_p < 4:
        raise ScenarioError("[grids] n_p must be at least 4")

    km = cp.get("contour", "k_max").strip().lower()
    contour = {"k_max": None if km == "auto" else _get(cp, "contour", "k_max", float, "a number or 'auto'"),
               "nodes_per_panel": i("contour", "nodes_per_panel"),
               "n_panels_real": i("contour", "n_panels_real"),
               "n_panels_cut": i("contour", "n_panels_cut"),
               "detour_height": f("contour", "detour_height")}
    c = math.sqrt(2.0 * p)
    if contour["nodes_per_panel"] < 8:
        raise ScenarioError("[contour] nodes_per_panel must be >= 8")
    if contour["n_panels_real"] < 1 or contour["n_panels_cut"] < 1:
        raise ScenarioError("[contour] panel counts must be positive")
    if contour["k_max"] is not None and not contour["k_max"] > 3 * c:
        raise ScenarioError(f"[contour] k_max must exceed 3*sqrt(2p) = {3 * c:.6g}")
    if not contour["detour_height"] > c:
        raise ScenarioError(f"[contour] detour_height must exceed the cut tip sqrt(2p) = {c:.6g}")

    component = cp.get("run", "component").strip().lower()
    if component not in ("all", "total", "scattering", "evanescent"):
        raise ScenarioError(f"[run] component {component!r} not in total|scattering|evanescent|all")

    run = {"transmission_times": _floats(cp.get("run", "transmission_times"), "[run] transmission_times"),
           "transmission_dx": f("run", "transmission_dx"),
           "oracle_dx": f("run", "oracle_dx"), "oracle_dt": f("run", "oracle_dt"),
           "oracle_t_final": f("run", "oracle_t_final"),
           "oracle_transmission_dx": f("run", "oracle_transmission_dx"),
           "oracle_transmission_dt": f("run", "oracle_transmission_dt"),
           "verify_oracle": _get(cp, "run", "verify_oracle", _yes, "yes or no")}
    for k in ("transmission_dx", "oracle_dx", "oracle_dt", "oracle_transmission_dx",
              "oracle_transmission_dt", "oracle_t_final"):
        if not run[k] > 0:
            raise ScenarioError(f"[run] {k} must be positive")

    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Scenario(wp, p, times, xg, yg, n_p, contour, component, run, text, path, digest)


def load_scenario(path) -> Scenario:
    """Read a scenario file; a bare name like ``fig1.scn`` falls back to the
    bundled scenarios."""
    p = Path(path)
    if not p.exists() and (SCENARIO_DIR / p.name).exists() and p.parent == Path("."):
        p = SCENARIO_DIR / p.name
    if not p.exists():
        raise ScenarioError(f"scenario file {path} not found")
    return parse_scenario(p.read_text(encoding="utf-8"), str(p))
