"""Command-line front end.

    qclock channel-density --scenario fig1.scn --out out/
    qclock dwell           --scenario fig2.scn --out out/
    qclock transmission    --scenario fig1.scn --out out/
    qclock verify          --scenario fig1.scn --out out/
    qclock gnuplot         --scenario fig1.scn --out out/

Outputs are CSV (``#`` header with scenario hash, parameter echo and
convergence metadata; 12 significant digits; LF endings) and a JSON summary
with sorted keys and a schema version.  The exit code is 0 only if every
requested computation converged; 2 flags bad input, 3 non-convergence or a
failed check.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .core import ChannelSpec, ComponentTag, Grid1D, relative_l2, trapezoid
from .evolve import (ConvergenceWarning, CoverageError, assemble_components,
                     build_clock_quadrature, contour_for, propagate_channel, reach_of)
from .contour import ContourError, rectangular_detour
from .observables import (basin_mass, find_peaks, interference_mass, rho_conditional,
                          rho_unconditional, scale_distance, shape_distance,
                          transmission_asymptotic, transmission_direct)
from .oracle import (OracleConfig, OracleError, cn_propagate, initial_state,
                     momentum_quantile, oracle_transmission)
from .scenario import Scenario, ScenarioError, load_scenario
from .spectral import free_evolution, truncated_sine

SCHEMA_VERSION = "1.0"
TOT, S, E = ComponentTag.TOTAL, ComponentTag.SCATTERING, ComponentTag.EVANESCENT

# thresholds used by `verify`
THRESHOLDS = {"reconstruction_rel_l2": 1e-4, "reconstruction_right_max": 1e-6,
              "path_independence_rel_l2": 1e-8, "oracle_rel_l2": 1e-3,
              "free_limit_rel_l2": 1e-8, "channel_norm_drift": 1e-6}


class RunFailure(RuntimeError):
    pass


# --- writers -----------------------------------------------------------

def fmt(v) -> str:
    return format(float(v), ".12g")


def _header(scn: Scenario, command: str, meta: dict) -> list:
    lines = [f"qclock {__version__} {command}",
             f"scenario: {scn.path}", f"scenario_sha256: {scn.digest}"]
    lines += [f"param {k} = {v}" for k, v in scn.echo()]
    lines += [f"meta {k} = {meta[k]}" for k in sorted(meta)]
    return ["# " + s for s in lines]


def write_csv(path: Path, scn: Scenario, command: str, meta: dict, columns, rows):
    lines = _header(scn, command, meta)
    lines.append(",".join(columns))
    body = np.column_stack(rows)
    lines += [",".join(fmt(v) for v in r) for r in body]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else repr(v)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, ComponentTag):
        return o.value
    return o


def write_json(path: Path, scn: Scenario, command: str, payload: dict):
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "generator": f"qclock {__version__}",
           "scenario": {"path": scn.path, "sha256": scn.digest,
                        "parameters": {k: str(v) for k, v in scn.echo()}},
           "units": "atomic (hbar = m = 1)"}
    doc.update(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    return path


def _tname(t: float) -> str:
    return fmt(t).replace(".", "p").replace("-", "m")


# --- commands ----------------------------------------------------------

def cmd_channel_density(scn: Scenario, out: Path, component: str = "all", strict: bool = False, **_):
    ch = scn.channel
    written, converged = [], True
    for t in scn.times:
        c = contour_for(ch, scn.wavepacket, t, scn.x_grid, **scn.contour_kw())
        st = propagate_channel(scn.wavepacket, ch, t, scn.x_grid, c, strict=strict)
        dens = {tag: np.abs(st[tag]) ** 2 for tag in (TOT, S, E)}
        inter = dens[TOT] - dens[S] - dens[E]
        cols = ["x"]
        rows = [scn.x_grid.nodes]
        if component == "all":
            cols += ["density_total", "density_scattering", "density_evanescent", "density_interference"]
            rows += [dens[TOT], dens[S], dens[E], inter]
        else:
            cols += [f"density_{component}"]
            rows += [dens[ComponentTag(component)]]
        meta = {"t": fmt(t), "k_max": fmt(st.meta["k_max"]), "tails": st.meta["tails"],
                "contour_nodes": st.meta["n_nodes"], "tail_estimate": fmt(st.meta["tail_estimate"]),
                "converged": st.meta["converged"], "clock_phase": "factored out (exp(i p y - i p t))"}
        converged &= st.meta["converged"]
        written.append(write_csv(out / f"channel_density_t{_tname(t)}.csv", scn,
                                 "channel-density", meta, cols, rows))
    return written, converged


def _second_basin_fraction(report, ev_series):
    if len(report) < 2:
        return None
    basin = report.basins[1]
    m = report.peak_masses[1]
    return basin_mass(ev_series, basin) / m if m > 0 else None


def cmd_dwell(scn: Scenario, out: Path, threads: int = 1, strict: bool = False, **_):
    try:
        quad = build_clock_quadrature(scn.wavepacket, scn.n_p)
    except CoverageError as exc:
        raise ScenarioError(f"[clock]: {exc}") from None
    written, converged = [], True
    summary = {"clock_window": list(quad.window), "clock_coverage": quad.coverage, "times": []}
    y = scn.y_grid.nodes
    for t in scn.times:
        comps = assemble_components(scn.wavepacket, t, scn.grid2d, scn.n_p, (TOT, S, E),
                                    threads=threads, contour_kw=scn.contour_kw())
        meta0 = comps[TOT].meta
        converged &= bool(meta0["converged"])
        if strict and not meta0["converged"]:
            raise RunFailure(f"t = {t}: contour tails not converged "
                             f"(estimate {meta0['max_tail_estimate']:.2e})")
        rc, rcs = rho_conditional(comps[TOT]), rho_conditional(comps[S])
        ru, rus = rho_unconditional(comps[TOT]), rho_unconditional(comps[S])
        rue = rho_unconditional(comps[E])
        im = interference_mass(comps[S], comps[E])
        I = {"rho_c_total": trapezoid(rc), "rho_c_scattering_only": trapezoid(rcs),
             "rho_u_total": trapezoid(ru), "rho_u_scattering_only": trapezoid(rus),
             "rho_u_evanescent_only": trapezoid(rue)}
        peaks = find_peaks(ru)
        shift = float(y[np.argmax(rc.values)] - y[np.argmax(rcs.values)])
        entry = {"t": t, "integrals": I,
                 "deficit": I["rho_u_total"] - I["rho_u_scattering_only"],
                 "deficit_decomposition": im,
                 "argmax_rho_c_total": float(y[np.argmax(rc.values)]),
                 "argmax_rho_c_scattering_only": float(y[np.argmax(rcs.values)]),
                 "peak_shift": shift, "peak_shift_sign": int(np.sign(shift)),
                 "peaks_rho_u_total": {"locations": peaks.peak_locations,
                                       "masses": peaks.peak_masses,
                                       "basins": [list(b) for b in peaks.basins],
                                       "prominence": peaks.method["prominence"]},
                 "second_basin_evanescent_fraction": _second_basin_fraction(peaks, rue),
                 "shape_distance_rho_c": shape_distance(rc, rcs),
                 "scale_distance_rho_c": scale_distance(rc, rcs),
                 "converged": bool(meta0["converged"]),
                 "max_tail_estimate": meta0["max_tail_estimate"]}
        summary["times"].append(entry)
        meta = {"t": fmt(t), "n_p": scn.n_p, "clock_coverage": fmt(quad.coverage),
                "converged": meta0["converged"], "max_tail_estimate": fmt(meta0["max_tail_estimate"])}
        written.append(write_csv(out / f"dwell_t{_tname(t)}.csv", scn, "dwell", meta,
                                 ["y", "rho_c_total", "rho_c_scattering_only",
                                  "rho_u_total", "rho_u_scattering_only"],
                                 [y, rc.values, rcs.values, ru.values, rus.values]))
    second = [e["peaks_rho_u_total"]["locations"][1] if len(e["peaks_rho_u_total"]["locations"]) > 1
              else None for e in summary["times"]]
    summary["second_peak_locations"] = second
    written.append(write_json(out / "dwell_summary.json", scn, "dwell", summary))
    return written, converged


def transmission_grid(scn: Scenario, t: float) -> Grid1D:
    """[0, x_max] with x_max past the 1e-4 momentum quantile's reach at t."""
    x_max = max(10.0, momentum_quantile(scn.wavepacket) * t)
    return Grid1D.from_spacing(0.0, math.ceil(x_max), scn.run["transmission_dx"])


def oracle_config_for(scn: Scenario, t: float, dx: float, dt: float) -> OracleConfig:
    return OracleConfig.sized_for(scn.wavepacket, scn.channel, t, dx=dx, dt=dt)


def cmd_transmission(scn: Scenario, out: Path, strict: bool = False, **_):
    ch, wp = scn.channel, scn.wavepacket
    split = transmission_asymptotic(wp, ch)
    direct, converged = [], True
    for t in scn.run["transmission_times"]:
        g = transmission_grid(scn, t)
        st = propagate_channel(wp, ch, t, g, components=(TOT,), strict=strict)
        converged &= st.meta["converged"]
        pt = transmission_direct(st)
        direct.append({"t": t, "transmission_direct": pt, "x_max": g.stop,
                       "relative_to_asymptotic": (pt - split.total) / split.total if split.total else None})
    payload = {"p": ch.p, "asymptotic": {"total": split.total, "evanescent_segment": split.evanescent,
                                         "propagating_segment": split.propagating},
               "direct": direct}
    t_f = scn.run["oracle_t_final"]
    cfg = oracle_config_for(scn, t_f, scn.run["oracle_transmission_dx"], scn.run["oracle_transmission_dt"])
    try:
        o = oracle_transmission(wp, cfg, t_f)
        payload["oracle"] = {"transmission": o["transmission"], "rate": o["rate"], "t_final": t_f,
                             "X": cfg.X, "N": cfg.N, "dt": cfg.dt, "status": "ok",
                             "relative_to_asymptotic": (o["transmission"] - split.total) / split.total
                             if split.total else None}
    except OracleError as exc:
        payload["oracle"] = {"status": "failed", "error": str(exc), "t_final": t_f}
        converged = False
    path = write_json(out / "transmission.json", scn, "transmission", payload)
    return [path], converged


def _check(name, value, limit, detail=None):
    d = {"name": name, "residual": value, "threshold": limit, "pass": bool(value < limit)}
    if detail:
        d.update(detail)
    return d


def run_verify(scn: Scenario) -> list:
    """Reconstruction, path independence, channel norm, free limit and
    (optionally) oracle equivalence for the scenario's channel."""
    wp, ch = scn.wavepacket, scn.channel
    kw = scn.contour_kw()
    checks = []

    # t = 0 reconstruction on a window around the support
    g0 = Grid1D.from_spacing(-5.0 + math.floor(wp.a), 5.0, 0.01)
    st0 = propagate_channel(wp, ch, 0.0, g0, contour_for(ch, wp, 0.0, g0, **{k: v for k, v in kw.items() if k != "k_max"}))
    psi0 = truncated_sine(g0.nodes, wp.a, wp.b)
    inside = (g0.nodes >= wp.a) & (g0.nodes <= wp.b)
    checks.append(_check("reconstruction_rel_l2", relative_l2(st0[TOT][inside], psi0[inside]),
                         THRESHOLDS["reconstruction_rel_l2"]))
    checks.append(_check("reconstruction_right_max", float(np.max(np.abs(st0[TOT][g0.nodes > 0]))),
                         THRESHOLDS["reconstruction_right_max"]))

    t = max(scn.times)
    if t <= 0:
        t = 10.0
    g = scn.x_grid
    canon = contour_for(ch, wp, t, g, **kw)
    st = propagate_channel(wp, ch, t, g, canon)
    try:
        det = rectangular_detour(ch, canon.k_max, scn.contour["detour_height"],
                                 canon.nodes_per_panel, t=t, reach=reach_of(wp, g.nodes),
                                 tails=canon.tails)
        std = propagate_channel(wp, ch, t, g, det, components=(TOT,))
        res = relative_l2(std[TOT], st[TOT])
    except ContourError:
        res = float("inf")
    checks.append(_check("path_independence_rel_l2", res, THRESHOLDS["path_independence_rel_l2"],
                         {"t": t, "detour_height": scn.contour["detour_height"]}))
    add = float(np.max(np.abs(st[TOT] - st[S] - st[E])))
    checks.append(_check("component_additivity_max", add, 1e-13, {"t": t}))

    # free limit: p = 0 channel vs closed-form free evolution
    ch0 = ChannelSpec(0.0)
    stf = propagate_channel(wp, ch0, t, g, contour_for(ch0, wp, t, g, **kw), components=(TOT,))
    checks.append(_check("free_limit_rel_l2", relative_l2(stf[TOT], free_evolution(g.nodes, t, wp.a, wp.b)),
                         THRESHOLDS["free_limit_rel_l2"], {"t": t}))

    if scn.run["verify_oracle"]:
        cfg = oracle_config_for(scn, t, scn.run["oracle_dx"], scn.run["oracle_dt"])
        try:
            f = cn_propagate(initial_state(wp, cfg), cfg, t)
            xo = cfg.grid.nodes
            a = np.interp(g.nodes, xo, f.density)
            res = relative_l2(a, np.abs(st[TOT]) ** 2)
            detail = {"t": t, "X": cfg.X, "N": cfg.N, "dt": cfg.dt}
        except OracleError as exc:
            res, detail = float("inf"), {"t": t, "error": str(exc)}
        checks.append(_check("oracle_rel_l2", res, THRESHOLDS["oracle_rel_l2"], detail))
    return checks


def cmd_verify(scn: Scenario, out: Path, **_):
    checks = run_verify(scn)
    ok = all(c["pass"] for c in checks)
    jpath = write_json(out / "verify.json", scn, "verify", {"checks": checks, "all_pass": ok})
    lines = _header(scn, "verify", {"all_pass": ok})
    lines.append("check,residual,threshold,pass")
    lines += [f"{c['name']},{fmt(c['residual'])},{fmt(c['threshold'])},{int(c['pass'])}" for c in checks]
    cpath = out / "verify.csv"
    with open(cpath, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return [jpath, cpath], ok


GNUPLOT = {
    "channel-density": """# gnuplot script: channel densities |chi_p(x, t)|^2
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set xlabel 'x (a.u.)'
set ylabel 'density'
set logscale y
{plots}
""",
    "dwell": """# gnuplot script: conditional and unconditional dwell-time distributions
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set xlabel 'y (a.u.)'
set ylabel 'rho'
{plots}
""",
}


def cmd_gnuplot(scn: Scenario, out: Path, **_):
    written = []
    dens = []
    for t in scn.times:
        name = f"channel_density_t{_tname(t)}.csv"
        dens.append(f"set title 't = {fmt(t)}'\nplot '{name}' using 1:2 with lines, "
                    f"'' using 1:3 with lines, '' using 1:4 with lines\npause -1")
    p = out / "channel_density.gp"
    p.write_text(GNUPLOT["channel-density"].format(plots="\n".join(dens)), encoding="utf-8", newline="\n")
    written.append(p)
    dw = []
    for t in scn.times:
        name = f"dwell_t{_tname(t)}.csv"
        dw.append(f"set title 't = {fmt(t)}'\nplot '{name}' using 1:2 with lines, '' using 1:3 with lines dt 2, "
                  f"'' using 1:4 with lines, '' using 1:5 with lines dt 3\npause -1")
    p = out / "dwell.gp"
    p.write_text(GNUPLOT["dwell"].format(plots="\n".join(dw)), encoding="utf-8", newline="\n")
    written.append(p)
    return written, True


COMMANDS = {"channel-density": cmd_channel_density, "dwell": cmd_dwell,
            "transmission": cmd_transmission, "verify": cmd_verify, "gnuplot": cmd_gnuplot}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qclock", description="Quantum-clock time-of-arrival simulations")
    ap.add_argument("--version", action="version", version=f"qclock {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--scenario", required=True, help="scenario file (bundled: fig1.scn, fig2.scn, fig3.scn)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--component", default=None, choices=["total", "scattering", "evanescent", "all"])
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--strict", action="store_true", help="treat convergence warnings as errors")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        scn = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    component = args.component or scn.component
    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error", ConvergenceWarning)
        try:
            paths, ok = COMMANDS[args.command](scn, out, component=component,
                                               threads=args.threads, strict=args.strict)
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        except (ConvergenceWarning, RunFailure, OracleError, ContourError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
    for p in paths:
        print(p)
    if not ok:
        print("warning: not all computations converged or passed; see the outputs", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
