"""Command-line harness: experiment runners, CSV/figure reports, run records.

Subcommands: simulate, fig2, fig3, fig4a, fig4b, protocol, wigner.
Exit codes: 0 success, 2 configuration error, 3 numerical-diagnostic failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, catstates, figures, protocols, pulses, reflection
from .catstates import CatState, ReflectionNoise, even_odd_cat, wigner
from .lindblad import CutoffError, IntegrationError
from .records import ConfigError, RunConfig, RunRecord, Stopwatch
from .reflection import RingdownError


class BisectionError(RuntimeError):
    """Input-amplitude inversion failed to bracket or converge."""


FIG3_CANONICAL_PAIRS = ((3.0, 210.0), (6.0, 210.0), (6.0, 100.0), (6.0, 400.0))

_EXPERIMENT_DEFAULTS = {
    "fig2": {"g": [3.0, 6.0], "gamma_s": 1.0, "kappa_t": [210.0], "alpha_sq": [1.0]},
    "fig3": {"g": [3.0, 6.0], "gamma_s": 0.0, "kappa_t": [100.0, 210.0, 400.0],
             "alpha_sq": [round(x, 10) for x in np.linspace(0.0, 25.0, 26)]},
    "fig4a": {"g": [3.0, 6.0, 10.0], "gamma_s": 1.0, "kappa_t": [210.0],
              "alpha_sq": [round(x, 10) for x in np.linspace(0.0, 16.0, 26)]},
    "fig4b": {"g": [float(v) for v in range(1, 13)], "gamma_s": 1.0,
              "kappa_t": [210.0]},
}


def _parse_float_list(text: str) -> list:
    """Parse 'a,b,c' or a linspace range 'start:stop:count'."""
    if ":" in text:
        start, stop, count = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
    return [float(v) for v in text.split(",")]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _sweep_point(kw: dict) -> dict:
    """One (g, gamma_s, kappa_t, alpha_sq) fidelity point; picklable for workers."""
    g = kw["g"]
    gamma_s = kw["gamma_s"]
    kappa_t = kw["kappa_t"]
    alpha_sq = kw["alpha_sq"]
    if alpha_sq == 0.0:
        grid = pulses.default_grid(kappa_t)
        f_in = pulses.make_gaussian_pulse(kappa_t, grid)
        f_out0 = pulses.empty_cavity_reflect(f_in)
        xi0 = pulses.mismatch(
            f_in, pulses.ComplexEnvelope(grid, -f_out0.samples))
        return {"g": g, "gamma_s": gamma_s, "kappa_t": kappa_t,
                "alpha_sq": 0.0, "F_exact": 1.0, "F_eq7": 1.0, "eta": 0.0,
                "xi0": complex(xi0), "xi1": 0.0 + 0.0j,
                "fock_cutoff": kw.get("fock_cutoff", 15),
                "diagnostics": {"trace_drift": 0.0, "top_fock_pop": 0.0,
                                "ringdown_residual": 0.0, "coherence": 0.0}}
    run = reflection.simulate_reflection(
        g=g, gamma_s=gamma_s, alpha=math.sqrt(alpha_sq), kappa_T=kappa_t,
        fock_cutoff=kw.get("fock_cutoff", 15), dt=kw.get("dt"))
    return {"g": g, "gamma_s": gamma_s, "kappa_t": kappa_t,
            "alpha_sq": alpha_sq, "F_exact": run.fidelity.F_exact,
            "F_eq7": run.fidelity.F_eq7, "eta": run.outcome.eta,
            "xi0": complex(run.outcome.xi0), "xi1": complex(run.outcome.xi1),
            "alpha_out": complex(run.outcome.alpha_out),
            "fock_cutoff": run.diagnostics["fock_cutoff"],
            "diagnostics": run.diagnostics}


def _run_sweep(points: list, jobs: int) -> list:
    """Execute sweep points (already sorted); dedupes identical tuples in-process."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, points))
    cache: dict = {}
    results = []
    for kw in points:
        key = tuple(sorted(kw.items()))
        if key not in cache:
            cache[key] = _sweep_point(kw)
        results.append(cache[key])
    return results


def _new_record(cfg: RunConfig) -> RunRecord:
    return RunRecord(config=cfg.to_dict(), version=__version__)


def _fidelity_csv_rows(results: list) -> list:
    rows = []
    for r in results:
        rows.append([_fmt(r["g"]), _fmt(r["kappa_t"]), _fmt(r["alpha_sq"]),
                     _fmt(r["F_exact"]), _fmt(r["F_eq7"]), _fmt(r["eta"]),
                     _fmt(r["xi0"].real), _fmt(r["xi0"].imag),
                     _fmt(r["xi1"].real), _fmt(r["xi1"].imag),
                     str(r["fock_cutoff"])])
    return rows


_FIDELITY_HEADER = ("g,kappa_t,alpha_sq,F_exact,F_eq7,eta,"
                    "xi0_re,xi0_im,xi1_re,xi1_im,fock_cutoff")


def run_simulate(cfg: RunConfig, out: Path) -> RunRecord:
    """Single reflection simulation with full envelope and trajectory output."""
    record = _new_record(cfg)
    watch = Stopwatch()
    g, kappa_t, alpha_sq = cfg.g[0], cfg.kappa_t[0], cfg.alpha_sq[0]
    if alpha_sq <= 0:
        raise ConfigError("simulate requires alpha_sq > 0")
    run = reflection.simulate_reflection(
        g=g, gamma_s=cfg.gamma_s, alpha=math.sqrt(alpha_sq), kappa_T=kappa_t,
        fock_cutoff=cfg.fock_cutoff, dt=cfg.dt)
    watch.lap("simulate")

    envelope_files = {}
    for name, env in (("f_in", run.outcome.f_in), ("f_out0", run.outcome.f_out_0),
                      ("f_out1", run.outcome.f_out_1)):
        path = out / f"{name}.csv"
        env.to_csv(path)
        record.add_file(path)
        envelope_files[name] = path.name
    traj_path = out / "trajectory.csv"
    run.trajectory.to_csv(traj_path)
    record.add_file(traj_path)

    outcome_path = out / "outcome.json"
    doc = run.outcome.scalar_record()
    doc["F_exact"] = run.fidelity.F_exact
    doc["F_eq7"] = run.fidelity.F_eq7
    doc["envelopes"] = envelope_files
    with open(outcome_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
    record.add_file(outcome_path)

    fig_path = out / "trajectory.png"
    figures.render_trajectory(run.trajectory.grid.times,
                              run.trajectory.photon_number,
                              run.trajectory.excited_pop, fig_path)
    record.add_file(fig_path)

    record.results.append({k: v for k, v in doc.items() if k != "envelopes"})
    record.diagnostics.append(run.diagnostics)
    watch.lap("report")
    record.timings = watch.timings
    return record


def run_fig2(cfg: RunConfig, out: Path) -> RunRecord:
    """Input and output pulse shapes at g = 0 and the configured couplings."""
    record = _new_record(cfg)
    watch = Stopwatch()
    kappa_t = cfg.kappa_t[0]
    alpha = math.sqrt(cfg.alpha_sq[0])
    grid = pulses.default_grid(kappa_t)
    f_in = pulses.make_gaussian_pulse(kappa_t, grid)

    series = {"f_in": f_in.samples}
    overlaps = {}
    g_values = [0.0] + list(cfg.g)
    for g in g_values:
        run = reflection.simulate_reflection(
            g=g, gamma_s=cfg.gamma_s, alpha=alpha, kappa_T=kappa_t,
            fock_cutoff=cfg.fock_cutoff, dt=cfg.dt)
        if g == 0.0:
            # signed empty-cavity shape (alpha_1 f_out1 / alpha = f_out^(0))
            samples = run.outcome.alpha_out * run.outcome.f_out_1.samples / alpha
            label = "g0"
        else:
            samples = run.outcome.f_out_1.samples
            label = f"g{g:g}"
        series[label] = samples
        env = pulses.ComplexEnvelope(grid, samples)
        overlaps[label] = complex(pulses.inner_product(f_in, env.normalized()))
        record.diagnostics.append({"g": g, **run.diagnostics})
    watch.lap("simulate")

    header = "t," + ",".join(f"{k}_re,{k}_im" for k in series)
    rows = []
    for i, t in enumerate(grid.times):
        row = [_fmt(t)]
        for samples in series.values():
            row += [_fmt(samples[i].real), _fmt(samples[i].imag)]
        rows.append(row)
    csv_path = out / "fig2.csv"
    _write_csv(csv_path, header, rows)
    record.add_file(csv_path)

    fig_path = out / "fig2.png"
    figures.render_pulse_shapes(grid.times, series, fig_path)
    record.add_file(fig_path)

    record.results.append({
        "overlaps": {k: [v.real, v.imag] for k, v in overlaps.items()}})
    watch.lap("report")
    record.timings = watch.timings
    return record


def _fig3_pairs(cfg: RunConfig, user_set_grid: bool) -> list:
    if user_set_grid:
        return [(g, kt) for g in cfg.g for kt in cfg.kappa_t]
    return list(FIG3_CANONICAL_PAIRS)


def run_fig3(cfg: RunConfig, out: Path, user_set_grid: bool = False) -> RunRecord:
    """Intrinsic-limit fidelity sweeps with spontaneous emission forced off."""
    record = _new_record(cfg)
    watch = Stopwatch()
    pairs = _fig3_pairs(cfg, user_set_grid)
    points = [{"g": g, "gamma_s": 0.0, "kappa_t": kt, "alpha_sq": a2,
               "fock_cutoff": cfg.fock_cutoff, "dt": cfg.dt}
              for g, kt in sorted(pairs) for a2 in cfg.alpha_sq]
    results = _run_sweep(points, cfg.jobs)
    watch.lap("simulate")

    csv_path = out / "fig3.csv"
    _write_csv(csv_path, _FIDELITY_HEADER, _fidelity_csv_rows(results))
    record.add_file(csv_path)

    curves = {}
    for g, kt in sorted(set(pairs)):
        sel = [r for r in results if r["g"] == g and r["kappa_t"] == kt]
        curves[f"g={g:g}, kT={kt:g}"] = (
            [r["alpha_sq"] for r in sel], [r["F_exact"] for r in sel])
    fig_path = out / "fig3.png"
    figures.render_fidelity_curves(curves, fig_path)
    record.add_file(fig_path)

    record.results = [{k: (v if not isinstance(v, complex) else [v.real, v.imag])
                       for k, v in r.items() if k != "diagnostics"}
                      for r in results]
    record.diagnostics = [r["diagnostics"] for r in results]
    watch.lap("report")
    record.timings = watch.timings
    return record


def run_fig4a(cfg: RunConfig, out: Path) -> RunRecord:
    """Noisy fidelity vs input photon number for each coupling rate."""
    record = _new_record(cfg)
    watch = Stopwatch()
    kappa_t = cfg.kappa_t[0]
    points = [{"g": g, "gamma_s": cfg.gamma_s, "kappa_t": kappa_t,
               "alpha_sq": a2, "fock_cutoff": cfg.fock_cutoff, "dt": cfg.dt}
              for g in cfg.g for a2 in cfg.alpha_sq]
    results = _run_sweep(points, cfg.jobs)
    watch.lap("simulate")

    csv_path = out / "fig4a.csv"
    _write_csv(csv_path, _FIDELITY_HEADER, _fidelity_csv_rows(results))
    record.add_file(csv_path)

    curves = {}
    for g in cfg.g:
        sel = [r for r in results if r["g"] == g]
        curves[f"g={g:g}"] = ([r["alpha_sq"] for r in sel],
                              [r["F_exact"] for r in sel])
    fig_path = out / "fig4a.png"
    figures.render_fidelity_curves(curves, fig_path)
    record.add_file(fig_path)

    record.results = [{k: (v if not isinstance(v, complex) else [v.real, v.imag])
                       for k, v in r.items() if k != "diagnostics"}
                      for r in results]
    record.diagnostics = [r["diagnostics"] for r in results]
    watch.lap("report")
    record.timings = watch.timings
    return record


def _solve_alpha_for_output(g: float, gamma_s: float, kappa_t: float,
                            target_alpha1_sq: float, fock_cutoff: int,
                            dt, tol: float = 1e-3) -> dict:
    """Bisect the input photon number until |alpha_1|^2 hits the target."""

    def alpha1_sq(a2: float) -> dict:
        return _sweep_point({"g": g, "gamma_s": gamma_s, "kappa_t": kappa_t,
                             "alpha_sq": a2, "fock_cutoff": fock_cutoff, "dt": dt})

    eta_weak = 1.0 - abs(reflection.weak_drive_oracle(g, 1.0, gamma_s, 0.0)) ** 2
    lo = target_alpha1_sq
    hi = target_alpha1_sq / max(1.0 - eta_weak, 0.1) * 1.1
    res_lo = alpha1_sq(lo)
    if abs(res_lo["alpha_out"]) ** 2 > target_alpha1_sq:
        raise BisectionError(
            f"lower bracket already overshoots: alpha_sq={lo}")
    res_hi = alpha1_sq(hi)
    doublings = 0
    while abs(res_hi["alpha_out"]) ** 2 < target_alpha1_sq:
        doublings += 1
        if doublings > 6:
            raise BisectionError(
                f"no upper bracket up to alpha_sq={hi:.4g} "
                f"(|alpha_1|^2={abs(res_hi['alpha_out'])**2:.4g}, "
                f"target={target_alpha1_sq})")
        hi *= 2.0
        res_hi = alpha1_sq(hi)

    best = res_hi
    iterations = 0
    while True:
        iterations += 1
        if iterations > 60:
            raise BisectionError(
                f"bisection failed to converge in 60 steps; "
                f"bracket [{lo:.6g}, {hi:.6g}], target {target_alpha1_sq}")
        mid = 0.5 * (lo + hi)
        res = alpha1_sq(mid)
        out_sq = abs(res["alpha_out"]) ** 2
        best = res
        if abs(out_sq - target_alpha1_sq) <= tol:
            break
        if out_sq < target_alpha1_sq:
            lo = mid
        else:
            hi = mid
    best = dict(best)
    best["target_alpha1_sq"] = target_alpha1_sq
    best["alpha1_sq"] = abs(best["alpha_out"]) ** 2
    best["iterations"] = iterations
    return best


def run_fig4b(cfg: RunConfig, out: Path) -> RunRecord:
    """Fidelity vs coupling rate at fixed output photon number."""
    record = _new_record(cfg)
    watch = Stopwatch()
    kappa_t = cfg.kappa_t[0]
    results = []
    for target in cfg.alpha1_sq_targets:
        for g in cfg.g:
            results.append(_solve_alpha_for_output(
                g, cfg.gamma_s, kappa_t, target, cfg.fock_cutoff, cfg.dt))
    watch.lap("simulate")

    rows = []
    for r in results:
        rows.append([_fmt(r["g"]), _fmt(r["target_alpha1_sq"]),
                     _fmt(r["alpha_sq"]), _fmt(r["alpha1_sq"]),
                     _fmt(r["F_exact"]), _fmt(r["F_eq7"]), _fmt(r["eta"]),
                     str(r["iterations"])])
    csv_path = out / "fig4b.csv"
    _write_csv(csv_path,
               "g,target_alpha1_sq,alpha_sq,alpha1_sq,F_exact,F_eq7,eta,iterations",
               rows)
    record.add_file(csv_path)

    curves = {}
    for target in cfg.alpha1_sq_targets:
        sel = [r for r in results if r["target_alpha1_sq"] == target]
        curves[f"|a1|^2={target:g}"] = ([r["g"] for r in sel],
                                        [r["F_exact"] for r in sel])
    fig_path = out / "fig4b.png"
    figures.render_fidelity_curves(curves, fig_path, xlabel=r"$g/\kappa$")
    record.add_file(fig_path)

    record.results = [{k: (v if not isinstance(v, complex) else [v.real, v.imag])
                       for k, v in r.items() if k != "diagnostics"}
                      for r in results]
    record.diagnostics = [r["diagnostics"] for r in results]
    watch.lap("report")
    record.timings = watch.timings
    return record


def _protocol_noise(cfg: RunConfig):
    if cfg.eta == 0.0 and cfg.xi0 == 0.0 and cfg.xi1 == 0.0:
        return None
    return ReflectionNoise(eta=cfg.eta, xi0=cfg.xi0, xi1=cfg.xi1)


def run_protocol(cfg: RunConfig, out: Path) -> RunRecord:
    """Run a named protocol or a JSON step script."""
    record = _new_record(cfg)
    watch = Stopwatch()
    if cfg.script is not None:
        with open(cfg.script, encoding="utf-8") as fh:
            steps = [protocols.ProtocolStep.from_json(d) for d in json.load(fh)]
        if cfg.state_file is not None:
            with open(cfg.state_file, encoding="utf-8") as fh:
                initial = CatState.from_json(fh)
        else:
            initial = catstates.coherent_state(cfg.alpha, atom="0")
        result = protocols.run_script(steps, initial)
    elif cfg.protocol == "multipartite":
        result = protocols.multipartite_cat(cfg.n_pulses, cfg.alpha,
                                            _protocol_noise(cfg), cfg.postselect)
    elif cfg.protocol == "multidimensional":
        result = protocols.multidimensional_cat(cfg.rounds, cfg.alpha,
                                                _protocol_noise(cfg))
    else:
        raise ConfigError(f"unknown protocol {cfg.protocol!r}")
    watch.lap("protocol")

    result_path = out / "protocol.json"
    result.to_json(result_path)
    record.add_file(result_path)
    state_path = out / "final_state.json"
    result.final_state.to_json(state_path)
    record.add_file(state_path)

    record.results.append({
        "n_branches": len(result.final_state.branches),
        "outcome_log": [[o, p] for o, p in result.outcome_log],
        "norm": result.final_state.norm(),
    })
    watch.lap("report")
    record.timings = watch.timings
    return record


def run_wigner(cfg: RunConfig, out: Path) -> RunRecord:
    """Wigner-function grid of a stored or built-in cat state."""
    record = _new_record(cfg)
    watch = Stopwatch()
    if cfg.state_file is not None:
        with open(cfg.state_file, encoding="utf-8") as fh:
            state = CatState.from_json(fh)
        if any(b.atom != "none" for b in state.branches):
            raise ConfigError("wigner requires an atom-free (measured) state")
        state = state.normalized()
    else:
        state = even_odd_cat(cfg.alpha, +1 if cfg.parity == "even" else -1,
                             mode=cfg.mode)
    axis = np.linspace(-cfg.extent, cfg.extent, cfg.points)
    grid = np.array([wigner(state, cfg.mode, axis + 1j * y) for y in axis])
    watch.lap("wigner")

    csv_path = out / "wigner.csv"
    rows = [[_fmt(x), _fmt(y), _fmt(grid[iy, ix])]
            for iy, y in enumerate(axis) for ix, x in enumerate(axis)]
    _write_csv(csv_path, "re_z,im_z,w", rows)
    record.add_file(csv_path)

    fig_path = out / "wigner.png"
    figures.render_wigner(axis, axis, grid, fig_path)
    record.add_file(fig_path)

    cell = (axis[1] - axis[0]) ** 2
    record.results.append({
        "w_origin": float(wigner(state, cfg.mode, 0.0)),
        "grid_integral": float(grid.sum() * cell),
        "n_branches": len(state.branches),
    })
    watch.lap("report")
    record.timings = watch.timings
    return record


_RUNNERS = {
    "simulate": run_simulate,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4a": run_fig4a,
    "fig4b": run_fig4b,
    "protocol": run_protocol,
    "wigner": run_wigner,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catpulse",
        description="Cavity-assisted Schrodinger-cat engineering simulations")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override file values")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--g", type=_parse_float_list, default=None,
                       help="coupling rates g/kappa, 'a,b,c' or 'start:stop:count'")
        p.add_argument("--gamma-s", type=float, default=None, dest="gamma_s")
        p.add_argument("--kappa-t", type=_parse_float_list, default=None,
                       dest="kappa_t")
        p.add_argument("--alpha-sq", type=_parse_float_list, default=None,
                       dest="alpha_sq")
        p.add_argument("--fock-cutoff", type=int, default=None, dest="fock_cutoff")
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--jobs", type=int, default=None)
        if name == "protocol":
            p.add_argument("--protocol", type=str, default=None,
                           choices=["multipartite", "multidimensional"])
            p.add_argument("--rounds", type=int, default=None)
            p.add_argument("--n-pulses", type=int, default=None, dest="n_pulses")
            p.add_argument("--alpha", type=float, default=None)
            p.add_argument("--eta", type=float, default=None)
            p.add_argument("--xi0", type=float, default=None)
            p.add_argument("--xi1", type=float, default=None)
            p.add_argument("--postselect", type=str, default=None,
                           choices=["+", "-"])
            p.add_argument("--script", type=str, default=None)
            p.add_argument("--state", type=str, default=None, dest="state_file")
        if name == "wigner":
            p.add_argument("--alpha", type=float, default=None)
            p.add_argument("--parity", type=str, default=None,
                           choices=["even", "odd"])
            p.add_argument("--mode", type=str, default=None)
            p.add_argument("--state", type=str, default=None, dest="state_file")
            p.add_argument("--extent", type=float, default=None)
            p.add_argument("--points", type=int, default=None)
        if name == "fig4b":
            p.add_argument("--alpha1-sq", type=_parse_float_list, default=None,
                           dest="alpha1_sq_targets")
    return parser


def _merge_config(args: argparse.Namespace) -> tuple:
    """Experiment defaults <- config file <- CLI flags; returns (config, user_set_grid)."""
    cfg = RunConfig(experiment=args.experiment)
    for key, value in _EXPERIMENT_DEFAULTS.get(args.experiment, {}).items():
        setattr(cfg, key, value)
    if args.config is not None:
        file_cfg = RunConfig.from_file(args.config)
        file_doc = json.load(open(args.config, encoding="utf-8"))
        for key in file_doc:
            setattr(cfg, key, getattr(file_cfg, key))
    user_set_grid = False
    known = {f.name for f in dataclasses.fields(RunConfig)}
    for key, value in vars(args).items():
        if key in ("config", "out", "experiment") or value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown option {key!r}")
        setattr(cfg, key, value)
        if key in ("g", "kappa_t"):
            user_set_grid = True
    if args.config is not None and any(
            k in file_doc for k in ("g", "kappa_t")):
        user_set_grid = True
    cfg.experiment = args.experiment
    if args.out is not None:
        cfg.out_dir = args.out
    cfg.validate()
    return cfg, user_set_grid


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg, user_set_grid = _merge_config(args)
        out = Path(cfg.out_dir) / cfg.experiment
        out.mkdir(parents=True, exist_ok=True)
        if cfg.experiment == "fig3":
            record = run_fig3(cfg, out, user_set_grid)
        else:
            record = _RUNNERS[cfg.experiment](cfg, out)
        record.write(out / "record.json")
        print(f"{cfg.experiment}: wrote {len(record.files) + 1} files to {out}")
        return 0
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CutoffError, IntegrationError, RingdownError, BisectionError,
            protocols.ProtocolError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
