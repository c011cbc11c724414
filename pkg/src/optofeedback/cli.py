"""Command-line runner: ``optofeedback KIND --config FILE --out DIR``.

Kinds and their artifacts (all CSV columns at 17 significant digits):

spectrum
    ``spectrum.csv`` (frequency_hz, psd_quanta) and ``weights.json``.
cool-sweep
    ``cool_sweep.csv`` (gamma_fb_ratio, gain_a0_hz, gamma_eff_hz, n_T, n_ba, n_fb, n_m)
    and ``minimum.json``.
asymmetry-sweep
    ``asymmetry_sweep.csv`` (k_eff_hz, gamma_fb_ratio, a_plus, a_minus, total, eta).
calibrate-nadd
    ``calibration.json``.
calibrate-thermometry
    ``thermometry.json`` and ``thermometry_areas.csv`` (g_hz, pull_sigma).
simulate-time
    ``damping.csv`` and ``damping_expected.csv`` (gamma_fb_ratio, phase_rad,
    gamma_eff_hz, occupancy), ``psd.csv`` and ``trajectory.csv`` of the first
    run, ``simulation.json``.
fit-kerr
    ``kerr_fit.json`` and ``asymmetry_curve.csv`` (gain, eta_data, eta_model).
fit
    ``fit.json`` with both sideband Lorentzians and the extracted occupancy.

``optofeedback compare MODEL.csv REFERENCE.csv --rtol X`` prints the
per-column maximum and mean relative deviation.

Every run writes ``manifest.json`` with the resolved configuration, the seed
and the sha256 of each artifact. Exit codes: 0 success, 2 configuration
error, 3 solver error, 4 comparison failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import closed_form, floquet, inference, synthetic, timedomain
from .config import ConfigError, SCHEMA, load_config, required_keys
from .params import FeedbackConfig, hz, to_hz
from .spectrum import SCHEMA_VERSION, Spectrum, _jsonable

KINDS = ("spectrum", "cool-sweep", "asymmetry-sweep", "calibrate-nadd", "calibrate-thermometry",
         "simulate-time", "fit-kerr", "fit")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_COMPARE = 0, 2, 3, 4
MANIFEST = "manifest.json"

SOLVER_ERRORS = (closed_form.InstabilityError, closed_form.NonPhysicalAsymmetryError,
                 floquet.SingularSystemError, floquet.WindowOverlapError, inference.FitError,
                 inference.DegenerateWindowError, inference.IdentifiabilityError,
                 inference.ModelMismatchError, timedomain.LengthError, np.linalg.LinAlgError,
                 ArithmeticError, ValueError)


class SolverError(RuntimeError):
    pass


# ----------------------------------------------------------------- artifacts

class Artifacts:
    """Collects output files; the manifest is written last with their hashes."""

    def __init__(self, out_dir: Path, quiet=False):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.quiet = quiet

    def table(self, name, columns, rows):
        lines = [f"# schema_version: {SCHEMA_VERSION}", f"# manifest: {MANIFEST}",
                 ",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        self._write(name, "\n".join(lines) + "\n")

    def json(self, name, doc):
        doc = {"schema_version": SCHEMA_VERSION, "manifest": MANIFEST, **_jsonable(doc)}
        self._write(name, json.dumps(doc, indent=1, sort_keys=True) + "\n")

    def spectrum(self, name, spec: Spectrum):
        self._write(name, spec.to_csv(manifest=MANIFEST))

    def text(self, name, text):
        self._write(name, text)

    def _write(self, name, text):
        path = self.out / name
        path.write_text(text)
        self.files.append(name)
        if not self.quiet:
            print(f"wrote {path}")

    def manifest(self, kind, seed, config, derived):
        hashes = {name: hashlib.sha256((self.out / name).read_bytes()).hexdigest()
                  for name in self.files}
        doc = {"schema_version": SCHEMA_VERSION, "kind": kind, "seed": seed,
               "config_file": str(config.path) if config.path else None,
               "config": config.resolved(), "derived": derived, "artifacts": hashes}
        text = json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"
        (self.out / MANIFEST).write_text(text)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _map(fn, items):
    """Concurrent map with results in input order."""
    items = list(items)
    if len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=min(len(items), os.cpu_count() or 1)) as pool:
        return list(pool.map(fn, items))


def _ratios(cfg):
    s = cfg.values["sweep"]
    if s["points"] < 1 or not 0 < s["gamma_fb_ratio_min"] <= s["gamma_fb_ratio_max"]:
        raise ConfigError("[sweep] needs points >= 1 and 0 < gamma_fb_ratio_min <= max")
    return np.geomspace(s["gamma_fb_ratio_min"], s["gamma_fb_ratio_max"], s["points"])


# ---------------------------------------------------------------------- kinds

def _problem(ctx, fb=None):
    fb = fb or ctx["fb"]
    budget = closed_form.occupancy_budget(ctx["params"], ctx["tones"].probe, fb)
    image = ctx["cfg"].get("spectrum", "heterodyne_image_noise")
    return floquet.FloquetProblem.from_budget(ctx["params"], ctx["tones"], budget, ctx["kerr"],
                                              heterodyne_image_noise=image)


def run_spectrum(ctx, art):
    cfg = ctx["cfg"]
    problem = _problem(ctx)
    s = cfg.values["spectrum"]
    points = ctx["grid_points"] or s["grid_points"]
    grid = floquet.default_grid(problem, points, s["span_omega_m"], s["peak_points"])
    spec = floquet.output_spectrum(problem, grid)
    w = floquet.sideband_weights(spec, problem)
    cp, cm = w.corrected()
    art.spectrum("spectrum.csv", spec)
    art.json("weights.json", {
        "a_plus": w.a_plus, "a_minus": w.a_minus, "eta": w.eta, "total": w.total,
        "transduction": [w.transduction_plus, w.transduction_minus],
        "detuning": [w.detuning_plus, w.detuning_minus],
        "n_from_asymmetry": closed_form.occupancy_from_asymmetry(cp, cm),
        "n_m_model": problem.mech_occupancy_eff, "content_hash": spec.content_hash()})


def run_cool_sweep(ctx, art):
    params, probe, phase = ctx["params"], ctx["tones"].probe, ctx["fb"].phase_phi
    ratios = _ratios(ctx["cfg"])

    def point(r):
        a0 = closed_form.gain_for_damping(params, probe, r * params.gamma)
        b = closed_form.occupancy_budget(params, probe, FeedbackConfig(a0, phase))
        return (r, to_hz(a0), to_hz(b.gamma_eff), b.n_T, b.n_ba, b.n_fb, b.n_m)

    rows = _map(point, ratios)
    art.table("cool_sweep.csv", ("gamma_fb_ratio", "gain_a0_hz", "gamma_eff_hz", "n_T", "n_ba",
                                 "n_fb", "n_m"), rows)
    a0, best = closed_form.minimum_occupancy(params, probe, phase)
    art.json("minimum.json", {"gain_a0_hz": to_hz(a0), "phase_rad": phase,
                              "gamma_fb_ratio": 4 * probe.g_eff * a0 / math.sqrt(
                                  params.kappa ** 2 + 4 * params.omega_m ** 2) / params.gamma,
                              "n_T": best.n_T, "n_ba": best.n_ba, "n_fb": best.n_fb,
                              "n_m": best.n_m, "gamma_eff_hz": to_hz(best.gamma_eff)})


def run_asymmetry_sweep(ctx, art):
    cfg, params, tones = ctx["cfg"], ctx["params"], ctx["tones"]
    ratios = _ratios(cfg)
    points = ctx["grid_points"] or 1001
    unit = closed_form.gain_for_damping(params, tones.probe, params.gamma)
    template = inference.KerrTemplate(params, tones, unit, ctx["fb"].phase_phi,
                                      cfg.get("kerr", "phase_rad"), points)
    jobs = [(k, r) for k in cfg.get("sweep", "k_eff_hz_list") for r in ratios]

    def point(job):
        k, r = job
        ap, am = floquet.model_weights(template.problem(r, hz(k)), points)
        return (k, r, ap, am, ap + am, (am - ap) / am)

    rows = _map(point, jobs)
    art.table("asymmetry_sweep.csv", ("k_eff_hz", "gamma_fb_ratio", "a_plus", "a_minus", "total",
                                      "eta"), rows)


def _load_spectrum(cfg, path):
    p = cfg.resolve(path)
    if not p.exists():
        raise ConfigError(f"data file not found: {p}")
    return Spectrum.from_json(p) if p.suffix == ".json" else Spectrum.from_csv(p)


def _synthetic(cfg):
    return cfg.get("synthetic", "enabled")


def run_calibrate_nadd(ctx, art):
    cfg, params = ctx["cfg"], ctx["params"]
    c = cfg.values["calibration"]
    detuning = hz(c["detuning_hz"]) if c["detuning_hz"] is not None else None
    if _synthetic(cfg):
        syn = cfg.values["synthetic"]
        couplings = syn["coupling_hz_list"] or list(np.geomspace(10.0, 1e3, 6))
        g_unit = hz(couplings[0])
        powers = [(c_hz / couplings[0]) ** 2 for c_hz in couplings]
        traces = synthetic.nadd_family(params, powers, g_unit, syn["n_add"], syn["gain"],
                                       syn["noise"], detuning=detuning,
                                       points=ctx["grid_points"] or 401, seed=ctx["seed"])
    else:
        pairs = cfg.get("data", "traces")
        if not pairs:
            raise ConfigError("calibrate-nadd needs [data] traces or [synthetic] enabled = true")
        traces = [(p, _load_spectrum(cfg, path)) for p, path in pairs]
    res = inference.calibrate_n_add(traces, params, detuning=detuning,
                                    heating_threshold=c["heating_threshold"])
    doc = json.loads(res.to_json())
    doc["g_shared_hz"] = to_hz(res.g_shared)
    art.json("calibration.json", doc)


def run_calibrate_thermometry(ctx, art):
    cfg, params = ctx["cfg"], ctx["params"]
    c = cfg.values["calibration"]
    detuning = hz(c["detuning_hz"]) if c["detuning_hz"] is not None else None
    g_ref = hz(c["reference_coupling_hz"])
    if _synthetic(cfg):
        syn = cfg.values["synthetic"]
        det = detuning if detuning is not None else hz(cfg.get("tones", "delta_hz"))
        couplings = syn["coupling_hz_list"] or list(np.geomspace(100.0, 1650.0, 6))
        sweep = synthetic.thermometry_sweep(params, [hz(g) for g in couplings], det, syn["gain"],
                                            syn["noise"], points=ctx["grid_points"] or 401,
                                            seed=ctx["seed"])
    else:
        pairs = cfg.get("data", "sweep")
        if not pairs:
            raise ConfigError("calibrate-thermometry needs [data] sweep or [synthetic] enabled")
        sweep = [(hz(g), _load_spectrum(cfg, path)) for g, path in pairs]
    res = inference.calibrate_thermometry(sweep, params, detuning=detuning, g_ref=g_ref)
    art.json("thermometry.json", json.loads(res.to_json()))
    art.table("thermometry_areas.csv", ("g_hz", "pull_sigma"),
              [(to_hz(g), r) for (g, _), r in zip(sweep, res.residuals_sigma)])


def run_simulate_time(ctx, art):
    cfg, params, tones, fb = ctx["cfg"], ctx["params"], ctx["tones"], ctx["fb"]
    s = cfg.values["simulation"]
    ratios = s["gamma_fb_ratios"] or [None]
    offsets = s["phase_offsets_rad"] or [0.0]
    jobs = [(r, d) for r in ratios for d in offsets]

    def one(i_job):
        i, (r, d) = i_job
        a0 = fb.gain_a0 if r is None else closed_form.gain_for_damping(
            params, tones.probe, r * params.gamma)
        f = FeedbackConfig(a0, fb.phase_phi + d, fb.filter_bandwidth)
        sim = timedomain.SimConfig.auto(
            params, tones, f, seed=ctx["seed"] + i, decay_times=s["decay_times"],
            steps_per_period=s["steps_per_period"], scale_q=s["scale_q"],
            adiabatic_cavity=s["adiabatic_cavity"], zero_point=s["zero_point"],
            record_every=s["record_every"])
        res = timedomain.simulate(params, tones, f, sim)
        ratio = closed_form.gamma_fb(params, tones.probe, f) / params.gamma
        return ratio, f.phase_phi, res

    results = [one(j) for j in enumerate(jobs)]
    cols = ("gamma_fb_ratio", "phase_rad", "gamma_eff_hz", "occupancy")
    art.table("damping.csv", cols, [(r, ph, to_hz(res.gamma_eff_fit), res.occupancy)
                                    for r, ph, res in results])
    art.table("damping_expected.csv", cols, [(r, ph, to_hz(res.gamma_eff_expected),
                                              res.occupancy_expected) for r, ph, res in results])
    first = results[0][2]
    if first.spectrum.frequencies.size > 1:
        art.table("psd.csv", ("frequency_hz", "psd_x"),
                  zip(first.spectrum.frequencies / (2 * math.pi), first.spectrum.psd))
    traj = first.trajectory
    step = max(1, traj.t.size // 100_000) if s["record_every"] is None else 1
    art.table("trajectory.csv", ("time_s", "x", "p", "feedback_force"),
              zip(traj.t[::step], traj.x[::step], traj.p[::step], traj.force[::step]))
    art.json("simulation.json", {"runs": [dict(res.summary(), gamma_fb_ratio=r, phase_rad=ph)
                                          for r, ph, res in results]})
    if any(res.unstable for _, _, res in results):
        raise SolverError("time-domain run went unstable; see simulation.json")


def run_fit_kerr(ctx, art):
    cfg, params, tones = ctx["cfg"], ctx["params"], ctx["tones"]
    c = cfg.values["calibration"]
    unit = closed_form.gain_for_damping(params, tones.probe, c["gain_unit_ratio"] * params.gamma)
    template = inference.KerrTemplate(params, tones, unit, ctx["fb"].phase_phi,
                                      cfg.get("kerr", "phase_rad"), ctx["grid_points"] or 1001)
    if _synthetic(cfg):
        syn = cfg.values["synthetic"]
        curve = synthetic.kerr_curve(template, syn["gains"], hz(syn["k_eff_hz"]),
                                     noise=syn["eta_noise"], seed=ctx["seed"])
    else:
        path = cfg.get("data", "asymmetry_curve")
        if not path:
            raise ConfigError("fit-kerr needs [data] asymmetry_curve or [synthetic] enabled")
        curve = _read_curve(cfg.resolve(path))
    k_max = hz(c["k_max_hz"]) if c["k_max_hz"] is not None else None
    fit = inference.fit_kerr(curve, template, k_max, c["fit_gain_scale"])
    doc = json.loads(fit.to_json())
    doc.update(k_eff_hz=to_hz(fit.k_eff), k_eff_stderr_hz=to_hz(fit.stderr))
    art.json("kerr_fit.json", doc)
    gains = [g for g, _ in curve]
    model = template.curve(gains, fit.k_eff, fit.gain_scale)
    art.table("asymmetry_curve.csv", ("gain", "eta_data", "eta_model"),
              [(g, e, m) for (g, e), m in zip(curve, model)])


def _read_curve(path):
    if not Path(path).exists():
        raise ConfigError(f"data file not found: {path}")
    cols, rows = _read_table(path)
    if "gain" not in cols or "eta" not in cols:
        raise ConfigError(f"{path}: asymmetry curve needs columns gain, eta")
    gi, ei = cols.index("gain"), cols.index("eta")
    return [(r[gi], r[ei]) for r in rows]


def run_fit(ctx, art):
    cfg = ctx["cfg"]
    problem = _problem(ctx)
    if _synthetic(cfg):
        s = cfg.values["spectrum"]
        grid = floquet.default_grid(problem, ctx["grid_points"] or s["grid_points"],
                                    s["span_omega_m"], s["peak_points"])
        spec = floquet.output_spectrum(problem, grid)
        noise = cfg.get("synthetic", "noise")
        rng = np.random.Generator(np.random.PCG64(ctx["seed"]))
        spec = Spectrum(spec.frequencies, spec.psd * (1 + noise * rng.standard_normal(len(spec))))
    else:
        path = cfg.get("data", "spectrum")
        if not path:
            raise ConfigError("fit needs [data] spectrum or [synthetic] enabled = true")
        spec = _load_spectrum(cfg, path)
    win_minus, win_plus, _, _ = floquet.sideband_windows(problem)
    fit_p = inference.fit_lorentzian(spec, win_plus, relative=True)
    fit_m = inference.fit_lorentzian(spec, win_minus, relative=True)
    tp, tm = floquet.transduction_correction(problem)
    dp, dm = floquet.detuning_correction(problem)
    est = inference.extract_occupancy(fit_p, fit_m, (tp * dp, tm * dm))
    art.json("fit.json", {"anti_stokes": fit_p.to_dict(), "stokes": fit_m.to_dict(),
                          "corrections": [tp * dp, tm * dm], "n": est.n, "n_stderr": est.stderr,
                          "n_m_model": problem.mech_occupancy_eff})


RUNNERS = {"spectrum": run_spectrum, "cool-sweep": run_cool_sweep,
           "asymmetry-sweep": run_asymmetry_sweep, "calibrate-nadd": run_calibrate_nadd,
           "calibrate-thermometry": run_calibrate_thermometry,
           "simulate-time": run_simulate_time, "fit-kerr": run_fit_kerr, "fit": run_fit}


def run(kind, config_path, out_dir, seed=0, grid_points=None, quiet=False) -> int:
    """Run one experiment kind and write its artifacts; returns the exit code."""
    try:
        cfg = load_config(config_path)
        params = cfg.system()
        tones = cfg.tones()
        fb = cfg.feedback(params, tones)
        kerr = cfg.kerr()
    except ConfigError as exc:
        _err(f"configuration error: {exc}")
        return EXIT_CONFIG
    except ValueError as exc:
        _err(f"configuration error: {exc}")
        return EXIT_CONFIG
    if grid_points is not None and grid_points < 16:
        _err("configuration error: --grid-points must be at least 16")
        return EXIT_CONFIG
    ctx = {"cfg": cfg, "params": params, "tones": tones, "fb": fb, "kerr": kerr,
           "seed": int(seed), "grid_points": grid_points}
    art = Artifacts(out_dir, quiet)
    try:
        RUNNERS[kind](ctx, art)
    except ConfigError as exc:
        _err(f"configuration error: {exc}")
        return EXIT_CONFIG
    except (SolverError,) + SOLVER_ERRORS as exc:
        _err(f"solver error in {kind}: {type(exc).__name__}: {exc}")
        return EXIT_SOLVER
    derived = {"params": params.as_dict(), "tones": {
        "probe": {"detuning": tones.probe.detuning, "g_eff": tones.probe.g_eff},
        "thermometry": {"detuning": tones.thermometry.detuning, "g_eff": tones.thermometry.g_eff}},
        "feedback": {"gain_a0": fb.gain_a0, "phase_phi": fb.phase_phi,
                     "filter_bandwidth": fb.filter_bandwidth},
        "kerr": {"k_eff": kerr.k_eff, "phase": kerr.phase}, "grid_points": grid_points}
    art.manifest(kind, int(seed), cfg, derived)
    return EXIT_OK


# ------------------------------------------------------------------- compare

def _read_table(path):
    cols, rows = None, []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if cols is None:
            cols = parts
            continue
        rows.append([float(p) for p in parts])
    if cols is None:
        raise ValueError(f"{path}: no header row")
    return cols, rows


def compare(model_path, reference_path, rtol=1e-10, atol=0.0, columns=None):
    """Per-column relative deviation of two CSV tables.

    Returns ``(report, ok)``; ``report`` maps each column to its maximum and
    mean of ``|model - ref| / max(|ref|, atol)``.
    """
    mc, mr = _read_table(model_path)
    rc, rr = _read_table(reference_path)
    if mc != rc:
        raise ValueError(f"column mismatch: {mc} vs {rc}")
    if len(mr) != len(rr):
        raise ValueError(f"row count mismatch: {len(mr)} vs {len(rr)}")
    m = np.array(mr, dtype=float).reshape(len(mr), len(mc))
    r = np.array(rr, dtype=float).reshape(len(rr), len(rc))
    report = {}
    for j, name in enumerate(mc):
        if columns and name not in columns:
            continue
        diff = np.abs(m[:, j] - r[:, j])
        denom = np.maximum(np.abs(r[:, j]), atol)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(diff == 0, 0.0, diff / denom)
        report[name] = {"max": float(rel.max()) if rel.size else 0.0,
                        "mean": float(rel.mean()) if rel.size else 0.0}
    ok = all(v["max"] <= rtol for v in report.values())
    return report, ok


def _compare_main(args) -> int:
    try:
        report, ok = compare(args.model, args.reference, args.rtol, args.atol, args.columns)
    except (OSError, ValueError) as exc:
        _err(f"comparison failed: {exc}")
        return EXIT_COMPARE
    if not args.quiet:
        width = max([6] + [len(k) for k in report])
        print(f"{'column':<{width}}  {'max_rel':>12}  {'mean_rel':>12}")
        for name, v in report.items():
            flag = "" if v["max"] <= args.rtol else "  FAIL"
            print(f"{name:<{width}}  {v['max']:12.4e}  {v['mean']:12.4e}{flag}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(
            {"schema_version": SCHEMA_VERSION, "rtol": args.rtol, "ok": ok, "columns": report},
            indent=1, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_COMPARE


# ---------------------------------------------------------------------- main

def _err(msg):
    print(msg, file=sys.stderr)


def _schema_help():
    lines = ["configuration keys (INI sections):"]
    for sec, keys in SCHEMA.items():
        lines.append(f"  [{sec}]")
        for key, (_, default, text) in keys.items():
            lines.append(f"    {key:<26} {text}")
    lines.append("required: " + ", ".join(required_keys()))
    return "\n".join(lines)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="optofeedback", formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Feedback-cooling models, simulations and calibrations.",
        epilog=_schema_help())
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=RUNNERS[kind].__name__.replace("run_", "").replace("_", " "))
        p.add_argument("--config", required=True, help="INI parameter file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("compare", help="relative deviation between two CSV tables")
    p.add_argument("model")
    p.add_argument("reference")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=0.0,
                   help="floor on the reference magnitude in the relative deviation")
    p.add_argument("--columns", nargs="*", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.kind == "compare":
        return _compare_main(args)
    return run(args.kind, args.config, args.out, args.seed, args.grid_points, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
