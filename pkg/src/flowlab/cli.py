"""Configuration-driven experiment runner.

Usage:
    flowlab run <config.ini>
    flowlab plot <output_dir>
    flowlab suite <directory> [--jobs K]

Configs are flat INI files with sections [model], [grid], [curvature],
[flow], [experiment], [output]; validation errors name the offending key
by its dotted path (e.g. "grid.N").  Each run writes run.csv, summary.json
and manifest.json (config hash, code version, seed) into the output
directory; `plot` renders gnuplot-compatible whitespace tables plus PNG
figures next to them.  The FLOWLAB_OUTPUT environment variable overrides
the configured output directory.

Exit codes: 0 success, 1 numerical/experimental failure, 2 usage or
config error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, ambient, arw, stability
from . import curvature as cv
from . import flow as fl
from . import hypersurface as hs
from .errors import ConfigError, FlowlabError

FMT = "%.17g"
SUCCESS_VERDICTS = ("Converged", "HorizonReached")


# ---------------------------------------------------------------------------
# config parsing


def _get(cfg, section, key, cast, default=None, required=False):
    path = f"{section}.{key}"
    if not cfg.has_option(section, key) or cfg.get(section, key).strip() == "":
        if required:
            raise ConfigError(f"missing required field '{path}'", field=path)
        return default
    raw = cfg.get(section, key).strip()
    try:
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"field '{path}' = '{raw}': {exc}", field=path) from exc


def _vector(raw: str):
    return [float(p) for p in raw.replace(",", " ").split()]


def build_model(cfg) -> ambient.AmbientModel:
    label = _get(cfg, "model", "label", str, required=True)
    n = _get(cfg, "model", "n", int, required=True)
    if not 1 <= n <= 3:
        raise ConfigError("model.n must be 1, 2 or 3", field="model.n")
    period = _get(cfg, "grid", "L", float, 1.0)
    t_lo = _get(cfg, "model", "time_lo", float)
    t_hi = _get(cfg, "model", "time_hi", float)

    if label == "minkowski":
        model = ambient.minkowski(n)
    elif label == "de_sitter_conformal":
        model = ambient.de_sitter_conformal(n)
    elif label == "robertson_walker":
        model = ambient.robertson_walker(
            n,
            c0=_get(cfg, "model", "c0", float, 1.0),
            power=_get(cfg, "model", "power", float, 1.0),
        )
    elif label == "arw_power":
        model = ambient.arw_power(
            n,
            omega=_get(cfg, "model", "omega", float, 2.0),
            c0=_get(cfg, "model", "c0", float, 1.0),
            mass=_get(cfg, "model", "mass", float),
            perturbation_eps=_get(cfg, "model", "perturbation_eps", float, 0.0),
            period=period,
            warp_correction=_get(cfg, "model", "warp_correction", float, 0.0),
            warp_correction_power=_get(cfg, "model", "warp_correction_power", float, 3.0),
        )
    elif label == "warped_riemannian":
        model = ambient.warped_riemannian(n, rate=_get(cfg, "model", "rate", float, 0.3))
    elif label == "cosh_de_sitter_like":
        model = ambient.cosh_de_sitter_like(n)
    elif label == "non_einstein_wiggle":
        model = ambient.non_einstein_wiggle(
            n, period=period, eps=_get(cfg, "model", "eps", float, 0.3)
        )
    elif label == "convexity_demo":
        model = ambient.convexity_demo(n)
    else:
        raise ConfigError(f"unknown model label '{label}'", field="model.label")
    if t_lo is not None or t_hi is not None:
        lo, hi = model.time_range
        model.time_range = (t_lo if t_lo is not None else lo,
                            t_hi if t_hi is not None else hi)
    return model


def build_grid(cfg, n) -> hs.SpatialGrid:
    N = _get(cfg, "grid", "N", int, required=True)
    L = _get(cfg, "grid", "L", float, 1.0)
    try:
        return hs.SpatialGrid(n, N, L)
    except ValueError as exc:
        raise ConfigError(f"grid.N: {exc}", field="grid.N") from exc


def build_curvature(cfg) -> cv.CurvatureSpec:
    try:
        return cv.CurvatureSpec(
            kind=_get(cfg, "curvature", "kind", str, "mean"),
            k=_get(cfg, "curvature", "k", int, 1),
            phi=_get(cfg, "curvature", "phi", str, "identity"),
            epsilon=_get(cfg, "curvature", "epsilon", float, 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"curvature: {exc}", field="curvature.kind") from exc


def build_rhs(cfg, period):
    base = _get(cfg, "flow", "f_base", float)
    if base is None:
        return None
    amp = _get(cfg, "flow", "f_amplitude", float, 0.0)
    wave_raw = _get(cfg, "flow", "f_wavevector", str, "1")
    t_coeff = _get(cfg, "flow", "f_t_coeff", float, 0.0)
    if amp == 0.0 and t_coeff == 0.0:
        return fl.constant_rhs(base)
    return fl.harmonic_rhs(base, amp, _vector(wave_raw), period, t_coeff)


def build_flow_config(cfg, model) -> fl.FlowConfig:
    period = _get(cfg, "grid", "L", float, 1.0)
    return fl.FlowConfig(
        model=model,
        curvature=build_curvature(cfg),
        rhs_f=build_rhs(cfg, period),
        mode=_get(cfg, "flow", "mode", str, "generic"),
        dt_safety=_get(cfg, "flow", "dt_safety", float, 0.2),
        t_max=_get(cfg, "flow", "t_max", float, 1.0),
        convergence_tol=_get(cfg, "flow", "tol", float, 1e-8),
        fixed_dt=_get(cfg, "flow", "fixed_dt", float),
        snapshot_every=_get(cfg, "flow", "snapshot_every", int, 1),
    )


def build_initial(cfg, model, grid) -> hs.GraphState:
    u0 = _get(cfg, "experiment", "u0", float, required=True)
    amp = _get(cfg, "experiment", "perturbation_amp", float, 0.0)
    kmax = _get(cfg, "experiment", "perturbation_kmax", int, 2)
    seed = _get(cfg, "experiment", "seed", int, 0)
    u = np.full(grid.shape, u0)
    if amp != 0.0:
        u = u + band_limited_field(grid, amp, kmax, seed)
    return hs.GraphState(grid, u)


def band_limited_field(grid: hs.SpatialGrid, amp: float, kmax: int, seed: int):
    """Reproducible random field from torus harmonics with |k| <= kmax."""
    rng = np.random.default_rng(seed)
    x = grid.coordinates()
    out = np.zeros(grid.shape)
    ranges = [range(-kmax, kmax + 1)] * grid.n
    for kvec in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, grid.n):
        if not kvec.any():
            continue
        weight = rng.normal() / (1.0 + float(kvec @ kvec))
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out += weight * np.cos(
            2.0 * np.pi * np.einsum("...k,k->...", x, kvec.astype(float)) / grid.period
            + phase
        )
    peak = np.abs(out).max()
    return amp * out / peak if peak > 0 else out


# ---------------------------------------------------------------------------
# artifacts


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    rows = len(columns[0])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(FMT % col[i] for col in columns) + "\n")


RUN_CSV_COLUMNS = (
    "t", "dt", "volume", "sup_velocity", "inf_velocity", "max_vtilde",
    "min_kappa", "max_kappa", "residual_g", "residual_h",
)


def write_run_csv(run: fl.FlowRun, path: Path):
    cols = [run.series[k] for k in RUN_CSV_COLUMNS]
    _write_csv(path, list(RUN_CSV_COLUMNS), cols)


def export_geometry_csv(geom, path: Path):
    """Pointwise snapshot: index, u, v, H and the principal curvatures."""
    n = geom.grid.n
    P = geom.grid.npoints
    idx = np.arange(P, dtype=float)
    cols = [idx, geom.state.u.ravel(), geom.v.ravel(), geom.H.ravel()]
    header = ["index", "u", "v", "H"] + [f"kappa_{i+1}" for i in range(n)]
    cols += [geom.kappa[..., i].ravel() for i in range(n)]
    _write_csv(path, header, cols)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def write_summary(outdir: Path, payload: dict):
    with open(outdir / "summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiments


def _run_summary(run: fl.FlowRun) -> dict:
    sign = fl.check_velocity_sign(run)
    return {
        "verdict": run.verdict,
        "failure_detail": run.failure_detail,
        "steps": int(len(run.series["t"])),
        "t_final": float(run.series["t"][-1]),
        "volume_final": float(run.series["volume"][-1]),
        "sup_velocity_final": float(run.series["sup_velocity"][-1]),
        "velocity_sign": sign,
        "max_vtilde": float(np.nanmax(run.series["max_vtilde"])),
        "wall_time_s": run.wall_time,
    }


def _c2_growth_after_quartile(run: fl.FlowRun) -> float:
    c2 = run.series["c2_norm"]
    q = len(c2) // 4
    base = c2[q] if q < len(c2) else c2[-1]
    return float(np.nanmax(c2[q:]) / base - 1.0) if base > 0 else 0.0


def exp_flow_run(ctx) -> dict:
    run = fl.run(ctx["flow_cfg"], ctx["initial"])
    cadence = _get(ctx["cfg"], "flow", "identity_cadence", int)
    if cadence:
        fill_identity_residuals(run, cadence)
    write_run_csv(run, ctx["outdir"] / "run.csv")
    geom = hs.compute_geometry(ctx["model"], run.snapshots[-1][1])
    export_geometry_csv(geom, ctx["outdir"] / "geometry.csv")
    summary = _run_summary(run)
    summary["c2_growth_after_first_quartile"] = _c2_growth_after_quartile(run)
    summary["ok"] = run.verdict in SUCCESS_VERDICTS
    return summary


def fill_identity_residuals(run: fl.FlowRun, cadence: int):
    for idx in range(2, len(run.snapshots) - 2, cadence):
        try:
            res = fl.check_evolution_identities(run, idx)
        except FlowlabError:
            continue
        if idx < len(run.series["residual_g"]):
            run.series["residual_g"][idx] = res["g"]
            run.series["residual_h"][idx] = res["h"]


def exp_imcf(ctx) -> dict:
    cfg = ctx["flow_cfg"]
    if cfg.mode not in ("imcf", "imcf_conformal"):
        cfg.mode = "imcf"
    run = fl.run(cfg, ctx["initial"])
    write_run_csv(run, ctx["outdir"] / "run.csv")
    summary = _run_summary(run)
    diag = fl.imcf_diagnostics(run)
    summary["volume_decay_slope"] = diag["volume_decay_slope"]
    summary["tau_law_max_rel_error"] = diag["tau_law_max_rel_error"]
    # plot-ready series with the exact-decay prediction column
    t = run.series["t"]
    vol = run.series["volume"]
    _write_csv(
        ctx["outdir"] / "volume.csv",
        ["t", "volume", "model_prediction"],
        [t, vol, vol[0] * np.exp(-t)],
    )
    summary["ok"] = run.verdict in SUCCESS_VERDICTS and abs(
        diag["volume_decay_slope"] + 1.0
    ) < 1e-2
    return summary


def exp_stability(ctx) -> dict:
    run = fl.run(ctx["flow_cfg"], ctx["initial"])
    write_run_csv(run, ctx["outdir"] / "run.csv")
    spec = ctx["flow_cfg"].curvature
    report = stability.verify_limit_stability(run, spec, ctx["flow_cfg"].rhs_f)
    summary = _run_summary(run)
    summary["stability"] = {
        "lambda1": report.lambda1,
        "verdict": report.verdict,
        "positive_eta": report.positive_eta,
        "eta_min": float(report.eta.min()) if report.eta.size else None,
        "eta_max": float(report.eta.max()) if report.eta.size else None,
    }
    if report.eta.size:
        _write_csv(
            ctx["outdir"] / "eigenfunction.csv",
            ["index", "eta"],
            [np.arange(report.eta.size, dtype=float), report.eta.ravel()],
        )
    summary["ok"] = run.verdict == "Converged" and report.verdict != "Unstable"
    return summary


def exp_foliate(ctx) -> dict:
    run = fl.run(ctx["flow_cfg"], ctx["initial"])
    if run.verdict != "Converged":
        return {"ok": False, "verdict": run.verdict,
                "detail": "flow did not converge; no foliation base"}
    scale = _get(ctx["cfg"], "experiment", "eps_scale", float, 0.02)
    n_leaves = _get(ctx["cfg"], "experiment", "n_leaves", int, 5)
    eps = [scale * k for k in range(1, n_leaves + 1)]
    eps += [-e for e in eps]
    spec = ctx["flow_cfg"].curvature
    fol = stability.foliate(
        ctx["model"], run.snapshots[-1][1], spec, ctx["flow_cfg"].rhs_f, eps,
        stationarity_tol=1e-5,
    )
    leaves = sorted(fol["leaves"], key=lambda leaf: leaf["eps"])
    ordered = all(
        np.all(leaves[i + 1]["u"] > leaves[i]["u"]) for i in range(len(leaves) - 1)
    )
    _write_csv(
        ctx["outdir"] / "leaves.csv",
        ["eps", "tau", "u_min", "u_max"],
        [
            np.array([leaf["eps"] for leaf in leaves]),
            np.array([leaf["tau"] for leaf in leaves]),
            np.array([leaf["u"].min() for leaf in leaves]),
            np.array([leaf["u"].max() for leaf in leaves]),
        ],
    )
    signs_ok = all(np.sign(leaf["tau"]) == np.sign(leaf["eps"]) for leaf in leaves)
    return {
        "ok": ordered and signs_ok,
        "verdict": run.verdict,
        "lambda1": fol["lambda1"],
        "marginal": fol["marginal"],
        "n_leaves": len(leaves),
        "pointwise_ordered": ordered,
        "tau_signs_match": signs_ok,
    }


def exp_arw_rescaled(ctx) -> dict:
    model = ctx["model"]
    res = arw.run_rescaled_imcf(
        model, ctx["initial"], t_max=ctx["flow_cfg"].t_max,
        fixed_dt=ctx["flow_cfg"].fixed_dt,
        snapshot_every=ctx["flow_cfg"].snapshot_every,
    )
    write_run_csv(res["run"], ctx["outdir"] / "run.csv")
    lim = arw.check_rescaled_metric_limit(res, model)
    umb = arw.check_umbilicity_decay(res)
    states = res["states"]
    t = np.array([s.t for s in states])
    _write_csv(
        ctx["outdir"] / "rescaled.csv",
        ["t", "u_tilde_min", "u_tilde_max", "g_rescaled_00", "target_00",
         "umbilicity_normalized"],
        [
            t,
            np.array([s.u_tilde.min() for s in states]),
            np.array([s.u_tilde.max() for s in states]),
            np.array([s.g_rescaled[..., 0, 0].mean() for s in states]),
            np.array([
                ((model.arw.gamma_tilde * model.arw.mass) ** (1.0 / model.arw.gamma_tilde))
                * ((-s.u_tilde) ** (2.0 / model.arw.gamma_tilde)).mean()
                for s in states
            ]),
            np.array([s.umbilicity_normalized for s in states]),
        ],
    )
    summary = {
        "verdict": res["run"].verdict,
        "u_tilde_band": res["u_tilde_band"],
        "u_tilde_drift_last_quartile": res["u_tilde_drift_last_quartile"],
        "metric_limit_error": lim["limit_error"],
        "umbilicity": umb,
        "ok": res["run"].verdict in SUCCESS_VERDICTS and res["bounds_negative"],
    }
    return summary


def exp_transition(ctx) -> dict:
    model = ctx["model"]
    res = arw.run_rescaled_imcf(
        model, ctx["initial"], t_max=ctx["flow_cfg"].t_max,
        fixed_dt=ctx["flow_cfg"].fixed_dt,
    )
    tf = arw.build_transition_flow(res)
    probe = arw.c3_probe(tf)
    _write_csv(
        ctx["outdir"] / "transition.csv",
        ["s", "y0_mean"],
        [tf.s, tf.y0.reshape(len(tf.s), -1).mean(axis=1)],
    )
    cmc = arw.cmc_foliation_asymptotics(model, ctx["initial"].grid)
    return {
        "c3_order": probe["order_supported"],
        "c3_status": {str(k): v for k, v in probe["status"].items()},
        "c3_mismatch": {str(k): v for k, v in probe["mismatch"].items()},
        "cmc_constant": cmc["limit_estimate"],
        "cmc_drift_last_decade": cmc["drift_last_decade"],
        "ok": probe["order_supported"] >= 3 or probe["status"][3] == "supported",
    }


def exp_identity_suite(ctx) -> dict:
    model = ctx["model"]
    cfg = ctx["cfg"]
    grid_hi = ctx["grid"]
    N_hi = grid_hi.points_per_axis
    if N_hi < 64:
        raise ConfigError("identity_suite needs grid.N >= 64", field="grid.N")
    grid_lo = hs.SpatialGrid(grid_hi.n, N_hi // 2, grid_hi.period)
    amp = _get(cfg, "experiment", "perturbation_amp", float, 0.02)
    kmax = _get(cfg, "experiment", "perturbation_kmax", int, 2)
    seed = _get(cfg, "experiment", "seed", int, 0)
    u0 = _get(cfg, "experiment", "u0", float, required=True)

    out = {}
    residuals = {}
    for grid in (grid_lo, grid_hi):
        u = u0 + band_limited_field(grid, amp, kmax, seed)
        residuals[grid.points_per_axis] = hs.check_gauss_codazzi(
            model, hs.GraphState(grid, u)
        )
    N_lo = grid_lo.points_per_axis
    for key in ("gauss", "codazzi", "weingarten"):
        lo, hi = residuals[N_lo][key], residuals[N_hi][key]
        out[key] = {
            "residual_lo": lo,
            "residual_hi": hi,
            "order": float(np.log2(lo / hi)) if hi > 0 else float("inf"),
        }
    orders = [v["order"] for v in out.values()]
    out["ok"] = bool(min(orders) >= 3.0)
    return out


def exp_decay_check(ctx) -> dict:
    model = ctx["model"]
    grid = ctx["grid"]
    cfg = ctx["cfg"]
    tau0 = _get(cfg, "experiment", "tau0", float, required=True)
    tau1 = _get(cfg, "experiment", "tau1", float, required=True)
    logdet = fl.log_det_relation_residual(model, grid, tau0, tau1)
    c_phi = _get(cfg, "experiment", "phi_coefficient", float, 1.0)
    taus = tau0 * (0.8 ** np.arange(12))
    decay = fl.check_strong_volume_decay(
        model, taus, grid, lambda tau: c_phi / (-tau)
    )
    ps = decay.get("partial_sums")
    return {
        "log_det_residual": logdet,
        "strong_decay": decay,
        "ok": logdet < 1e-8 and decay["verdict"] == "holds"
        and ps is not None and ps[-1] > 1.9 * ps[len(ps) // 2 - 1],
    }


EXPERIMENTS = {
    "flow_run": exp_flow_run,
    "imcf": exp_imcf,
    "stability": exp_stability,
    "foliate": exp_foliate,
    "arw_rescaled": exp_arw_rescaled,
    "transition": exp_transition,
    "identity_suite": exp_identity_suite,
    "decay_check": exp_decay_check,
}


def run_experiment(config_path: str) -> int:
    """Execute one experiment config; returns the process exit code."""
    path = Path(config_path)
    if not path.exists():
        print(f"config error: no such file: {path}", file=sys.stderr)
        return 2
    cfg = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cfg.read(path)
        kind = _get(cfg, "experiment", "kind", str, required=True)
        if kind not in EXPERIMENTS:
            raise ConfigError(
                f"experiment.kind must be one of {sorted(EXPERIMENTS)}",
                field="experiment.kind",
            )
        model = build_model(cfg)
        grid = build_grid(cfg, model.n)
        outdir = Path(
            os.environ.get("FLOWLAB_OUTPUT")
            or _get(cfg, "output", "dir", str, required=True)
        )
        ctx = {"cfg": cfg, "model": model, "grid": grid, "outdir": outdir}
        if kind not in ("identity_suite", "decay_check"):
            ctx["flow_cfg"] = build_flow_config(cfg, model)
            ctx["initial"] = build_initial(cfg, model, grid)
        seed = _get(cfg, "experiment", "seed", int, 0)
    except (ConfigError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir.mkdir(parents=True, exist_ok=True)
    config_hash = hashlib.sha256(path.read_bytes()).hexdigest()
    manifest = {
        "config": str(path),
        "config_sha256": config_hash,
        "code_version": __version__,
        "seed": seed,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    try:
        summary = EXPERIMENTS[kind](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FlowlabError as exc:
        summary = {"ok": False, "error": f"{type(exc).__name__}: {exc}"}
    summary["experiment"] = kind
    summary["config_sha256"] = config_hash
    write_summary(outdir, summary)
    ok = bool(summary.get("ok", False))
    print(f"{kind}: {'ok' if ok else 'FAILED'} -> {outdir}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# plotting


def emit_plotdata(outdir: str) -> int:
    """Whitespace tables (gnuplot-style, '#' headers) plus PNG figures."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    if not outdir.exists():
        print(f"error: no such directory: {outdir}", file=sys.stderr)
        return 1
    plotted = 0
    plots = outdir / "plots"
    for csv_path in sorted(outdir.glob("*.csv")):
        with open(csv_path) as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.size == 0:
            continue
        plots.mkdir(exist_ok=True)
        stem = csv_path.stem
        dat_path = plots / f"{stem}.dat"
        with open(dat_path, "w") as fh:
            fh.write("# " + " ".join(header) + "\n")
            for row in data:
                fh.write(" ".join(FMT % val for val in row) + "\n")

        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        xcol = 0
        positive = True
        for j in range(1, data.shape[1]):
            col = data[:, j]
            finite = np.isfinite(col)
            if not finite.any():
                continue
            ax.plot(data[finite, xcol], col[finite], label=header[j], lw=1.2)
            positive = positive and bool((col[finite] > 0).all())
        ax.set_xlabel(header[xcol])
        if positive and data.shape[1] > 1:
            try:
                ax.set_yscale("log")
            except ValueError:
                pass
        ax.legend(loc="best", fontsize=8)
        ax.set_title(stem)
        fig.tight_layout()
        fig.savefig(plots / f"{stem}.png", dpi=130)
        plt.close(fig)
        plotted += 1
    if plotted == 0:
        print("error: no CSV artifacts found", file=sys.stderr)
        return 1
    print(f"wrote {plotted} tables + figures -> {plots}")
    return 0


def run_suite(directory: str, jobs: int = 1) -> int:
    configs = sorted(Path(directory).glob("*.ini"))
    if not configs:
        print(f"error: no *.ini configs in {directory}", file=sys.stderr)
        return 2
    if jobs <= 1:
        codes = [run_experiment(str(c)) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(run_experiment, [str(c) for c in configs]))
    worst = max(codes)
    print(f"suite: {sum(1 for c in codes if c == 0)}/{len(codes)} succeeded")
    return worst


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="flowlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_plot = sub.add_parser("plot", help="render tables and figures for a run")
    p_plot.add_argument("output_dir")
    p_suite = sub.add_parser("suite", help="run every config in a directory")
    p_suite.add_argument("directory")
    p_suite.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_experiment(args.config)
    if args.command == "plot":
        return emit_plotdata(args.output_dir)
    return run_suite(args.directory, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
