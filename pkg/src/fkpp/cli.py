"""Config-driven experiment runner.

Experiments are described by TOML files with a versioned schema and executed
deterministically: no randomness anywhere (``seed`` fields are rejected), and
identical configs produce byte-identical CSV outputs.  Numeric series are
written as CSV, reports as JSON.

Commands:
    fkpp run <config.toml>
    fkpp sweep <dir-of-configs> --jobs N
    fkpp predict-exponent --r <r>
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import kernels as kmod
from . import spectral as smod
from .front_analysis import (
    delay_log_ratio,
    delay_series,
    fit_log_delay,
    fit_power_delay,
    predicted_exponent,
)
from .local_models import (
    FrParams,
    GompertzParams,
    dump_wave_csv,
    traveling_wave,
    wave_residual,
)
from .solver import (
    Field,
    Grid,
    HeatModel,
    LocalClassicModel,
    LocalFrModel,
    LocalGompertzModel,
    NonlocalModel,
    RunResult,
    SolverConfig,
    SolverReport,
    bump_initial,
    indicator_initial,
    run,
)
from .theory_oracles import (
    conv_bound_check,
    dirichlet_heat_lower,
    fit_supersolution_params,
    harnack_check,
    subsolution_a0,
    subsolution_worst_residual,
    SubsolutionParams,
    supersolution_check,
)

EXPERIMENTS = (
    "delay_sweep",
    "harnack",
    "oracles",
    "spectral",
    "wave",
    "local_gompertz",
)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    schema_version: int = SCHEMA_VERSION
    model: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    harnack: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)
    spectral: dict = field(default_factory=dict)
    wave: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}"
            )
        for section_name in ("model", "numerics", "fit", "checks", "output",
                             "source", "harnack", "oracles", "spectral", "wave"):
            section = getattr(self, section_name)
            for key in section:
                if "seed" in key.lower():
                    raise ConfigError(
                        f"field {section_name}.{key}: seeds are rejected; "
                        "every experiment is deterministic"
                    )

    @property
    def out_dir(self) -> Path:
        d = self.output.get("dir")
        if d is None:
            raise ConfigError("missing required field output.dir")
        return Path(d)


_SECTIONS = ("model", "numerics", "fit", "checks", "output", "source",
             "harnack", "oracles", "spectral", "wave")


def parse_config_text(text: str) -> ExperimentConfig:
    data = tomllib.loads(text)
    if "experiment" not in data:
        raise ConfigError("missing required field experiment")
    known = set(_SECTIONS) | {"experiment", "schema_version"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown top-level field {key!r}")
    kwargs = {k: data[k] for k in _SECTIONS if k in data}
    return ExperimentConfig(
        experiment=data["experiment"],
        schema_version=data.get("schema_version", SCHEMA_VERSION),
        **kwargs,
    )


def parse_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"schema_version = {cfg.schema_version}",
             f"experiment = {json.dumps(cfg.experiment)}"]
    for name in _SECTIONS:
        section = getattr(cfg, name)
        if not section:
            continue
        lines.append("")
        lines.append(f"[{name}]")
        for k in sorted(section):
            lines.append(f"{k} = {_toml_scalar(section[k])}")
    return "\n".join(lines) + "\n"


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    checks: list
    files: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# --- helpers -------------------------------------------------------------------


def _require(section: dict, key: str, section_name: str):
    if key not in section:
        raise ConfigError(f"missing required field {section_name}.{key}")
    return section[key]


def _csv_write(path: Path, header: str, columns) -> None:
    cols = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def build_model(model_cfg: dict, dx: float, experiment: str):
    kind = _require(model_cfg, "kind", "model")
    if kind == "nonlocal":
        r = float(_require(model_cfg, "r", "model"))
        cutoff = float(model_cfg.get("kernel_cutoff", 2000.0))
        spec = kmod.KernelSpec(r=r, half_width=cutoff, dx=dx)
        return NonlocalModel(kmod.make_algebraic_kernel(spec))
    if kind == "local_classic":
        return LocalClassicModel()
    if kind == "local_fr":
        r = float(_require(model_cfg, "r", "model"))
        return LocalFrModel(FrParams(r=r))
    if kind == "local_gompertz":
        r = float(_require(model_cfg, "r", "model"))
        return LocalGompertzModel(GompertzParams(
            theta_g=float(model_cfg.get("theta_g", 1.0)),
            A_g=float(model_cfg.get("A_g", 1.0)),
            r=r,
        ))
    if kind == "heat":
        return HeatModel()
    raise ConfigError(f"unknown model.kind {kind!r}")


def build_solver_config(cfg: ExperimentConfig):
    num = cfg.numerics
    dx = float(num.get("dx", 0.05))
    model = build_model(cfg.model, dx, cfg.experiment)
    solver_cfg = SolverConfig(
        model=model,
        dx=dx,
        dt=float(num.get("dt", 0.02)),
        t_end=float(_require(num, "t_end", "numerics")),
        x_left=float(num["x_left"]) if "x_left" in num else None,
        width=float(num.get("width", 800.0)),
        window_margin=float(num.get("window_margin", 450.0)),
        left_keep=float(num.get("left_keep", 300.0)),
        shift_chunk=float(num.get("shift_chunk", 25.0)),
        front_level=float(num.get("front_level", 0.1)),
        trace_every=float(num.get("trace_every", 0.5)),
        snapshot_every=float(num.get("snapshot_every", 20.0)),
        left_bc=num.get("left_bc"),
        shift_plateau_tol=(float(num["shift_plateau_tol"])
                           if "shift_plateau_tol" in num else None),
    )
    kind = cfg.model.get("kind")
    if "u0_amplitude" in num:
        amp = float(num["u0_amplitude"])
    elif kind == "local_fr":
        amp = float(np.exp(-1.0))
    elif kind == "local_gompertz":
        amp = GompertzParams(
            theta_g=float(cfg.model.get("theta_g", 1.0)),
            A_g=float(cfg.model.get("A_g", 1.0)),
            r=float(cfg.model.get("r", 2.0)),
        ).Theta_g
    else:
        amp = 1.0
    if num.get("u0", "indicator") == "indicator":
        u0 = indicator_initial(x0=float(num.get("u0_x0", 0.0)), amplitude=amp)
    else:
        u0 = bump_initial(center=float(num.get("u0_center", 0.0)),
                          half_width=float(num.get("u0_half_width", 10.0)),
                          amplitude=amp)
    return solver_cfg, u0


def save_run(out: Path, result: RunResult, solver_cfg: SolverConfig,
             cfg: ExperimentConfig) -> list:
    """Persist a run: trace/sup CSV, report JSON, snapshots as .npy arrays."""
    files = []
    t, d = delay_series(result.trace)
    _csv_write(out / "trace.csv", "t,X,d",
               (result.trace.times, result.trace.positions, d))
    files.append(out / "trace.csv")
    _csv_write(out / "sup_series.csv", "t,sup",
               (result.report.sup_times, result.report.sup_values))
    files.append(out / "sup_series.csv")
    rep = result.report
    report = {
        "M_report": rep.M_report,
        "min_value": rep.min_value,
        "step_count": rep.step_count,
        "shift_log": [[float(a), float(b)] for a, b in rep.shift_log],
        "stability_flags": rep.stability_flags,
        "front_level": result.trace.level,
        "model": cfg.model,
    }
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    files.append(out / "report.json")
    if cfg.output.get("snapshots_npy", True):
        snaps = result.snapshots
        values = np.stack([f.values for f in snaps])
        meta = np.array([[f.t, f.grid.x_left, f.grid.dx, f.grid.frame_shift,
                          f.left_plateau, f.right_value] for f in snaps])
        np.save(out / "snapshot_values.npy", values)
        np.save(out / "snapshot_meta.npy", meta)
        np.save(out / "sup_series.npy",
                np.vstack([rep.sup_times, rep.sup_values]))
        files += [out / "snapshot_values.npy", out / "snapshot_meta.npy",
                  out / "sup_series.npy"]
    if cfg.output.get("snapshots_csv", False):
        for f in result.snapshots:
            p = out / f"snapshot_t{f.t:.6g}.csv"
            _csv_write(p, "t,x_lab,u",
                       (np.full(f.grid.n, f.t), f.grid.positions, f.values))
            files.append(p)
    return files


def load_run(run_dir: Path):
    """Rebuild (snapshots, report-lite) from a saved run directory."""
    values = np.load(run_dir / "snapshot_values.npy")
    meta = np.load(run_dir / "snapshot_meta.npy")
    sup = np.load(run_dir / "sup_series.npy")
    report_data = json.loads((run_dir / "report.json").read_text())
    snapshots = []
    for row, vals in zip(meta, values):
        t, x_left, dx, frame_shift, lp, rv = row
        grid = Grid(x_left=float(x_left), dx=float(dx), n=vals.size,
                    frame_shift=float(frame_shift))
        snapshots.append(Field(t=float(t), grid=grid, values=vals,
                               left_plateau=float(lp), right_value=float(rv)))
    report = SolverReport(
        M_report=float(report_data["M_report"]),
        min_value=float(report_data["min_value"]),
        step_count=int(report_data["step_count"]),
        shift_log=[tuple(x) for x in report_data["shift_log"]],
        stability_flags=report_data["stability_flags"],
        sup_times=sup[0],
        sup_values=sup[1],
    )
    trace = np.loadtxt(run_dir / "trace.csv", delimiter=",", skiprows=1)
    return snapshots, report, trace, report_data


# --- experiments -----------------------------------------------------------------


def _range_check(name: str, value: float, rng) -> CheckResult:
    lo, hi = float(rng[0]), float(rng[1])
    ok = lo <= value <= hi
    return CheckResult(name, ok, f"value={value:.6g} range=[{lo:g}, {hi:g}]")


def run_delay_sweep(cfg: ExperimentConfig, out: Path) -> ExperimentResult:
    solver_cfg, u0 = build_solver_config(cfg)
    result = run(solver_cfg, u0)
    files = save_run(out, result, solver_cfg, cfg)
    if isinstance(solver_cfg.model, NonlocalModel) and cfg.output.get("kernel_csv"):
        kmod.dump_kernel_csv(solver_cfg.model.kernel, out / "kernel.csv")
        files.append(out / "kernel.csv")
    t, d = delay_series(result.trace)
    window = tuple(cfg.fit.get("window", (solver_cfg.t_end / 4.0, solver_cfg.t_end)))
    fit_model = cfg.fit.get("model", "power")
    checks = []
    fit_payload = {"window": list(window), "model": fit_model}
    fitted = None
    if fit_model == "power":
        fit = fit_power_delay(t, d, window)
        fit_payload.update(exponent=fit.exponent, offset=fit.offset,
                           rms_residual=fit.rms_residual)
        fitted = fit
        if "r" in cfg.model:
            beta, gamma = predicted_exponent(float(cfg.model["r"]))
            fit_payload.update(predicted_exponent=beta, gamma=gamma)
        if "exponent_range" in cfg.checks:
            checks.append(_range_check("delay_exponent", fit.exponent,
                                       cfg.checks["exponent_range"]))
    elif fit_model == "log":
        fit = fit_log_delay(t, d, window)
        fit_payload.update(coefficient=fit.coefficient, offset=fit.offset,
                           rms_residual=fit.rms_residual)
        fitted = fit
        if "coefficient_range" in cfg.checks:
            checks.append(_range_check("log_coefficient", fit.coefficient,
                                       cfg.checks["coefficient_range"]))
    elif fit_model == "log_ratio":
        lo, hi = delay_log_ratio(t, d, window)
        fit_payload.update(ratio_min=lo, ratio_max=hi)
        if "ratio_range" in cfg.checks:
            rng = cfg.checks["ratio_range"]
            ok = float(rng[0]) <= lo and hi <= float(rng[1])
            checks.append(CheckResult(
                "delay_log_ratio", ok,
                f"range=[{lo:.4g}, {hi:.4g}] allowed=[{rng[0]:g}, {rng[1]:g}]"))
    else:
        raise ConfigError(f"unknown fit.model {fit_model!r}")
    if "model_selection" in cfg.checks and cfg.checks["model_selection"]:
        pf = fit_power_delay(t, d, window)
        lf = fit_log_delay(t, d, window)
        ok = lf.rms_residual < pf.rms_residual
        checks.append(CheckResult(
            "log_model_preferred", ok,
            f"log_rms={lf.rms_residual:.4g} power_rms={pf.rms_residual:.4g}"))
        fit_payload.update(log_rms=lf.rms_residual, power_rms=pf.rms_residual)
    if "M_max" in cfg.checks:
        ok = result.report.M_report < float(cfg.checks["M_max"])
        checks.append(CheckResult(
            "sup_norm_bounded", ok,
            f"M_report={result.report.M_report:.6g} max={cfg.checks['M_max']:g}"))
    (out / "delay_fit.json").write_text(json.dumps(fit_payload, indent=1,
                                                   sort_keys=True))
    files.append(out / "delay_fit.json")
    if fitted is not None:
        mask = (t >= window[0]) & (t <= window[1])
        _csv_write(out / "plot_data.csv", "t,d,fitted_d",
                   (t[mask], d[mask], fitted.predict(t[mask])))
        files.append(out / "plot_data.csv")
    return ExperimentResult(config=cfg, checks=checks, files=files)


def _source_run(cfg: ExperimentConfig, out: Path):
    """Snapshots for post-processing: from source.run_dir or an inline solve."""
    if "run_dir" in cfg.source:
        return load_run(Path(cfg.source["run_dir"]))
    solver_cfg, u0 = build_solver_config(cfg)
    result = run(solver_cfg, u0)
    t, d = delay_series(result.trace)
    trace = np.vstack([result.trace.times, result.trace.positions, d]).T
    report_data = {"model": cfg.model, "front_level": result.trace.level}
    return result.snapshots, result.report, trace, report_data


def run_harnack(cfg: ExperimentConfig, out: Path) -> ExperimentResult:
    snapshots, report, trace, report_data = _source_run(cfg, out)
    h = cfg.harnack
    p_values = [float(p) for p in h.get("p_values", (1.5, 2.0, 4.0))]
    model_kind = report_data["model"].get("kind")
    if model_kind == "heat":
        c_bound = 0.0
        anchor = "middle"
    elif model_kind == "nonlocal":
        r = float(report_data["model"]["r"])
        cutoff = float(report_data["model"].get("kernel_cutoff", 2000.0))
        dx = snapshots[0].grid.dx
        kernel = kmod.make_algebraic_kernel(
            kmod.KernelSpec(r=r, half_width=cutoff, dx=dx))
        conv_ws = kmod.FftConvolver(kernel, snapshots[0].grid.n)
        c_bound = 0.0
        for f in snapshots[:: max(1, len(snapshots) // 40)]:
            conv = conv_ws.apply(f.values, f.left_plateau, f.right_value)
            c_bound = max(c_bound, float(np.max(np.abs(1.0 - conv))))
        anchor = "front"
    else:
        raise ConfigError(
            f"harnack experiment needs a heat or nonlocal source, got {model_kind}")
    times = [float(x) for x in _require(h, "T_values", "harnack")]
    x_offsets = np.asarray(h.get("x_offsets", np.arange(-12.0, 12.5, 1.0)), float)
    y_offsets = np.asarray(h.get("y_offsets",
                                 (-8.0, -4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0, 8.0)),
                           float)
    lookbacks = np.asarray(h.get("lookbacks", (0.25, 0.5, 1.0, 2.0)), float)
    payload = {"c_bound": c_bound, "p": {}}
    checks = []
    for p in p_values:
        rep = harnack_check(snapshots, report, p, times, x_offsets, y_offsets,
                            lookbacks, c_bound, anchor=anchor,
                            front_level=float(report_data.get("front_level", 0.1)))
        payload["p"][str(p)] = {
            "fitted_C": rep.fitted_C,
            "beta": rep.params.beta,
            "alpha": rep.params.alpha,
            "n_samples": rep.n_samples,
            "n_excluded": rep.n_excluded,
            "per_time_C": rep.per_time_C,
        }
        checks.append(CheckResult(
            f"harnack_p{p:g}", rep.passed and rep.n_samples >= int(h.get("min_samples", 1000)),
            f"C={rep.fitted_C:.6g} samples={rep.n_samples} excluded={rep.n_excluded}"))
    (out / "harnack.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    return ExperimentResult(config=cfg, checks=checks, files=[out / "harnack.json"])


def run_oracles(cfg: ExperimentConfig, out: Path) -> ExperimentResult:
    o = cfg.oracles
    checks = []
    payload = {}
    files = []
    which = o.get("include", ("conv_bound", "supersolution", "subsolution",
                              "dirichlet_heat"))
    if "conv_bound" in which or "supersolution" in which:
        snapshots, report, trace, report_data = _source_run(cfg, out)
        r = float(report_data["model"]["r"])
        dx = snapshots[0].grid.dx
        cutoff = float(report_data["model"].get("kernel_cutoff", 2000.0))
        kernel = kmod.make_algebraic_kernel(
            kmod.KernelSpec(r=r, half_width=cutoff, dx=dx))
    if "conv_bound" in which:
        times = [float(x) for x in o.get("conv_times", (100.0, 300.0, 1000.0))]
        M = report.M_report + 1.0
        cs = {}
        for tq in times:
            f = min(snapshots, key=lambda s: abs(s.t - tq))
            rep = conv_bound_check(f, kernel, M)
            cs[str(tq)] = rep.fitted_C_conv
        spread = max(cs.values()) / min(cs.values())
        payload["conv_bound"] = {"C_conv": cs, "spread": spread, "M": M}
        checks.append(CheckResult(
            "conv_bound_stable", spread < float(o.get("conv_spread_max", 2.0)),
            f"C_conv spread={spread:.4g} over t={times}"))
    if "supersolution" in which:
        T = float(o.get("super_T", 500.0))
        params = fit_supersolution_params(
            snapshots, report, trace[:, 0], trace[:, 2], r, T)
        rep = supersolution_check(snapshots, report, params, r)
        payload["supersolution"] = {
            "B": params.B, "c_phi": params.c_phi, "C_phi": params.C_phi,
            "delta_phi": params.delta_phi, "gamma": params.gamma, "T": params.T,
            "n_points": rep.n_points, "n_violations": rep.n_violations,
            "fraction_dominated": rep.fraction_dominated,
            "max_identity_residual": rep.max_identity_residual,
            "left_edge_ok": rep.left_edge_ok, "right_edge_ok": rep.right_edge_ok,
            "initial_slice_ok": rep.initial_slice_ok,
        }
        ok = (rep.fraction_dominated >= float(o.get("dominated_min", 0.999))
              and rep.left_edge_ok and rep.right_edge_ok and rep.initial_slice_ok
              and rep.max_identity_residual < 1e-10)
        checks.append(CheckResult(
            "supersolution_domination", ok,
            f"dominated={rep.fraction_dominated:.6f} "
            f"identity_residual={rep.max_identity_residual:.2e}"))
        if rep.violation_distances.size:
            _csv_write(out / "supersolution_violations.csv",
                       "distance_from_left_edge", (rep.violation_distances,))
            files.append(out / "supersolution_violations.csv")
    if "subsolution" in which:
        gammas = [float(g) for g in o.get("gammas", (0.55, 2.0 / 3.0, 0.8))]
        t_samples = np.linspace(0.0, 100.0, int(o.get("n_t", 200)))
        xi_samples = np.linspace(0.0, 50.0, int(o.get("n_xi", 200)) + 1)[1:]
        sub_payload = {}
        ok_all = True
        for g in gammas:
            a0 = subsolution_a0(g)
            worst_at, _ = subsolution_worst_residual(
                SubsolutionParams(gamma=g, a=a0), t_samples, xi_samples)
            worst_half, _ = subsolution_worst_residual(
                SubsolutionParams(gamma=g, a=0.5 * a0), t_samples, xi_samples)
            sub_payload[f"{g:.6g}"] = {"a0": a0, "worst_at_a0": worst_at,
                                       "worst_at_half_a0": worst_half}
            ok_all = ok_all and worst_at <= 1e-10 and worst_half > 0.0
        payload["subsolution"] = sub_payload
        checks.append(CheckResult(
            "subsolution_dichotomy", ok_all,
            f"gammas={gammas}: residual<=1e-10 at a0 and positive witness at a0/2"))
    if "dirichlet_heat" in which:
        g = float(o.get("dirichlet_gamma", 2.0 / 3.0))
        from .theory_oracles import images_barrier

        barrier = images_barrier(g)
        offsets = np.linspace(1.0, 10.0, 46)
        rep = dirichlet_heat_lower(g, delta_w=float(o.get("delta_w", 1.0)),
                                   x_w=float(o.get("x_w", barrier + 2.0)),
                                   offsets=offsets)
        payload["dirichlet_heat"] = {
            "barrier": rep.barrier, "fitted_C": rep.fitted_C,
            "single_constant_valid": rep.single_constant_valid,
        }
        checks.append(CheckResult(
            "dirichlet_heat_lower", rep.single_constant_valid,
            f"C={rep.fitted_C:.6g} over offsets [1, 10]"))
        _csv_write(out / "dirichlet_margins.csv",
                   "offset,numeric,image_bound,gaussian_envelope",
                   (rep.check_offsets, rep.numeric_values, rep.image_values,
                    rep.gaussian_envelope))
        files.append(out / "dirichlet_margins.csv")
    (out / "oracles.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    files.append(out / "oracles.json")
    return ExperimentResult(config=cfg, checks=checks, files=files)


def run_spectral(cfg: ExperimentConfig, out: Path) -> ExperimentResult:
    sp = cfg.spectral
    eps_list = [float(e) for e in sp.get("eps_list", (0.4, 0.2, 0.1, 0.05))]
    Y = float(sp.get("Y", 40.0))
    dy = float(sp.get("dy", 1e-3))
    results = smod.eigen_sweep([0.0] + eps_list, Y=Y, dy=dy)
    base, rest = results[0], results[1:]
    _csv_write(out / "eigen_sweep.csv", "epsilon,lambda,mu",
               ([r.epsilon for r in results],
                [r.lambda_eps for r in results],
                [r.mu_eps for r in results]))
    psi_ref = smod.psi_exact(base.y)
    psi_err = float(np.sqrt(np.sum((base.psi_eps - psi_ref) ** 2) * base.dy))
    lam = [r.lambda_eps for r in rest]
    decreasing = all(a > b for a, b in zip(lam, lam[1:])) if eps_list == sorted(
        eps_list, reverse=True) else all(a < b for a, b in zip(lam, lam[1:]))
    checks = [
        CheckResult("lambda0_zero", abs(base.lambda_eps) < 1e-4,
                    f"lambda(0)={base.lambda_eps:.3e}"),
        CheckResult("psi_matches_exact", psi_err < 1e-3,
                    f"L2 err={psi_err:.3e}"),
        CheckResult("mu0_is_one", abs(base.mu_eps - 1.0) < 1e-3,
                    f"mu(0)={base.mu_eps:.6f}"),
        CheckResult("lambda_positive_monotone",
                    all(v > 0 for v in lam) and decreasing,
                    f"lambda={lam}"),
        CheckResult("mu_above_half", all(r.mu_eps > 0.5 for r in results),
                    f"mu={[r.mu_eps for r in results]}"),
    ]
    payload = {
        "eps": [r.epsilon for r in results],
        "lambda": [r.lambda_eps for r in results],
        "mu": [r.mu_eps for r in results],
        "psi_err_at_0": psi_err,
    }
    if sp.get("evolution", True):
        def bump(y):
            outp = np.zeros_like(y)
            m = (y > 1.0) & (y < 3.0)
            outp[m] = np.exp(-1.0 / np.maximum((y[m] - 1.0) * (3.0 - y[m]), 1e-12))
            return outp

        cons = smod.evolve_selfsimilar(
            bump, smod.DecayingDrift(epsilon=0.0, gamma=0.4),
            tau_end=float(sp.get("tau_end", 10.0)), dtau=2e-3, Y=Y, dy=1e-3)
        drift_cons = float(np.max(np.abs(cons.projection - cons.projection[0])))
        checks.append(CheckResult("projection_conserved_eps0",
                                  drift_cons < 1e-6,
                                  f"max drift={drift_cons:.3e}"))
        _csv_write(out / "evolution_eps0.csv", "tau,projection,orth_norm",
                   (cons.taus, cons.projection, cons.orth_norm))
        eps_test = float(sp.get("evolution_eps", 0.1))
        op = smod.make_operator(eps_test, Y=Y, dy=2e-3)
        mode = smod.principal_eigs(op)
        ev = smod.evolve_selfsimilar(
            bump, smod.ConstantDrift(epsilon=eps_test), tau_end=5.0,
            dtau=1e-3, Y=Y, dy=2e-3, mode=mode)
        pred = ev.projection[0] * np.exp(-mode.lambda_eps * ev.taus)
        rel = float(np.max(np.abs(ev.projection - pred) / np.abs(pred)))
        checks.append(CheckResult("projection_decay_matches_lambda",
                                  rel < 0.01, f"max rel dev={rel:.3e}"))
        _csv_write(out / "evolution_drifted.csv", "tau,projection,orth_norm",
                   (ev.taus, ev.projection, ev.orth_norm))
        payload["conservation_drift"] = drift_cons
        payload["decay_rel_dev"] = rel
    (out / "spectral.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    return ExperimentResult(config=cfg, checks=checks,
                            files=[out / "eigen_sweep.csv", out / "spectral.json"])


def run_wave(cfg: ExperimentConfig, out: Path) -> ExperimentResult:
    w = cfg.wave
    wave = traveling_wave(
        A_V=float(w.get("A_V", 1.0)),
        M=float(w.get("M", 1.0)),
        r=float(w.get("r", 4.0)),
        xi_min=float(w.get("xi_min", -12.0)),
        xi_max=float(w.get("xi_max", 30.0)),
    )
    dump_wave_csv(wave, out / "wave.csv")
    res = wave_residual(wave)
    far = (wave.xi_grid >= 10.0) & (wave.xi_grid <= 25.0)
    ratio = wave.profile[far] / (wave.xi_grid[far] * np.exp(-wave.xi_grid[far]))
    variation = float(ratio.max() / ratio.min() - 1.0)
    left_err = abs(wave.left_limit_estimate - wave.left_limit) / wave.left_limit
    payload = {
        "kappa": wave.kappa,
        "residual_sup": float(np.max(np.abs(res))),
        "far_field_variation": variation,
        "left_limit": wave.left_limit,
        "left_limit_estimate": wave.left_limit_estimate,
        "closest_plateau_gap": wave.closest_plateau_gap,
    }
    checks = [
        CheckResult("wave_residual", payload["residual_sup"] < 1e-6,
                    f"sup={payload['residual_sup']:.3e}"),
        CheckResult("wave_far_field", variation < 0.10,
                    f"variation={variation:.4f} kappa={wave.kappa:.6g}"),
        CheckResult("wave_left_limit", left_err < 1e-4,
                    f"rel err={left_err:.3e}"),
        CheckResult("wave_monotone",
                    bool(np.all(np.diff(wave.profile) <= 1e-15)), "nonincreasing"),
    ]
    (out / "wave.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    return ExperimentResult(config=cfg, checks=checks,
                            files=[out / "wave.csv", out / "wave.json"])


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute one experiment; writes artifacts and prints PASS/FAIL lines."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.experiment in ("delay_sweep", "local_gompertz"):
        if cfg.experiment == "local_gompertz":
            if cfg.model.get("kind", "local_gompertz") != "local_gompertz":
                raise ConfigError(
                    "local_gompertz experiment requires model.kind=local_gompertz")
            cfg = ExperimentConfig(
                experiment="delay_sweep",
                schema_version=cfg.schema_version,
                model={**cfg.model, "kind": "local_gompertz"},
                numerics=cfg.numerics, fit=cfg.fit, checks=cfg.checks,
                output=cfg.output, source=cfg.source)
        result = run_delay_sweep(cfg, out)
    elif cfg.experiment == "harnack":
        result = run_harnack(cfg, out)
    elif cfg.experiment == "oracles":
        result = run_oracles(cfg, out)
    elif cfg.experiment == "spectral":
        result = run_spectral(cfg, out)
    elif cfg.experiment == "wave":
        result = run_wave(cfg, out)
    else:  # pragma: no cover - guarded by ExperimentConfig
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    summary = {
        "experiment": cfg.experiment,
        "passed": result.passed,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in result.checks],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True))
    return result


def _sweep_worker(path_str: str):
    cfg = parse_config(path_str)
    result = run_experiment(cfg)
    return path_str, result.passed, [(c.name, c.passed, c.detail)
                                     for c in result.checks]


def sweep(config_paths, jobs: int = 1):
    """Run independent experiment configs, up to ``jobs`` concurrently."""
    paths = [str(p) for p in config_paths]
    out_dirs = [str(parse_config(p).out_dir) for p in paths]
    if len(set(out_dirs)) != len(out_dirs):
        raise ConfigError("sweep configs must use distinct output directories")
    rows = []
    if jobs <= 1 or len(paths) <= 1:
        for p in paths:
            rows.append(_sweep_worker(p))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for row in pool.map(_sweep_worker, paths):
                rows.append(row)
    rows.sort(key=lambda r: r[0])
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fkpp",
        description="Deterministic experiment runner for Fisher-KPP front delays",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", type=Path)
    p_sweep = sub.add_parser("sweep", help="run every config in a directory")
    p_sweep.add_argument("config_dir", type=Path)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_pred = sub.add_parser("predict-exponent",
                            help="print the predicted delay exponent for r")
    p_pred.add_argument("--r", type=float, required=True)
    args = parser.parse_args(argv)

    if args.command == "predict-exponent":
        beta, gamma = predicted_exponent(args.r)
        print(f"r={args.r:g} beta={beta:.10g} gamma={gamma:.10g}")
        return 0
    if args.command == "run":
        try:
            cfg = parse_config(args.config)
            result = run_experiment(cfg)
        except (ConfigError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0 if result.passed else 1
    if args.command == "sweep":
        configs = sorted(Path(args.config_dir).glob("*.toml"))
        if not configs:
            print("sweep: no configs found; nothing to do")
            return 0
        try:
            rows = sweep(configs, jobs=args.jobs)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        all_ok = True
        for path, ok, checks in rows:
            all_ok = all_ok and ok
            print(f"{'PASS' if ok else 'FAIL'} {path}")
        return 0 if all_ok else 1
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
