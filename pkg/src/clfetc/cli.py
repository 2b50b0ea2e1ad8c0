"""Command-line front end.

Subcommands: ``simulate``, ``verify``, ``dwell``, ``sweep`` and
``stats <traj.csv>``.  Experiments are described by JSON configs (shipped
presets can be named instead of a path); artifacts are CSV trajectories,
JSON reports and optional SVG plots.  Exit codes: 0 success, 1 assumption or
configuration failure, 2 runtime termination anomaly (Zeno abort, blow-up,
event cap).
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np
from jsonschema import Draft202012Validator

from . import dwell as dwellmod
from . import svgplot
from .certificates import (bound_sublevel_box, estimate_big_m, estimate_constants,
                           estimate_kappa, estimate_nu, estimate_rho,
                           sample_in_region)
from .core import verify_clf_pointwise
from .dwell import DwellInputs, admissible_period, tau_min_over_sublevel
from .engine import (IntegratorConfig, check_rate_certificate, run_closed_loop,
                     run_stats, read_event_times_csv, stats_from_event_times,
                     write_trajectory_csv)
from .errors import (ConfigurationError, DomainError, NonDegeneracyError,
                     PropernessError)
from .models import MODEL_NAMES, build_model, zeno_first_event_bound
from .triggers import (EventTriggered, PeriodicEventTriggered, SelfTriggered,
                       TimeTriggered)

ANOMALOUS_TERMINATIONS = ("zeno_abort", "blowup", "event_cap")

_POLICY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["policy"],
    "properties": {
        "policy": {"enum": ["event", "self", "time", "periodic-event"]},
        "sigma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "sigma_tilde": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "K": {"type": "number", "exclusiveMinimum": 1},
        "h": {"type": "number", "exclusiveMinimum": 0},
        "period": {"type": "number", "exclusiveMinimum": 0},
        "instants": {"type": "array", "items": {"type": "number"}},
        "tau": {"type": "number", "exclusiveMinimum": 0},
    },
}

_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": list(MODEL_NAMES)},
                "params": {"type": "object"},
            },
        },
        "policy": _POLICY_SCHEMA,
        "x0": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "abs_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_step": {"type": "number", "exclusiveMinimum": 0},
                "event_time_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_events": {"type": "integer", "minimum": 1},
                "zeno_floor": {"type": "number", "exclusiveMinimum": 0},
                "output_points": {"type": "integer", "minimum": 2},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "region_level": {"type": "number", "exclusiveMinimum": 0},
        "estimation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_samples": {"type": "integer", "minimum": 2},
                "safety_factor": {"type": "number", "minimum": 1},
                "n_anchors": {"type": "integer", "minimum": 1},
                "n_clf_samples": {"type": "integer", "minimum": 1},
                "global_constants_declared": {"type": "boolean"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["axis", "values"],
            "properties": {
                "axis": {"enum": ["sigma", "sigma_tilde", "K", "h", "period",
                                  "tau", "policy", "r_star"]},
                "values": {"type": "array", "minItems": 1},
            },
        },
        "label": {"type": "string"},
    },
}

_VALIDATOR = Draft202012Validator(_SCHEMA)


class ExperimentConfig:
    """A validated experiment description with JSON round-trip identity."""

    def __init__(self, data: dict):
        errors = sorted(_VALIDATOR.iter_errors(data), key=str)
        if errors:
            msgs = "; ".join(e.message for e in errors[:4])
            raise ConfigurationError(f"invalid config: {msgs}")
        self.data = copy.deepcopy(data)

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig(json.load(fh))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    # convenience accessors -------------------------------------------------
    @property
    def model_name(self) -> str:
        return self.data["model"]["name"]

    @property
    def model_params(self) -> dict:
        return dict(self.data["model"].get("params", {}))

    @property
    def policy_spec(self) -> dict:
        return dict(self.data.get("policy", {"policy": "event"}))

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def label(self) -> str:
        return self.data.get(
            "label", f"{self.model_name}_{self.policy_spec['policy']}")

    @property
    def estimation(self) -> dict:
        est = dict(self.data.get("estimation", {}))
        est.setdefault("n_samples", 192)
        est.setdefault("safety_factor", 1.25)
        est.setdefault("n_anchors", 256)
        est.setdefault("n_clf_samples", 2000)
        est.setdefault("global_constants_declared", False)
        return est


def load_config(spec: str) -> ExperimentConfig:
    """Load a config from a path, or from the shipped presets by name."""
    if os.path.exists(spec):
        return ExperimentConfig.from_file(spec)
    name = spec[:-5] if spec.endswith(".json") else spec
    try:
        text = resources.files("clfetc").joinpath(f"presets/{name}.json").read_text()
    except (FileNotFoundError, ModuleNotFoundError):
        raise ConfigurationError(f"no such config file or preset: {spec!r}")
    return ExperimentConfig(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# config resolution


def _resolve_sigma(cfg: ExperimentConfig) -> float:
    pol = cfg.policy_spec
    params = cfg.model_params
    sigma = pol.get("sigma", params.get("sigma", 0.9))
    if "sigma" in pol and "sigma" in params and pol["sigma"] != params["sigma"]:
        raise ConfigurationError("policy sigma and model sigma disagree")
    return float(sigma)


def build_model_from_config(cfg: ExperimentConfig):
    params = cfg.model_params
    params["sigma"] = _resolve_sigma(cfg)
    return build_model(cfg.model_name, params)


def _estimation_bundle(cfg: ExperimentConfig, model, x0):
    """Region + constants used by derived policies and the dwell report."""
    est = cfg.estimation
    level = cfg.data.get("region_level")
    anchor = x0 if level is None else None
    if anchor is None:
        # an anchor on the requested level: scale the default along its ray
        anchor = _state_at_level(model, level)
    region = bound_sublevel_box(model.certificate, anchor, seed=cfg.seed)
    constants, reports = estimate_constants(
        model.system, model.certificate, region,
        n=est["n_samples"], seed=cfg.seed, safety=est["safety_factor"])
    return region, constants, reports


def _state_at_level(model, level: float) -> np.ndarray:
    cert = model.certificate
    x = np.asarray(model.default_x0, dtype=float)
    if not np.any(x):
        raise ConfigurationError("cannot scale a zero anchor to a level")
    lo, hi = 0.0, 1.0
    while cert.v(hi * x) < level:
        hi *= 2.0
        if hi > 1e12:
            raise ConfigurationError("requested region level unreachable")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cert.v(mid * x) < level:
            lo = mid
        else:
            hi = mid
    return hi * x


def resolve_policy(cfg: ExperimentConfig, model, x0):
    """Build the policy object, deriving missing periods from dwell bounds.

    Returns ``(policy, info)`` where ``info`` records anything derived.
    """
    spec = cfg.policy_spec
    kind = spec["policy"]
    sigma = _resolve_sigma(cfg)
    info = {"policy": kind, "sigma": sigma}

    def bundle():
        region, constants, _ = _estimation_bundle(cfg, model, x0)
        return region, constants

    if kind == "event":
        return EventTriggered(sigma=sigma), info

    if kind == "self":
        if "tau" in spec:
            tau = float(spec["tau"])
            info["tau"] = tau
            return SelfTriggered(sigma=sigma, tau_fn=lambda _x: tau), info
        region, constants = bundle()
        cert = model.certificate
        gamma_mode = ("nondecreasing" if cert.rate.monotone_nondecreasing else "c1")

        def tau_fn(x):
            rho = constants.rho if gamma_mode == "nondecreasing" else \
                estimate_rho(cert, cert.v(x))
            from dataclasses import replace as _rep
            inp = DwellInputs(constants=_rep(constants, rho=rho), sigma=sigma,
                              gamma_mode=gamma_mode)
            return dwellmod.tau_select(inp).value

        info["tau_at_x0"] = tau_fn(x0)
        return SelfTriggered(sigma=sigma, tau_fn=tau_fn), info

    if kind == "time":
        if "instants" in spec:
            return TimeTriggered(instants=tuple(spec["instants"])), info
        if "period" in spec:
            info["period"] = float(spec["period"])
            return TimeTriggered(period=float(spec["period"])), info
        region, constants = bundle()
        rep = tau_min_over_sublevel(
            model.system, model.certificate, region, sigma,
            n_anchors=cfg.estimation["n_anchors"], seed=cfg.seed,
            constants=constants)
        info["period"] = rep.value
        info["derived_from"] = "tau_min"
        return TimeTriggered(period=rep.value), info

    # periodic-event
    sigma_tilde = float(spec.get("sigma_tilde", 0.5 * (1.0 + sigma)))
    k_big = float(spec.get("K", 2.0))
    info.update({"sigma_tilde": sigma_tilde, "K": k_big})
    region, constants = bundle()
    info["big_m"] = constants.big_m
    if "h" in spec:
        h = float(spec["h"])
    else:
        rep = tau_min_over_sublevel(
            model.system, model.certificate, region, sigma,
            n_anchors=cfg.estimation["n_anchors"], seed=cfg.seed,
            which="tau0", sigma_tilde=sigma_tilde, k_big=k_big,
            constants=constants)
        h = admissible_period(rep.value)
        info["derived_from"] = "tau0_min"
    info["h"] = h
    return PeriodicEventTriggered(sigma=sigma, sigma_tilde=sigma_tilde,
                                  k_big=k_big, h=h, big_m=constants.big_m), info


def integrator_from_config(cfg: ExperimentConfig) -> IntegratorConfig:
    if "horizon" not in cfg.data:
        raise ConfigurationError("config needs a horizon for simulation")
    return IntegratorConfig(horizon=float(cfg.data["horizon"]),
                            **cfg.data.get("integrator", {}))


# ---------------------------------------------------------------------------
# subcommands


def _simulate_once(cfg: ExperimentConfig, out_dir, plot: bool):
    model = build_model_from_config(cfg)
    x0 = np.asarray(cfg.data.get("x0", model.default_x0), dtype=float)
    policy, pol_info = resolve_policy(cfg, model, x0)
    icfg = integrator_from_config(cfg)
    traj = run_closed_loop(model.system, model.certificate, policy, x0, icfg,
                           meta={"model": model.name, "seed": cfg.seed,
                                 "policy": pol_info})
    return model, traj, pol_info


def cmd_simulate(cfg: ExperimentConfig, out_dir: str, plot: bool = False) -> int:
    os.makedirs(out_dir, exist_ok=True)
    model, traj, pol_info = _simulate_once(cfg, out_dir, plot)
    label = cfg.label
    csv_path = os.path.join(out_dir, f"{label}_trajectory.csv")
    write_trajectory_csv(traj, csv_path)

    stats = run_stats(traj)
    rate_ok, rate_excess = check_rate_certificate(traj, model.certificate)
    payload = {
        "stats": stats.to_json_dict(),
        "termination": traj.termination,
        "rate_certificate_ok": bool(rate_ok),
        "rate_certificate_excess": rate_excess,
        "sigma": traj.sigma,
        "policy": pol_info,
        "seed": cfg.seed,
        "model": model.name,
        "model_params": model.params,
        "x0": list(np.asarray(cfg.data.get("x0", model.default_x0), dtype=float)),
        "events": [{"index": e.index, "time": e.time, "dwell": e.dwell,
                    "reason": e.reason, "guard_value": e.guard_value,
                    "control": list(e.control)} for e in traj.events[:1000]],
        "config": cfg.to_dict(),
    }
    if model.name == "zeno-polar":
        first_dwell = traj.events[1].dwell if len(traj.events) > 1 else None
        bound = zeno_first_event_bound(model.params["r_star"])
        payload["zeno_bound_comparison"] = {
            "first_dwell": first_dwell,
            "analytic_bound": bound,
            "within_bound": (first_dwell is not None and first_dwell <= bound),
        }
    if traj.termination in ANOMALOUS_TERMINATIONS:
        payload["diagnostic"] = {
            "anomaly": traj.termination,
            "t_last": float(traj.t[-1]),
            "n_events": len(traj.events),
        }
    _write_json(os.path.join(out_dir, f"{label}_stats.json"), payload)

    if plot:
        ts = traj.t
        svgplot.line_plot(os.path.join(out_dir, f"{label}_x.svg"), ts,
                          [(f"x{i+1}", traj.x[:, i]) for i in range(traj.x.shape[1])],
                          title=f"{label}: state", ylabel="x")
        svgplot.line_plot(os.path.join(out_dir, f"{label}_u.svg"), ts,
                          [(f"u{j+1}", traj.u[:, j]) for j in range(traj.u.shape[1])],
                          title=f"{label}: control", ylabel="u")
        v0 = float(traj.v[0])
        bound_curve = [model.certificate.energy_map.bound_after(v0, float(t), traj.sigma)
                       for t in ts]
        svgplot.line_plot(os.path.join(out_dir, f"{label}_v.svg"), ts,
                          [("V", traj.v), ("bound", bound_curve)],
                          title=f"{label}: Lyapunov decay", ylabel="V")

    print(f"{label}: termination={traj.termination} n_events={stats.n_events} "
          f"rate_certificate_ok={rate_ok}")
    return 2 if traj.termination in ANOMALOUS_TERMINATIONS else 0


def cmd_verify(cfg: ExperimentConfig, out_dir: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    model = build_model_from_config(cfg)
    cert, sys_ = model.certificate, model.system
    est = cfg.estimation
    x0 = np.asarray(cfg.data.get("x0", model.default_x0), dtype=float)
    label = cfg.label
    report = {"model": model.name, "seed": cfg.seed, "expected_status":
              model.expected_assumption_status, "config": cfg.to_dict()}
    code = 0
    try:
        level = cfg.data.get("region_level")
        anchor = x0 if level is None else _state_at_level(model, level)
        region = bound_sublevel_box(cert, anchor, seed=cfg.seed)
        report["region"] = {"level": region.level,
                            "lo": list(region.lo), "hi": list(region.hi)}
        rep_k = estimate_kappa(sys_, cert, region, est["n_samples"],
                               seed=cfg.seed, safety=est["safety_factor"])
        rep_n = estimate_nu(cert, region, est["n_samples"],
                            seed=cfg.seed, safety=est["safety_factor"])
        rep_m = estimate_big_m(sys_, cert, region, est["n_samples"],
                               seed=cfg.seed, safety=est["safety_factor"])
        rho = None
        try:
            rho = estimate_rho(cert, region.level)
        except ConfigurationError as exc:
            report["rho_error"] = str(exc)
        from .certificates import compute_mu
        report["estimates"] = {
            "kappa": rep_k.to_json_dict(),
            "nu": rep_n.to_json_dict(),
            "big_m": rep_m.to_json_dict(),
            "rho": rho,
            "mu": compute_mu(rep_k.value, rep_n.value),
        }
        samples = sample_in_region(cert, region, est["n_clf_samples"], seed=cfg.seed)
        clf = verify_clf_pointwise(cert, sys_, samples)
        report["clf_check"] = {
            "n_samples": clf.n_samples,
            "n_skipped": clf.n_skipped,
            "n_violations": len(clf.violations),
            "worst_margin": clf.worst_margin,
        }
        report["nondegeneracy_ok"] = not rep_m.diverging
        report["assumptions_pass"] = bool(clf.ok and not rep_m.diverging)
        code = 0 if report["assumptions_pass"] else 1
    except PropernessError as exc:
        report["properness_error"] = str(exc)
        report["assumptions_pass"] = False
        code = 1
    _write_json(os.path.join(out_dir, f"{label}_verify.json"), report)
    print(f"{label}: assumptions_pass={report.get('assumptions_pass')}")
    return code


def cmd_dwell(cfg: ExperimentConfig, out_dir: str, force: bool = False) -> int:
    os.makedirs(out_dir, exist_ok=True)
    model = build_model_from_config(cfg)
    est = cfg.estimation
    x0 = np.asarray(cfg.data.get("x0", model.default_x0), dtype=float)
    sigma = _resolve_sigma(cfg)
    spec = cfg.policy_spec
    sigma_tilde = float(spec.get("sigma_tilde", 0.5 * (1.0 + sigma)))
    k_big = float(spec.get("K", 2.0))
    label = cfg.label
    report = {"model": model.name, "seed": cfg.seed, "sigma": sigma,
              "sigma_tilde": sigma_tilde, "K": k_big, "config": cfg.to_dict(),
              "global_constants_declared": est["global_constants_declared"]}

    level = cfg.data.get("region_level")
    anchor = x0 if level is None else _state_at_level(model, level)
    try:
        region = bound_sublevel_box(model.certificate, anchor, seed=cfg.seed)
        constants, _ = estimate_constants(
            model.system, model.certificate, region, n=est["n_samples"],
            seed=cfg.seed, safety=est["safety_factor"],
            allow_degenerate=force)
    except (NonDegeneracyError, PropernessError) as exc:
        report["assumption_failure"] = str(exc)
        _write_json(os.path.join(out_dir, f"{label}_dwell.json"), report)
        print(f"{label}: assumption failure ({exc})")
        return 1

    rep_tau = tau_min_over_sublevel(
        model.system, model.certificate, region, sigma,
        n_anchors=est["n_anchors"], seed=cfg.seed, constants=constants)
    rep_tau0 = tau_min_over_sublevel(
        model.system, model.certificate, region, sigma,
        n_anchors=est["n_anchors"], seed=cfg.seed, which="tau0",
        sigma_tilde=sigma_tilde, k_big=k_big, constants=constants)
    h = admissible_period(rep_tau0.value)
    report["tau_min"] = rep_tau.to_json_dict()
    report["tau0_min"] = rep_tau0.to_json_dict()
    report["recommended_time_triggered_period"] = rep_tau.value
    report["recommended_periodic_check_period"] = h
    # user schedules are never blocked; the bound is sufficient, not
    # necessary, so a too-large period only earns a warning
    user_period = spec.get("period")
    if user_period is not None and user_period > rep_tau.value:
        report["period_warning"] = (
            f"configured period {user_period} exceeds the estimated "
            f"admissible period {rep_tau.value}; the rate guarantee is "
            "not certified at this period")
    if est["global_constants_declared"]:
        report["global_dwell_positivity"] = (
            "declared: constants hold globally, so the dwell bound is "
            "uniformly positive for every initial condition")

    if "horizon" in cfg.data:
        icfg = integrator_from_config(cfg)
        traj = run_closed_loop(model.system, model.certificate,
                               EventTriggered(sigma=sigma), x0, icfg)
        stats = run_stats(traj)
        ok = stats.min_dwell is None or stats.min_dwell >= rep_tau.value
        report["cross_check"] = {
            "min_observed_dwell": stats.min_dwell,
            "tau_min": rep_tau.value,
            "ok": bool(ok),
            "n_events": stats.n_events,
        }
    _write_json(os.path.join(out_dir, f"{label}_dwell.json"), report)
    print(f"{label}: tau_min={rep_tau.value:.6g} "
          f"(branch via {rep_tau.which}), h={h:.6g}")
    return 0


_SWEEP_COLUMNS = [
    "index", "axis", "value", "model", "policy", "n_events",
    "first_event_time", "min_dwell", "max_dwell", "max_dwell_post_first",
    "mean_event_frequency", "first_dwell", "dwell_bound", "termination",
    "rate_certificate_ok", "error",
]


def _apply_axis(base: dict, axis: str, value) -> dict:
    data = copy.deepcopy(base)
    if axis == "policy":
        data.setdefault("policy", {"policy": "event"})
        data["policy"]["policy"] = value
    elif axis == "r_star":
        data.setdefault("model", {}).setdefault("params", {})["r_star"] = value
    elif axis == "sigma":
        data.setdefault("policy", {"policy": "event"})["sigma"] = value
        data.get("model", {}).get("params", {}).pop("sigma", None)
    else:
        data.setdefault("policy", {"policy": "event"})[axis] = value
    return data


def _sweep_row(index, axis, value, data) -> dict:
    row = {c: "" for c in _SWEEP_COLUMNS}
    row.update({"index": index, "axis": axis, "value": value})
    try:
        cfg = ExperimentConfig(data)
        model = build_model_from_config(cfg)
        x0 = np.asarray(cfg.data.get("x0", model.default_x0), dtype=float)
        policy, pol_info = resolve_policy(cfg, model, x0)
        icfg = integrator_from_config(cfg)
        traj = run_closed_loop(model.system, model.certificate, policy, x0, icfg)
        stats = run_stats(traj)
        ok, _excess = check_rate_certificate(traj, model.certificate)
        row.update({
            "model": model.name,
            "policy": pol_info["policy"],
            "n_events": stats.n_events,
            "first_event_time": stats.first_event_time,
            "min_dwell": stats.min_dwell,
            "max_dwell": stats.max_dwell,
            "max_dwell_post_first": stats.max_dwell_post_first,
            "mean_event_frequency": stats.mean_event_frequency,
            "first_dwell": traj.events[1].dwell if len(traj.events) > 1 else "",
            "termination": traj.termination,
            "rate_certificate_ok": ok,
        })
        if model.name == "zeno-polar":
            row["dwell_bound"] = zeno_first_event_bound(model.params["r_star"])
    except Exception as exc:  # per-run failures stay in-row
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(cfg: ExperimentConfig, out_dir: str) -> int:
    if "sweep" not in cfg.data:
        raise ConfigurationError("sweep config needs a 'sweep' section")
    os.makedirs(out_dir, exist_ok=True)
    axis = cfg.data["sweep"]["axis"]
    values = cfg.data["sweep"]["values"]
    base = cfg.to_dict()
    base.pop("sweep")
    jobs = [(i, axis, v, _apply_axis(base, axis, v)) for i, v in enumerate(values)]

    threads = os.environ.get("CLF_ETC_THREADS")
    workers = max(1, int(threads)) if threads else min(4, os.cpu_count() or 1)
    if workers == 1:
        rows = [_sweep_row(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: _sweep_row(*job), jobs))

    def cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    label = cfg.label
    path = os.path.join(out_dir, f"{label}_sweep.csv")
    lines = [",".join(_SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(cell(row[c]) for c in _SWEEP_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    n_err = sum(1 for r in rows if r["error"])
    print(f"{label}: swept {axis} over {len(values)} values, {n_err} failures "
          f"-> {path}")
    return 0


def cmd_stats(csv_path: str, out_path=None) -> int:
    _times, events = read_event_times_csv(csv_path)
    if events.size == 0:
        print("no events found in trajectory", file=_sys.stderr)
        return 1
    stats = stats_from_event_times(events)
    text = json.dumps(_jsonable(stats.to_json_dict()), indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="clfetc",
        description="Event-triggered stabilization toolkit: simulate, audit "
                    "assumptions, estimate dwell times, sweep parameters.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True,
                       help="config JSON path or preset name")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    p_sim = sub.add_parser("simulate", help="run one closed-loop experiment")
    add_common(p_sim)
    p_sim.add_argument("--plot", action="store_true", help="emit SVG plots")

    p_ver = sub.add_parser("verify", help="audit the assumptions on a region")
    add_common(p_ver)

    p_dw = sub.add_parser("dwell", help="estimate dwell-time bounds")
    add_common(p_dw)
    p_dw.add_argument("--force", action="store_true",
                      help="continue despite assumption failures")

    p_sw = sub.add_parser("sweep", help="run a parameter sweep")
    add_common(p_sw)

    p_st = sub.add_parser("stats", help="recompute stats from a trajectory CSV")
    p_st.add_argument("trajectory", help="trajectory CSV path")
    p_st.add_argument("--out", default=None, help="also write the JSON here")

    args = parser.parse_args(argv)
    try:
        if args.command == "stats":
            return cmd_stats(args.trajectory, args.out)
        cfg = load_config(args.config)
        if args.seed is not None:
            data = cfg.to_dict()
            data["seed"] = args.seed
            cfg = ExperimentConfig(data)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, plot=args.plot)
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        if args.command == "dwell":
            return cmd_dwell(cfg, args.out, force=args.force)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        raise ConfigurationError(f"unknown command {args.command}")
    except (ConfigurationError, DomainError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
