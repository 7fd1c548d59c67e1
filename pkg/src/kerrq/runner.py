"""Command-line entry point, YAML run configuration and CSV/manifest output.

Usage::

    kerrq <subcommand> [--config run.yaml] [--out DIR] [--jobs K]

Subcommands: ``ness-sweep``, ``spectrum``, ``meanfield``, ``exact-moments``,
``quench``, ``validate``. Without ``--config`` the built-in recipe for the
subcommand is used (default model: kappa = 1/2,
delta = -2, u = 1, eps_i = 0.5).

A config file has four sections::

    model:      {delta: -2, kappa: 0.5, u: 1}
    experiment:
      quench:   {eps_i: 0.5, eps_f: [0.6, 1.1], N: [1, 5, 10], t_max: 100}
    numerics:   {tol: 1.0e-8, grid_spacing: 0.1, k: 6, critical_N: 20}
    output:     {dir: runs/quench}
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import hashlib
import itertools
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, InvalidParameterError, KerrqError
from .operators import ModelParams

log = logging.getLogger("kerrq")

SUBCOMMANDS = ("ness-sweep", "spectrum", "meanfield", "exact-moments", "quench", "validate")
TIMESERIES_HEADER = "t,re_alpha,im_alpha,n,phi,phi_ext,phi_q,pi_j,pi_ext,pi_d,pi_u,s_q,g,residual"
PANELS = (0.6, 0.8, "eps_c", 1.1, "eps_plus", 1.3)

_TOP_KEYS = {"model", "experiment", "numerics", "output"}
_MODEL_KEYS = {"delta", "kappa", "u"}
_NUMERIC_KEYS = {"tol", "grid_spacing", "n_max", "k", "eps_c", "critical_N"}
_OUTPUT_KEYS = {"dir"}
_SECTION_KEYS = {
    "ness-sweep": {"eps", "N"},
    "spectrum": {"eps", "N", "k"},
    "meanfield": {"eps"},
    "exact-moments": {"eps", "N", "orders"},
    "quench": {"eps_i", "eps_f", "N", "t_max", "dt_out", "entropy", "gaussianity"},
    "validate": {"eps", "N"},
}

DEFAULT_NUMERICS = {"tol": 1e-8, "grid_spacing": 0.1, "n_max": None, "k": 6, "eps_c": None, "critical_N": 20}

DEFAULT_EXPERIMENTS = {
    "ness-sweep": {"eps": {"start": 0.1, "stop": 1.4, "step": 0.02}, "N": [20]},
    "spectrum": {"eps": {"start": 0.1, "stop": 1.4, "step": 0.05}, "N": [2, 5, 10]},
    "meanfield": {"eps": {"start": 0.0, "stop": 1.4, "step": 0.01}},
    "exact-moments": {"eps": [0.3, 0.5, 0.8], "N": [1, 2, 5]},
    "quench": {"eps_i": 0.5, "eps_f": "panels", "N": [1, 5], "t_max": 60},
    "validate": {"eps": [0.5, 0.9], "N": [2]},
}


@dataclass
class Job:
    kind: str
    name: str
    args: dict


@dataclass
class RunConfig:
    model: ModelParams
    experiments: dict
    numerics: dict
    output_dir: str | None
    echo: dict

    def jobs(self, command: str) -> list[Job]:
        if command not in self.experiments:
            raise ConfigError(f"config has no '{command}' experiment (present: {sorted(self.experiments)})")
        return self.experiments[command]


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    jobs: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(j["status"] == "ok" for j in self.jobs)

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "version": self.version,
                "jobs": self.jobs, "files": self.files, "seconds": self.seconds, "ok": self.ok}


# ------------------------------------------------------------ config parsing

def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def expand_values(spec, what: str) -> list:
    """Scalar, list, or inclusive ``{start, stop, step}`` range; strings pass through (symbolic pumps)."""
    if isinstance(spec, dict):
        missing = {"start", "stop", "step"} - set(spec)
        if missing or set(spec) - {"start", "stop", "step"}:
            raise ConfigError(f"{what}: a range needs exactly start, stop and step")
        start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError(f"{what}: invalid range {spec}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    if spec == "panels":
        return list(PANELS)
    out = []
    for v in _as_list(spec):
        if isinstance(v, str):
            out.append(v)
        elif isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v):
            out.append(float(v))
        else:
            raise ConfigError(f"{what}: expected numbers, got {v!r}")
    return out


def _check_keys(block, allowed, where, errors):
    if not isinstance(block, dict):
        errors.append(f"{where}: expected a mapping, got {type(block).__name__}")
        return False
    unknown = sorted(set(block) - allowed)
    if unknown:
        errors.append(f"{where}: unknown keys {unknown}")
    return True


def _tag(v) -> str:
    return v if isinstance(v, str) else f"{v:.6g}"


def _jobs_for(kind: str, sec: dict, errors: list) -> list[Job]:
    try:
        eps = expand_values(sec.get("eps", DEFAULT_EXPERIMENTS.get(kind, {}).get("eps", [0.5])), f"{kind}.eps")
        Ns = [float(n) for n in _as_list(sec.get("N", [1]))]
    except (ConfigError, TypeError, ValueError) as exc:
        errors.append(str(exc))
        return []
    for n in Ns:
        if n < 1:
            errors.append(f"{kind}.N: N must be >= 1, got {n:g}")
    if kind == "ness-sweep":
        return [Job(kind, f"ness_sweep_N{_tag(n)}", {"eps": eps, "N": n}) for n in Ns]
    if kind == "spectrum":
        k = int(sec.get("k", 6))
        if k < 2:
            errors.append("spectrum.k must be >= 2")
        return [Job(kind, f"spectrum_N{_tag(n)}", {"eps": eps, "N": n, "k": k}) for n in Ns]
    if kind == "meanfield":
        return [Job(kind, "meanfield", {"eps": eps})]
    if kind == "exact-moments":
        orders = [tuple(int(x) for x in o) for o in sec.get("orders", [[0, 1], [1, 1], [0, 2]])]
        return [Job(kind, "exact_moments", {"eps": eps, "N": Ns, "orders": orders})]
    if kind == "validate":
        return [Job(kind, "validate", {"eps": eps, "N": Ns})]
    # quench
    try:
        eps_f = expand_values(sec["eps_f"], "quench.eps_f") if "eps_f" in sec else None
    except ConfigError as exc:
        errors.append(str(exc))
        return []
    if eps_f is None:
        errors.append("quench: eps_f is required")
        return []
    t_max = float(sec.get("t_max", 60.0))
    dt_out = float(sec.get("dt_out", 0.2))
    if not 0 < dt_out <= t_max:
        errors.append(f"quench: need 0 < dt_out <= t_max (dt_out={dt_out}, t_max={t_max})")
    eps_i = float(sec.get("eps_i", 0.5))
    jobs = []
    for ef, n in itertools.product(eps_f, Ns):
        jobs.append(Job(kind, f"quench_epsf{_tag(ef)}_N{_tag(n)}", {
            "eps_i": eps_i, "eps_f": ef, "N": n, "t_max": t_max, "dt_out": dt_out,
            "entropy": bool(sec.get("entropy", True)), "gaussianity": bool(sec.get("gaussianity", True)),
        }))
    return jobs


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration."""
    try:
        doc = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping with sections model/experiment/numerics/output")
    errors: list[str] = []
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        errors.append(f"unknown top-level keys {unknown}")

    model_block = doc.get("model") or {}
    model = None
    if _check_keys(model_block, _MODEL_KEYS, "model", errors):
        vals = {"delta": -2.0, "kappa": 0.5, "u": 1.0}
        for k in _MODEL_KEYS & set(model_block):
            v = model_block[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                errors.append(f"model.{k}: expected a number, got {v!r}")
            else:
                vals[k] = float(v)
        if vals["kappa"] <= 0:
            errors.append(f"model.kappa: must satisfy kappa > 0, got {vals['kappa']}")
        if vals["u"] < 0:
            errors.append(f"model.u: must satisfy u >= 0, got {vals['u']}")
        try:
            model = ModelParams(delta=vals["delta"], kappa=vals["kappa"], u=vals["u"])
        except InvalidParameterError as exc:
            if not any(s.startswith("model.") for s in errors):
                errors.append(f"model: {exc}")

    numerics = dict(DEFAULT_NUMERICS)
    num_block = doc.get("numerics") or {}
    if _check_keys(num_block, _NUMERIC_KEYS, "numerics", errors):
        numerics.update(num_block)
        if numerics["tol"] is not None and not (0 < float(numerics["tol"]) < 1):
            errors.append("numerics.tol must be in (0, 1)")
        if float(numerics["grid_spacing"]) <= 0:
            errors.append("numerics.grid_spacing must be positive")

    out_block = doc.get("output") or {}
    out_dir = None
    if _check_keys(out_block, _OUTPUT_KEYS, "output", errors):
        out_dir = out_block.get("dir")

    experiments = {}
    exp_block = doc.get("experiment")
    if not exp_block:
        errors.append("no experiment specified")
    elif _check_keys(exp_block, set(_SECTION_KEYS), "experiment", errors):
        for kind, sec in exp_block.items():
            if kind not in _SECTION_KEYS:
                continue
            sec = sec or {}
            if _check_keys(sec, _SECTION_KEYS[kind], f"experiment.{kind}", errors):
                experiments[kind] = _jobs_for(kind, sec, errors)
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    return RunConfig(model, experiments, numerics, out_dir, doc)


def default_config(command: str) -> RunConfig:
    return parse_config(yaml.safe_dump({"experiment": {command: DEFAULT_EXPERIMENTS[command]}}))


# ------------------------------------------------------------ CSV output

def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path, header: str, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_timeseries(traj, path) -> Path:
    """Write a quench trajectory as CSV with the fixed column set."""
    alpha = traj.alpha
    cols = {name: traj.column(attr) for name, attr in (
        ("phi", "Phi"), ("phi_ext", "Phi_ext"), ("phi_q", "Phi_q"), ("pi_j", "Pi_J"), ("pi_ext", "Pi_ext"),
        ("pi_d", "Pi_d"), ("pi_u", "Pi_U"), ("s_q", "S_Q"), ("residual", "balance_residual"))}
    if traj.records is None:
        # flux needs no phase-space grid
        kappa = traj.spec.model.kappa if traj.spec else 0.5
        N = traj.spec.N if traj.spec else 1.0
        cols["phi"] = 2.0 * kappa * traj.n_mean
        cols["phi_ext"] = 2.0 * kappa * N * np.abs(alpha) ** 2
        cols["phi_q"] = cols["phi"] - cols["phi_ext"]
    g = traj.G if traj.G is not None else np.full(traj.times.shape, np.nan)
    rows = (
        (t, a.real, a.imag, n, cols["phi"][i], cols["phi_ext"][i], cols["phi_q"][i], cols["pi_j"][i],
         cols["pi_ext"][i], cols["pi_d"][i], cols["pi_u"][i], cols["s_q"][i], g[i], cols["residual"][i])
        for i, (t, a, n) in enumerate(zip(traj.times, alpha, traj.n_mean))
    )
    return write_csv(path, TIMESERIES_HEADER, rows)


def read_timeseries(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


# ------------------------------------------------------------ job bodies

def resolve_pump(value, model: ModelParams, numerics: dict) -> float:
    """Map symbolic pumps (``eps_c``, ``eps_plus``, ``eps_minus``) to numbers."""
    if not isinstance(value, str):
        return float(value)
    from .meanfield import bistability_edges, critical_pump

    key = value.strip().lower()
    if key in ("eps_plus", "eps_+", "eps_hi"):
        return bistability_edges(model)[1]
    if key in ("eps_minus", "eps_-", "eps_lo"):
        return bistability_edges(model)[0]
    if key == "eps_c":
        if numerics.get("eps_c") is not None:
            return float(numerics["eps_c"])
        return critical_pump(model, float(numerics.get("critical_N", 20)))
    raise ConfigError(f"unknown symbolic pump {value!r}")


def _job_ness_sweep(model, numerics, out, args):
    from .exactness import exact_moment
    from .liouville import build_liouvillian, solve_ness
    from .operators import choose_truncation, moments

    N = args["N"]
    rows = []
    for e in args["eps"]:
        p = model.replace(epsilon=resolve_pump(e, model, numerics), N=N)
        n_max = numerics.get("n_max") or choose_truncation(p)
        rho = solve_ness(build_liouvillian(p, n_max + 1))
        a, n = moments(rho)
        if p.u > 0:
            ea, en = exact_moment(0, 1, p), exact_moment(1, 1, p).real
        else:
            ea, en = complex("nan"), float("nan")
        rows.append((p.epsilon, a.real, a.imag, abs(a) / math.sqrt(N), n, abs(ea) / math.sqrt(N), en, n_max))
    f = write_csv(out / f"ness_sweep_N{_tag(N)}.csv",
                  "eps,re_a,im_a,abs_alpha,n,exact_abs_alpha,exact_n,n_max", rows)
    worst = max((abs(r[3] - r[5]) for r in rows if math.isfinite(r[5])), default=float("nan"))
    return [f], {"max_abs_alpha_vs_exact": worst}


def _job_spectrum(model, numerics, out, args):
    from .liouville import build_liouvillian, spectrum
    from .operators import choose_truncation

    N, k = args["N"], args["k"]
    rows = []
    for e in args["eps"]:
        p = model.replace(epsilon=resolve_pump(e, model, numerics), N=N)
        n_max = numerics.get("n_max") or choose_truncation(p)
        s = spectrum(build_liouvillian(p, n_max + 1), k)
        rows.append([p.epsilon, s.gap] + [x for z in s.eigenvalues for x in (z.real, z.imag)])
    header = "eps,gap," + ",".join(f"re_z{j},im_z{j}" for j in range(k))
    return [write_csv(out / f"spectrum_N{_tag(N)}.csv", header, rows)], {}


def _job_meanfield(model, numerics, out, args):
    from .errors import NoBistabilityError
    from .meanfield import bistability_edges, mf_steady_states

    files = []
    info = {}
    try:
        e = bistability_edges(model)
        files.append(write_csv(out / "meanfield_edges.csv", "eps_lo,eps_hi,n_at_lo,n_at_hi", [tuple(e)]))
        info = {"eps_lo": e.eps_lo, "eps_hi": e.eps_hi}
    except NoBistabilityError as exc:
        info = {"bistability": str(exc)}
    rows = []
    for eps in args["eps"]:
        eps = resolve_pump(eps, model, numerics)
        r = mf_steady_states(eps, model)
        for j in range(len(r)):
            rows.append((eps, j, r.n[j], r.alpha[j].real, r.alpha[j].imag, bool(r.stable[j])))
    files.append(write_csv(out / "meanfield_roots.csv", "eps,root,n,re_alpha,im_alpha,stable", rows))
    return files, info


def _job_exact_moments(model, numerics, out, args):
    from .exactness import exact_moment

    rows = []
    for e, N in itertools.product(args["eps"], args["N"]):
        p = model.replace(epsilon=resolve_pump(e, model, numerics), N=N)
        for n, m in args["orders"]:
            v = exact_moment(n, m, p)
            rows.append((p.epsilon, N, n, m, v.real, v.imag))
    return [write_csv(out / "exact_moments.csv", "eps,N,n,m,re,im", rows)], {}


def _job_quench(model, numerics, out, args):
    from .dynamics import QuenchSpec, run_quench

    spec = QuenchSpec(
        eps_i=args["eps_i"], eps_f=resolve_pump(args["eps_f"], model, numerics), N=args["N"],
        t_max=args["t_max"], dt_out=args["dt_out"], tol=float(numerics.get("tol") or 1e-8),
        n_max=numerics.get("n_max"), grid_spacing=float(numerics.get("grid_spacing") or 0.1), model=model,
        with_entropy=args["entropy"], with_gaussianity=args["gaussianity"],
    )
    traj = run_quench(spec)
    f = emit_timeseries(traj, out / f"quench_epsf{_tag(args['eps_f'])}_N{_tag(args['N'])}.csv")
    info = dict(traj.diagnostics)
    info["eps_f"] = spec.eps_f
    if traj.records:
        res = traj.column("balance_residual")
        scale = np.maximum(traj.column("Pi_J"), traj.column("Phi"))
        info["max_relative_balance_residual"] = float(np.nanmax(res / np.where(scale > 0, scale, 1.0)))
    return [f], info


def validation_checks(model: ModelParams, eps_list, Ns) -> list[tuple]:
    """Invariant suite behind ``kerrq validate``: rows of (check, value, tolerance, passed)."""
    from .exactness import exact_moment
    from .gaussianity import non_gaussianity
    from .liouville import adjoint_on_identity, build_liouvillian, solve_ness, vec
    from .meanfield import bistability_edges
    from .operators import annihilation, build_hamiltonian, choose_truncation, moments
    from .phasespace import adaptive_field, snapshot

    rows = []

    def add(name, value, tol):
        rows.append((name, float(value), tol, bool(value <= tol)))

    a = annihilation(30)
    comm = a @ a.conj().T - a.conj().T @ a
    add("commutator_identity_first_29", np.max(np.abs(comm[:29, :29] - np.eye(29))), 1e-12)
    for N in Ns:
        for e in eps_list:
            p = model.replace(epsilon=resolve_pump(e, model, {}), N=N)
            tag = f"eps={p.epsilon:g} N={N:g}"
            d = choose_truncation(p) + 1
            H = build_hamiltonian(p, d)
            add(f"hamiltonian_hermitian[{tag}]", np.max(np.abs(H - H.conj().T)), 1e-12)
            L = build_liouvillian(p, d)
            add(f"trace_preservation[{tag}]", np.max(np.abs(adjoint_on_identity(L))), 1e-10)
            rho = solve_ness(L)
            add(f"ness_residual[{tag}]", np.max(np.abs(L.matrix @ vec(rho))), 1e-10)
            if p.u > 0:
                m_a, m_n = moments(rho)
                add(f"ness_vs_exact_a[{tag}]", abs(m_a - exact_moment(0, 1, p)) / max(abs(m_a), 1e-300), 1e-6)
            f = adaptive_field(rho)
            add(f"husimi_norm[{tag}]", abs(f.norm - 1.0), 1e-4)
            add(f"husimi_positive[{tag}]", max(0.0, -float(f.Q.min())), 1e-12)
            r = snapshot(rho, p)
            add(f"pi_j_nonnegative[{tag}]", max(0.0, -r.Pi_J), 1e-6)
            add(f"ness_balance[{tag}]", abs(r.balance) / max(r.Phi, 1e-300), 1e-2)
            add(f"non_gaussianity_nonnegative[{tag}]", max(0.0, -non_gaussianity(rho)), 1e-6)
    try:
        e = bistability_edges(model)
        for n, eps in ((e.n_at_lo, e.eps_lo), (e.n_at_hi, e.eps_hi)):
            add(f"edge_residual[n={n:.6g}]",
                abs(n * (model.kappa ** 2 + (model.delta + n * model.u) ** 2) - eps ** 2), 1e-10)
    except KerrqError:
        pass
    return rows


def _job_validate(model, numerics, out, args):
    rows = validation_checks(model, args["eps"], args["N"])
    f = write_csv(out / "validate.csv", "check,value,tolerance,passed", rows)
    failed = [r[0] for r in rows if not r[3]]
    if failed:
        raise KerrqError(f"invariant checks failed: {failed}")
    return [f], {"checks": len(rows)}


_JOB_FUNCS = {
    "ness-sweep": _job_ness_sweep,
    "spectrum": _job_spectrum,
    "meanfield": _job_meanfield,
    "exact-moments": _job_exact_moments,
    "quench": _job_quench,
    "validate": _job_validate,
}


def _execute(job: Job, model: ModelParams, numerics: dict, out: str) -> dict:
    t0 = time.perf_counter()
    rec = {"name": job.name, "kind": job.kind, "args": job.args}
    try:
        files, info = _JOB_FUNCS[job.kind](model, numerics, Path(out), job.args)
        rec.update(status="ok", files=[str(Path(f).name) for f in files], tolerances=_jsonable(info))
    except Exception as exc:  # recorded in the manifest; the run continues
        log.exception("job %s failed", job.name)
        rec.update(status="failed", files=[], reason={"type": type(exc).__name__, "message": str(exc)})
    rec["seconds"] = round(time.perf_counter() - t0, 3)
    return rec


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run(config: RunConfig, command: str, out_dir=None, jobs: int = 1) -> RunManifest:
    """Execute every job of ``command``; write CSVs and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir or config.output_dir or "kerrq-out")
    out.mkdir(parents=True, exist_ok=True)
    job_list = config.jobs(command)
    numerics = dict(config.numerics)
    # resolve eps_c once so parallel jobs do not each repeat the search
    if command == "quench" and any(j.args.get("eps_f") == "eps_c" for j in job_list) and numerics.get("eps_c") is None:
        numerics["eps_c"] = resolve_pump("eps_c", config.model, numerics)
    t0 = time.perf_counter()
    if jobs > 1 and len(job_list) > 1:
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_execute, j, config.model, numerics, str(out)) for j in job_list]
            records = [f.result() for f in futures]
    else:
        records = [_execute(j, config.model, numerics, str(out)) for j in job_list]
    manifest = RunManifest(command, _jsonable(config.echo), __version__, records)
    manifest.config["resolved_numerics"] = _jsonable(numerics)
    for rec in records:
        for name in rec["files"]:
            manifest.files[name] = sha256(out / name)
    manifest.seconds = round(time.perf_counter() - t0, 3)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ------------------------------------------------------------ CLI

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerrq", description=__doc__.split("\n\n")[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="YAML run configuration (default: built-in recipe)")
    ap.add_argument("--out", help="output directory (default: output.dir or ./kerrq-out)")
    ap.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            with open(args.config) as fh:
                config = parse_config(fh.read())
        else:
            config = default_config(args.subcommand)
        manifest = run(config, args.subcommand, args.out, max(1, args.jobs))
    except (ConfigError, OSError) as exc:
        print(f"kerrq: error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or config.output_dir or "kerrq-out")
    if args.subcommand == "exact-moments" and manifest.ok:
        sys.stdout.write((out / "exact_moments.csv").read_text())
    for rec in manifest.jobs:
        status = rec["status"]
        extra = "" if status == "ok" else f"  {rec['reason']['type']}: {rec['reason']['message']}"
        print(f"{status:6s} {rec['name']} ({rec['seconds']:.1f}s){extra}", file=sys.stderr)
    return 0 if manifest.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
