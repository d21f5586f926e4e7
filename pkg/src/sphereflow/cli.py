"""Command-line experiment runner.

Every command reads an :class:`ExperimentConfig` (INI-style file and/or
flags), writes CSV/JSON artifacts into an output directory together with a
``manifest.json`` of SHA-256 content hashes, and exits with

* 0 on success,
* 2 on configuration errors,
* 3 on numerical failures,
* 4 when an acceptance-tagged check fails.
"""

import argparse
import configparser
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import SolverInstabilityError
from .kernels import KernelFamilySpec, build_kernel, exponential_family, heat_family, linf_norm

log = logging.getLogger("sphereflow")

OUTPUT_ENV = "SPHEREFLOW_OUTPUT"
DEFAULT_OUTPUT = "sphereflow-out"
COMMANDS = ("solve-ae", "solve-ade", "sweep-epsilon", "jko", "particles", "checks")
SUITES = ("geometry", "spectral", "contraction", "evi", "admissibility", "all")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    return tuple(float(p) for p in parts)


# field -> (section, help); order defines the canonical file layout
_DOC = {
    "command": ("experiment", "one of " + ", ".join(COMMANDS)),
    "n": ("experiment", "ambient dimension of the sphere S^{n-1}"),
    "L": ("experiment", "spectral truncation degree"),
    "M": ("experiment", "quadrature size (default 2L+8)"),
    "dt": ("experiment", "time step (default: stability rule)"),
    "T": ("experiment", "time horizon"),
    "scheme": ("experiment", "rk4 or heun"),
    "seed": ("experiment", "random seed"),
    "jobs": ("experiment", "worker processes for sweeps"),
    "plot": ("experiment", "also write SVG plots"),
    "W": ("kernels", "fixed interaction kernel spec"),
    "V": ("kernels", "localized repulsion kernel spec"),
    "family": ("kernels", "repulsion family for sweeps: heat or exp"),
    "eps": ("kernels", "comma-separated scales for sweep-epsilon"),
    "initial": ("kernels", "initial density: uniform or cosine:amp=A"),
    "tau": ("jko", "JKO step"),
    "K": ("jko", "number of JKO steps"),
    "grid": ("jko", "cells of the JKO grid"),
    "d": ("particles", "token count"),
    "beta": ("particles", "inverse temperature of the attractive head"),
    "eps_rep": ("particles", "scale of the repulsive head (0 = none)"),
    "hemisphere": ("particles", "initialize on a hemisphere"),
    "seeds": ("particles", "number of seeded runs"),
    "suite": ("checks", "one of " + ", ".join(SUITES)),
    "samples": ("checks", "Monte-Carlo samples for the geometry suite"),
    "pairs": ("checks", "random pairs for the contraction suite"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "solve-ae"
    n: int = 2
    L: int = 32
    M: Optional[int] = None
    dt: Optional[float] = None
    T: float = 1.0
    scheme: str = "rk4"
    seed: int = 0
    jobs: int = 1
    plot: bool = False
    W: str = "attract:beta=1:alpha=1"
    V: str = "heat:eps=0.1"
    family: str = "heat"
    eps: tuple = (0.2, 0.1, 0.05, 0.025)
    initial: str = "cosine:amp=0.5"
    tau: float = 1e-3
    K: int = 100
    grid: int = 128
    d: int = 32
    beta: float = 1.0
    eps_rep: float = 0.0
    hemisphere: bool = True
    seeds: int = 1
    suite: str = "all"
    samples: int = 100000
    pairs: int = 100
    output: Optional[str] = field(default=None, compare=False)

    def validate(self):
        errs = []
        if self.command not in COMMANDS:
            errs.append(f"command: unknown {self.command!r}")
        for name in ("n", "L", "T", "tau", "K", "grid", "d", "beta", "seeds", "samples", "pairs", "jobs"):
            v = getattr(self, name)
            if not (v > 0 if name != "L" else v >= 0):
                errs.append(f"{name}: must be positive, got {v}")
        if self.n < 2:
            errs.append(f"n: must be >= 2, got {self.n}")
        if self.dt is not None and not self.dt > 0:
            errs.append(f"dt: must be positive, got {self.dt}")
        if self.M is not None and self.M < 2 * self.L + 8:
            errs.append(f"M: must be >= 2L+8 = {2 * self.L + 8}, got {self.M}")
        if self.scheme not in ("rk4", "heun"):
            errs.append(f"scheme: must be rk4 or heun, got {self.scheme!r}")
        if self.family not in ("heat", "exp"):
            errs.append(f"family: must be heat or exp, got {self.family!r}")
        if len(self.eps) == 0:
            errs.append("eps: list is empty")
        if any(not e > 0 for e in self.eps):
            errs.append("eps: entries must be positive")
        if self.eps_rep < 0:
            errs.append("eps_rep: must be >= 0")
        if self.suite not in SUITES:
            errs.append(f"suite: unknown {self.suite!r}")
        for name in ("W", "V"):
            try:
                KernelFamilySpec.parse(getattr(self, name))
            except ValueError as exc:
                errs.append(f"{name}: {exc}")
        try:
            parse_initial(self.initial)
        except ValueError as exc:
            errs.append(f"initial: {exc}")
        if errs:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(errs))
        return self

    # canonical text form ----------------------------------------------------

    def to_ini(self) -> str:
        sections = {}
        for f in fields(self):
            if f.name == "output":
                continue
            sec = _DOC[f.name][0]
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                text = ",".join(repr(float(x)) for x in v)
            elif isinstance(v, bool):
                text = "true" if v else "false"
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            sections.setdefault(sec, []).append(f"{f.name} = {text}")
        out = []
        for sec in ("experiment", "kernels", "jko", "particles", "checks"):
            out.append(f"[{sec}]")
            out.extend(sections.get(sec, []))
            out.append("")
        return "\n".join(out)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(name, text):
    default = getattr(ExperimentConfig(), name)
    typ = _TYPES[name]
    if name == "eps":
        return _floats(text)
    if "bool" in str(typ):
        t = str(text).strip().lower()
        if t in ("1", "true", "yes", "on"):
            return True
        if t in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if "int" in str(typ) and "float" not in str(typ):
        f = float(text)
        if f != int(f):
            raise ValueError(f"not an integer: {text!r}")
        return int(f)
    if "float" in str(typ):
        return float(text)
    return str(text) if default is None or isinstance(default, str) else text


def parse_initial(text):
    """``uniform`` or ``cosine:amp=A`` (density ``1 + A cos θ``)."""
    text = text.strip()
    if text == "uniform":
        return 0.0
    if text.startswith("cosine"):
        parts = dict(p.split("=", 1) for p in text.split(":")[1:] if "=" in p)
        amp = float(parts.get("amp", 0.5))
        if not 0 <= amp < 1:
            raise ValueError("amp must lie in [0, 1) for a positive density")
        return amp
    raise ValueError(f"unknown initial density {text!r}")


def read_config_file(path):
    """Read an INI config; unknown sections or keys raise :class:`ConfigError` with context."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {}
    for sec in cp.sections():
        for key, text in cp.items(sec):
            if key not in _DOC:
                raise ConfigError(f"{path}: [{sec}] unknown key {key!r}")
            if _DOC[key][0] != sec:
                raise ConfigError(f"{path}: key {key!r} belongs in section [{_DOC[key][0]}], found in [{sec}]")
            try:
                values[key] = _coerce(key, text)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{sec}] {key}: {exc}") from None
    return values


def parse_config(path=None, overrides=None) -> ExperimentConfig:
    """Build and validate a config from an optional file plus flag overrides."""
    values = read_config_file(path) if path else {}
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k not in _TYPES:
            raise ConfigError(f"unknown option {k!r}")
        try:
            values[k] = _coerce(k, v) if isinstance(v, str) and k not in ("W", "V", "family", "initial",
                                                                          "command", "scheme", "suite",
                                                                          "output") else v
        except ValueError as exc:
            raise ConfigError(f"--{k}: {exc}") from None
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


# --------------------------------------------------------------------------
# artifact writing
# --------------------------------------------------------------------------


class ArtifactWriter:
    """Writes files under ``root`` and records their hashes for the manifest."""

    def __init__(self, root):
        self.root = Path(root)
        self.files = {}

    def write(self, rel, text):
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode() if isinstance(text, str) else text
        path.write_bytes(data)
        self.files[str(Path(rel).as_posix())] = hashlib.sha256(data).hexdigest()
        return path

    def write_json(self, rel, obj):
        return self.write(rel, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def manifest(self, cfg, status, checks):
        return {
            "command": cfg.command,
            "config_sha256": hashlib.sha256(cfg.to_ini().encode()).hexdigest(),
            "version": __version__,
            "status": status,
            "checks": checks,
            "files": [{"path": p, "sha256": h} for p, h in sorted(self.files.items())],
        }


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _plot_lines(writer, rel, x, series, xlabel, ylabel, logy=False):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "sphereflow"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in series.items():
        ax.plot(x, y, marker="o" if len(x) < 20 else None, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    writer.write(rel, buf.getvalue())


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _initial_state(cfg):
    from .pde import DensityState

    amp = parse_initial(cfg.initial)
    return DensityState.from_function(lambda th: 1.0 + amp * np.cos(th), cfg.n, cfg.L, cfg.M)


def _solver_config(cfg, T=None, dt=None):
    from .pde import SolverConfig

    return SolverConfig(L=cfg.L, M=cfg.M, dt=dt if dt is not None else cfg.dt, T=T or cfg.T,
                        scheme=cfg.scheme)


def _energy_checks(traj, W, V, rho0):
    from .pde import apriori_bound

    r = traj.report
    F = np.array(r.F_double)
    Fs = np.array(r.F_sqrt)
    mass = float(np.max(np.abs(np.array(r.mass) - 1.0)))
    dF = np.diff(F) - 1e-6 * (1.0 + np.abs(F[:-1]))
    checks = {
        "mass_drift": {"value": mass, "passed": mass <= 1e-10},
        "energy_nonincreasing": {"value": float(np.max(dF, initial=-np.inf)), "passed": bool(np.all(dF <= 0))},
        "energy_forms_agree": {
            "value": float(np.max(np.abs(F - Fs) / np.maximum(np.abs(F), 1e-300))),
            "passed": bool(np.all(np.abs(F - Fs) <= 1e-7 * np.abs(F) + 1e-15)),
        },
    }
    if V is not None:
        bound = apriori_bound(rho0, W, V)
        checks["apriori_bound"] = {"value": float(max(r.conv_l2)), "bound": bound,
                                   "passed": bool(max(r.conv_l2) <= bound)}
    return checks


def cmd_solve(cfg, writer, ade=False):
    from .pde import solve

    W = build_kernel(cfg.W, cfg.n, cfg.L)
    V = None if ade else build_kernel(cfg.V, cfg.n, cfg.L)
    rho0 = _initial_state(cfg)
    traj = solve(rho0, W, V, _solver_config(cfg))
    writer.write("trajectory.csv", traj.to_csv())
    writer.write("grid_values.csv", traj.grid_csv())
    writer.write("energy.csv", traj.report.to_csv())
    if cfg.plot:
        _plot_lines(writer, "energy.svg", traj.report.time, {"F": traj.report.F_double}, "time", "energy")
    return _energy_checks(traj, W, V, rho0)


def cmd_sweep(cfg, writer):
    from .pde import convergence_study

    W = build_kernel(cfg.W, cfg.n, cfg.L)
    fam = heat_family(cfg.n) if cfg.family == "heat" else exponential_family(cfg.n)
    table = convergence_study(list(cfg.eps), W, fam, _initial_state(cfg), _solver_config(cfg), jobs=cfg.jobs)
    writer.write("table.csv", table.to_csv())
    writer.write("ade/trajectory.csv", table.reference.to_csv())
    writer.write("ade/energy.csv", table.reference.report.to_csv())
    if cfg.plot:
        _plot_lines(writer, "table.svg", table.column("eps"),
                    {"error": table.column("error"), "residual": table.column("residual")},
                    "eps", "value", logy=True)
    failed = [r.eps for r in table.rows if r.failed]
    checks = {"rows_succeeded": {"value": failed, "passed": not failed}}
    if len(cfg.eps) > 1:
        order = np.argsort(-np.array(cfg.eps))
        err = table.column("error")[order]
        checks["error_decreasing"] = {"value": err.tolist(), "passed": bool(np.all(np.diff(err) < 0))}
    return checks


def cmd_jko(cfg, writer):
    from .ot import CircularDistribution, GridEnergy, JkoConfig, cell_average_values, jko_trajectory

    if cfg.n != 2:
        raise ConfigError("n: the jko command runs on the circle (n = 2)")
    L = max(cfg.L, 48)
    W = build_kernel(cfg.W, 2, L)
    V = build_kernel(cfg.V, 2, L)
    F = GridEnergy.from_kernels(cfg.grid, W.coeffs, V.coeffs)
    rho0 = CircularDistribution.from_grid(cell_average_values(_initial_state(cfg), cfg.grid), normalize=True)
    traj = jko_trajectory(rho0, JkoConfig(tau=cfg.tau, K=cfg.K, N=cfg.grid), F, W_linf=linf_norm(W))
    writer.write("jko_trajectory.csv", traj.to_csv())
    writer.write_json("jko_summary.json", {
        "tau": cfg.tau, "K": cfg.K, "increments": traj.increments, "energies": traj.energies,
        "stationarity": traj.stationarity, "summability_lhs": traj.summability_lhs,
        "summability_rhs": traj.summability_rhs, "holder_worst": traj.holder_worst,
    })
    dE = np.diff(traj.energies)
    return {
        "summability": {"value": traj.summability_slack, "passed": traj.summability_ok},
        "energy_monotone": {"value": float(dE.max()), "passed": bool(np.all(dE <= 1e-12))},
        "holder": {"value": traj.holder_worst, "passed": traj.holder_ok},
        "inner_converged": {"value": int(traj.converged.sum()), "passed": bool(traj.converged.all())},
    }


def cmd_particles(cfg, writer):
    from .particles import HeadConfig, ParticleEnsemble, simulate

    heads = (HeadConfig.with_repulsion(cfg.n, cfg.eps_rep, beta=cfg.beta) if cfg.eps_rep > 0
             else HeadConfig.attraction(cfg.beta))
    dt = cfg.dt or (0.02 if cfg.eps_rep > 0 else 0.05)
    ok = True
    mins = []
    for s in range(cfg.seeds):
        X0 = ParticleEnsemble.random(np.random.default_rng([cfg.seed, s]), cfg.d, cfg.n, cfg.hemisphere)
        tr = simulate(X0, heads, cfg.T, dt)
        writer.write(f"seed_{s}/trajectory.csv", tr.to_csv())
        writer.write(f"seed_{s}/metrics.csv", tr.metrics_csv())
        ok &= tr.energy_nonincreasing()
        mins.append(float(tr.min_inner[-1]))
    return {"energy_nonincreasing": {"value": mins, "passed": bool(ok)}}


def run_suite(name, cfg):
    """Run one named check suite; returns a list of JSON-ready report dicts."""
    reports = []
    if name == "geometry":
        from .geom import divergence_sample

        for n in (3, 5):
            rng = np.random.default_rng([cfg.seed, n])
            ratios, par = divergence_sample(rng, n, cfg.samples)
            reports.append({"name": f"geodesic_divergence_S{n - 1}", "max_ratio": float(ratios.max()),
                            "samples": int(cfg.samples), "seed": cfg.seed,
                            "parallel_max_deviation": float(np.max(np.abs(par - 1.0))),
                            "passed": bool(ratios.max() <= 3.0 and np.max(np.abs(par - 1.0)) <= 1e-9)})
    elif name == "contraction":
        from .ot import convolution_contraction_check

        V = build_kernel(cfg.V, 2, max(cfg.L, 64)).coeffs
        rep = convolution_contraction_check(V, pairs=cfg.pairs, seed=cfg.seed)
        d = json.loads(rep.to_json())
        d["passed"] = rep.max_ratio <= 3.0
        reports.append(d)
    elif name == "evi":
        from .ot import CircularDistribution, evi_check

        N = 1024
        th = 2 * np.pi * (np.arange(N) + 0.5) / N
        rho0 = CircularDistribution.from_grid(1 + 0.8 * np.cos(th))
        v = evi_check(rho0, CircularDistribution.uniform(N), np.arange(11) * 0.05, 1e-3)
        reports.append({"name": "evi_heat_flow", "max_ratio": float(v), "samples": 11, "seed": cfg.seed,
                        "passed": bool(v <= 1e-3)})
    elif name == "admissibility":
        from .spectral import check_admissibility, check_sqrt_positivity

        eps = [0.5, 0.2, 0.1, 0.05]
        for fam_name, fam in (("heat", heat_family), ("exp", exponential_family)):
            for n in (2, 3):
                f = fam(n)
                rep = check_admissibility(lambda e: f(e, 64), eps, 64)
                pos = min(check_sqrt_positivity(f(e, 64)) for e in eps)
                reports.append({"name": f"admissibility_{fam_name}_n{n}", "max_ratio": None, "samples": len(eps),
                                "seed": cfg.seed, "sqrt_min": pos, "failures": rep.failures(),
                                "passed": bool(rep.passed and pos >= -1e-6)})
    elif name == "spectral":
        from .spectral import ZonalCoefficients, dirichlet_identity_check

        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for n in (2, 3):
            V = heat_family(n)(0.1, 32)
            for _ in range(20):
                c = rng.standard_normal(33) * np.exp(-np.arange(33) / 3.0)
                lhs, rhs = dirichlet_identity_check(ZonalCoefficients(n, c), V)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
        reports.append({"name": "flow_interchange", "max_ratio": worst, "samples": 40, "seed": cfg.seed,
                        "passed": worst <= 1e-6})
    return reports


def cmd_checks(cfg, writer):
    names = SUITES[:-1] if cfg.suite == "all" else (cfg.suite,)
    checks = {}
    for name in names:
        reps = run_suite(name, cfg)
        writer.write(f"checks/{name}.json", "".join(json.dumps(r, sort_keys=True) + "\n" for r in reps))
        for r in reps:
            checks[r["name"]] = {"value": r.get("max_ratio"), "passed": r["passed"]}
    return checks


_DISPATCH = {
    "solve-ae": lambda c, w: cmd_solve(c, w, ade=False),
    "solve-ade": lambda c, w: cmd_solve(c, w, ade=True),
    "sweep-epsilon": cmd_sweep,
    "jko": cmd_jko,
    "particles": cmd_particles,
    "checks": cmd_checks,
}


def output_root(cfg):
    return Path(cfg.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def run(cfg: ExperimentConfig):
    """Execute ``cfg`` and return ``(exit_status, manifest)``."""
    cfg.validate()
    writer = ArtifactWriter(output_root(cfg))
    writer.write("config.ini", cfg.to_ini())
    try:
        checks = _DISPATCH[cfg.command](cfg, writer)
    except ConfigError:
        raise
    except (SolverInstabilityError, FloatingPointError, ArithmeticError) as exc:
        log.error("%s: numerical failure: %s", cfg.command, exc)
        status = EXIT_NUMERIC
        checks = {"numerical_failure": {"value": str(exc), "passed": False}}
    else:
        status = EXIT_OK if all(c["passed"] for c in checks.values()) else EXIT_ACCEPT
    manifest = writer.manifest(cfg, status, checks)
    text = json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n"
    (writer.root / "manifest.json").write_text(text)
    return status, manifest


SCHEMA = """\
CSV and JSON outputs

coefficients (kernel tables)   line 1 'n,L', line 2 values, line 3 'l,value', then one row per degree
trajectory.csv                 time,l0..lL[,s1..sL]   zonal/cosine coefficients (s = sine part on the circle)
grid_values.csv                time,theta_<angle>...  density at the solver nodes
energy.csv                     time,F_double,F_sqrt,entropy,mass,min_density,conv_l2
table.csv (sweep-epsilon)      eps,error,sup_gap,residual,failed
jko_trajectory.csv             time,theta_<cell center>...  cell densities of the JKO iterates
seed_<k>/trajectory.csv        time,particle_index,x1..xn
seed_<k>/metrics.csv           time,min_inner,max_inner,energy
checks/<suite>.json            one JSON record per line: name,max_ratio,samples,seed,passed,...
manifest.json                  command, config hash, status, checks and sha256 of every file
"""


def build_parser():
    p = argparse.ArgumentParser(prog="sphereflow", description=__doc__.split("\n")[0],
                                epilog="Run 'sphereflow --help schema' for the output file columns.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS + ("schema",):
        sp = sub.add_parser(name)
        if name == "schema":
            continue
        sp.add_argument("--config", help="INI-style config file; flags override it")
        sp.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
        sp.add_argument("--emit-config", action="store_true", help="print the canonical config and exit")
        for key, (sec, doc) in _DOC.items():
            if key == "command":
                continue
            default = getattr(ExperimentConfig(), key)
            if isinstance(default, tuple):
                default = ",".join(format(x, "g") for x in default)
            sp.add_argument(f"--{key}", default=None, help=f"{doc} [{sec}; default {default}]")
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:2] in (["--help", "schema"], ["help", "schema"]) or argv[:1] == ["schema"]:
        print(SCHEMA, end="")
        return EXIT_OK
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    over = {k: getattr(args, k) for k in _DOC if k != "command"}
    over["command"] = args.command
    over["output"] = args.output
    try:
        cfg = parse_config(args.config, over)
    except ConfigError as exc:
        print(f"sphereflow: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.emit_config:
        print(cfg.to_ini(), end="")
        return EXIT_OK
    try:
        status, manifest = run(cfg)
    except ConfigError as exc:
        print(f"sphereflow: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name, c in manifest["checks"].items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    print(f"manifest: {output_root(cfg) / 'manifest.json'}")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
