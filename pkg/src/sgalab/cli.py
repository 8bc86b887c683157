"""Batch experiment runner.

Subcommands mirror the experiment operations; every output file starts
with a schema version line and a canonical JSON echo of the validated
configuration, floating point values are printed with 17 significant
digits, and replica work is merged in index order, so identical
(config, seed) pairs produce byte-identical files at any worker count.

Configuration comes from command-line flags, optionally seeded from a
``key = value`` config file (flags override the file).  The environment
variable ``SGALAB_OUTDIR`` supplies the default output directory.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import branching, experiments, lowerchain
from .core import GaConfig
from .errors import ConfigError, SgaError
from .landscapes import one_max_shifted, sharp_peak
from .streams import make_stream, substream
from .tuner import TunerPolicy, run_adaptive_ga

SCHEMA_VERSION = 1

SUBCOMMANDS = ("disordered", "quasispecies", "sweep", "dominance-tn",
               "dominance-onestep", "dominance-nstar", "gw", "lowerchain",
               "tune")

# Field table per subcommand: name -> (type, required, default).
_COMMON = {
    "seed": (int, True, None),
    "outdir": (str, False, None),
    "threads": (int, False, 1),
}
_FIELDS: dict[str, dict[str, tuple]] = {
    "disordered": {
        "pi": (float, True, None), "m": (int, True, None),
        "p_c": (float, True, None), "kappa": (float, False, 2.0),
        "replicas": (int, True, None), **_COMMON,
    },
    "quasispecies": {
        "pi": (float, True, None), "m": (int, True, None),
        "p_c": (float, True, None), "kappa": (float, False, 2.0),
        "n0_masters": (int, False, 1), "replicas": (int, True, None),
        **_COMMON,
    },
    "sweep": {
        "pi_grid": (str, True, None), "m": (int, True, None),
        "p_c": (float, True, None), "kappa": (float, False, 2.0),
        "replicas": (int, True, None), **_COMMON,
    },
    "dominance-tn": {
        "pi": (float, True, None), "m": (int, True, None),
        "p_c": (float, True, None), "horizon": (int, False, 10),
        "replicas": (int, True, None), **_COMMON,
    },
    "dominance-onestep": {
        "pi": (float, True, None), "m": (int, True, None),
        "ell": (int, True, None), "p_c": (float, True, None),
        "n0_masters": (int, False, 3), "samples": (int, True, None),
        **_COMMON,
    },
    "dominance-nstar": {
        "pi": (float, True, None), "m": (int, True, None),
        "p_c": (float, True, None), "epsilon": (float, True, None),
        "horizon": (int, False, 10), "replicas": (int, True, None),
        **_COMMON,
    },
    "gw": {
        "law": (str, True, None), "scale": (int, False, 1),
        "lam": (float, False, 0.0), "lam2": (float, False, 0.0),
        "pmf": (str, False, None), "horizon": (int, False, 200),
        "replicas": (int, True, None), **_COMMON,
    },
    "lowerchain": {
        "m": (int, True, None), "pi": (float, True, None),
        "ratio": (float, False, 2.0), "p_c": (float, True, None),
        "ell": (int, True, None), "horizon": (int, False, 50),
        "replicas": (int, True, None), "resurrect": (int, False, 0),
        "export_matrix": (int, False, 0), **_COMMON,
    },
    "tune": {
        "m": (int, True, None), "ell": (int, True, None),
        "p_c": (float, True, None), "p_m": (float, True, None),
        "target_pi": (float, False, 1.1), "adjust": (str, False, "p_m"),
        "horizon": (int, True, None),
        "landscape": (str, False, "one_max_shifted"), **_COMMON,
    },
}


@dataclass
class ExperimentConfig:
    """Validated, fully-typed description of one invocation."""

    subcommand: str
    params: dict

    def echo(self) -> dict:
        # outdir and threads steer execution, not the experiment: leaving
        # them out keeps outputs byte-identical across machines and
        # parallelism degrees.
        out = {"subcommand": self.subcommand}
        out.update({k: v for k, v in self.params.items()
                    if v is not None and k not in ("outdir", "threads")})
        return out

    def to_json(self) -> str:
        return json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))


def _read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _validate(subcommand: str, raw: dict) -> ExperimentConfig:
    fields = _FIELDS[subcommand]
    unknown = set(raw) - set(fields)
    if unknown:
        raise ConfigError(f"unknown key(s) for {subcommand}: "
                          + ", ".join(sorted(unknown)))
    params: dict = {}
    for name, (typ, required, default) in fields.items():
        if name in raw and raw[name] is not None:
            try:
                value = typ(raw[name])
            except (TypeError, ValueError):
                raise ConfigError(
                    f"field {name!r} must be of type {typ.__name__}, "
                    f"got {raw[name]!r}") from None
        elif required:
            raise ConfigError(f"missing required field {name!r} for {subcommand}")
        else:
            value = default
        params[name] = value
    _check_feasibility(subcommand, params)
    return ExperimentConfig(subcommand, params)


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(
            f"pi_grid must be comma-separated floats, got {text!r}") from None


def _check_feasibility(subcommand: str, p: dict) -> None:
    def need(cond: bool, message: str) -> None:
        if not cond:
            raise ConfigError(message)

    if "replicas" in p:
        need(p["replicas"] >= 1, "replicas must be positive")
    if "threads" in p:
        need(p["threads"] >= 1, "threads must be positive")
    if "seed" in p:
        need(0 <= p["seed"] < 2**64, "seed must be an unsigned 64-bit integer")
    if "p_c" in p:
        need(0.0 <= p["p_c"] <= 1.0, "p_c must lie in [0, 1]")
    if subcommand == "disordered":
        need(p["pi"] < 2.0 * (1.0 - p["p_c"]),
             f"constraint violated: pi < 2*(1-p_c) requires "
             f"pi < {2.0 * (1.0 - p['p_c'])}, got pi = {p['pi']}")
        need(0.0 < p["pi"] < 1.0, "disordered runs need pi in (0, 1)")
        need(p["m"] >= 2 and p["m"] % 2 == 0, "m must be even and >= 2")
    elif subcommand == "quasispecies":
        need(p["pi"] > 1.0, "quasispecies runs need pi > 1")
        need(p["m"] >= 2 and p["m"] % 2 == 0, "m must be even and >= 2")
        need(1 <= p["n0_masters"] < p["m"], "n0_masters must lie in 1..m-1")
    elif subcommand == "sweep":
        grid = _parse_grid(p["pi_grid"])
        need(len(grid) >= 1, "pi_grid must be nonempty")
        for pi in grid:
            need(0.0 < pi < 2.0 * (1.0 - p["p_c"]),
                 f"grid point pi={pi} violates pi < 2*(1-p_c)")
    elif subcommand == "dominance-tn":
        need(0.0 < p["pi"] < 1.0, "dominance-tn needs pi in (0, 1)")
    elif subcommand == "dominance-onestep":
        need(p["pi"] > 1.0, "dominance-onestep needs pi > 1")
        need(2 <= p["m"] <= 20, "dominance-onestep is sized for m <= 20")
        need(p["samples"] >= 1, "samples must be positive")
    elif subcommand == "dominance-nstar":
        need(0.0 < p["pi"] < 1.0, "dominance-nstar needs pi in (0, 1)")
        need(p["epsilon"] > 0.0
             and p["pi"] * (1.0 + 5.0 * p["epsilon"]) < 1.0,
             "constraint violated: pi*(1+5*epsilon) < 1")
    elif subcommand == "gw":
        need(p["law"] in ("scaled_poisson", "poisson_mixture", "explicit"),
             f"unknown law {p['law']!r}")
        if p["law"] == "explicit":
            need(p["pmf"] is not None, "explicit law requires pmf")
    elif subcommand == "lowerchain":
        need(p["m"] >= 2 and p["m"] % 2 == 0, "m must be even and >= 2")
        need(p["ratio"] > 1.0, "ratio must exceed 1")
        if p["export_matrix"]:
            need(p["m"] <= lowerchain.MAX_EXACT_M,
                 f"exact matrix export needs m <= {lowerchain.MAX_EXACT_M}")
    elif subcommand == "tune":
        need(p["m"] >= 2 and p["m"] % 2 == 0, "m must be even and >= 2")
        need(p["target_pi"] > 1.0, "target_pi must exceed 1")
        need(p["landscape"] in ("sharp_peak", "one_max_shifted"),
             f"unknown landscape {p['landscape']!r}")
        need(p["horizon"] >= 1, "horizon must be positive")


def parse_config(argv: list[str]) -> ExperimentConfig:
    """Parse flags (plus optional config file) into a validated config."""
    parser = argparse.ArgumentParser(prog="sgalab", add_help=True)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, fields in _FIELDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        for field in fields:
            sp.add_argument("--" + field.replace("_", "-"), dest=field,
                            default=None)
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise ConfigError("invalid command line") from None
        raise
    raw: dict = {}
    if ns.config is not None:
        raw.update(_read_config_file(ns.config))
    for field in _FIELDS[ns.subcommand]:
        value = getattr(ns, field, None)
        if value is not None:
            raw[field] = value
    return _validate(ns.subcommand, raw)


# ------------------------------------------------------------- CSV output

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return "-1"
    return str(value)


def _write_table(path: Path, schema: str, config_json: str,
                 header: list[str], rows: list[list]) -> None:
    lines = [f"# schema={schema} v{SCHEMA_VERSION}", f"# config={config_json}",
             ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, config_json: str, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION, "config": json.loads(config_json)}
    body.update(payload)
    path.write_text(json.dumps(body, sort_keys=True, indent=2,
                               default=_json_default) + "\n")


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"unserializable {type(value)}")


def _trajectory_rows(reports) -> list[list]:
    rows = []
    for rep in reports:
        for gen in range(rep.f_star.size):
            rows.append([rep.replica_index, gen, rep.f_star[gen],
                         rep.f_bar[gen], rep.n_master[gen],
                         rep.n_descendants[gen], rep.d_max[gen]])
    return rows


def _event_rows(reports) -> list[list]:
    rows = []
    for rep in reports:
        t = rep.times
        rows.append([rep.replica_index, t.tau0, t.tau1, t.tau2, t.tau_bar,
                     rep.event_disordered, rep.event_quasispecies])
    return rows


TRAJECTORY_HEADER = ["replica", "gen", "f_star", "f_bar", "n_master",
                     "n_descendants", "d_max"]
EVENT_HEADER = ["replica", "tau0", "tau1", "tau2", "tau_bar",
                "event_disordered", "event_quasispecies"]
SWEEP_HEADER = ["pi", "m", "freq_disordered", "ci_lo", "ci_hi",
                "freq_quasispecies", "qci_lo", "qci_hi"]
DOMINANCE_HEADER = ["level", "k", "dominated", "dominating", "tol", "ok"]
TUNE_HEADER = ["gen", "pi", "p_c", "p_m", "f_star", "f_bar", "feasible"]


# ------------------------------------------------------------ dispatchers

def _emit_regime(outdir: Path, config_json: str, report) -> list[Path]:
    paths = []
    for name, header, rows in (
            ("trajectories.csv", TRAJECTORY_HEADER,
             _trajectory_rows(report.reports)),
            ("events.csv", EVENT_HEADER, _event_rows(report.reports))):
        path = outdir / name
        _write_table(path, name.split(".")[0], config_json, header, rows)
        paths.append(path)
    summary = outdir / "summary.json"
    _write_summary(summary, config_json, dict(
        replicas=report.replicas, frequency=report.frequency,
        ci_low=report.ci_low, ci_high=report.ci_high,
        mean_f_bar=report.mean_f_bar, sd_f_bar=report.sd_f_bar,
        mean_f_star=report.mean_f_star, sd_f_star=report.sd_f_star))
    paths.append(summary)
    return paths


def _run_disordered(p: dict, outdir: Path, config_json: str) -> list[Path]:
    report = experiments.run_disordered(
        p["pi"], p["m"], p["p_c"], p["kappa"], p["replicas"], p["seed"],
        workers=p["threads"])
    return _emit_regime(outdir, config_json, report)


def _run_quasispecies(p: dict, outdir: Path, config_json: str) -> list[Path]:
    m = p["m"]
    bits, desc = experiments.peak_start(m, m)
    bits[:p["n0_masters"]] = 1
    desc[:p["n0_masters"]] = True
    report = experiments.run_quasispecies(
        p["pi"], sharp_peak(m), bits, desc, p["p_c"], p["kappa"],
        p["replicas"], p["seed"], workers=p["threads"])
    return _emit_regime(outdir, config_json, report)


def _run_sweep(p: dict, outdir: Path, config_json: str) -> list[Path]:
    rows = experiments.pi_sweep(_parse_grid(p["pi_grid"]), p["m"], p["p_c"],
                                p["kappa"], p["replicas"], p["seed"],
                                workers=p["threads"])
    path = outdir / "sweep.csv"
    _write_table(path, "sweep", config_json, SWEEP_HEADER,
                 [[r[k] for k in SWEEP_HEADER] for r in rows])
    summary = outdir / "summary.json"
    _write_summary(summary, config_json, dict(rows=rows))
    return [path, summary]


def _emit_dominance(outdir: Path, config_json: str, table) -> list[Path]:
    path = outdir / "dominance.csv"
    _write_table(path, "dominance", config_json, DOMINANCE_HEADER,
                 [[r.level, r.k, r.dominated, r.dominating, r.tol, r.ok]
                  for r in table.rows])
    summary = outdir / "summary.json"
    _write_summary(summary, config_json, dict(
        meta=table.meta, all_ok=table.all_ok,
        failures=len(table.failures())))
    return [path, summary]


def _run_dominance_tn(p: dict, outdir: Path, config_json: str) -> list[Path]:
    table = experiments.verify_tn_domination(
        p["pi"], p["m"], p["p_c"], p["horizon"], p["replicas"], p["seed"],
        workers=p["threads"])
    return _emit_dominance(outdir, config_json, table)


def _run_dominance_onestep(p: dict, outdir: Path,
                           config_json: str) -> list[Path]:
    table = experiments.verify_one_step_dominance(
        p["m"], p["ell"], p["pi"], p["p_c"], p["n0_masters"], p["samples"],
        p["seed"])
    return _emit_dominance(outdir, config_json, table)


def _run_dominance_nstar(p: dict, outdir: Path,
                         config_json: str) -> list[Path]:
    table = experiments.verify_nstar_domination(
        p["pi"], p["m"], p["p_c"], p["epsilon"], p["horizon"], p["replicas"],
        p["seed"], workers=p["threads"])
    return _emit_dominance(outdir, config_json, table)


def _gw_law(p: dict) -> branching.ReproductionLaw:
    if p["law"] == "scaled_poisson":
        return branching.scaled_poisson(p["scale"], p["lam"])
    if p["law"] == "poisson_mixture":
        return branching.poisson_mixture(p["lam"], p["lam2"])
    pmf = np.array([float(x) for x in p["pmf"].split(",")])
    return branching.explicit_law(pmf)


def _run_gw(p: dict, outdir: Path, config_json: str) -> list[Path]:
    law = _gw_law(p)
    rng = substream(p["seed"], 0)
    survival = branching.gw_survival_series(law, p["horizon"], p["replicas"],
                                            rng)
    path = outdir / "gw.csv"
    _write_table(path, "gw", config_json, ["n", "survival_freq"],
                 [[n, survival[n]] for n in range(survival.size)])
    summary = outdir / "summary.json"
    _write_summary(summary, config_json, dict(
        mean_offspring=law.mean(),
        extinction_frequency=float(1.0 - survival[-1]),
        extinction_pgf=branching.gw_extinction_pgf(law)))
    return [path, summary]


def _run_lowerchain(p: dict, outdir: Path, config_json: str) -> list[Path]:
    params = lowerchain.params_from_pi(p["m"], p["pi"], p["ratio"], p["p_c"],
                                       p["ell"])
    paths = []
    if p["export_matrix"]:
        matrix_path = outdir / "matrix.txt"
        matrix_path.write_text(lowerchain.export_matrix_text(
            lowerchain.transition_matrix(params, resurrect=bool(p["resurrect"]))))
        paths.append(matrix_path)
    summary = outdir / "summary.json"
    payload: dict = dict(p_m=params.p_m, realized_pi=params.pi)
    if params.pi > 1.0:
        freq, hist = lowerchain.hitting_time_tau_star(
            params, p["horizon"], p["replicas"], substream(p["seed"], 0),
            resurrect=bool(p["resurrect"]))
        payload.update(arrival_frequency=freq, hitting_histogram=hist)
    _write_summary(summary, config_json, payload)
    paths.append(summary)
    return paths


def _run_tune(p: dict, outdir: Path, config_json: str) -> list[Path]:
    land = sharp_peak(p["ell"]) if p["landscape"] == "sharp_peak" \
        else one_max_shifted(p["ell"])
    config = GaConfig(ell=p["ell"], m=p["m"], p_c=p["p_c"], p_m=p["p_m"],
                      seed=p["seed"])
    policy = TunerPolicy(target_pi=p["target_pi"], adjust=p["adjust"])
    rows, _ = run_adaptive_ga(land, config, policy, p["horizon"],
                              make_stream(p["seed"]))
    path = outdir / "tune.csv"
    _write_table(path, "tune", config_json, TUNE_HEADER,
                 [[r.gen, r.pi, r.p_c, r.p_m, r.f_star, r.f_bar, r.feasible]
                  for r in rows])
    return [path]


_DISPATCH = {
    "disordered": _run_disordered,
    "quasispecies": _run_quasispecies,
    "sweep": _run_sweep,
    "dominance-tn": _run_dominance_tn,
    "dominance-onestep": _run_dominance_onestep,
    "dominance-nstar": _run_dominance_nstar,
    "gw": _run_gw,
    "lowerchain": _run_lowerchain,
    "tune": _run_tune,
}


def run(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Execute a validated config; returns (exit status, files written)."""
    outdir = Path(config.params.get("outdir")
                  or os.environ.get("SGALAB_OUTDIR", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        paths = _DISPATCH[config.subcommand](config.params, outdir,
                                             config.to_json())
    except SgaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, []
    return 0, paths


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    status, paths = run(config)
    for path in paths:
        print(path)
    return status


if __name__ == "__main__":
    sys.exit(main())
