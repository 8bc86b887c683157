"""The three figure kinds.

All rendering is deterministic: the Agg backend, a pinned style, no
timestamps, and a fixed savefig configuration, so identical input bytes
give identical output bytes.  Each figure carries the producing run's
config echo as a caption line.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import SchemaError, Table, read_table  # noqa: E402

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "sgaplots",
}


def _caption(fig, table: Table) -> None:
    fig.text(0.01, 0.01, "config: " + table.config_echo(), fontsize=5,
             color="0.35", family="monospace")


def _save(fig, output: str | Path) -> Path:
    output = Path(output)
    if output.suffix.lower() not in (".png", ".svg"):
        raise SchemaError(
            f"unsupported output format {output.suffix!r}: use .png or .svg")
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata=_fixed_metadata(output.suffix.lower()))
    plt.close(fig)
    return output


def _fixed_metadata(suffix: str) -> dict:
    # Strip anything volatile (dates, library versions) from the file.
    if suffix == ".png":
        return {"Software": "sgaplots"}
    return {"Date": None, "Creator": "sgaplots"}


def render_sweep(input_path: str | Path, output: str | Path) -> Path:
    """Both regime-event frequencies against the copy rate.

    Line plot with shaded confidence bands and a vertical marker at the
    critical value 1.
    """
    table = read_table(input_path, "sweep")
    pi = np.array(table.floats("pi"))
    order = np.argsort(pi)
    pi = pi[order]
    series = {
        name: np.array(table.floats(name))[order]
        for name in ("freq_disordered", "ci_lo", "ci_hi",
                     "freq_quasispecies", "qci_lo", "qci_hi")}
    for name in ("freq_disordered", "freq_quasispecies"):
        bad = (series[name] < 0.0) | (series[name] > 1.0)
        if bad.any():
            raise SchemaError(
                f"{table.path}: column {name!r} leaves [0, 1]")
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(pi, series["freq_disordered"], marker="o", color="#b2182b",
                label="disordered event")
        ax.fill_between(pi, series["ci_lo"], series["ci_hi"],
                        color="#b2182b", alpha=0.2, linewidth=0)
        ax.plot(pi, series["freq_quasispecies"], marker="s", color="#2166ac",
                label="quasispecies event")
        ax.fill_between(pi, series["qci_lo"], series["qci_hi"],
                        color="#2166ac", alpha=0.2, linewidth=0)
        ax.axvline(1.0, color="0.25", linestyle="--", linewidth=1,
                   label="critical copy rate")
        ax.set_xlabel("copy-rate parameter")
        ax.set_ylabel("event frequency")
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="center right")
        ax.set_title("Regime dichotomy across the copy rate")
        _caption(fig, table)
        return _save(fig, output)


def render_trajectories(input_path: str | Path, output: str | Path) -> Path:
    """Mean fitness per generation: mean over replicas with a +/- sd band.

    Horizontal references mark the stagnation level f0_bar*(1+1/sqrt(m))
    and the arrival level sqrt(pi)*f0_bar, with f0_bar taken from the
    recorded generation-0 rows and pi and m from the config echo.
    """
    table = read_table(input_path, "trajectories")
    if "pi" not in table.config or "m" not in table.config:
        raise SchemaError(
            f"{table.path}: config echo lacks 'pi'/'m' needed for the "
            f"reference levels")
    pi = float(table.config["pi"])
    m = int(table.config["m"])
    gens = np.array(table.floats("gen"), dtype=int)
    f_bar = np.array(table.floats("f_bar"))
    horizon = gens.max()
    mean = np.empty(horizon + 1)
    sd = np.empty(horizon + 1)
    for g in range(horizon + 1):
        values = f_bar[gens == g]
        if values.size == 0:
            raise SchemaError(f"{table.path}: no rows for generation {g}")
        mean[g] = values.mean()
        sd[g] = values.std(ddof=1) if values.size > 1 else 0.0
    f0_bar = float(f_bar[gens == 0].mean())
    stagnation = f0_bar * (1.0 + 1.0 / math.sqrt(m))
    arrival = math.sqrt(pi) * f0_bar
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        xs = np.arange(horizon + 1)
        ax.plot(xs, mean, color="#2166ac", label="mean fitness")
        ax.fill_between(xs, mean - sd, mean + sd, color="#2166ac", alpha=0.25,
                        linewidth=0, label="+/- sd over replicas")
        ax.axhline(stagnation, color="#b2182b", linestyle="--", linewidth=1,
                   label="stagnation level")
        ax.axhline(arrival, color="#1a9850", linestyle=":", linewidth=1.2,
                   label="arrival level")
        ax.set_xlabel("generation")
        ax.set_ylabel("mean fitness")
        ax.legend(loc="best")
        ax.set_title("Mean-fitness trajectories")
        _caption(fig, table)
        return _save(fig, output)


def render_extinction(input_paths: list[str | Path],
                      output: str | Path) -> Path:
    """Disordered-event frequency against population size, log-x.

    Takes one events table per population size (m read from each file's
    config echo) and draws the frequency with binomial-CI error bars;
    at least two distinct sizes are required.
    """
    if isinstance(input_paths, (str, Path)):
        input_paths = [input_paths]
    points = []
    tables = []
    for path in input_paths:
        table = read_table(path, "events")
        if "m" not in table.config:
            raise SchemaError(f"{table.path}: config echo lacks 'm'")
        flags = table.floats("event_disordered")
        if any(v not in (0.0, 1.0) for v in flags):
            raise SchemaError(
                f"{table.path}: event_disordered must be 0/1 indicators")
        n = len(flags)
        freq = sum(flags) / n
        half = 1.959963984540054 * math.sqrt(freq * (1 - freq) / n)
        points.append((int(table.config["m"]), freq, half))
        tables.append(table)
    sizes = {p[0] for p in points}
    if len(sizes) < 2:
        raise SchemaError(
            f"extinction figure needs events tables for >= 2 population "
            f"sizes, got {sorted(sizes)}")
    points.sort()
    ms = [p[0] for p in points]
    freqs = [p[1] for p in points]
    halves = [p[2] for p in points]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.errorbar(ms, freqs, yerr=halves, marker="o", color="#b2182b",
                    capsize=3, linestyle="-")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("population size")
        ax.set_ylabel("disordered-event frequency")
        ax.set_ylim(-0.02, 1.05)
        ax.set_title("Peak-loss frequency vs population size")
        _caption(fig, tables[0])
        return _save(fig, output)
