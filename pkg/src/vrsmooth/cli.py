"""Command-line interface.

Four subcommands: ``functionals`` and ``coverage-table`` tabulate the
kernel calculus, ``fit`` smooths a two-column CSV, and ``simulate`` runs a
seeded Monte Carlo study from a JSON config.  Numeric output is written
with full round-trip precision; every file output is accompanied by a JSON
manifest recording the resolved configuration.  ``--plot`` renders a PNG
next to the delimited output.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.
"""

from __future__ import annotations

import datetime
import functools
import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .bandwidth import adjust_h, gamma_a, gamma_q, h0_global
from .combine import R_OPTIMAL, VARIANTS
from .errors import (
    ConfigError,
    DegenerateCurvatureError,
    EmptyWindowError,
    SingularDesignError,
    SingularRatioError,
)
from .estimators import fit_curve
from .inference import coverage_ratio, interval
from .kernels import KERNELS, c_delta, d_delta, get_kernel, nu_tilde
from .scenarios import DESIGNS, REGRESSIONS, get_scenario
from .simulate import EstimatorSpec, SimConfig, default_bandwidth_grid, run_study
from .smoother import Dataset, SmootherConfig

_NUMERIC_ERRORS = (SingularDesignError, EmptyWindowError, SingularRatioError,
                   DegenerateCurvatureError, FloatingPointError)

#: fixed kernel order for multi-kernel tables
_TABLE_KERNELS = ("uniform", "epanechnikov", "normal")


def _numeric_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _NUMERIC_ERRORS as exc:
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = int(epoch) if epoch else int(datetime.datetime.now(
        datetime.timezone.utc).timestamp())
    return datetime.datetime.fromtimestamp(
        when, datetime.timezone.utc).isoformat()


def _manifest(command: str, params: dict, seed=None) -> dict:
    return {
        "command": command,
        "config": params,
        "seed": seed,
        "version": __version__,
        "timestamp": _timestamp(),
    }


def _emit(text: str, out: str | None, command: str, params: dict, seed=None):
    """Write CSV to stdout or to a file plus its manifest sidecar."""
    if out is None:
        click.echo(text, nl=False)
        return
    with open(out, "w") as fh:
        fh.write(text)
    manifest = _manifest(command, params, seed)
    with open(out + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _plot_path(out: str) -> str:
    stem, _ext = os.path.splitext(out)
    return stem + ".png"


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise click.UsageError(f"could not parse {name} list {text!r}") from None


@click.group()
@click.version_option(version=__version__, prog_name="vrsmooth")
def main():
    """Variance-reduced local linear smoothing toolkit."""


@main.command()
@click.option("--kernel", "kernel_name", required=True,
              type=click.Choice(sorted(KERNELS)), help="kernel to tabulate")
@click.option("--delta-max", default=4.0, show_default=True,
              help="largest bin width in the table")
@click.option("--delta-step", default=0.1, show_default=True,
              help="bin-width grid step")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="output CSV path (default: stdout)")
@click.option("--plot", is_flag=True, help="render efficiency curves as PNG")
@_numeric_guard
def functionals(kernel_name, delta_max, delta_step, out, plot):
    """Tabulate overlap functionals and relative-efficiency curves."""
    if delta_step <= 0 or delta_max < 0:
        raise click.UsageError("delta grid must have positive step and range")
    if plot and out is None:
        raise click.UsageError("--plot needs --out to name the figure file")
    kernel = get_kernel(kernel_name)
    count = int(math.floor(delta_max / delta_step + 1e-9)) + 1
    deltas = [k * delta_step for k in range(count)]
    rows = []
    for d in deltas:
        rows.append((
            d,
            c_delta(kernel, d),
            d_delta(kernel, d),
            nu_tilde(kernel, 2, R_OPTIMAL, d),
            gamma_q(kernel, d),
            gamma_a(kernel, d),
        ))
    params = {"kernel": kernel_name, "delta_max": delta_max,
              "delta_step": delta_step}
    _emit(_csv_text(("delta", "c", "d", "nu_tilde02", "gamma_q", "gamma_a"),
                    rows), out, "functionals", params)
    if plot:
        from .plots import save_functionals_figure
        save_functionals_figure(_plot_path(out), deltas,
                                [r[4] for r in rows], [r[5] for r in rows],
                                kernel_name)


@main.command("coverage-table")
@click.option("--betas", default="0.95,0.9,0.85,0.8", show_default=True,
              help="comma-separated confidence levels")
@click.option("--deltas", default="0.6,0.8,1.0,1.2,1.6,2.0", show_default=True,
              help="comma-separated bin widths")
@click.option("--r", "shift", default=R_OPTIMAL, show_default="sqrt(1/2)",
              help="shift parameter of the combined estimator")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="output CSV path (default: stdout)")
@click.option("--plot", is_flag=True, help="render ratio curves as PNG")
@_numeric_guard
def coverage_table(betas, deltas, shift, out, plot):
    """Tabulate the coverage-accuracy ratio over kernels, levels and widths."""
    beta_vals = _parse_floats(betas, "beta")
    delta_vals = _parse_floats(deltas, "delta")
    if not beta_vals or any(not 0.0 < b < 1.0 for b in beta_vals):
        raise click.UsageError("confidence levels must lie strictly in (0, 1)")
    if not delta_vals or any(d < 0.0 for d in delta_vals):
        raise click.UsageError("bin widths must be nonnegative")
    if not -1.0 < shift < 1.0:
        raise click.UsageError("shift parameter must satisfy |r| < 1")
    if plot and out is None:
        raise click.UsageError("--plot needs --out to name the figure file")
    header = ["kernel", "beta"] + [f"delta={d:g}" for d in delta_vals]
    rows = []
    table = {}
    for kname in _TABLE_KERNELS:
        kernel = get_kernel(kname)
        table[kname] = {}
        for beta in beta_vals:
            vals = [coverage_ratio(kernel, d, shift, beta) for d in delta_vals]
            rows.append([kname, beta] + vals)
            table[kname][beta] = vals
    params = {"betas": beta_vals, "deltas": delta_vals, "r": shift}
    _emit(_csv_text(header, rows), out, "coverage-table", params)
    if plot:
        from .plots import save_coverage_table_figure
        save_coverage_table_figure(_plot_path(out), delta_vals, table)


@main.command()
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="two-column headerless CSV (x, y) with x in [0, 1]")
@click.option("--kernel", "kernel_name", default="epanechnikov",
              show_default=True, type=click.Choice(sorted(KERNELS)))
@click.option("--h", "h_value", type=float, default=None,
              help="bandwidth; omit to derive one from --scenario")
@click.option("--scenario", "scenario_name", default=None,
              type=click.Choice(sorted(REGRESSIONS)),
              help="oracle scenario for automatic bandwidth choice")
@click.option("--design", default="uniform01", show_default=True,
              type=click.Choice(sorted(DESIGNS)),
              help="design density for the oracle bandwidth")
@click.option("--noise-k", default=1.0, show_default=True,
              help="noise multiplier for the oracle bandwidth")
@click.option("--variant", default="avg", show_default=True,
              type=click.Choice(VARIANTS))
@click.option("--delta", default=1.0, show_default=True,
              help="bin width in units of h")
@click.option("--r", "shift", type=float, default=None,
              help="shift parameter for --variant q (default sqrt(1/2))")
@click.option("--beta", type=float, default=None,
              help="confidence level; adds a lower_cb column")
@click.option("--grid-size", default=401, show_default=True)
@click.option("--no-ridge", is_flag=True,
              help="use the raw fit; singular windows become NA")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="output CSV path (default: stdout)")
@click.option("--plot", is_flag=True, help="render the fitted curve as PNG")
@_numeric_guard
def fit(data_path, kernel_name, h_value, scenario_name, design, noise_k,
        variant, delta, shift, beta, grid_size, no_ridge, out, plot):
    """Smooth a dataset over an equispaced grid on [0, 1]."""
    if beta is not None and not 0.0 < beta < 1.0:
        raise click.UsageError("confidence level must lie strictly in (0, 1)")
    if grid_size < 2:
        raise click.UsageError("grid size must be at least 2")
    if delta < 0:
        raise click.UsageError("bin width must be nonnegative")
    if plot and out is None:
        raise click.UsageError("--plot needs --out to name the figure file")
    if variant == "q" and shift is None:
        shift = R_OPTIMAL
    kernel = get_kernel(kernel_name)
    try:
        raw = np.loadtxt(data_path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise click.UsageError(f"could not parse {data_path}: {exc}") from None
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise click.UsageError(
            f"{data_path} must have exactly two columns (x, y)")
    try:
        data = Dataset(raw[:, 0], raw[:, 1])
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None

    if h_value is None:
        if scenario_name is None:
            raise click.UsageError("provide either --h or --scenario")
        scen = get_scenario(scenario_name, design, noise_k)
        if scen.sigma <= 0:
            raise click.UsageError("oracle bandwidth needs a positive noise level")
        h0 = h0_global(data.n, kernel, scen.regression.d2,
                       scen.design.density, scen.sigma**2)
        h_value = h0 if variant == "ll" else adjust_h(
            h0, kernel, delta, variant, shift)
    elif h_value <= 0:
        raise click.UsageError("bandwidth must be positive")

    cfg = SmootherConfig(kernel, h_value, ridge=not no_ridge)
    grid = np.linspace(0.0, 1.0, grid_size)
    estimates = fit_curve(data, cfg, variant, delta=delta, r=shift,
                          points=grid)

    header = ["x", "estimate", "effective_delta"]
    if beta is not None:
        header.append("lower_cb")
    rows = []
    failures = 0
    lowers = []
    for x, est in zip(grid, estimates):
        if est.error is not None:
            failures += 1
            row = [float(x), "NA", est.effective_delta]
        else:
            row = [float(x), est.value, est.effective_delta]
        if beta is not None:
            lo = "NA"
            if est.error is None:
                try:
                    lo = interval(data, cfg, float(x), beta, variant=variant,
                                  r=shift, delta=delta).lower
                except (EmptyWindowError, SingularDesignError):
                    lo = "NA"
            row.append(lo)
            lowers.append(np.nan if lo == "NA" else lo)
        rows.append(row)

    params = {"data": os.path.basename(data_path), "kernel": kernel_name,
              "h": h_value, "variant": variant, "delta": delta, "r": shift,
              "beta": beta, "grid_size": grid_size, "ridge": not no_ridge}
    _emit(_csv_text(header, rows), out, "fit", params)
    if failures:
        click.echo(f"warning: {failures} grid points had singular windows "
                   "(marked NA)", err=True)
    if plot:
        from .plots import save_fit_figure
        vals = np.array([np.nan if r[1] == "NA" else r[1] for r in rows])
        save_fit_figure(_plot_path(out), data.xs, data.ys, grid, vals,
                        lower=np.array(lowers) if beta is not None else None,
                        title=f"{variant}, h={h_value:g}")


_SIM_KEYS = {"scenario", "kernel", "n", "replications", "seed", "grid_size",
             "ridge", "bandwidths", "estimators", "baseline"}
_SCENARIO_KEYS = {"regression", "design", "noise_k"}


def _sim_config_from_payload(payload, seed_override) -> SimConfig:
    problems = []
    if not isinstance(payload, dict):
        raise click.UsageError("config must be a JSON object")
    for key in sorted(set(payload) - _SIM_KEYS):
        problems.append(f"{key}: unknown key")

    scen_block = payload.get("scenario")
    scenario = None
    if not isinstance(scen_block, dict):
        problems.append("scenario: required object with regression/design/noise_k")
    else:
        for key in sorted(set(scen_block) - _SCENARIO_KEYS):
            problems.append(f"scenario.{key}: unknown key")
        try:
            scenario = get_scenario(
                scen_block.get("regression", ""),
                scen_block.get("design", "uniform01"),
                scen_block.get("noise_k", 1.0),
            )
        except (ValueError, TypeError) as exc:
            problems.append(f"scenario: {exc}")

    kernel = None
    try:
        kernel = get_kernel(str(payload.get("kernel", "epanechnikov")))
    except ValueError as exc:
        problems.append(f"kernel: {exc}")

    bw = payload.get("bandwidths", {})
    bandwidths = ()
    if isinstance(bw, dict):
        unknown = set(bw) - {"start", "factor", "count"}
        for key in sorted(unknown):
            problems.append(f"bandwidths.{key}: unknown key")
        try:
            bandwidths = default_bandwidth_grid(
                count=int(bw.get("count", 41)),
                start=float(bw.get("start", 0.008)),
                factor=float(bw.get("factor", 1.1)))
        except (TypeError, ValueError) as exc:
            problems.append(f"bandwidths: {exc}")
    elif isinstance(bw, list):
        try:
            bandwidths = tuple(float(x) for x in bw)
        except (TypeError, ValueError):
            problems.append("bandwidths: list entries must be numbers")
    else:
        problems.append("bandwidths: object {start,factor,count} or list expected")

    est_block = payload.get("estimators")
    estimators = []
    if not isinstance(est_block, list) or not est_block:
        problems.append("estimators: nonempty list required")
    else:
        for i, entry in enumerate(est_block):
            if not isinstance(entry, dict):
                problems.append(f"estimators[{i}]: object expected")
                continue
            unknown = set(entry) - {"variant", "delta", "r"}
            for key in sorted(unknown):
                problems.append(f"estimators[{i}].{key}: unknown key")
            try:
                estimators.append(EstimatorSpec(
                    variant=str(entry.get("variant", "")),
                    delta=float(entry.get("delta", 0.0)),
                    r=None if entry.get("r") is None else float(entry["r"])))
            except (ConfigError, TypeError, ValueError) as exc:
                problems.append(f"estimators[{i}]: {exc}")

    seed = payload.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    env_seed = os.environ.get("VRSMOOTH_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            problems.append("VRSMOOTH_SEED: must be an integer")

    if problems:
        raise click.UsageError(
            "invalid simulation config:\n  " + "\n  ".join(problems))

    try:
        return SimConfig(
            scenario=scenario,
            kernel=kernel,
            n=int(payload.get("n", 100)),
            estimators=tuple(estimators),
            bandwidths=bandwidths,
            replications=int(payload.get("replications", 300)),
            grid_size=int(payload.get("grid_size", 401)),
            seed=int(seed),
            ridge=bool(payload.get("ridge", True)),
            baseline=str(payload.get("baseline", "ll")),
        )
    except (ConfigError, TypeError, ValueError) as exc:
        raise click.UsageError(f"invalid simulation config:\n  {exc}") from None


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON study description")
@click.option("--out", "out_stem", required=True,
              type=click.Path(dir_okay=False),
              help="output stem; writes <stem>.csv and <stem>.json")
@click.option("--threads", default=os.cpu_count() or 1, show_default="cores",
              help="worker processes; results do not depend on this")
@click.option("--seed", type=int, default=None,
              help="override the config seed (VRSMOOTH_SEED wins over both)")
@click.option("--plot", is_flag=True, help="render MISE/ISB/IV curves as PNG")
@_numeric_guard
def simulate(config_path, out_stem, threads, seed, plot):
    """Run a Monte Carlo study described by a JSON config."""
    if threads < 1:
        raise click.UsageError("--threads must be at least 1")
    try:
        with open(config_path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config is not valid JSON: {exc}") from None
    cfg = _sim_config_from_payload(payload, seed)
    report = run_study(cfg, threads=threads)

    rows = [(r.estimator, r.h, r.mise, r.isb, r.iv, r.mc_se, r.reps_used,
             r.failed_points) for r in report.rows]
    csv_text = _csv_text(("estimator", "h", "mise", "isb", "iv", "mc_se",
                          "reps_used", "failed_points"), rows)
    with open(out_stem + ".csv", "w") as fh:
        fh.write(csv_text)

    report_dict = report.as_dict()
    document = {
        "manifest": _manifest("simulate", {"config": os.path.basename(config_path)},
                              seed=cfg.seed),
        "report": report_dict,
    }
    with open(out_stem + ".json", "w") as fh:
        json.dump(document, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if plot:
        from .plots import save_simulation_figure
        save_simulation_figure(out_stem + ".png", report_dict)


if __name__ == "__main__":
    main()
