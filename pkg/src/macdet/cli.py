"""Batch experiment runner behind the `macdet` console script.

Ingests a flat JSON config (key/value pairs plus one optional sweep
block), executes one named experiment or figure preset, and emits rows
in a stable CSV or JSON schema.  Identical config and seed produce
byte-identical output.

dB conventions: SNR quantities use 10 log10 and are accepted through
keys with an explicit `_db` suffix; 20 log10 applies only to
exponent-ratio gains reported elsewhere.  Exit codes: 0 success, 2
config error, 3 solver non-convergence (affected rows are marked).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .allocation import (
    NoCrossoverError,
    alpha_uniform,
    calibrate_crossover,
    finite_exponent,
    method1,
    method2,
)
from .allocation import GainVector
from .detection import PeEstimate, empirical_exponent, estimate_pe_montecarlo, pe_conditional
from .exponents import (
    SnrPoint,
    ZetaFactor,
    bound_b,
    bound_c,
    bounds_asymptotic,
    e_awgn,
    e_csis1_numeric,
    e_csis1_rayleigh_closed,
    e_nocsis,
    e_po1,
    gain_awgn,
    gain_csis_bound_nk,
    gain_inf_bound,
    gain_nocsis,
    mp_lambda_max,
    snr_from_db,
    snr_to_db,
)
from .model import (
    ChannelModel,
    NetworkParams,
    RandomSource,
    SensingNoiseModel,
    sample_channel,
)
from .numerics import hermitian_eig
from .sdr import SdpProblem, extract_phases, solve_sdp

__all__ = [
    "ConfigError",
    "ResultRow",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run",
    "rows_to_csv",
    "rows_to_json",
    "main",
    "console_main",
]

EXPERIMENTS = ("exponent-sweep", "montecarlo", "schemes", "sdr-compare", "asymptotic", "figure")

SWEEP_VARIABLES = ("gamma_s", "gamma_c", "N", "L", "K", "beta")

_SWEEP_BY_EXPERIMENT = {
    "exponent-sweep": ("gamma_s", "gamma_c", "N", "K"),
    "montecarlo": ("gamma_s", "gamma_c", "N", "L"),
    "schemes": ("gamma_s",),
    "sdr-compare": ("gamma_s",),
    "asymptotic": ("beta",),
}

_KNOWN_KEYS = frozenset(
    {
        "experiment",
        "figure_id",
        "num_sensors",
        "num_antennas",
        "n_list",
        "theta",
        "sigma_eta_sq",
        "sigma_nu_sq",
        "p1",
        "total_power",
        "gamma_s",
        "gamma_s_db",
        "gamma_c",
        "gamma_c_db",
        "channel",
        "ricean_k",
        "noise",
        "noise_corr",
        "trials",
        "channel_draws",
        "seed",
        "output",
        "format",
        "sweep",
    }
)

# figure presets pin every model parameter themselves
_RUN_CONTROL_KEYS = frozenset(
    {"experiment", "figure_id", "trials", "channel_draws", "seed", "output", "format"}
)

_CSV_HEADER = ("experiment", "series", "x_name", "x_value", "value", "ci95", "seed")

_DB_COMMENT = (
    "# dB conventions: SNRs use 10*log10 (keys and columns with an _db suffix); "
    "20*log10 applies only to exponent-ratio gain values."
)


class ConfigError(ValueError):
    """Config failed strict validation (maps to exit code 2)."""


@dataclass(frozen=True)
class ResultRow:
    """One output record; `series` labels the curve a point belongs to."""

    experiment: str
    series: str
    x_name: str
    x_value: float
    value: float
    ci95: float | None
    seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (construct via parse_config)."""

    experiment: str
    figure_id: int | None
    params: NetworkParams
    model: ChannelModel
    noise_kind: str
    noise_corr: float | None
    n_list: tuple[int, ...] | None
    sweep_variable: str | None
    sweep_grid: tuple[float, ...] | None
    trials: int
    channel_draws: int | None
    seed: int
    output: str | None
    format: str


def _as_bool_free_number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    return float(value)


def _as_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    return value


def _as_str(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string")
    return value


def _positive(key: str, value: float) -> float:
    if not value > 0.0:
        raise ConfigError(f"{key} must be > 0")
    return value


def _reject(given: set, keys: tuple, why: str) -> None:
    clash = sorted(k for k in keys if k in given)
    if clash:
        raise ConfigError(f"{', '.join(clash)} cannot be set {why}")


def _parse_sweep(raw_sweep, experiment: str) -> tuple[str, tuple[float, ...]]:
    if not isinstance(raw_sweep, dict):
        raise ConfigError("sweep must be an object with keys variable and grid")
    unknown = sorted(set(raw_sweep) - {"variable", "grid"})
    if unknown:
        raise ConfigError(f"unknown sweep key {unknown[0]!r}")
    if "variable" not in raw_sweep or "grid" not in raw_sweep:
        raise ConfigError("sweep requires both variable and grid")
    variable = _as_str("sweep.variable", raw_sweep["variable"])
    if variable not in SWEEP_VARIABLES:
        raise ConfigError(f"unknown sweep variable {variable!r}")
    allowed = _SWEEP_BY_EXPERIMENT.get(experiment, ())
    if variable not in allowed:
        raise ConfigError(
            f"sweep variable {variable!r} is not valid for {experiment} "
            f"(allowed: {', '.join(allowed)})"
        )
    raw_grid = raw_sweep["grid"]
    if not isinstance(raw_grid, list) or not raw_grid:
        raise ConfigError("sweep.grid must be a non-empty list")
    grid = tuple(_as_bool_free_number("sweep.grid entry", g) for g in raw_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep.grid must be strictly increasing")
    if variable in ("N", "L"):
        if any(not float(g).is_integer() or g < 1 for g in grid):
            raise ConfigError(f"sweep.grid for {variable} must hold integers >= 1")
    elif variable == "K":
        if any(g < 0.0 or math.isinf(g) for g in grid):
            raise ConfigError("sweep.grid for K must hold finite values >= 0")
    elif variable == "beta":
        if any(g <= 0.0 or math.isinf(g) for g in grid):
            raise ConfigError("sweep.grid for beta must hold finite values > 0")
    else:
        if any(g <= 0.0 for g in grid):
            raise ConfigError(f"sweep.grid for {variable} must hold values > 0")
        if variable == "gamma_c" and any(math.isinf(g) for g in grid):
            raise ConfigError("sweep.grid for gamma_c must be finite")
        if variable == "gamma_s" and experiment in ("schemes", "sdr-compare"):
            if any(math.isinf(g) for g in grid):
                raise ConfigError(f"sweep.grid for gamma_s must be finite for {experiment}")
    return variable, grid


def parse_config(raw, experiment: str) -> ExperimentConfig:
    """Validates a decoded config object against one CLI experiment.

    Strict: unknown keys, conflicting keys (a quantity given both
    directly and through an SNR), and keys a sweep would overwrite are
    all rejected.
    """
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")
    given = set(raw)

    if "experiment" in raw:
        named = _as_str("experiment", raw["experiment"])
        if named != experiment:
            raise ConfigError(
                f"config names experiment {named!r} but {experiment!r} was requested"
            )

    figure_id = None
    if experiment == "figure":
        if "figure_id" not in raw:
            raise ConfigError("figure requires figure_id")
        figure_id = _as_int("figure_id", raw["figure_id"])
        if not 2 <= figure_id <= 9:
            raise ConfigError("figure_id must lie in 2..9")
        extra = sorted(given - _RUN_CONTROL_KEYS)
        if extra:
            raise ConfigError(
                f"figure presets pin model parameters; remove key {extra[0]!r}"
            )
    elif "figure_id" in raw:
        raise ConfigError("figure_id is only valid for the figure experiment")

    theta = _positive("theta", _as_bool_free_number("theta", raw.get("theta", 1.0)))
    sigma_nu_sq = _positive(
        "sigma_nu_sq", _as_bool_free_number("sigma_nu_sq", raw.get("sigma_nu_sq", 1.0))
    )
    p1 = _as_bool_free_number("p1", raw.get("p1", 0.5))

    if "gamma_s" in given and "gamma_s_db" in given:
        raise ConfigError("gamma_s and gamma_s_db cannot both be set")
    if "gamma_c" in given and "gamma_c_db" in given:
        raise ConfigError("gamma_c and gamma_c_db cannot both be set")
    if ("gamma_s" in given or "gamma_s_db" in given) and "sigma_eta_sq" in given:
        raise ConfigError("sigma_eta_sq conflicts with gamma_s / gamma_s_db")
    if ("gamma_c" in given or "gamma_c_db" in given) and "total_power" in given:
        raise ConfigError("total_power conflicts with gamma_c / gamma_c_db")

    sigma_eta_sq = 1.0
    if "sigma_eta_sq" in given:
        sigma_eta_sq = _as_bool_free_number("sigma_eta_sq", raw["sigma_eta_sq"])
        if sigma_eta_sq < 0.0:
            raise ConfigError("sigma_eta_sq must be >= 0")
    elif "gamma_s" in given or "gamma_s_db" in given:
        if "gamma_s" in given:
            gamma_s = _positive("gamma_s", _as_bool_free_number("gamma_s", raw["gamma_s"]))
        else:
            gamma_s = snr_from_db(_as_bool_free_number("gamma_s_db", raw["gamma_s_db"]))
        sigma_eta_sq = 0.0 if math.isinf(gamma_s) else theta**2 / gamma_s

    total_power = 1.0
    if "total_power" in given:
        total_power = _positive(
            "total_power", _as_bool_free_number("total_power", raw["total_power"])
        )
    elif "gamma_c" in given or "gamma_c_db" in given:
        if "gamma_c" in given:
            gamma_c = _as_bool_free_number("gamma_c", raw["gamma_c"])
        else:
            gamma_c = snr_from_db(_as_bool_free_number("gamma_c_db", raw["gamma_c_db"]))
        if not (gamma_c > 0.0 and math.isfinite(gamma_c)):
            raise ConfigError("gamma_c must be finite and > 0")
        total_power = gamma_c * sigma_nu_sq

    channel = _as_str("channel", raw.get("channel", "awgn"))
    if channel == "awgn":
        _reject(given, ("ricean_k",), "for an AWGN channel")
        model = ChannelModel.awgn()
    elif channel == "rayleigh":
        _reject(given, ("ricean_k",), "for a Rayleigh channel")
        model = ChannelModel.rayleigh()
    elif channel == "ricean":
        sweep_is_k = isinstance(raw.get("sweep"), dict) and raw["sweep"].get("variable") == "K"
        if sweep_is_k:
            _reject(given, ("ricean_k",), "when sweeping K")
            model = ChannelModel.ricean(1.0)  # placeholder; the grid supplies K
        else:
            if "ricean_k" not in given:
                raise ConfigError("ricean channel requires ricean_k")
            k = _as_bool_free_number("ricean_k", raw["ricean_k"])
            if k < 0.0 or math.isinf(k):
                raise ConfigError("ricean_k must be finite and >= 0")
            model = ChannelModel.ricean(k)
    else:
        raise ConfigError(f"unknown channel {channel!r}")

    noise_kind = _as_str("noise", raw.get("noise", "iid"))
    noise_corr = None
    if noise_kind == "iid":
        _reject(given, ("noise_corr",), "for iid sensing noise")
    elif noise_kind == "ar1":
        if "noise_corr" not in given:
            raise ConfigError("ar1 sensing noise requires noise_corr")
        noise_corr = _as_bool_free_number("noise_corr", raw["noise_corr"])
        if not -1.0 < noise_corr < 1.0:
            raise ConfigError("noise_corr must lie strictly between -1 and 1")
    else:
        raise ConfigError(f"unknown noise kind {noise_kind!r}")

    sweep_variable = None
    sweep_grid = None
    if "sweep" in given:
        if experiment == "figure":
            raise ConfigError("figure presets do not accept a sweep block")
        sweep_variable, sweep_grid = _parse_sweep(raw["sweep"], experiment)
    elif experiment in ("exponent-sweep", "montecarlo", "schemes", "asymptotic"):
        raise ConfigError(f"{experiment} requires a sweep block")
    if experiment == "schemes" and sweep_grid is not None and len(sweep_grid) < 2:
        raise ConfigError("schemes requires a gamma_s grid with at least two points")

    if sweep_variable == "gamma_s":
        _reject(given, ("gamma_s", "gamma_s_db", "sigma_eta_sq"), "when sweeping gamma_s")
    if sweep_variable == "gamma_c":
        _reject(given, ("gamma_c", "gamma_c_db", "total_power"), "when sweeping gamma_c")
    if sweep_variable == "N":
        _reject(given, ("num_antennas", "n_list"), "when sweeping N")
    if sweep_variable == "L":
        _reject(given, ("num_sensors",), "when sweeping L")
    if sweep_variable == "K" and channel != "ricean":
        raise ConfigError("sweeping K requires a ricean channel")

    num_sensors = _as_int("num_sensors", raw.get("num_sensors", 200))
    num_antennas = _as_int("num_antennas", raw.get("num_antennas", 1))

    n_list = None
    if "n_list" in given:
        if experiment != "exponent-sweep":
            raise ConfigError("n_list is only valid for exponent-sweep")
        raw_list = raw["n_list"]
        if not isinstance(raw_list, list) or not raw_list:
            raise ConfigError("n_list must be a non-empty list of integers")
        ns = tuple(_as_int("n_list entry", n) for n in raw_list)
        if any(n < 1 for n in ns) or len(set(ns)) != len(ns):
            raise ConfigError("n_list entries must be distinct integers >= 1")
        n_list = ns

    trials = _as_int("trials", raw.get("trials", 10_000))
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    needs_montecarlo = experiment == "montecarlo" or figure_id == 2
    if needs_montecarlo and trials < 1000:
        raise ConfigError("montecarlo experiments require trials >= 1000")

    channel_draws = None
    if "channel_draws" in given:
        channel_draws = _as_int("channel_draws", raw["channel_draws"])
        if channel_draws < 1:
            raise ConfigError("channel_draws must be >= 1")

    seed = _as_int("seed", raw.get("seed", 0))

    output = _as_str("output", raw["output"]) if "output" in given else None
    fmt = _as_str("format", raw.get("format", "csv"))
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")

    try:
        params = NetworkParams(
            num_sensors=num_sensors,
            num_antennas=num_antennas,
            theta=theta,
            sigma_eta_sq=sigma_eta_sq,
            sigma_nu_sq=sigma_nu_sq,
            p1=p1,
            total_power=total_power,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return ExperimentConfig(
        experiment=experiment,
        figure_id=figure_id,
        params=params,
        model=model,
        noise_kind=noise_kind,
        noise_corr=noise_corr,
        n_list=n_list,
        sweep_variable=sweep_variable,
        sweep_grid=sweep_grid,
        trials=trials,
        channel_draws=channel_draws,
        seed=seed,
        output=output,
        format=fmt,
    )


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def load_config(path: str, experiment: str) -> ExperimentConfig:
    """Reads and validates a JSON config file."""
    return parse_config(_read_json(path), experiment)


def _at_gamma_s(params: NetworkParams, gamma_s: float) -> NetworkParams:
    se2 = 0.0 if math.isinf(gamma_s) else params.theta**2 / gamma_s
    return dataclasses.replace(params, sigma_eta_sq=se2)


def _at_gamma_c(params: NetworkParams, gamma_c: float) -> NetworkParams:
    return dataclasses.replace(params, total_power=gamma_c * params.sigma_nu_sq)


def _noise_for(cfg: ExperimentConfig, params: NetworkParams) -> SensingNoiseModel | None:
    if cfg.noise_kind == "iid":
        return None
    idx = np.arange(params.num_sensors)
    r = params.sigma_eta_sq * cfg.noise_corr ** np.abs(idx[:, None] - idx[None, :])
    return SensingNoiseModel.correlated(r.astype(np.complex128))


def _mean_ci(values) -> tuple[float, float | None]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, None
    return mean, float(1.96 * arr.std(ddof=1) / math.sqrt(arr.size))


def _snr_point(params: NetworkParams, k_factor: float) -> SnrPoint:
    return SnrPoint.from_params(params, k_factor=k_factor)


def _run_exponent_sweep(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    params = cfg.params
    var = cfg.sweep_variable
    k = cfg.model.k_factor if not cfg.model.is_awgn else 0.0
    rows: list[ResultRow] = []
    for x in cfg.sweep_grid:
        gamma_s, gamma_c, k_here = params.gamma_s, params.gamma_c, k
        if var == "gamma_s":
            gamma_s = x
        elif var == "gamma_c":
            gamma_c = x
        elif var == "K":
            k_here = x
        ns = (int(x),) if var == "N" else (cfg.n_list or (params.num_antennas,))
        for n in ns:
            pt = SnrPoint(
                gamma_s=gamma_s, gamma_c=gamma_c, p1=params.p1, k_factor=k_here, num_antennas=n
            )
            tag = "" if var == "N" else f"(N={n})"
            rows.append(
                ResultRow(cfg.experiment, f"E_AWGN{tag}", var, float(x), e_awgn(pt), None, cfg.seed)
            )
            if not cfg.model.is_awgn:
                rows.append(
                    ResultRow(
                        cfg.experiment, f"E_NoCSIS{tag}", var, float(x), e_nocsis(pt), None, cfg.seed
                    )
                )
    return rows, 0


def _run_montecarlo(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    params = cfg.params
    var = cfg.sweep_variable
    draws = cfg.channel_draws or 10
    base = RandomSource(cfg.seed)
    rows: list[ResultRow] = []
    for i, x in enumerate(cfg.sweep_grid):
        if var == "L":
            params_x = dataclasses.replace(params, num_sensors=int(x))
        elif var == "N":
            params_x = dataclasses.replace(params, num_antennas=int(x))
        elif var == "gamma_s":
            params_x = _at_gamma_s(params, x)
        else:
            params_x = _at_gamma_c(params, x)
        noise = _noise_for(cfg, params_x)
        alpha = alpha_uniform(params_x)
        errors = 0
        pes = []
        for d in range(draws):
            channel = sample_channel(
                cfg.model,
                params_x.num_antennas,
                params_x.num_sensors,
                base.substream("mc-channel", i, d),
            )
            est = estimate_pe_montecarlo(
                channel,
                alpha,
                params_x,
                cfg.trials,
                RandomSource(cfg.seed, stream_id=1 + i * draws + d),
                noise,
            )
            errors += round(est.p_hat * cfg.trials)
            pes.append(pe_conditional(channel, alpha, params_x, noise))
        total = PeEstimate.from_counts(errors, cfg.trials * draws)
        tag = "" if var == "N" else f",N={params_x.num_antennas}"
        label = f"({cfg.model.label}{tag})"
        rows.append(
            ResultRow(
                cfg.experiment,
                f"Pe_MC{label}",
                var,
                float(x),
                total.p_hat,
                total.ci95_halfwidth,
                cfg.seed,
            )
        )
        rows.append(
            ResultRow(
                cfg.experiment, f"Pe{label}", var, float(x), float(np.mean(pes)), None, cfg.seed
            )
        )
    return rows, 0


def _run_schemes(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    params = cfg.params
    grid = cfg.sweep_grid
    draws = cfg.channel_draws or 25
    n = params.num_antennas
    k = cfg.model.k_factor if not cfg.model.is_awgn else 0.0
    base = RandomSource(cfg.seed)
    channels = [
        sample_channel(cfg.model, n, params.num_sensors, base.substream("schemes", d)).entries
        for d in range(draws)
    ]
    try:
        crossover = calibrate_crossover(params, cfg.model, grid, draws, base.stream(1))
        dominant = None
    except NoCrossoverError as exc:
        crossover = None
        dominant = exc.dominant
    rows: list[ResultRow] = []
    for x in grid:
        params_x = _at_gamma_s(params, x)
        fe1 = [finite_exponent(h, method1(h, params_x)[0], params_x) for h in channels]
        fe2 = [finite_exponent(h, method2(h, params_x), params_x) for h in channels]
        if crossover is not None:
            feh = fe1 if x < crossover else fe2
        else:
            feh = fe1 if dominant == "method1" else fe2
        for series, values in (
            (f"method1(N={n})", fe1),
            (f"method2(N={n})", fe2),
            (f"hybrid(N={n})", feh),
        ):
            mean, ci = _mean_ci(values)
            rows.append(ResultRow(cfg.experiment, series, "gamma_s", float(x), mean, ci, cfg.seed))
        pt = _snr_point(params_x, k).with_antennas(n)
        rows.append(
            ResultRow(
                cfg.experiment, f"C({n},{k:g})", "gamma_s", float(x), bound_c(pt), None, cfg.seed
            )
        )
    rows.append(
        ResultRow(
            cfg.experiment,
            f"crossover(N={n})",
            "gamma_s",
            math.nan,
            math.nan if crossover is None else crossover,
            None,
            cfg.seed,
        )
    )
    return rows, 0


def _run_sdr_compare(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    params = cfg.params
    grid = cfg.sweep_grid or (params.gamma_s,)
    draws = cfg.channel_draws or 10
    n, num_sensors = params.num_antennas, params.num_sensors
    k = cfg.model.k_factor if not cfg.model.is_awgn else 0.0
    base = RandomSource(cfg.seed)
    channels = [
        sample_channel(cfg.model, n, num_sensors, base.substream("sdr", d)).entries
        for d in range(draws)
    ]

    # the SDP solution scales linearly in the diagonal value, so the
    # phase pattern is solved once per draw and reused across gamma_s
    phase_vectors = []
    failures = 0
    for h in channels:
        problem = SdpProblem(cost=h.conj().T @ h, diag_value=1.0)
        solution = solve_sdp(problem)
        if solution.converged:
            phase_vectors.append(extract_phases(solution))
        else:
            phase_vectors.append(None)
            failures += 1

    crossover = None
    dominant = None
    if len(grid) >= 2:
        try:
            crossover = calibrate_crossover(params, cfg.model, grid, draws, base.stream(1))
        except NoCrossoverError as exc:
            dominant = exc.dominant

    rows: list[ResultRow] = []
    sdr_series = f"sdr_phase(N={n})" + ("[nonconverged]" if failures else "")
    for x in grid:
        params_x = _at_gamma_s(params, x)
        budget = params_x.gain_budget
        scale = math.sqrt(budget / num_sensors)
        fe_sdr = [
            finite_exponent(h, GainVector(values=scale * v, budget=budget), params_x)
            for h, v in zip(channels, phase_vectors)
            if v is not None
        ]
        fe1 = [finite_exponent(h, method1(h, params_x)[0], params_x) for h in channels]
        fe2 = [finite_exponent(h, method2(h, params_x), params_x) for h in channels]
        if crossover is not None:
            feh = fe1 if x < crossover else fe2
        elif dominant is not None:
            feh = fe1 if dominant == "method1" else fe2
        else:
            feh = fe1 if float(np.mean(fe1)) >= float(np.mean(fe2)) else fe2
        if fe_sdr:
            mean_sdr, ci_sdr = _mean_ci(fe_sdr)
        else:
            mean_sdr, ci_sdr = math.nan, None
        rows.append(
            ResultRow(cfg.experiment, sdr_series, "gamma_s", float(x), mean_sdr, ci_sdr, cfg.seed)
        )
        mean_h, ci_h = _mean_ci(feh)
        rows.append(
            ResultRow(
                cfg.experiment, f"hybrid(N={n})", "gamma_s", float(x), mean_h, ci_h, cfg.seed
            )
        )
        pt = _snr_point(params_x, k).with_antennas(n)
        rows.append(
            ResultRow(
                cfg.experiment, f"C({n},{k:g})", "gamma_s", float(x), bound_c(pt), None, cfg.seed
            )
        )
    return rows, 3 if failures else 0


def _run_asymptotic(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    params = cfg.params
    draws = cfg.channel_draws or 20
    num_sensors = params.num_sensors
    k = cfg.model.k_factor if not cfg.model.is_awgn else 0.0
    zeta = ZetaFactor.from_model(cfg.model)
    pt = _snr_point(params, k).with_antennas(1)
    base = RandomSource(cfg.seed)
    rows: list[ResultRow] = []
    for i, beta in enumerate(cfg.sweep_grid):
        bounds = bounds_asymptotic(beta, pt)
        for series, value in (
            ("lambda_max_limit", mp_lambda_max(beta)),
            ("E_inf", bounds.e_awgn_inf),
            ("B_inf", bounds.b_inf),
            ("C_inf", bounds.c_inf),
            ("G_inf_bound", gain_inf_bound(beta, zeta)),
        ):
            rows.append(ResultRow(cfg.experiment, series, "beta", float(beta), value, None, cfg.seed))
        n = max(1, round(num_sensors / beta))
        lams = []
        for d in range(draws):
            h = sample_channel(cfg.model, n, num_sensors, base.substream("asymptotic", i, d)).entries
            gram = h @ h.conj().T / num_sensors
            lams.append(float(hermitian_eig(gram).eigenvalues[-1]))
        mean, ci = _mean_ci(lams)
        rows.append(
            ResultRow(
                cfg.experiment,
                f"lambda_max_empirical(L={num_sensors})",
                "beta",
                float(beta),
                mean,
                ci,
                cfg.seed,
            )
        )
    return rows, 0


def _preset(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return dataclasses.replace(cfg, **overrides)


def _base_preset_params(num_sensors: int, num_antennas: int, gamma_c: float) -> NetworkParams:
    # theta = 1 and sigma_eta_sq = 1 fix gamma_s = 1; gamma_c scales P_T
    return NetworkParams(
        num_sensors=num_sensors,
        num_antennas=num_antennas,
        theta=1.0,
        sigma_eta_sq=1.0,
        sigma_nu_sq=1.0,
        p1=0.5,
        total_power=gamma_c,
    )


def _figure_2(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    grid = tuple(float(l) for l in range(1, 16))
    for model in (ChannelModel.awgn(), ChannelModel.ricean(1.0), ChannelModel.rayleigh()):
        for n in (2, 10):
            sub = _preset(
                cfg,
                params=_base_preset_params(15, n, 1.0),
                model=model,
                sweep_variable="L",
                sweep_grid=grid,
                channel_draws=cfg.channel_draws or 10,
            )
            rows.extend(_run_montecarlo(sub)[0])
    return rows, 0


def _figure_3(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    grid = (25, 50, 100, 150, 200, 300, 400)
    draws = cfg.channel_draws or 25
    params = _base_preset_params(grid[-1], 5, 10.0)
    for stream, model in enumerate((ChannelModel.awgn(), ChannelModel.ricean(1.0))):
        curve = empirical_exponent(
            params, model, grid, RandomSource(cfg.seed, stream_id=stream), draws=draws
        )
        label = model.label
        for l, value in zip(curve.l_grid, curve.values):
            rows.append(
                ResultRow(cfg.experiment, f"exponent({label},N=5)", "L", float(l), value, None, cfg.seed)
            )
        rows.append(
            ResultRow(
                cfg.experiment, f"plateau({label},N=5)", "L", math.nan, curve.plateau, None, cfg.seed
            )
        )
        pt = _snr_point(params, model.k_factor)
        closed = ("E_AWGN(N=5)", e_awgn(pt)) if model.is_awgn else ("E_NoCSIS(N=5)", e_nocsis(pt))
        for l in grid:
            rows.append(
                ResultRow(cfg.experiment, closed[0], "L", float(l), closed[1], None, cfg.seed)
            )
    return rows, 0


def _figure_4(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    sub = _preset(
        cfg,
        params=_base_preset_params(200, 1, 1.0),
        model=ChannelModel.ricean(1.0),
        n_list=(1, 2, 10),
        sweep_variable="gamma_c",
        sweep_grid=tuple(float(g) for g in range(1, 21)),
    )
    return _run_exponent_sweep(sub)


def _figure_5(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    for gamma_c in (float(g) for g in range(1, 21)):
        pt = SnrPoint(gamma_s=1.0, gamma_c=gamma_c, p1=0.5, k_factor=0.0, num_antennas=1)
        for series, value in (
            ("E_AWGN(N=1)", e_awgn(pt)),
            ("E_CSIS(1)", e_csis1_rayleigh_closed(pt)),
            ("E_PO(1)", e_po1(pt, ZetaFactor.rayleigh())),
            ("E_NoCSIS(N=1,K=10)", e_nocsis(dataclasses.replace(pt, k_factor=10.0))),
            ("E_NoCSIS(N=1,K=20)", e_nocsis(dataclasses.replace(pt, k_factor=20.0))),
        ):
            rows.append(ResultRow(cfg.experiment, series, "gamma_c", gamma_c, value, None, cfg.seed))
    return rows, 0


def _figure_6(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    for step in range(17):
        db = 5.0 + 0.25 * step
        pt = SnrPoint(
            gamma_s=1.0, gamma_c=snr_from_db(db), p1=0.5, k_factor=0.0, num_antennas=1
        )
        for series, value in (
            ("A(N=1)", e_awgn(pt)),
            ("B(N=1)", bound_b(pt)),
            ("C(N=1)", bound_c(pt)),
            ("E_CSIS(1)", e_csis1_rayleigh_closed(pt)),
        ):
            rows.append(ResultRow(cfg.experiment, series, "gamma_c_db", db, value, None, cfg.seed))
    return rows, 0


def _figure_7(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    zeta_rayleigh = ZetaFactor.rayleigh()
    zeta_ricean = ZetaFactor.from_model(ChannelModel.ricean(1.0))
    for n in range(1, 11):
        pt = SnrPoint(gamma_s=1.0, gamma_c=0.1, p1=0.5, k_factor=1.0, num_antennas=n)
        for series, value in (
            ("gain_awgn", gain_awgn(pt)),
            ("gain_nocsis", gain_nocsis(pt)),
            ("gain_csis_bound_nk", gain_csis_bound_nk(n, 1.0, zeta_ricean)),
            ("2zeta", 2.0 * zeta_rayleigh.zeta),
            ("N_line", float(n)),
        ):
            rows.append(ResultRow(cfg.experiment, series, "N", float(n), value, None, cfg.seed))
    return rows, 0


def _figure_8(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    rows: list[ResultRow] = []
    db_grid = tuple(float(db) for db in range(-5, 16))
    grid = tuple(snr_from_db(db) for db in db_grid)
    to_db = dict(zip(grid, db_grid))
    for n in (5, 50):
        sub = _preset(
            cfg,
            params=_base_preset_params(200, n, 10.0),
            model=ChannelModel.ricean(1.0),
            sweep_variable="gamma_s",
            sweep_grid=grid,
            channel_draws=cfg.channel_draws or 25,
        )
        for row in _run_schemes(sub)[0]:
            if row.series.startswith("crossover"):
                rows.append(
                    dataclasses.replace(
                        row,
                        series=f"crossover_db(N={n})",
                        x_name="gamma_s_db",
                        value=math.nan if math.isnan(row.value) else snr_to_db(row.value),
                    )
                )
            else:
                rows.append(
                    dataclasses.replace(row, x_name="gamma_s_db", x_value=to_db[row.x_value])
                )
    for db, x in zip(db_grid, grid):
        pt = SnrPoint(gamma_s=x, gamma_c=10.0, p1=0.5, k_factor=0.0, num_antennas=1)
        rows.append(
            ResultRow(
                cfg.experiment,
                "E_CSIS(1)",
                "gamma_s_db",
                db,
                e_csis1_rayleigh_closed(pt),
                None,
                cfg.seed,
            )
        )
    return rows, 0


def _figure_9(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    db_grid = tuple(-5.0 + 2.5 * step for step in range(7))
    grid = tuple(snr_from_db(db) for db in db_grid)
    to_db = dict(zip(grid, db_grid))
    sub = _preset(
        cfg,
        params=_base_preset_params(32, 3, 10.0),
        model=ChannelModel.ricean(1.0),
        sweep_variable="gamma_s",
        sweep_grid=grid,
        channel_draws=cfg.channel_draws or 10,
    )
    raw_rows, code = _run_sdr_compare(sub)
    rows = [
        dataclasses.replace(row, x_name="gamma_s_db", x_value=to_db[row.x_value])
        for row in raw_rows
    ]
    return rows, code


_FIGURES = {
    2: _figure_2,
    3: _figure_3,
    4: _figure_4,
    5: _figure_5,
    6: _figure_6,
    7: _figure_7,
    8: _figure_8,
    9: _figure_9,
}


def run(cfg: ExperimentConfig) -> tuple[list[ResultRow], int]:
    """Executes the configured experiment; returns (rows, exit code)."""
    if cfg.experiment == "figure":
        return _FIGURES[cfg.figure_id](cfg)
    runner = {
        "exponent-sweep": _run_exponent_sweep,
        "montecarlo": _run_montecarlo,
        "schemes": _run_schemes,
        "sdr-compare": _run_sdr_compare,
        "asymptotic": _run_asymptotic,
    }[cfg.experiment]
    return runner(cfg)


def _csv_num(value: float | None) -> str:
    if value is None:
        return ""
    return repr(float(value))


def rows_to_csv(rows) -> str:
    """Stable CSV serialization: one comment line on conventions, the
    fixed header, then one row per record."""
    buf = io.StringIO()
    buf.write(_DB_COMMENT + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for row in rows:
        writer.writerow(
            (
                row.experiment,
                row.series,
                row.x_name,
                _csv_num(row.x_value),
                _csv_num(row.value),
                _csv_num(row.ci95),
                str(row.seed),
            )
        )
    return buf.getvalue()


def _json_num(value: float | None):
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def rows_to_json(rows) -> str:
    """JSON serialization: an array of row objects with the CSV field
    names; non-finite values become explicit string sentinels."""
    payload = [
        {
            "experiment": row.experiment,
            "series": row.series,
            "x_name": row.x_name,
            "x_value": _json_num(row.x_value),
            "value": _json_num(row.value),
            "ci95": _json_num(row.ci95),
            "seed": row.seed,
        }
        for row in rows
    ]
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def main(argv=None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = argparse.ArgumentParser(
        prog="macdet",
        description="Run a detection-over-MAC experiment from a JSON config.",
    )
    parser.add_argument(
        "experiment",
        help="one of exponent-sweep, montecarlo, schemes, sdr-compare, "
        "asymptotic, figure (or figure2..figure9)",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output path")
    parser.add_argument("--format", choices=("csv", "json"), default=None, help="override the format")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    experiment = args.experiment
    figure_id = None
    if experiment.startswith("figure") and experiment != "figure":
        tail = experiment[len("figure") :]
        if not tail.isdigit():
            print(f"config error: unknown experiment {experiment!r}", file=sys.stderr)
            return 2
        experiment, figure_id = "figure", int(tail)

    try:
        raw = _read_json(args.config)
        if figure_id is not None and isinstance(raw, dict):
            named = raw.setdefault("figure_id", figure_id)
            if named != figure_id:
                raise ConfigError(
                    f"config figure_id {named} does not match {args.experiment!r}"
                )
        cfg = parse_config(raw, experiment)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output=args.out)
    if args.format is not None:
        cfg = dataclasses.replace(cfg, format=args.format)

    rows, code = run(cfg)
    text = rows_to_csv(rows) if cfg.format == "csv" else rows_to_json(rows)
    _write_output(text, cfg.output)
    return code


def console_main() -> None:
    sys.exit(main())
