"""Sensor gain strategies and the finite-size exponent statistic.

Strategies cover channel-independent uniform gains, the optimal and
phase-only single-antenna rules, two reduced-complexity multi-antenna
methods (best-antenna selection and top-eigenvector beamforming) with
an empirically calibrated hybrid between them, and an SDP-based
phase-only design.  Every strategy spends the gain budget
P = total_power / (p1 theta^2 + sigma_eta_sq) with equality.

Any (channel, gains) pair is scored by the statistic

    (theta^2 / (8 L)) alpha^H H^H R(alpha)^{-1} H alpha,
    R(alpha) = H D(alpha) R_eta D(alpha)^H H^H + sigma_nu^2 I,

whose large-L limits are the closed forms in `exponents`.  Gains are
computed centrally from known channel state; feedback to the sensors is
modeled as noiseless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    ChannelMatrix,
    ChannelModel,
    NetworkParams,
    RandomSource,
    SensingNoiseModel,
    sample_channel,
)
from .numerics import canonical_phase, hermitian_eig, solve_hermitian_pd
from .sdr import (
    AdmmNonConvergence,
    AdmmSettings,
    SdpProblem,
    extract_phases,
    solve_sdp,
)

__all__ = [
    "GainVector",
    "SchemeChoice",
    "SCHEME_KINDS",
    "NoCrossoverError",
    "received_covariance",
    "finite_exponent",
    "alpha_uniform",
    "alpha_opt_n1",
    "alpha_phase_only_n1",
    "method1",
    "method2",
    "hybrid",
    "calibrate_crossover",
    "alpha_sdr_phase",
    "build_gains",
]

SCHEME_KINDS = (
    "uniform",
    "opt_single",
    "phase_only_n1",
    "method1",
    "method2",
    "hybrid",
    "sdr_phase",
)


@dataclass(frozen=True)
class GainVector:
    """Complex sensor gains alpha with their power budget P."""

    values: np.ndarray
    budget: float

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a non-empty vector")
        if not (math.isfinite(self.budget) and self.budget > 0.0):
            raise ValueError("budget must be a positive finite real")
        power = float(np.sum(np.abs(v) ** 2))
        if power > self.budget * (1.0 + 1e-9):
            raise ValueError(f"power {power} exceeds budget {self.budget}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class SchemeChoice:
    """Named gain strategy; hybrid carries its calibrated switch point."""

    kind: str
    gamma_s_crossover: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "hybrid":
            c = self.gamma_s_crossover
            if c is None or not math.isfinite(c):
                raise ValueError("hybrid requires a finite gamma_s_crossover")
        elif self.gamma_s_crossover is not None:
            raise ValueError("gamma_s_crossover only applies to hybrid")


class NoCrossoverError(RuntimeError):
    """The two methods never swap order on the calibration grid."""

    def __init__(self, dominant: str):
        super().__init__(f"no crossover found; {dominant} dominates the grid")
        self.dominant = dominant


def _entries(channel) -> np.ndarray:
    if isinstance(channel, ChannelMatrix):
        return channel.entries
    h = np.asarray(channel, dtype=np.complex128)
    if h.ndim != 2:
        raise ValueError("channel must be a matrix of shape (N, L)")
    return h


def _gain_values(alpha) -> np.ndarray:
    if isinstance(alpha, GainVector):
        return alpha.values
    return np.asarray(alpha, dtype=np.complex128)


def _check_dims(h: np.ndarray, a: np.ndarray, params: NetworkParams) -> None:
    if h.shape != (params.num_antennas, params.num_sensors):
        raise ValueError(
            f"channel shape {h.shape} does not match "
            f"({params.num_antennas}, {params.num_sensors})"
        )
    if a.shape != (params.num_sensors,):
        raise ValueError(f"gain length {a.shape} does not match {params.num_sensors}")


def received_covariance(
    channel, alpha, params: NetworkParams, noise: SensingNoiseModel | None = None
) -> np.ndarray:
    """Covariance H D(alpha) R_eta D(alpha)^H H^H + sigma_nu^2 I of the
    array output, with R_eta = sigma_eta_sq I when no noise model is
    given.  A diagonal correlated model reproduces the iid result
    bit-for-bit (its Cholesky factor is exactly diagonal)."""
    h = _entries(channel)
    a = _gain_values(alpha)
    _check_dims(h, a, params)
    model = noise if noise is not None else SensingNoiseModel(
        sigma_eta_sq=params.sigma_eta_sq
    )
    factor = model.scale_factor(params.num_sensors)
    b = h * a[np.newaxis, :]
    bs = b @ factor if isinstance(factor, np.ndarray) else b * factor
    r = bs @ bs.conj().T
    r[np.diag_indices_from(r)] += params.sigma_nu_sq
    return r


def finite_exponent(
    channel, alpha, params: NetworkParams, noise: SensingNoiseModel | None = None
) -> float:
    """Exponent statistic (theta^2/(8L)) alpha^H H^H R^{-1} H alpha,
    evaluated through a Cholesky solve (the covariance is never
    inverted explicitly)."""
    h = _entries(channel)
    a = _gain_values(alpha)
    _check_dims(h, a, params)
    v = h @ a
    r = received_covariance(h, a, params, noise)
    x = solve_hermitian_pd(r, v)
    q = float(np.vdot(v, x).real)
    return params.theta**2 * max(q, 0.0) / (8.0 * params.num_sensors)


def alpha_uniform(params: NetworkParams) -> GainVector:
    """Channel-independent gains sqrt(P/L) at every sensor."""
    p = params.gain_budget
    values = np.full(params.num_sensors, math.sqrt(p / params.num_sensors), dtype=np.complex128)
    return GainVector(values=values, budget=p)


def alpha_opt_n1(h_row, params: NetworkParams) -> GainVector:
    """Optimal gains for a single receive antenna: magnitudes
    |h_l| / (sigma_eta_sq P |h_l|^2 + sigma_nu_sq) scaled to spend P,
    phases conjugate to the channel."""
    h = np.asarray(h_row, dtype=np.complex128).reshape(-1)
    if h.size != params.num_sensors:
        raise ValueError(f"expected {params.num_sensors} channel entries")
    g = np.abs(h)
    if not g.any():
        raise ValueError("channel row is identically zero")
    p = params.gain_budget
    w = g / (params.sigma_eta_sq * p * g**2 + params.sigma_nu_sq)
    scale = math.sqrt(p / float(np.sum(w**2)))
    values = scale * w * np.exp(-1j * np.angle(h))
    return GainVector(values=values, budget=p)


def alpha_phase_only_n1(h_row, params: NetworkParams) -> GainVector:
    """Equal magnitudes sqrt(P/L) with channel-conjugate phases."""
    h = np.asarray(h_row, dtype=np.complex128).reshape(-1)
    if h.size != params.num_sensors:
        raise ValueError(f"expected {params.num_sensors} channel entries")
    p = params.gain_budget
    values = math.sqrt(p / params.num_sensors) * np.exp(-1j * np.angle(h))
    return GainVector(values=values, budget=p)


def method1(channel, params: NetworkParams) -> tuple[GainVector, int]:
    """Best-antenna selection: picks the antenna maximizing
    (theta^2/(8L)) sum_l 1/(sigma_eta_sq + sigma_nu_sq/(P |h_nl|^2))
    and applies the single-antenna optimal gains to its row.  Ties go
    to the lowest antenna index."""
    h = _entries(channel)
    if h.shape != (params.num_antennas, params.num_sensors):
        raise ValueError("channel shape does not match params")
    p = params.gain_budget
    g2 = np.abs(h) ** 2
    terms = p * g2 / (params.sigma_eta_sq * p * g2 + params.sigma_nu_sq)
    metric = params.theta**2 / (8.0 * params.num_sensors) * terms.sum(axis=1)
    selected = int(np.argmax(metric))
    return alpha_opt_n1(h[selected], params), selected


def method2(channel, params: NetworkParams) -> GainVector:
    """Top-eigenvector beamforming: sqrt(P) times the unit top
    eigenvector of H^H H (the optimal direction when sensing noise is
    absent).  For N < L the eigenvector is recovered from the small
    Gram matrix H H^H."""
    h = _entries(channel)
    if h.shape != (params.num_antennas, params.num_sensors):
        raise ValueError("channel shape does not match params")
    n_ant, n_sens = h.shape
    v = None
    if n_ant < n_sens:
        small = hermitian_eig(h @ h.conj().T)
        if small.eigenvalues[-1] > 0.0:
            u = small.eigenvectors[:, -1]
            v = h.conj().T @ u
            v = canonical_phase(v / np.linalg.norm(v))
    if v is None:
        big = hermitian_eig(h.conj().T @ h)
        v = big.eigenvectors[:, -1]
    p = params.gain_budget
    return GainVector(values=math.sqrt(p) * v, budget=p)


def hybrid(channel, params: NetworkParams, crossover_gamma_s: float) -> GainVector:
    """Best-antenna gains below the calibrated sensing-SNR crossover,
    top-eigenvector beamforming at or above it."""
    if params.gamma_s < crossover_gamma_s:
        return method1(channel, params)[0]
    return method2(channel, params)


def _mean_exponent_gap(
    channels: list[np.ndarray], params: NetworkParams
) -> float:
    gaps = []
    for h in channels:
        fe1 = finite_exponent(h, method1(h, params)[0], params)
        fe2 = finite_exponent(h, method2(h, params), params)
        gaps.append(fe1 - fe2)
    return float(np.mean(gaps))


def calibrate_crossover(
    base_params: NetworkParams,
    model: ChannelModel,
    gamma_s_grid,
    trials: int,
    rng: RandomSource,
    tol_db: float = 0.05,
) -> float:
    """Sensing SNR at which the mean exponents of the two
    reduced-complexity methods cross, averaged over `trials` common
    channel draws per grid point and refined by bisection in log
    gamma_s to within tol_db.

    Raises NoCrossoverError (carrying the dominant method) when the
    ordering never flips on the grid.
    """
    grid = [float(g) for g in gamma_s_grid]
    if len(grid) < 2:
        raise ValueError("gamma_s_grid needs at least two points")
    for a, b in zip(grid, grid[1:]):
        # repeated entries are only meaningful at gamma_s = inf, where
        # the whole grid collapses to the zero-sensing-noise point
        if b < a or (b == a and math.isfinite(a)):
            raise ValueError("gamma_s_grid must be strictly increasing")
    if any(g <= 0.0 for g in grid):
        raise ValueError("gamma_s_grid entries must be positive")
    finite = [math.isfinite(g) for g in grid]
    if any(finite) and not all(finite):
        raise ValueError("gamma_s_grid mixes finite and infinite entries")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    channels = [
        sample_channel(
            model, base_params.num_antennas, base_params.num_sensors, rng.substream("calibrate", t)
        ).entries
        for t in range(trials)
    ]

    def params_at(gamma_s: float) -> NetworkParams:
        sigma = 0.0 if math.isinf(gamma_s) else base_params.theta**2 / gamma_s
        return replace(base_params, sigma_eta_sq=sigma)

    gaps = [_mean_exponent_gap(channels, params_at(g)) for g in grid]
    bracket = None
    for i in range(len(grid) - 1):
        if gaps[i] == 0.0 and math.isfinite(grid[i]):
            return grid[i]
        if gaps[i] * gaps[i + 1] < 0.0:
            bracket = i
            break
    if bracket is None:
        if gaps[-1] == 0.0 and math.isfinite(grid[-1]):
            return grid[-1]
        raise NoCrossoverError("method1" if gaps[0] > 0.0 else "method2")

    lo, hi = grid[bracket], grid[bracket + 1]
    gap_lo = gaps[bracket]
    while 10.0 * math.log10(hi / lo) > tol_db:
        mid = math.sqrt(lo * hi)
        gap_mid = _mean_exponent_gap(channels, params_at(mid))
        if gap_mid == 0.0:
            return mid
        if (gap_mid > 0.0) == (gap_lo > 0.0):
            lo, gap_lo = mid, gap_mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def alpha_sdr_phase(
    channel, params: NetworkParams, settings: AdmmSettings | None = None
) -> GainVector:
    """Phase-only gains from the semidefinite relaxation of
    max alpha^H H^H H alpha over |alpha_l|^2 = P/L, rounded through the
    top eigenvector of the SDP solution.

    Raises AdmmNonConvergence when the solver hits its iteration cap.
    """
    h = _entries(channel)
    if h.shape != (params.num_antennas, params.num_sensors):
        raise ValueError("channel shape does not match params")
    p = params.gain_budget
    problem = SdpProblem(cost=h.conj().T @ h, diag_value=p / params.num_sensors)
    solution = solve_sdp(problem, settings)
    if not solution.converged:
        raise AdmmNonConvergence(solution)
    phases = extract_phases(solution)
    values = math.sqrt(p / params.num_sensors) * phases
    return GainVector(values=values, budget=p)


def build_gains(
    choice: SchemeChoice,
    channel,
    params: NetworkParams,
    settings: AdmmSettings | None = None,
) -> GainVector:
    """Dispatches a SchemeChoice to its constructor.  Single-antenna
    rules require N = 1."""
    kind = choice.kind
    if kind == "uniform":
        return alpha_uniform(params)
    if kind in ("opt_single", "phase_only_n1"):
        h = _entries(channel)
        if h.shape[0] != 1:
            raise ValueError(f"{kind} requires a single-antenna channel")
        builder = alpha_opt_n1 if kind == "opt_single" else alpha_phase_only_n1
        return builder(h[0], params)
    if kind == "method1":
        return method1(channel, params)[0]
    if kind == "method2":
        return method2(channel, params)
    if kind == "hybrid":
        return hybrid(channel, params, choice.gamma_s_crossover)
    return alpha_sdr_phase(channel, params, settings)
