"""Stationary measurements on recorded trajectories.

All quantities are evaluated in the frame rotating with the population
centroid: its rotation rate Omega comes from a least-squares line through
the unwrapped centroid phase, and phases are reported relative to the
fitted line so the centroid sits at phase zero mid-window.  An oscillator
is locked when its relative phase stays inside a small band for the whole
measurement window.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import CouplingSet, ModelParams
from .integrate import Trajectory

__all__ = [
    "OrderParameterSeries",
    "LockPartition",
    "order_parameter",
    "order_series",
    "estimate_omega",
    "detect_locked",
    "stationary_profiles",
    "amplitude_slope",
    "export_profiles",
    "summarize_run",
]

# Centroid magnitudes below this are treated as a vanishing mean field:
# the centroid phase is then meaningless and reported as zero.
R_TINY = 1e-12

# Mean centroid magnitudes below this make the rotation-rate fit
# unreliable; Omega is reported as nan (undefined, incoherent).
R_INCOHERENT = 1e-3

TOL_PHASE_DEFAULT = 0.05
N_SLOPE_BINS = 25


def order_parameter(z: np.ndarray) -> tuple[float, float]:
    """Centroid magnitude and phase of one snapshot (phase 0 if the
    magnitude is below the vanishing-field floor)."""
    c = np.mean(z)
    R = abs(c)
    theta = math.atan2(c.imag, c.real) if R >= R_TINY else 0.0
    return R, theta


@dataclass(frozen=True)
class OrderParameterSeries:
    """Centroid magnitude/phase over the measurement window, with the
    fitted rotation rate Omega, intercept Theta0, and detuning
    Delta = omega - Omega (nan when the field is too small to fit)."""

    times: np.ndarray
    R: np.ndarray
    Theta: np.ndarray  # unwrapped
    Omega: float
    Theta0: float
    Delta: float

    @property
    def R_mean(self) -> float:
        return float(self.R.mean())

    @property
    def incoherent(self) -> bool:
        return not np.isfinite(self.Omega)


def estimate_omega(times, Theta_unwrapped, omega: float, R_mean: float):
    """OLS line through the unwrapped centroid phase.

    Returns (Omega, Theta0, Delta); all nan when the mean field magnitude
    marks the run incoherent.
    """
    if R_mean <= R_INCOHERENT:
        return math.nan, math.nan, math.nan
    slope, intercept = np.polyfit(times, Theta_unwrapped, 1)
    return float(slope), float(intercept), float(omega - slope)


def order_series(traj: Trajectory, params: ModelParams | None = None) -> OrderParameterSeries:
    """Order parameter of every recorded snapshot plus the rotation fit."""
    params = params or traj.params
    c = traj.zs.mean(axis=1)
    R = np.abs(c)
    raw = np.where(R >= R_TINY, np.angle(c), 0.0)
    Theta = np.unwrap(raw)
    Omega, Theta0, Delta = estimate_omega(traj.times, Theta, params.omega, R.mean())
    return OrderParameterSeries(
        times=traj.times, R=R, Theta=Theta, Omega=Omega, Theta0=Theta0, Delta=Delta
    )


@dataclass(frozen=True)
class LockPartition:
    """Locked/drifting split with per-oscillator stationary values.

    phi_star and r_star are window means for every oscillator (circular
    mean for drifting phases); only the locked entries are stationary
    points, the drifting entries are descriptive.
    """

    locked_mask: np.ndarray
    phi_star: np.ndarray
    r_star: np.ndarray
    phase_span: np.ndarray
    tol_phase: float

    @property
    def locked(self) -> np.ndarray:
        return np.flatnonzero(self.locked_mask)

    @property
    def drifting(self) -> np.ndarray:
        return np.flatnonzero(~self.locked_mask)

    @property
    def n_locked(self) -> int:
        return int(self.locked_mask.sum())

    @property
    def locked_fraction(self) -> float:
        return float(self.locked_mask.mean())


def detect_locked(
    traj: Trajectory,
    series: OrderParameterSeries | None = None,
    tol_phase: float = TOL_PHASE_DEFAULT,
) -> LockPartition:
    """Oscillators whose phase relative to the rotating centroid stays
    within tol_phase (peak to peak) across the window are locked.

    With an incoherent mean field no rotating frame exists and every
    oscillator is drifting.
    """
    series = series or order_series(traj)
    n = traj.zs.shape[1]
    theta = np.unwrap(np.angle(traj.zs), axis=0)
    r_star = np.abs(traj.zs).mean(axis=0)
    if series.incoherent:
        phases = np.angle(np.exp(1j * theta).mean(axis=0))
        return LockPartition(
            locked_mask=np.zeros(n, dtype=bool),
            phi_star=phases,
            r_star=r_star,
            phase_span=np.full(n, np.inf),
            tol_phase=tol_phase,
        )
    frame = series.Omega * traj.times + series.Theta0
    phi = theta - frame[:, None]
    span = phi.max(axis=0) - phi.min(axis=0)
    locked = span < tol_phase
    # window means: plain for locked (variation < tol), circular otherwise
    phi_star = np.angle(np.exp(1j * phi).mean(axis=0))
    phi_star[locked] = np.angle(np.exp(1j * phi[:, locked].mean(axis=0)))
    return LockPartition(
        locked_mask=locked,
        phi_star=phi_star,
        r_star=r_star,
        phase_span=span,
        tol_phase=tol_phase,
    )


def stationary_profiles(partition: LockPartition, couplings: CouplingSet) -> np.ndarray:
    """Locked-oscillator profile, rows (K, phi_star, r_star) sorted by K."""
    if len(couplings) != partition.locked_mask.size:
        raise ValueError("couplings and partition sizes differ")
    idx = partition.locked
    order = np.argsort(couplings.K[idx], kind="stable")
    idx = idx[order]
    return np.column_stack(
        [couplings.K[idx], partition.phi_star[idx], partition.r_star[idx]]
    )


def amplitude_slope(profile: np.ndarray, n_bins: int = N_SLOPE_BINS):
    """Mean dr*/dK over the locked profile and an inflection flag.

    The K axis is cut into n_bins equal-width bins, empty bins are
    skipped, and slopes are finite differences of bin-mean r* against
    bin-mean K.  The flag reports exactly one positive-to-negative slope
    sign change.  Fewer than two occupied bins leave the slope undefined
    (nan, False).
    """
    if profile.ndim != 2 or profile.shape[1] != 3:
        raise ValueError("profile must have rows (K, phi_star, r_star)")
    if profile.shape[0] < 2:
        return math.nan, False
    K, r = profile[:, 0], profile[:, 2]
    lo, hi = K.min(), K.max()
    if hi - lo <= 0:
        return math.nan, False
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.clip(np.searchsorted(edges, K, side="right") - 1, 0, n_bins - 1)
    K_bin, r_bin = [], []
    for b in range(n_bins):
        m = which == b
        if m.any():
            K_bin.append(K[m].mean())
            r_bin.append(r[m].mean())
    if len(K_bin) < 2:
        return math.nan, False
    K_bin, r_bin = np.array(K_bin), np.array(r_bin)
    slopes = np.gradient(r_bin, K_bin)
    mean_slope = float(slopes.mean())
    # sign pattern with near-zero slopes dropped, then deduplicated
    scale = np.abs(slopes).max()
    signs = np.sign(slopes[np.abs(slopes) > 1e-3 * scale]) if scale > 0 else []
    pattern = [s for i, s in enumerate(signs) if i == 0 or s != signs[i - 1]]
    inflection = pattern == [1.0, -1.0]
    return mean_slope, inflection


def export_profiles(partition: LockPartition, couplings: CouplingSet, path):
    """Write `K,phi_star,r_star,locked` for every oscillator, sorted by K."""
    order = np.argsort(couplings.K, kind="stable")
    with open(path, "w") as fh:
        fh.write("K,phi_star,r_star,locked\n")
        for j in order:
            fh.write(
                f"{couplings.K[j]:.12g},{partition.phi_star[j]:.10g},"
                f"{partition.r_star[j]:.10g},{int(partition.locked_mask[j])}\n"
            )


def summarize_run(
    traj: Trajectory,
    couplings: CouplingSet,
    params: ModelParams | None = None,
    tol_phase: float = TOL_PHASE_DEFAULT,
) -> dict:
    """Scalar summary of one run (the JSON payload written by the CLI).

    state_label is the theory classification evaluated at the measured
    order parameter and detuning; null when the run is incoherent.
    """
    params = params or traj.params
    series = order_series(traj, params)
    part = detect_locked(traj, series, tol_phase)
    profile = stationary_profiles(part, couplings)
    mean_slope, inflection = amplitude_slope(profile)
    if series.incoherent:
        label = None
    else:
        from .theory import classify_state

        label = str(classify_state(series.R_mean, series.Delta, params, couplings))
    return {
        "R_tilde_mean": series.R_mean,
        "Omega": None if series.incoherent else series.Omega,
        "Delta": None if series.incoherent else series.Delta,
        "n_locked": part.n_locked,
        "locked_fraction": part.locked_fraction,
        "mean_amp_slope": None if math.isnan(mean_slope) else mean_slope,
        "inflection": bool(inflection),
        "state_label": label,
    }


def write_summary(summary: dict, path):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
