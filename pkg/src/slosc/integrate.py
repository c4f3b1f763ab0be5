"""Fixed-step RK4 integration with seeded initial conditions.

Single integrations are sequential; independent runs (different seeds or
parameters) may execute concurrently without shared state.  The mean-field
and full-network systems are integrated by compiled kernels; arbitrary
right-hand sides fall back to a plain Python loop with identical stepping
arithmetic.

RNG is numpy's PCG64 (splittable, counter-style seeding via SeedSequence);
the algorithm name is echoed into every run configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import (
    CouplingSet,
    EnsembleState,
    ModelParams,
    NetworkGraph,
    full_network_rhs,
    mean_field_rhs,
)

RNG_ALGORITHM = "numpy PCG64"

__all__ = [
    "IntegrationPlan",
    "Trajectory",
    "IntegrationError",
    "MeanFieldSystem",
    "FullNetworkSystem",
    "init_state",
    "rk4_step",
    "integrate",
    "export_trajectory",
    "export_snapshot",
]


class IntegrationError(RuntimeError):
    """Raised when a derivative or state turns non-finite.

    Carries the time stamp of the failure and the last finite state.
    """

    def __init__(self, t: float, last_state: EnsembleState | None = None):
        super().__init__(f"non-finite state encountered at t = {t:.6g}")
        self.t = t
        self.last_state = last_state


@dataclass(frozen=True)
class IntegrationPlan:
    """Stepping and recording schedule.

    Defaults follow the measurement protocol used throughout: dt = 0.01,
    a 500 time-unit discarded transient, and a 100 time-unit measurement
    window recorded every 10th step.
    """

    dt: float = 0.01
    t_transient: float = 500.0
    t_measure: float = 100.0
    record_stride: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.t_transient < 0:
            raise ValueError("t_transient must be >= 0")
        if self.t_measure < 10 * self.dt:
            raise ValueError("t_measure must cover at least 10 steps")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    def with_seed(self, seed: int) -> "IntegrationPlan":
        return IntegrationPlan(
            dt=self.dt,
            t_transient=self.t_transient,
            t_measure=self.t_measure,
            record_stride=self.record_stride,
            seed=int(seed),
        )

    @property
    def n_transient_steps(self) -> int:
        return int(round(self.t_transient / self.dt))

    @property
    def n_total_steps(self) -> int:
        return int(round((self.t_transient + self.t_measure) / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Recorded measurement-window snapshots of one integration."""

    times: np.ndarray  # (n_rec,)
    zs: np.ndarray  # (n_rec, N) complex
    params: ModelParams
    source: CouplingSet | NetworkGraph | None = None

    def __post_init__(self):
        dt = np.diff(self.times)
        if self.times.size > 1 and not np.all(dt > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def n_recorded(self) -> int:
        return self.times.size

    @property
    def states(self) -> list[EnsembleState]:
        return [
            EnsembleState(z=self.zs[i], t=float(self.times[i]))
            for i in range(self.times.size)
        ]

    @property
    def theta(self) -> np.ndarray:
        """Unwrapped phases, shape (n_rec, N)."""
        return np.unwrap(np.angle(self.zs), axis=0)

    @property
    def r(self) -> np.ndarray:
        return np.abs(self.zs)


@dataclass(frozen=True)
class MeanFieldSystem:
    """Bound mean-field right-hand side; integrate() runs it compiled."""

    params: ModelParams
    couplings: CouplingSet

    def __call__(self, state: EnsembleState) -> np.ndarray:
        return mean_field_rhs(state, self.params, self.couplings)


@dataclass(frozen=True)
class FullNetworkSystem:
    """Bound full-adjacency right-hand side with a CSR neighbor table."""

    params: ModelParams
    network: NetworkGraph
    _csr: tuple = field(init=False, repr=False)

    def __post_init__(self):
        A = self.network.adjacency
        indptr = np.zeros(A.shape[0] + 1, dtype=np.int64)
        indices = np.flatnonzero(A)  # row-major positions
        cols = indices % A.shape[1]
        counts = (A != 0).sum(axis=1)
        indptr[1:] = np.cumsum(counts)
        object.__setattr__(self, "_csr", (indptr, cols.astype(np.int64)))

    def __call__(self, state: EnsembleState) -> np.ndarray:
        return full_network_rhs(state, self.params, self.network)


def init_state(params: ModelParams, seed) -> EnsembleState:
    """Random initial condition: theta ~ U[0, 2pi), r ~ N(sqrt(lambda), 0.1).

    Non-positive amplitude draws are resampled (not clamped) so the
    distribution shape is preserved.  Deterministic given the seed.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, params.N)
    r = rng.normal(np.sqrt(params.lambda_), 0.1, params.N)
    while True:
        bad = r <= 0
        if not bad.any():
            break
        r[bad] = rng.normal(np.sqrt(params.lambda_), 0.1, int(bad.sum()))
    return EnsembleState(z=r * np.exp(1j * theta), t=0.0)


def rk4_step(state: EnsembleState, rhs, dt: float) -> EnsembleState:
    """One classical Runge-Kutta step of size dt.

    rhs maps an EnsembleState to the complex derivative array.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    z, t = state.z, state.t

    def deriv(s):
        k = np.asarray(rhs(s), dtype=complex)
        if not np.isfinite(k).all():
            raise IntegrationError(t, last_state=state)
        return k

    k1 = deriv(state)
    k2 = deriv(EnsembleState(z + 0.5 * dt * k1, t + 0.5 * dt))
    k3 = deriv(EnsembleState(z + 0.5 * dt * k2, t + 0.5 * dt))
    k4 = deriv(EnsembleState(z + dt * k3, t + dt))
    z_new = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(z_new).all():
        raise IntegrationError(t + dt, last_state=state)
    return EnsembleState(z_new, t + dt)


@njit(cache=True)
def _mf_deriv(z, K, lam, om, S, eb, self_term, out):
    n = z.shape[0]
    acc = 0.0 + 0.0j
    for j in range(n):
        acc += z[j]
    drive = (acc / n) * eb
    for j in range(n):
        zj = z[j]
        rr = zj.real * zj.real + zj.imag * zj.imag
        out[j] = (lam - rr + 1j * om) * zj + S * K[j] * (drive - self_term * zj)


@njit(cache=True)
def _mf_kernel(z0, K, lam, om, S, eb, self_term, dt, n_total, n_trans, stride, rec):
    n = z0.shape[0]
    z = z0.copy()
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    i_rec = 0
    for i in range(n_total + 1):
        if i >= n_trans and (i - n_trans) % stride == 0:
            for j in range(n):
                rec[i_rec, j] = z[j]
            i_rec += 1
        if i == n_total:
            break
        _mf_deriv(z, K, lam, om, S, eb, self_term, k1)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * dt * k1[j]
        _mf_deriv(tmp, K, lam, om, S, eb, self_term, k2)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * dt * k2[j]
        _mf_deriv(tmp, K, lam, om, S, eb, self_term, k3)
        for j in range(n):
            tmp[j] = z[j] + dt * k3[j]
        _mf_deriv(tmp, K, lam, om, S, eb, self_term, k4)
        ok = True
        for j in range(n):
            z[j] = z[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not (np.isfinite(z[j].real) and np.isfinite(z[j].imag)):
                ok = False
        if not ok:
            return i + 1, i_rec
    return -1, i_rec


@njit(cache=True)
def _net_deriv(z, indptr, indices, deg, lam, om, SN, eb, self_base, out):
    n = z.shape[0]
    for j in range(n):
        acc = 0.0 + 0.0j
        for p in range(indptr[j], indptr[j + 1]):
            acc += z[indices[p]]
        zj = z[j]
        rr = zj.real * zj.real + zj.imag * zj.imag
        out[j] = (lam - rr + 1j * om) * zj + SN * (
            acc * eb - deg[j] * self_base * zj
        )


@njit(cache=True)
def _net_kernel(
    z0, indptr, indices, deg, lam, om, SN, eb, self_base, dt, n_total, n_trans, stride, rec
):
    n = z0.shape[0]
    z = z0.copy()
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    i_rec = 0
    for i in range(n_total + 1):
        if i >= n_trans and (i - n_trans) % stride == 0:
            for j in range(n):
                rec[i_rec, j] = z[j]
            i_rec += 1
        if i == n_total:
            break
        _net_deriv(z, indptr, indices, deg, lam, om, SN, eb, self_base, k1)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * dt * k1[j]
        _net_deriv(tmp, indptr, indices, deg, lam, om, SN, eb, self_base, k2)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * dt * k2[j]
        _net_deriv(tmp, indptr, indices, deg, lam, om, SN, eb, self_base, k3)
        for j in range(n):
            tmp[j] = z[j] + dt * k3[j]
        _net_deriv(tmp, indptr, indices, deg, lam, om, SN, eb, self_base, k4)
        ok = True
        for j in range(n):
            z[j] = z[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not (np.isfinite(z[j].real) and np.isfinite(z[j].imag)):
                ok = False
        if not ok:
            return i + 1, i_rec
    return -1, i_rec


def _recorded_count(plan: IntegrationPlan) -> int:
    n_meas = plan.n_total_steps - plan.n_transient_steps
    return n_meas // plan.record_stride + 1


def _recorded_times(plan: IntegrationPlan) -> np.ndarray:
    n_rec = _recorded_count(plan)
    i = plan.n_transient_steps + plan.record_stride * np.arange(n_rec)
    return i * plan.dt


def integrate(initial: EnsembleState, rhs, plan: IntegrationPlan) -> Trajectory:
    """Run the plan: t_transient unrecorded, then record every
    record_stride-th step through t_measure (endpoints inclusive).

    MeanFieldSystem and FullNetworkSystem right-hand sides dispatch to
    compiled kernels; any other callable runs through rk4_step directly.
    On a non-finite state the failure is reported with its time stamp and
    the snapshots recorded so far.
    """
    times = _recorded_times(plan)
    n_rec = times.size

    if isinstance(rhs, MeanFieldSystem):
        p, K = rhs.params, rhs.couplings.K
        rec = np.empty((n_rec, initial.n), np.complex128)
        fail_step, i_rec = _mf_kernel(
            initial.z.astype(np.complex128),
            K,
            p.lambda_,
            p.omega,
            p.S,
            np.exp(-1j * p.beta),
            p.d0 * np.exp(-1j * p.alpha),
            plan.dt,
            plan.n_total_steps,
            plan.n_transient_steps,
            plan.record_stride,
            rec,
        )
        source = rhs.couplings
    elif isinstance(rhs, FullNetworkSystem):
        p = rhs.params
        indptr, indices = rhs._csr
        rec = np.empty((n_rec, initial.n), np.complex128)
        fail_step, i_rec = _net_kernel(
            initial.z.astype(np.complex128),
            indptr,
            indices,
            rhs.network.degrees.astype(np.float64),
            p.lambda_,
            p.omega,
            p.S / initial.n,
            np.exp(-1j * p.beta),
            p.d0 * np.exp(-1j * p.alpha),
            plan.dt,
            plan.n_total_steps,
            plan.n_transient_steps,
            plan.record_stride,
            rec,
        )
        source = rhs.network
    else:
        return _integrate_generic(initial, rhs, plan, times)

    if fail_step >= 0:
        t_fail = fail_step * plan.dt
        last = (
            EnsembleState(rec[i_rec - 1], float(times[i_rec - 1]))
            if i_rec > 0
            else initial
        )
        raise IntegrationError(t_fail, last_state=last)
    params = rhs.params
    return Trajectory(times=times, zs=rec, params=params, source=source)


def _integrate_generic(initial, rhs, plan, times) -> Trajectory:
    n_rec = times.size
    rec = np.empty((n_rec, initial.n), np.complex128)
    state = initial
    i_rec = 0
    n_trans, stride = plan.n_transient_steps, plan.record_stride
    try:
        for i in range(plan.n_total_steps + 1):
            if i >= n_trans and (i - n_trans) % stride == 0:
                rec[i_rec] = state.z
                i_rec += 1
            if i == plan.n_total_steps:
                break
            state = rk4_step(state, rhs, plan.dt)
    except IntegrationError as err:
        last = (
            EnsembleState(rec[i_rec - 1], float(times[i_rec - 1]))
            if i_rec > 0
            else initial
        )
        raise IntegrationError(err.t, last_state=last) from None
    params = getattr(rhs, "params", None) or ModelParams(N=initial.n)
    return Trajectory(times=times, zs=rec, params=params, source=getattr(rhs, "couplings", None))


def export_trajectory(traj: Trajectory, path, unwrap: bool = False):
    """Write `t,osc_id,theta,r` rows, one per recorded oscillator-snapshot."""
    theta = traj.theta if unwrap else np.angle(traj.zs)
    r = traj.r
    n_rec, n = traj.zs.shape
    with open(path, "w") as fh:
        fh.write("t,osc_id,theta,r\n")
        for i in range(n_rec):
            t = traj.times[i]
            for j in range(n):
                fh.write(f"{t:.10g},{j},{theta[i, j]:.10g},{r[i, j]:.10g}\n")


def export_snapshot(traj: Trajectory, couplings: CouplingSet, path, index: int = -1):
    """Write one instant as `osc_id,theta,r,K` (complex-plane plot input)."""
    z = traj.zs[index]
    theta, r = np.angle(z), np.abs(z)
    with open(path, "w") as fh:
        fh.write("osc_id,theta,r,K\n")
        for j in range(z.size):
            fh.write(f"{j},{theta[j]:.10g},{r[j]:.10g},{couplings.K[j]:.12g}\n")
