"""Mean-field theory of the stationary states.

In the frame rotating with the population centroid (magnitude R, phase
fixed to zero) each oscillator sees the constants R and Delta = omega -
Omega.  Writing Keff = S*K, c = Keff*d0*cos(alpha) and the effective
detuning dp = Delta + Keff*d0*sin(alpha), a locked oscillator satisfies

    u^3 - 2(lambda - c) u^2 + ((lambda - c)^2 + dp^2) u = (Keff*R)^2

for u = r*^2, with the stationary branch on u > max(0, lambda - c), and

    phi* = arcsin(dp * r* / (Keff * R)) - beta

on the principal branch.  An oscillator locks exactly when
Keff*R > |dp| * r*; the rest drift and contribute through their
time-averaged field.  Requiring the centroid of all contributions to
reproduce (R, 0) closes the system in the two unknowns (R, Delta).

Everything here is exact in the population limit; no phase-only
approximation is made, so amplitude degrees of freedom enter both the
locking condition and the drift average.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import CouplingSet, ModelParams

__all__ = [
    "TheoryError",
    "NoStableRoot",
    "AmplitudeCollapse",
    "DriftingOscillator",
    "SelfConsistentSolution",
    "StateLabel",
    "solve_amplitude",
    "incoherent_amplitude",
    "locked_phase",
    "locking_range",
    "lock_boundaries",
    "locked_contribution",
    "drift_contribution",
    "field_residual",
    "solve_self_consistency",
    "phi_slope_sign",
    "r_slope_sign",
    "phase_slope_dK",
    "amplitude_slope_dK",
    "classify_state",
    "predict_profiles",
    "theory_summary",
]

RESIDUAL_TOL = 1e-8
TIE_TOL = 1e-9


class TheoryError(RuntimeError):
    pass


class NoStableRoot(TheoryError):
    """No stationary amplitude exists: the oscillator drifts."""


class AmplitudeCollapse(TheoryError):
    """lambda - K d0 cos(alpha) <= 0: the limit cycle is destroyed and the
    amplitude decays to zero without a mean field."""


class DriftingOscillator(TheoryError):
    """Locked-phase request outside the locking range."""


def _effective(K, params: ModelParams):
    Keff = params.S * np.asarray(K, dtype=float)
    c = Keff * params.d0 * math.cos(params.alpha)
    return Keff, c


def _detuning(K, Delta, params: ModelParams):
    Keff = params.S * np.asarray(K, dtype=float)
    return Delta + Keff * params.d0 * math.sin(params.alpha)


def _stable_roots(K, R_tilde, Delta, params: ModelParams):
    """Vectorized stationary u = r*^2 on the stable branch.

    Returns (u, exists).  The cubic is strictly increasing beyond
    max(0, lambda - c), so a root there exists iff the polynomial is
    negative at that point, and bisection cannot miss it.
    """
    Keff, c = _effective(K, params)
    dp = Delta + Keff * params.d0 * math.sin(params.alpha)
    lam = params.lambda_
    target = (Keff * R_tilde) ** 2
    lo = np.maximum(0.0, lam - c)

    def p(u):
        return u * (dp**2 + (lam - u - c) ** 2) - target

    exists = p(lo) < 0.0
    hi = np.maximum(lo + 1.0, target) + 1.0
    a, b = lo.copy(), hi
    for _ in range(80):
        mid = 0.5 * (a + b)
        neg = p(mid) < 0.0
        a = np.where(neg, mid, a)
        b = np.where(neg, b, mid)
    u = 0.5 * (a + b)
    return np.where(exists, u, np.nan), exists


def incoherent_amplitude(K, params: ModelParams):
    """Amplitude sqrt(lambda - Keff d0 cos alpha) of an oscillator feeling
    no mean field; nan where the self-coupling collapses it."""
    _, c = _effective(K, params)
    a2 = params.lambda_ - c
    with np.errstate(invalid="ignore"):
        return np.where(a2 > 0.0, np.sqrt(np.maximum(a2, 0.0)), np.nan)


def solve_amplitude(K: float, R_tilde: float, Delta: float, params: ModelParams) -> float:
    """Stationary amplitude r* of one locked oscillator.

    With a vanishing mean field the incoherent amplitude is returned
    instead (or AmplitudeCollapse raised); without a stable stationary
    branch the oscillator drifts and NoStableRoot is raised.
    """
    if R_tilde < 0:
        raise ValueError("R_tilde must be >= 0")
    if R_tilde == 0.0:
        a = incoherent_amplitude(K, params)
        if np.isnan(a):
            raise AmplitudeCollapse(
                f"lambda - K d0 cos(alpha) <= 0 at K = {K:.6g}"
            )
        return float(a)
    u, exists = _stable_roots(np.array([K]), R_tilde, Delta, params)
    if not exists[0]:
        raise NoStableRoot(
            f"no stationary amplitude at K = {K:.6g} "
            f"(R = {R_tilde:.6g}, Delta = {Delta:.6g})"
        )
    return float(math.sqrt(u[0]))


def locked_phase(
    K: float, r_star: float, R_tilde: float, Delta: float, params: ModelParams
) -> float:
    """Stationary phase (centroid frame) on the principal arcsin branch."""
    Keff = params.S * K
    dp = _detuning(K, Delta, params)
    if R_tilde <= 0.0:
        raise DriftingOscillator("no rotating frame without a mean field")
    s = dp * r_star / (Keff * R_tilde)
    if abs(s) > 1.0:
        if abs(s) <= 1.0 + TIE_TOL:
            s = math.copysign(1.0, s)
        else:
            raise DriftingOscillator(
                f"locking condition violated at K = {K:.6g} (|arg| = {abs(s):.6g})"
            )
    return math.asin(s) - params.beta


def locking_range(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> np.ndarray:
    """Boolean mask over the coupling set: True where the oscillator locks.

    Locking requires both a stable stationary amplitude and
    Keff * R > |dp| * r*; these coincide except on the boundary itself.
    """
    u, exists = _stable_roots(couplings.K, R_tilde, Delta, params)
    Keff = params.S * couplings.K
    dp = _detuning(couplings.K, Delta, params)
    mask = np.zeros(len(couplings), dtype=bool)
    ok = exists
    with np.errstate(invalid="ignore"):
        cond = Keff * R_tilde - np.abs(dp) * np.sqrt(np.where(ok, u, 0.0)) > 0.0
    mask[ok] = cond[ok]
    return mask


def _r_star_fallback(K, R_tilde, Delta, params):
    """Stationary amplitude, falling back to the incoherent amplitude for
    drifting oscillators (nan where collapsed)."""
    K = np.atleast_1d(np.asarray(K, dtype=float))
    if R_tilde > 0.0:
        u, exists = _stable_roots(K, R_tilde, Delta, params)
        r = np.where(exists, np.sqrt(np.where(exists, u, 0.0)), np.nan)
    else:
        exists = np.zeros(K.size, dtype=bool)
        r = np.full(K.size, np.nan)
    a = incoherent_amplitude(K, params)
    return np.where(exists, r, a)


def lock_boundaries(
    R_tilde: float,
    Delta: float,
    params: ModelParams,
    couplings: CouplingSet,
    n_scan: int = 512,
):
    """Continuous edges (K_lock_lo, K_lock_hi) of the locked interval
    inside [K_min, K_max]; (nan, nan) when nothing locks.

    The margin h(K) = Keff R - |dp| r*(K) is scanned and each sign change
    refined by bisection; r*(K) passes continuously to the incoherent
    amplitude across the boundary.
    """
    K_lo, K_hi = couplings.K_min, couplings.K_max

    def margin(K):
        K = np.atleast_1d(K)
        r = _r_star_fallback(K, R_tilde, Delta, params)
        Keff = params.S * K
        dp = _detuning(K, Delta, params)
        h = Keff * R_tilde - np.abs(dp) * r
        return np.where(np.isnan(r), -np.inf, h)

    grid = np.linspace(K_lo, K_hi, n_scan)
    h = margin(grid)
    inside = h > 0
    if not inside.any():
        return math.nan, math.nan

    def refine(a, b):
        ha = margin(np.array([a]))[0]
        for _ in range(60):
            mid = 0.5 * (a + b)
            hm = margin(np.array([mid]))[0]
            if (hm > 0) == (ha > 0):
                a, ha = mid, hm
            else:
                b = mid
        return 0.5 * (a + b)

    first = int(np.argmax(inside))
    last = int(len(grid) - 1 - np.argmax(inside[::-1]))
    lo = K_lo if first == 0 else refine(grid[first - 1], grid[first])
    hi = K_hi if last == len(grid) - 1 else refine(grid[last + 1], grid[last])
    return float(lo), float(hi)


def locked_contribution(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> complex:
    """Centroid contribution (1/N) sum r* e^{i phi*} of locked oscillators."""
    mask = locking_range(R_tilde, Delta, params, couplings)
    if not mask.any():
        return 0.0 + 0.0j
    K = couplings.K[mask]
    u, _ = _stable_roots(K, R_tilde, Delta, params)
    r = np.sqrt(u)
    Keff = params.S * K
    dp = _detuning(K, Delta, params)
    s = np.clip(dp * r / (Keff * R_tilde), -1.0, 1.0)
    phi = np.arcsin(s) - params.beta
    return complex(np.sum(r * np.exp(1j * phi)) / len(couplings))


def drift_contribution(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> complex:
    """Time-averaged centroid contribution of the drifting oscillators.

    Each drifter is averaged over its bare cycle at amplitude
    a = sqrt(lambda - Keff d0 cos alpha); collapsed oscillators (a^2 <= 0)
    carry no field and are skipped with a warning.
    """
    mask = ~locking_range(R_tilde, Delta, params, couplings)
    if not mask.any():
        return 0.0 + 0.0j
    K = couplings.K[mask]
    Keff, c = _effective(K, params)
    a2 = params.lambda_ - c
    dp = _detuning(K, Delta, params)
    valid = a2 > 0.0
    if not valid.all():
        warnings.warn(
            f"{int((~valid).sum())} drifting oscillators have collapsed "
            "amplitude and were excluded from the mean field",
            stacklevel=2,
        )
    K, Keff, a2, dp = K[valid], Keff[valid], a2[valid], dp[valid]
    num = Keff * R_tilde * (2.0 * a2 + 1j * dp)
    den = 2.0 * (dp**2 + 4.0 * a2**2)
    term = np.exp(-1j * params.beta) * num / den
    return complex(np.sum(term) / len(couplings))


def field_residual(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> complex:
    """Self-consistency defect: total centroid minus the assumed R."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lc = locked_contribution(R_tilde, Delta, params, couplings)
        dc = drift_contribution(R_tilde, Delta, params, couplings)
    return lc + dc - R_tilde


@dataclass(frozen=True)
class SelfConsistentSolution:
    R_tilde: float
    Delta: float
    converged: bool
    residual: float
    n_iter: int
    branch: str


def _newton(params, couplings, R0, D0, max_iter=60):
    sqlam = math.sqrt(params.lambda_)
    R_cap = 1.5 * sqlam

    def G(x):
        f = field_residual(x[0], x[1], params, couplings)
        return np.array([f.real, f.imag])

    x = np.array([min(max(R0, 1e-4), R_cap), D0])
    g = G(x)
    n_eval = 1
    for it in range(max_iter):
        norm = np.hypot(g[0], g[1])
        if norm < RESIDUAL_TOL:
            return x, norm, it, True
        eps_R = 1e-7 * max(x[0], 0.05 * sqlam)
        eps_D = 1e-7 * max(abs(x[1]), 0.05)
        gR = G(x + [eps_R, 0.0])
        gD = G(x + [0.0, eps_D])
        J = np.column_stack([(gR - g) / eps_R, (gD - g) / eps_D])
        n_eval += 2
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        for _ in range(12):
            xn = x + t * step
            xn[0] = min(max(xn[0], 1e-6), R_cap)
            xn[1] = min(max(xn[1], -2.5), 2.5)
            gn = G(xn)
            n_eval += 1
            if np.hypot(gn[0], gn[1]) < norm:
                x, g = xn, gn
                improved = True
                break
            t *= 0.5
        if not improved:
            break
    norm = np.hypot(g[0], g[1])
    return x, norm, max_iter, norm < RESIDUAL_TOL


def _analytic_init(params, couplings):
    # homogeneous in-phase estimate: the centroid detuning and amplitude
    # of a single effective oscillator at the mean coupling
    Kbar = params.S * couplings.K_mean
    D0 = Kbar * (math.sin(params.beta) - params.d0 * math.sin(params.alpha))
    a2 = params.lambda_ + Kbar * (math.cos(params.beta) - params.d0 * math.cos(params.alpha))
    R0 = math.sqrt(max(a2, 0.04 * params.lambda_))
    return R0, D0


def solve_self_consistency(
    params: ModelParams,
    couplings: CouplingSet,
    init: tuple[float, float] | None = None,
) -> SelfConsistentSolution:
    """Solve the two self-consistency equations for (R, Delta).

    Damped Newton iteration with a finite-difference Jacobian; warm starts
    (previous grid cell, analytic in-phase estimate) come first, then a
    coarse grid scan over R in (0, 1.5 sqrt(lambda)], Delta in [-2, 2].
    R = 0 always solves the equations trivially; when nothing else does,
    that incoherent branch is reported with converged = False.
    """
    starts = []
    if init is not None:
        starts.append(tuple(init))
    starts.append(_analytic_init(params, couplings))

    best = None
    for R0, D0 in starts:
        x, res, n_it, ok = _newton(params, couplings, R0, D0)
        if ok and x[0] > 1e-4:
            return _finish(x, res, n_it, params, couplings)
        if best is None or res < best[1]:
            best = (x, res, n_it)

    sqlam = math.sqrt(params.lambda_)
    Rs = np.linspace(0.08 * sqlam, 1.3 * sqlam, 18)
    Ds = np.linspace(-2.0, 2.0, 21)
    # rank by residual relative to R: the trivial R = 0 branch otherwise
    # drowns out finite candidates at the small-R end of the scan
    grid = [
        (abs(field_residual(R, D, params, couplings)) / max(R, 0.05 * sqlam), R, D)
        for R in Rs
        for D in Ds
    ]
    grid.sort(key=lambda t: t[0])
    for _, R0, D0 in grid[:6]:
        x, res, n_it, ok = _newton(params, couplings, R0, D0)
        if ok and x[0] > 1e-4:
            return _finish(x, res, n_it, params, couplings)
        if res < best[1]:
            best = (x, res, n_it)

    x, res, n_it = best
    if x[0] <= 1e-4:
        return SelfConsistentSolution(
            R_tilde=0.0,
            Delta=math.nan,
            converged=False,
            residual=float(res),
            n_iter=n_it,
            branch="incoherent branch",
        )
    return SelfConsistentSolution(
        R_tilde=float(x[0]),
        Delta=float(x[1]),
        converged=False,
        residual=float(res),
        n_iter=n_it,
        branch="not converged",
    )


def _finish(x, res, n_it, params, couplings):
    mask = locking_range(x[0], x[1], params, couplings)
    frac = mask.mean()
    if frac == 1.0:
        branch = "fully locked"
    elif frac == 0.0:
        branch = "fully drifting"
    else:
        branch = "locked+drifting"
    return SelfConsistentSolution(
        R_tilde=float(x[0]),
        Delta=float(x[1]),
        converged=True,
        residual=float(res),
        n_iter=n_it,
        branch=branch,
    )


def phi_slope_sign(Delta: float) -> int:
    """Sign of d(phi*)/dK along the locked branch: opposite to Delta."""
    if abs(Delta) < TIE_TOL:
        return 0
    return -1 if Delta > 0 else 1


def r_slope_sign(Delta: float, phi_star: float, beta: float) -> int:
    """Sign of dr*/dK from the quadrant of phi* + beta.

    phi* + beta in (0, pi/2) gives sign(Delta); in (-pi/2, 0) the opposite;
    exactly zero gives 0.  Outside the open principal quadrant the locked
    branch assumptions fail and the request is contradictory.
    """
    x = phi_star + beta
    if abs(x) >= math.pi / 2:
        raise ValueError(
            f"phi* + beta = {x:.6g} lies outside the principal branch"
        )
    sD = 0 if abs(Delta) < TIE_TOL else (1 if Delta > 0 else -1)
    if abs(x) < TIE_TOL or sD == 0:
        return 0
    return sD if x > 0 else -sD


def phase_slope_dK(
    K: float, r_star: float, R_tilde: float, Delta: float, params: ModelParams
) -> float:
    """Exact d(phi*)/dK at fixed amplitude (the arcsin branch derivative)."""
    Keff = params.S * K
    dp = _detuning(K, Delta, params)
    s = dp * r_star / (Keff * R_tilde)
    cosphi = math.sqrt(max(1.0 - s * s, 0.0))
    if cosphi == 0.0:
        raise DriftingOscillator("slope undefined on the locking boundary")
    return -Delta * r_star / (params.S * K**2 * R_tilde * cosphi)


def amplitude_slope_dK(
    K: float, R_tilde: float, Delta: float, params: ModelParams
) -> float:
    """Exact dr*/dK along the locked branch by implicit differentiation
    of the stationary-amplitude cubic."""
    u, exists = _stable_roots(np.array([K]), R_tilde, Delta, params)
    if not exists[0]:
        raise NoStableRoot(f"no locked branch at K = {K:.6g}")
    u = float(u[0])
    lam = params.lambda_
    Keff, c = _effective(np.array([K]), params)
    c = float(c[0])
    dp = float(_detuning(K, Delta, params))
    D = lam - u - c
    den = dp**2 + D**2 - 2.0 * u * D
    num = Delta * dp + D * (lam - u)
    du_dK = 2.0 * (u / K) * num / den
    return du_dK / (2.0 * math.sqrt(u))


@dataclass(frozen=True)
class StateLabel:
    """Taxonomy label: major regime, lock pattern, amplitude-slope tag.

    major: S1..S4 from the signs of Delta and the competition between the
    mean field and the degree-proportional detuning.  pattern: sequence of
    drifting (d) and locked (l with phase-slope sign) bands along the K
    axis.  amp_slope: sign of the locked amplitude profile; mixed_pos_to_neg
    marks a single interior maximum.  ambiguous is set when the realized
    combination has no row in the catalog (boundary cases).
    """

    major: str
    pattern: str
    amp_slope: str
    ambiguous: bool = False
    locked_fraction: float = 0.0

    def __str__(self) -> str:
        return f"{self.major}_{self.pattern}"

    @property
    def label(self) -> str:
        return str(self)


def _amp_slope_tag(A, B, Delta, params):
    """Sign pattern of dr*/dK over a locked interval [A, B] from the
    detuning product Delta * dp; a zero of dp inside flips + to -."""
    if A is None or not np.isfinite(A):
        return "undefined"
    sD = 0 if abs(Delta) < TIE_TOL else math.copysign(1, Delta)
    if sD == 0:
        return "undefined"
    pa = Delta * _detuning(A, Delta, params)
    pb = Delta * _detuning(B, Delta, params)
    if pa > 0 and pb > 0:
        return "positive"
    if pa < 0 and pb < 0:
        return "negative"
    if pa >= 0 >= pb:
        return "mixed_pos_to_neg"
    return "undefined"


def classify_state(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> StateLabel:
    """Name the stationary state at a given mean field and detuning.

    Membership is evaluated directly from the locking condition over the
    coupling set, so the pattern is whatever the condition realizes; the
    major index follows the catalog conventions (sign of Delta, mean field
    against the self-detuning scale D0 = |d0 sin alpha| r*).
    """
    if not np.isfinite(R_tilde) or not np.isfinite(Delta):
        raise ValueError("R_tilde and Delta must be finite")
    ds = params.d0 * math.sin(params.alpha)
    m = abs(ds)
    sD = 0 if abs(Delta) < TIE_TOL else (1 if Delta > 0 else -1)

    order = np.argsort(couplings.K, kind="stable")
    K_sorted = couplings.K[order]
    mask = locking_range(R_tilde, Delta, params, couplings)[order]
    frac = float(mask.mean())

    r_ends = _r_star_fallback(
        np.array([couplings.K_min, couplings.K_max]), R_tilde, Delta, params
    )
    D0_lo = m * r_ends[0] if np.isfinite(r_ends[0]) else math.inf
    D0_hi = m * r_ends[1] if np.isfinite(r_ends[1]) else math.inf

    competing = (sD < 0 and ds >= 0) or (sD > 0 and ds < 0)
    ambiguous = False

    if sD == 0:
        major = "S1" if mask.any() else "S4"
    elif competing:
        base = "S1" if sD < 0 else "S2"
        if R_tilde >= D0_hi - TIE_TOL:
            major = base
        else:
            major = "S3"
    else:
        # reinforcing detuning: locking needs R to beat D0 outright
        if R_tilde > min(D0_lo, D0_hi) + TIE_TOL:
            major = "S1" if sD < 0 else "S2"
        else:
            major = "S4"

    # pattern from the realized mask: contiguous locked block expected
    slope_tag = {0: "l0", 1: "l-", -1: "l+"}[sD]
    if not mask.any():
        pattern = "d"
    elif mask.all():
        pattern = slope_tag
    else:
        first = int(np.argmax(mask))
        last = len(mask) - 1 - int(np.argmax(mask[::-1]))
        if not mask[first : last + 1].all():
            ambiguous = True  # fragmented block: boundary-resolution artifact
        if first == 0:
            pattern = f"{slope_tag}d"
        elif last == len(mask) - 1:
            pattern = f"d{slope_tag}"
        else:
            pattern = f"d{slope_tag}d"

    if major == "S4" and pattern != "d":
        ambiguous = True
    if major in ("S1", "S2") and pattern == "d":
        # no catalog row: fully drifting despite a super-critical field
        ambiguous = True

    A, B = lock_boundaries(R_tilde, Delta, params, couplings)
    amp = _amp_slope_tag(A, B, Delta, params) if mask.any() else "undefined"
    return StateLabel(
        major=major,
        pattern=pattern,
        amp_slope=amp,
        ambiguous=ambiguous,
        locked_fraction=frac,
    )


def predict_profiles(
    R_tilde: float, Delta: float, params: ModelParams, couplings: CouplingSet
) -> np.ndarray:
    """Per-oscillator theory profile, rows (K, phi*, r*, locked) sorted by
    K.  Drifting rows carry the incoherent amplitude and a nan phase."""
    order = np.argsort(couplings.K, kind="stable")
    K = couplings.K[order]
    mask = locking_range(R_tilde, Delta, params, couplings)[order]
    r = _r_star_fallback(K, R_tilde, Delta, params)
    phi = np.full(K.size, np.nan)
    if mask.any():
        Keff = params.S * K[mask]
        dp = _detuning(K[mask], Delta, params)
        s = np.clip(dp * r[mask] / (Keff * R_tilde), -1.0, 1.0)
        phi[mask] = np.arcsin(s) - params.beta
    return np.column_stack([K, phi, r, mask.astype(float)])


def export_predicted_profiles(profile: np.ndarray, path):
    with open(path, "w") as fh:
        fh.write("K,phi_star_pred,r_star_pred,locked_pred\n")
        for K, phi, r, locked in profile:
            fh.write(f"{K:.12g},{phi:.10g},{r:.10g},{int(locked)}\n")


def theory_summary(
    sol: SelfConsistentSolution, params: ModelParams, couplings: CouplingSet
) -> dict:
    """JSON payload for one self-consistent solution."""
    if sol.R_tilde > 0 and np.isfinite(sol.Delta):
        label = str(classify_state(sol.R_tilde, sol.Delta, params, couplings))
        K_lo, K_hi = lock_boundaries(sol.R_tilde, sol.Delta, params, couplings)
    else:
        label = None
        K_lo = K_hi = math.nan
    return {
        "R_tilde": sol.R_tilde,
        "Delta": None if not np.isfinite(sol.Delta) else sol.Delta,
        "converged": sol.converged,
        "residual": sol.residual,
        "branch": sol.branch,
        "state_label": label,
        "K_lock_lo": None if math.isnan(K_lo) else K_lo,
        "K_lock_hi": None if math.isnan(K_hi) else K_hi,
    }
