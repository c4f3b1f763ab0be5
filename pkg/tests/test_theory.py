import math

import numpy as np
import pytest

from slosc import CouplingSet, EnsembleState, IntegrationPlan, ModelParams, integrate
from slosc.theory import (
    AmplitudeCollapse,
    DriftingOscillator,
    NoStableRoot,
    amplitude_slope_dK,
    classify_state,
    drift_contribution,
    field_residual,
    incoherent_amplitude,
    lock_boundaries,
    locked_contribution,
    locked_phase,
    locking_range,
    phase_slope_dK,
    phi_slope_sign,
    predict_profiles,
    r_slope_sign,
    solve_amplitude,
    solve_self_consistency,
)


def cubic_coeffs(K, R, Delta, params):
    Keff = params.S * K
    c = Keff * params.d0 * math.cos(params.alpha)
    dp = Delta + Keff * params.d0 * math.sin(params.alpha)
    lam = params.lambda_
    return [1.0, -2.0 * (lam - c), (lam - c) ** 2 + dp**2, -((Keff * R) ** 2)], c


def random_params(rng, **overrides):
    d = dict(
        lambda_=rng.uniform(0.5, 1.5),
        omega=np.pi,
        alpha=rng.uniform(0.0, 0.9 * np.pi),
        beta=rng.uniform(0.0, 0.45 * np.pi),
        d0=rng.uniform(-1.5, 1.5),
        S=rng.choice([1.0, 1.7]),
        N=1,
    )
    d.update(overrides)
    return ModelParams(**d)


def test_stationary_amplitude_against_polynomial_roots():
    # independent root finder: numpy's companion-matrix eigenvalues,
    # filtered to the stable branch u > max(0, lambda - c)
    rng = np.random.default_rng(1)
    found = 0
    for i in range(300):
        params = random_params(rng)
        K = rng.uniform(0.005, 0.12)
        R = rng.uniform(0.05, 1.2)
        # half the draws sit in the near-resonant band where locking occurs
        Delta = rng.uniform(-1.5, 1.5) * (0.02 if i % 2 else 1.0)
        coeffs, c = cubic_coeffs(K, R, Delta, params)
        roots = np.roots(coeffs)
        lo = max(0.0, params.lambda_ - c)
        real = [
            z.real
            for z in roots
            if abs(z.imag) < 1e-9 and z.real > lo + 1e-12
        ]
        try:
            r = solve_amplitude(K, R, Delta, params)
        except NoStableRoot:
            assert len(real) == 0
            continue
        found += 1
        assert len(real) == 1  # stable branch root is unique
        assert r**2 == pytest.approx(real[0], rel=1e-8, abs=1e-12)
    assert found > 50  # both outcomes exercised


def test_stationary_amplitude_satisfies_cubic_exactly():
    rng = np.random.default_rng(2)
    for _ in range(100):
        params = random_params(rng)
        K = rng.uniform(0.005, 0.1)
        R = rng.uniform(0.1, 1.0)
        Delta = rng.uniform(-1.0, 1.0)
        try:
            r = solve_amplitude(K, R, Delta, params)
        except NoStableRoot:
            continue
        coeffs, _ = cubic_coeffs(K, R, Delta, params)
        u = r * r
        val = ((coeffs[0] * u + coeffs[1]) * u + coeffs[2]) * u + coeffs[3]
        scale = abs(coeffs[3]) + u**3
        assert abs(val) < 1e-10 * scale


def frame_rhs(params, K, R_tilde, Delta):
    # dynamics of one oscillator in the frame rotating with the centroid:
    # same equation with omega -> Delta and a frozen external field
    Keff = params.S * K
    drive = Keff * R_tilde * np.exp(-1j * params.beta)
    selfterm = Keff * params.d0 * np.exp(-1j * params.alpha)

    def rhs(state):
        w = state.z
        return (params.lambda_ - np.abs(w) ** 2 + 1j * Delta) * w + drive - selfterm * w

    return rhs


def test_locked_state_is_a_stable_fixed_point_of_the_frame_dynamics():
    # the strongest check available: the (r*, phi*) pair must be an
    # attracting equilibrium of the actual driven-oscillator ODE
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 25:
        params = random_params(rng)
        K = rng.uniform(0.005, 0.12)
        R = rng.uniform(0.1, 1.2)
        Delta = rng.uniform(-0.8, 0.8)
        mask = locking_range(R, Delta, params, CouplingSet(np.array([K])))
        if not mask[0]:
            continue
        r = solve_amplitude(K, R, Delta, params)
        phi = locked_phase(K, r, R, Delta, params)
        w = r * np.exp(1j * phi)
        rhs = frame_rhs(params, K, R, Delta)
        dw = rhs(EnsembleState(np.array([w])))[0]
        assert abs(dw) < 1e-9 * max(r, 1.0)

        # numerical Jacobian in (Re w, Im w); both eigenvalues must damp
        eps = 1e-7

        def F(x, y):
            out = rhs(EnsembleState(np.array([x + 1j * y])))[0]
            return np.array([out.real, out.imag])

        J = np.column_stack(
            [
                (F(w.real + eps, w.imag) - F(w.real - eps, w.imag)) / (2 * eps),
                (F(w.real, w.imag + eps) - F(w.real, w.imag - eps)) / (2 * eps),
            ]
        )
        assert np.linalg.eigvals(J).real.max() < 0
        checked += 1


def test_locked_phase_principal_branch_and_errors():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.3, d0=0.0)
    K, R, Delta = 0.02, 0.5, 0.004
    r = solve_amplitude(K, R, Delta, params)
    phi = locked_phase(K, r, R, Delta, params)
    s = Delta * r / (K * R)
    assert phi == pytest.approx(math.asin(s) - 0.3, abs=1e-12)
    assert math.cos(phi + 0.3) > 0  # principal branch
    with pytest.raises(DriftingOscillator):
        locked_phase(K, r, R, 2.0, params)  # detuning far beyond locking
    with pytest.raises(DriftingOscillator):
        locked_phase(K, r, 0.0, Delta, params)


def test_locking_range_matches_scalar_condition():
    rng = np.random.default_rng(4)
    for _ in range(30):
        params = random_params(rng)
        K = np.sort(rng.uniform(0.004, 0.12, 40))
        cs = CouplingSet(K)
        R = rng.uniform(0.05, 1.0)
        Delta = rng.uniform(-1.0, 1.0)
        mask = locking_range(R, Delta, params, cs)
        for j in (0, 13, 39):
            Keff = params.S * K[j]
            dp = Delta + Keff * params.d0 * math.sin(params.alpha)
            try:
                r = solve_amplitude(K[j], R, Delta, params)
            except (NoStableRoot, AmplitudeCollapse):
                assert not mask[j]
                continue
            assert mask[j] == (Keff * R > abs(dp) * r)


def test_incoherent_amplitude_and_collapse():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=1.5)
    # lambda - K d0 cos(alpha) crosses zero at K = 2/3
    assert incoherent_amplitude(0.1, params) == pytest.approx(math.sqrt(0.85))
    assert np.isnan(incoherent_amplitude(0.9, params))
    assert solve_amplitude(0.1, 0.0, 0.3, params) == pytest.approx(math.sqrt(0.85))
    with pytest.raises(AmplitudeCollapse):
        solve_amplitude(0.9, 0.0, 0.3, params)


def test_locked_contribution_two_routes_agree():
    # production route sums r* e^{i phi*}; the reference route evaluates
    # e^{-i beta} (r* sqrt(Keff^2 R^2 - dp^2 r*^2) + i dp r*^2) / (Keff R)
    rng = np.random.default_rng(5)
    for _ in range(20):
        params = random_params(rng)
        cs = CouplingSet(np.sort(rng.uniform(0.004, 0.1, 60)))
        R = rng.uniform(0.2, 1.0)
        Delta = rng.uniform(-0.5, 0.5)
        mask = locking_range(R, Delta, params, cs)
        if not mask.any():
            continue
        got = locked_contribution(R, Delta, params, cs)
        acc = 0.0 + 0.0j
        for K in cs.K[mask]:
            r = solve_amplitude(K, R, Delta, params)
            Keff = params.S * K
            dp = Delta + Keff * params.d0 * math.sin(params.alpha)
            inner = max(Keff**2 * R**2 - dp**2 * r**2, 0.0)
            acc += (r * math.sqrt(inner) + 1j * dp * r * r) / (Keff * R)
        want = np.exp(-1j * params.beta) * acc / len(cs)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-14)


def test_drift_amplitude_response_matches_true_dynamics():
    # the drift average rests on the first-order amplitude response
    # r = a + eps*(A cos(phi+beta) + B sin(phi+beta)); extract A and B
    # from the actual driven-oscillator ODE and compare
    params = ModelParams(
        lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.4, d0=0.6, N=1
    )
    K, R, Delta = 0.1, 5e-3, 2.0
    cs = CouplingSet(np.array([K]))
    assert not locking_range(R, Delta, params, cs)[0]

    Keff = params.S * K
    eps = Keff * R
    a2 = params.lambda_ - Keff * params.d0 * math.cos(params.alpha)
    dp = Delta + Keff * params.d0 * math.sin(params.alpha)
    A = 2.0 * a2 / (dp**2 + 4.0 * a2**2)
    B = dp / (dp**2 + 4.0 * a2**2)

    rhs = frame_rhs(params, K, R, Delta)
    plan = IntegrationPlan(dt=0.002, t_transient=40.0, t_measure=150.0, record_stride=5)
    traj = integrate(EnsembleState(np.array([math.sqrt(a2) + 0j])), rhs, plan)
    w = traj.zs[:, 0]
    r, psi = np.abs(w), np.angle(w) + params.beta
    X = np.column_stack([np.ones_like(r), np.cos(psi), np.sin(psi)])
    a_fit, Afit, Bfit = np.linalg.lstsq(X, r, rcond=None)[0]
    assert a_fit == pytest.approx(math.sqrt(a2), rel=1e-3)
    assert Afit == pytest.approx(eps * A, rel=0.03)
    assert Bfit == pytest.approx(eps * B, rel=0.03)


def test_drift_contribution_is_uniform_average_of_response():
    # averaging (a + eps A cos psi + eps B sin psi) e^{i(psi - beta)} over
    # a uniform cycle by quadrature must reproduce the closed form
    from scipy import integrate as sci_integrate

    params = ModelParams(
        lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.4, d0=0.6, N=1
    )
    K, R, Delta = 0.1, 5e-3, 2.0
    cs = CouplingSet(np.array([K]))
    want = drift_contribution(R, Delta, params, cs)

    Keff = params.S * K
    eps = Keff * R
    a2 = params.lambda_ - Keff * params.d0 * math.cos(params.alpha)
    dp = Delta + Keff * params.d0 * math.sin(params.alpha)
    A = 2.0 * a2 / (dp**2 + 4.0 * a2**2)
    B = dp / (dp**2 + 4.0 * a2**2)

    def integrand(psi, part):
        r = math.sqrt(a2) + eps * (A * math.cos(psi) + B * math.sin(psi))
        val = r * np.exp(1j * (psi - params.beta)) / (2 * np.pi)
        return val.real if part == 0 else val.imag

    re, _ = sci_integrate.quad(integrand, 0, 2 * np.pi, args=(0,))
    im, _ = sci_integrate.quad(integrand, 0, 2 * np.pi, args=(1,))
    assert complex(re, im) == pytest.approx(want, rel=1e-8)


def test_collapsed_oscillator_is_slaved_not_drifting():
    # with lambda - Keff d0 cos(alpha) < 0 the oscillator has no cycle of
    # its own; any nonzero field leaves it at a stable fixed point, so it
    # counts as locked and never enters the drift average
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=1.5)
    cs = CouplingSet(np.array([0.1, 0.9]))  # second one has no bare cycle
    mask = locking_range(0.01, 1.5, params, cs)
    assert not mask[0] and mask[1]
    val = drift_contribution(0.01, 1.5, params, cs)
    params_one = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=1.5, N=1)
    only_first = drift_contribution(0.01, 1.5, params_one, CouplingSet(np.array([0.1])))
    assert val == pytest.approx(only_first / 2.0, rel=1e-12)


def test_drift_contribution_warns_on_collapsed_drifters():
    # with a vanished field everyone drifts; the collapsed one carries no
    # cycle to average over and is dropped with a warning
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=1.5)
    cs = CouplingSet(np.array([0.1, 0.9]))
    assert not locking_range(0.0, 1.5, params, cs).any()
    with pytest.warns(UserWarning, match="collapsed"):
        val = drift_contribution(0.0, 1.5, params, cs)
    assert val == 0.0


def test_self_consistency_on_homogeneous_couplings_closed_form():
    # identical couplings lock in phase: R = r*, phi* = 0, and the pair
    # (R, Delta) has the closed form R^2 = lambda + Keff(cos b - d0 cos a),
    # Delta = Keff (sin b - d0 sin a)
    for alpha, beta, d0, S in [
        (0.0, 0.3, 0.0, 1.0),
        (0.25 * np.pi, 0.2, 0.8, 1.0),
        (0.75 * np.pi, 0.1, 1.2, 1.5),
        (0.5 * np.pi, 0.45, -0.5, 1.0),
    ]:
        params = ModelParams(lambda_=1.0, omega=np.pi, alpha=alpha, beta=beta, d0=d0, S=S)
        cs = CouplingSet.homogeneous(0.02, 50)
        Keff = S * 0.02
        R_want = math.sqrt(
            1.0 + Keff * (math.cos(beta) - d0 * math.cos(alpha))
        )
        D_want = Keff * (math.sin(beta) - d0 * math.sin(alpha))
        sol = solve_self_consistency(params, cs)
        assert sol.converged
        assert sol.residual < 1e-8
        assert sol.R_tilde == pytest.approx(R_want, abs=1e-7)
        assert sol.Delta == pytest.approx(D_want, abs=1e-7)
        assert sol.branch == "fully locked"


def test_self_consistency_residual_is_small_at_solution():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.25 * np.pi, d0=0.5)
    rng = np.random.default_rng(8)
    cs = CouplingSet(np.clip(rng.normal(0.02, 0.0045, 400), 1e-4, None))
    sol = solve_self_consistency(params, cs)
    assert sol.converged
    assert abs(field_residual(sol.R_tilde, sol.Delta, params, cs)) < 1e-8
    assert 0 < sol.R_tilde < 1.5
    assert sol.branch in ("fully locked", "locked+drifting")


def test_self_consistency_amplitude_death_returns_incoherent():
    # a population of identical-frequency units locks for any beta short of
    # pi/2, so the trivial branch only wins under total amplitude death:
    # every lambda - Keff d0 cos(alpha) < 0 and the slaved gain below one
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.4999 * np.pi, d0=0.0)
    cs = CouplingSet.homogeneous(0.02, 50)
    sol = solve_self_consistency(params, cs)
    assert sol.converged and sol.branch == "fully locked"

    dead = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=200.0)
    cs2 = CouplingSet(np.linspace(7.85e-3, 34.4e-3, 40))
    sol2 = solve_self_consistency(dead, cs2)
    assert not sol2.converged
    assert sol2.branch == "incoherent branch"
    assert sol2.R_tilde == 0.0


def test_phase_slope_derivative_matches_finite_difference():
    rng = np.random.default_rng(9)
    for _ in range(20):
        params = random_params(rng)
        K = rng.uniform(0.01, 0.08)
        R = rng.uniform(0.3, 1.0)
        Delta = rng.uniform(-0.3, 0.3)
        cs = CouplingSet(np.array([K]))
        if not locking_range(R, Delta, params, cs)[0]:
            continue
        r = solve_amplitude(K, R, Delta, params)
        h = 1e-6 * K
        try:
            hi = locked_phase(K + h, r, R, Delta, params)
            lo = locked_phase(K - h, r, R, Delta, params)
        except DriftingOscillator:
            continue
        fd = (hi - lo) / (2 * h)
        assert phase_slope_dK(K, r, R, Delta, params) == pytest.approx(
            fd, rel=1e-4, abs=1e-10
        )


def test_amplitude_slope_derivative_matches_finite_difference():
    rng = np.random.default_rng(10)
    done = 0
    while done < 20:
        params = random_params(rng)
        K = rng.uniform(0.01, 0.08)
        R = rng.uniform(0.3, 1.0)
        Delta = rng.uniform(-0.3, 0.3)
        h = 1e-6 * K
        try:
            r_hi = solve_amplitude(K + h, R, Delta, params)
            r_lo = solve_amplitude(K - h, R, Delta, params)
            got = amplitude_slope_dK(K, R, Delta, params)
        except NoStableRoot:
            continue
        fd = (r_hi - r_lo) / (2 * h)
        assert got == pytest.approx(fd, rel=1e-4, abs=1e-8)
        done += 1


def test_slope_sign_laws():
    assert phi_slope_sign(0.4) == -1
    assert phi_slope_sign(-0.04) == 1
    assert phi_slope_sign(0.0) == 0
    assert r_slope_sign(0.3, 0.2, 0.1) == 1  # phi+beta > 0, Delta > 0
    assert r_slope_sign(0.3, -0.4, 0.1) == -1
    assert r_slope_sign(-0.3, 0.2, 0.1) == -1
    assert r_slope_sign(0.3, -0.1, 0.1) == 0  # phi + beta = 0
    assert r_slope_sign(0.0, 0.2, 0.1) == 0
    with pytest.raises(ValueError, match="principal"):
        r_slope_sign(0.3, 1.6, 0.1)


def test_r_slope_sign_equals_sign_of_detuning_product():
    # sin(phi* + beta) shares the sign of the effective detuning, so the
    # quadrant rule collapses to sign(Delta * (Delta + Keff d0 sin alpha))
    rng = np.random.default_rng(11)
    done = 0
    while done < 40:
        params = random_params(rng)
        K = rng.uniform(0.01, 0.08)
        R = rng.uniform(0.3, 1.0)
        Delta = rng.uniform(-0.3, 0.3)
        cs = CouplingSet(np.array([K]))
        if not locking_range(R, Delta, params, cs)[0]:
            continue
        r = solve_amplitude(K, R, Delta, params)
        phi = locked_phase(K, r, R, Delta, params)
        dp = Delta + params.S * K * params.d0 * math.sin(params.alpha)
        want = np.sign(Delta * dp) if abs(Delta * dp) > 1e-30 else 0
        assert r_slope_sign(Delta, phi, params.beta) == want
        done += 1


def test_slope_signs_hold_along_a_self_consistent_profile():
    # the quadrant rule tracks only the phase-balance response; the full
    # profile derivative adds amplitude feedback that moves the sign change
    # slightly off the zero of the effective detuning, so compare away from
    # that zero and check the sign flip brackets it
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.1, d0=1.35)
    cs = CouplingSet(GAUSS_LIKE)
    sol = solve_self_consistency(params, cs)
    assert sol.converged
    R, Delta = sol.R_tilde, sol.Delta
    assert Delta < -1e-3
    ds = params.d0 * math.sin(params.alpha)
    mask = locking_range(R, Delta, params, cs)
    assert mask.any()
    slopes, laws, dps = [], [], []
    for K in GAUSS_LIKE[mask]:
        r = solve_amplitude(K, R, Delta, params)
        phi = locked_phase(K, r, R, Delta, params)
        dps.append(Delta + params.S * K * ds)
        slopes.append(amplitude_slope_dK(K, R, Delta, params))
        laws.append(r_slope_sign(Delta, phi, params.beta))
        # total phase slope, with the amplitude root tracked across K
        h = 1e-6
        ph = [
            locked_phase(Kx, solve_amplitude(Kx, R, Delta, params), R, Delta, params)
            for Kx in (K - h, K + h)
        ]
        assert np.sign((ph[1] - ph[0]) / (2 * h)) == phi_slope_sign(Delta)
    slopes, laws, dps = map(np.asarray, (slopes, laws, dps))
    clear = np.abs(dps) > 0.15 * abs(Delta)
    assert clear.sum() > 100
    assert (np.sign(slopes[clear]) == laws[clear]).all()
    # one true inflection: rising at the low-K end, falling at the high-K end
    assert slopes[0] > 0 and slopes[-1] < 0


GAUSS_LIKE = np.linspace(7.85e-3, 34.4e-3, 200)


def test_classify_fully_locked_negative_detuning():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0)
    label = classify_state(0.8, -0.002, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S1_l+"
    assert label.amp_slope == "negative"
    assert label.locked_fraction == 1.0
    assert not label.ambiguous


def test_classify_drifting_then_locked():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=0.3)
    label = classify_state(0.5, 0.005, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S2_dl-"
    assert 0 < label.locked_fraction < 1
    assert label.amp_slope == "positive"


def test_classify_locked_then_drifting_with_upper_boundary():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0)
    label = classify_state(0.5, -0.002, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S3_l+d"
    lo, hi = lock_boundaries(0.5, -0.002, params, CouplingSet(GAUSS_LIKE))
    assert lo == pytest.approx(GAUSS_LIKE[0])
    assert GAUSS_LIKE[0] < hi < GAUSS_LIKE[-1]


def test_classify_interior_locked_band():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0)
    label = classify_state(0.35, -0.012, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S3_dl+d"
    assert label.amp_slope == "mixed_pos_to_neg"


def test_classify_table_two_competing_band():
    # negative d0 sin(alpha) with positive detuning: the locked band sits
    # at low K and sheds the high-K oscillators
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=-1.0)
    label = classify_state(0.5, 0.004, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S3_l-d"


def test_classify_fully_drifting_reinforcing():
    # detuning and coupling-induced shift pull the same way and the field
    # is too weak to entrain anyone
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.75 * np.pi, beta=0.2, d0=1.0)
    label = classify_state(0.3, 0.01, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S4_d"
    assert label.locked_fraction == 0.0


def test_classify_in_phase():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.0, beta=0.0, d0=0.5)
    label = classify_state(1.0, 0.0, params, CouplingSet(GAUSS_LIKE))
    assert str(label) == "S1_l0"
    assert label.amp_slope == "undefined"


def test_predict_profiles_shape_and_consistency():
    params = ModelParams(lambda_=1.0, omega=np.pi, alpha=0.25 * np.pi, beta=0.2, d0=1.0)
    cs = CouplingSet(GAUSS_LIKE)
    prof = predict_profiles(0.5, -0.002, params, cs)
    assert prof.shape == (200, 4)
    assert np.all(np.diff(prof[:, 0]) >= 0)
    locked = prof[:, 3] == 1.0
    assert locked.any() and not locked.all()
    assert np.isnan(prof[~locked, 1]).all()
    assert np.isfinite(prof[locked, 1]).all()
    # locked rows satisfy the stationarity pair
    j = int(np.flatnonzero(locked)[0])
    K, phi, r = prof[j, 0], prof[j, 1], prof[j, 2]
    assert r == pytest.approx(solve_amplitude(K, 0.5, -0.002, params), rel=1e-10)
    assert phi == pytest.approx(locked_phase(K, r, 0.5, -0.002, params), rel=1e-10)
