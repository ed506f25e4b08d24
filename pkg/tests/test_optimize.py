import math

import numpy as np
import pytest

from squeeze_forge import (
    Constant,
    ContractError,
    ControlProblem,
    FrequencyProtocol,
    LinearRamp,
    Segment,
    Sinusoid,
    build_janszky_adam,
    build_linear_ramp,
    costate_propagate,
    janszky_adam_switch_times,
    objective,
    propagate,
    result_to_dict,
    solve_bangbang,
    switching_function,
    verify_stationarity,
)
from squeeze_forge.optimize import _evaluate_bangbang, _terminal_costate
from squeeze_forge.thermo import qstar_from_state


def bangbang_protocol(omega_low, omega_high, tau, switch_times):
    bounds = [0.0, *switch_times, tau]
    segs = []
    for j in range(len(bounds) - 1):
        w = omega_low if j % 2 == 0 else omega_high
        segs.append(Segment(bounds[j + 1] - bounds[j], Constant(w)))
    return FrequencyProtocol(tuple(segs))


def central_difference(f, x, h):
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


# ---------------- problem and objective ----------------


def test_control_problem_validation():
    with pytest.raises(ValueError):
        ControlProblem(2.0, 1.0)
    with pytest.raises(ValueError):
        ControlProblem(0.0, 1.0)
    with pytest.raises(ValueError):
        ControlProblem(1.0, 2.0, horizon=-1.0)
    ControlProblem(1.0, 1.0)  # degenerate band is allowed


def test_objective_of_three_jump_protocol():
    assert objective(build_janszky_adam(1.0, 2.0, 3)) == pytest.approx(
        4.0625, rel=1e-12)


# ---------------- costates ----------------


def test_terminal_costate_is_gradient_of_qstar():
    state = propagate(build_janszky_adam(1.0, 2.0, 2),
                      [build_janszky_adam(1.0, 2.0, 2).total_duration])[-1]
    omega0, omega_tau = 1.0, 1.0
    p = _terminal_costate(state, omega0, omega_tau)
    h = 1e-6
    for i, field in enumerate(("X", "dX", "Y", "dY")):
        up = state.__class__(**{**state.__dict__, field: getattr(state, field) + h})
        dn = state.__class__(**{**state.__dict__, field: getattr(state, field) - h})
        fd = (qstar_from_state(up, omega0, omega_tau)
              - qstar_from_state(dn, omega0, omega_tau)) / (2.0 * h)
        assert p[i] == pytest.approx(fd, rel=1e-7, abs=1e-9)


def test_costate_state_inner_product_is_conserved():
    p = FrequencyProtocol((
        Segment(0.7, Constant(1.0)),
        Segment(1.3, LinearRamp(1.0, 1.8)),
        Segment(2.0, Sinusoid(1.8, 0.4, 2.3, 0.5)),
        Segment(0.9, Constant(1.4)),
    ))
    grid = np.linspace(0.0, p.total_duration, 80)
    states = propagate(p, grid)
    costates = costate_propagate(p, states)
    inner = [c.pX * s.X + c.pdX * s.dX + c.pY * s.Y + c.pdY * s.dY
             for s, c in zip(states, costates)]
    assert max(inner) - min(inner) < 1e-9


def test_costate_requires_terminal_state():
    p = build_janszky_adam(1.0, 2.0, 1)
    states = propagate(p, [0.0, 1.0])
    with pytest.raises(ContractError):
        costate_propagate(p, states)


def test_switching_function_rejects_mismatched_grids():
    p = build_janszky_adam(1.0, 2.0, 1)
    tau = p.total_duration
    states = propagate(p, np.linspace(0.0, tau, 10))
    costates = costate_propagate(p, states)
    with pytest.raises(ContractError):
        switching_function(states[:-1], costates)
    with pytest.raises(ContractError):
        switching_function(states, costates[::-1])


def test_switching_function_closed_form_for_single_jump():
    # for the quarter-period single-jump protocol between 1 and 2 the
    # switching function is -(3/4) sin(2t) on the first hold and
    # (3/8) sin(4s) on the second (s local), vanishing at the switch
    p = build_janszky_adam(1.0, 2.0, 1)
    t1 = p.segment_starts[1]
    tau = p.total_duration
    grid = np.unique(np.concatenate([
        np.linspace(0.0, t1, 25),
        t1 + np.linspace(0.0, tau - t1, 25),
    ]))
    states = propagate(p, grid)
    costates = costate_propagate(p, states)
    sigma = switching_function(states, costates)

    c_tau = costates[-1]
    assert (c_tau.pX, c_tau.pdX, c_tau.pY, c_tau.pdY) == pytest.approx(
        (0.0, -1.0, -1.0, 0.0), abs=1e-13)
    k1 = int(np.searchsorted(grid, t1))
    c_t1 = costates[k1]
    assert (c_t1.pX, c_t1.pdX, c_t1.pY, c_t1.pdY) == pytest.approx(
        (2.0, 0.0, 0.0, -0.5), abs=1e-13)

    for t, s in zip(grid, sigma):
        if t < t1:
            expected = -0.75 * math.sin(2.0 * t)
        else:
            expected = 0.375 * math.sin(4.0 * (t - t1))
        assert s == pytest.approx(expected, abs=1e-12)


def test_terminal_sigma_is_minus_two_qp_over_omega():
    from squeeze_forge import covariance

    p = build_janszky_adam(1.0, 2.0, 2)
    tau = p.total_duration
    states = propagate(p, np.linspace(0.0, tau, 30))
    sigma = switching_function(states, costate_propagate(p, states))
    cov = covariance(states[-1], p.omega_start)
    assert sigma[-1] == pytest.approx(-2.0 * cov.qp / p.omega_end, rel=1e-10,
                                      abs=1e-12)


# ---------------- exact gradients ----------------


def test_switch_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(5):
        lo = float(rng.uniform(0.6, 1.2))
        hi = float(rng.uniform(lo + 0.3, lo + 1.5))
        k = int(rng.choice([1, 3, 5]))
        tau = float(rng.uniform(2.0, 6.0))
        ts = np.sort(rng.uniform(0.1 * tau, 0.9 * tau, k))
        while np.any(np.diff(ts) < 0.05 * tau):
            ts = np.sort(rng.uniform(0.1 * tau, 0.9 * tau, k))

        _, grad, _ = _evaluate_bangbang(lo, hi, tau, ts)
        fd = central_difference(
            lambda x: _evaluate_bangbang(lo, hi, tau, x)[0], ts, 1e-6)
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-6)


def test_hold_duration_gradient_matches_finite_differences():
    lo, hi = 1.0, 1.7
    tail = math.pi / (2.0 * hi)
    h0 = np.array([1.1, 0.6, 1.4])

    def j_of(h):
        ts = np.cumsum(h)
        return _evaluate_bangbang(lo, hi, float(ts[-1] + tail), ts)[0]

    ts = np.cumsum(h0)
    _, _, hc = _evaluate_bangbang(lo, hi, float(ts[-1] + tail), ts)
    fd = central_difference(j_of, h0, 1e-6)
    assert np.allclose(hc, fd, rtol=1e-5, atol=1e-6)


def test_gradient_vanishes_on_quarter_period_pattern():
    ja = build_janszky_adam(1.0, 2.0, 3)
    ts = np.asarray(janszky_adam_switch_times(1.0, 2.0, 3))
    j_val, grad, _ = _evaluate_bangbang(1.0, 2.0, ja.total_duration, ts)
    assert j_val == pytest.approx(4.0625, rel=1e-13)
    assert np.max(np.abs(grad)) < 1e-12


# ---------------- the solver ----------------


def test_solver_rejects_even_switch_counts():
    with pytest.raises(ValueError):
        solve_bangbang(ControlProblem(1.0, 2.0, horizon=4.0), 2)


def test_solver_rejects_bad_init():
    prob = ControlProblem(1.0, 2.0, horizon=4.0)
    with pytest.raises(ValueError):
        solve_bangbang(prob, 3, init="nonsense")
    with pytest.raises(ValueError):
        solve_bangbang(prob, 3, init=np.array([1.0, 2.0]))


def test_quarter_period_start_is_already_stationary():
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    res = solve_bangbang(prob, 3, init="ja")
    assert res.converged
    assert res.first_order_residual < 1e-10
    moved = max(abs(a - b) for a, b in
                zip(res.switch_times, janszky_adam_switch_times(1.0, 2.0, 3)))
    assert moved < 1e-12


def test_uniform_start_recovers_the_optimum():
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    res = solve_bangbang(prob, 3, init="uniform")
    assert res.converged
    assert res.qstar == pytest.approx(4.0625, rel=1e-9)


def test_five_switches_on_the_same_horizon_drop_the_outer_holds():
    # with five jumps allowed in the three-jump horizon the optimum collapses
    # the first and last holds (the ground state needs no alignment and the
    # terminal hold does not change Q*), reaching the five-jump ceiling
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    res = solve_bangbang(prob, 5, init="multi")
    ceiling = (2.0**5 + 2.0**-5) / 2.0
    assert res.qstar == pytest.approx(ceiling, rel=1e-9)
    assert res.qstar >= 0.95 * objective(ja)


def test_free_horizon_recovers_quarter_periods():
    prob = ControlProblem(1.0, 1.3)
    res = solve_bangbang(prob, 3, init="uniform")
    assert res.converged
    assert res.qstar == pytest.approx(objective(build_janszky_adam(1.0, 1.3, 3)),
                                      rel=1e-9)
    durations = np.diff([0.0, *res.switch_times])
    # the first hold length is free (the ground state is rotation invariant);
    # the later holds must come out as quarter periods
    assert durations[1] == pytest.approx(math.pi / 2.6, abs=1e-6)
    assert durations[2] == pytest.approx(math.pi / 2.0, abs=1e-6)
    tail = res.protocol.total_duration - res.switch_times[-1]
    assert tail == pytest.approx(math.pi / 2.6, rel=1e-12)


def test_solver_is_deterministic():
    prob = ControlProblem(1.0, 2.0, horizon=5.0)
    a = solve_bangbang(prob, 3, init="multi", seed=11)
    b = solve_bangbang(prob, 3, init="multi", seed=11)
    assert a.switch_times == b.switch_times
    assert a.qstar == b.qstar


def test_explicit_init_array_is_honored():
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    ts = np.asarray(janszky_adam_switch_times(1.0, 2.0, 3))
    res = solve_bangbang(prob, 3, init=ts)
    assert res.converged
    assert res.qstar == pytest.approx(4.0625, rel=1e-12)


def test_history_is_monotone_and_result_dict_is_stable():
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    res = solve_bangbang(prob, 3, init="uniform")
    objectives = [h[1] for h in res.history]
    for a, b in zip(objectives, objectives[1:]):
        assert b >= a - 1e-8 * max(1.0, abs(a))
    assert set(result_to_dict(res)) == {
        "switch_times", "omega_low", "omega_high", "qstar", "r",
        "converged", "first_order_residual",
    }
    assert result_to_dict(res)["r"] == pytest.approx(math.log(8.0) / 2.0,
                                                     rel=1e-9)


def test_result_protocol_reproduces_the_objective():
    prob = ControlProblem(1.0, 2.0, horizon=4.0)
    res = solve_bangbang(prob, 3, init="uniform")
    assert objective(res.protocol) == pytest.approx(res.qstar, rel=1e-11)


# ---------------- stationarity audit ----------------


def test_audit_passes_on_quarter_period_protocol():
    ja = build_janszky_adam(1.0, 2.0, 3)
    prob = ControlProblem(1.0, 2.0, horizon=ja.total_duration)
    rep = verify_stationarity(ja, prob)
    assert rep.ok
    assert not rep.singular
    assert rep.max_residual < 1e-10
    assert rep.switch_sigma_max < 1e-10
    assert rep.interior_violation_max < 1e-10


def test_audit_flags_a_non_stationary_protocol():
    ja = build_janszky_adam(1.0, 2.0, 3)
    tau = ja.total_duration
    uniform = bangbang_protocol(1.0, 2.0, tau,
                                [tau / 4.0, tau / 2.0, 3.0 * tau / 4.0])
    rep = verify_stationarity(uniform, ControlProblem(1.0, 2.0, horizon=tau))
    assert not rep.ok
    assert rep.max_residual > 1e-3


def test_audit_rejects_protocols_off_the_band():
    prob = ControlProblem(1.0, 2.0, horizon=10.0)
    with pytest.raises(ContractError):
        verify_stationarity(build_linear_ramp(1.0, 2.0, 10.0), prob)
    with pytest.raises(ContractError):
        verify_stationarity(
            FrequencyProtocol((Segment(10.0, Constant(1.5)),)), prob)


def test_audit_degenerate_band_is_trivially_stationary():
    prob = ControlProblem(1.0, 1.0)
    rep = verify_stationarity(
        FrequencyProtocol((Segment(2.0, Constant(1.0)),)), prob)
    assert rep.ok
    assert rep.singular
