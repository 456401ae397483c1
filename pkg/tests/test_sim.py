import numpy as np
import pytest

from ucbf.adaptation import AdaptationConfig, direct_rates
from ucbf.errors import ConfigurationError
from ucbf.model import ClassKInfinity, ParameterBox, arctan_plus_one, eval_true_dynamics
from ucbf.qp import pointwise_filter, safety_row
from ucbf.scenarios import load_scenario
from ucbf.sim import (
    Scenario,
    monitor_report,
    read_trace_csv,
    run,
    scenario_with,
    sweep,
    trace_columns,
    write_trace_csv,
)

from conftest import planar_model, velocity_ellipse_barrier


def short_a(T=0.2, **overrides):
    return scenario_with(load_scenario("A"), T=T, **overrides)


def planar_box(theta_true=1.2):
    return ParameterBox(
        lower=np.array([0.5]), upper=np.array([1.5]), theta_true=np.array([theta_true])
    )


class TestScenarioValidation:
    def test_dt_must_divide_horizon(self):
        with pytest.raises(ConfigurationError):
            scenario_with(load_scenario("A"), T=1.0, dt=0.0003)

    def test_high_order_law_needs_sliding(self):
        a = load_scenario("A")
        with pytest.raises(ConfigurationError):
            scenario_with(a, adaptation=AdaptationConfig(
                law="high_order", gamma=1.0, eta=0.1, scaling=arctan_plus_one()))

    def test_clf_comes_with_its_own_law_and_start(self):
        a = load_scenario("A")
        e = load_scenario("E")
        with pytest.raises(ConfigurationError):
            scenario_with(a, clf=e.clf)
        with pytest.raises(ConfigurationError):
            scenario_with(e, phi_hat0=None)

    def test_state_shape_mismatch_rejected(self):
        a = load_scenario("A")
        with pytest.raises(ConfigurationError):
            scenario_with(a, x0=np.array([0.1]))

    def test_scenario_with_routes_adaptation_keys(self):
        a = load_scenario("A")
        b = scenario_with(a, gamma=5.0, eta=0.2)
        assert b.adaptation.gamma == 5.0
        assert b.adaptation.eta == 0.2
        assert b.adaptation.law == a.adaptation.law
        assert b.barrier is a.barrier


class TestStepping:
    def test_equilibrium_state_is_unchanged(self):
        # at x=0 the regressor vanishes, the constraint is slack, u*=0
        scenario = Scenario(
            name="rest",
            model=planar_model(),
            barrier=velocity_ellipse_barrier(),
            alpha=ClassKInfinity(gain=1.0),
            adaptation=AdaptationConfig(law="direct", gamma=1.0, eta=0.1,
                                        scaling=arctan_plus_one()),
            parameters=planar_box(),
            x0=np.zeros(2),
            theta_hat0=np.array([1.2]),
            rho0=0.0,
            T=0.1,
            dt=1e-3,
            input_box=np.array([[-10.0, 10.0]]),
        )
        result = run(scenario)
        assert result.completed
        assert np.max(np.abs(result.trace.block("x"))) <= 1e-12
        assert np.max(np.abs(result.trace.block("theta_hat") - 1.2)) <= 1e-12
        assert np.max(np.abs(result.trace.column("rho"))) <= 1e-12
        assert np.max(np.abs(result.trace.block("u"))) <= 1e-12

    def test_single_step_matches_hand_euler_to_second_order(self):
        scenario = short_a(T=1e-6, dt=1e-6)
        result = run(scenario)
        assert result.completed
        x0, th0, rho0 = scenario.x0, scenario.theta_hat0, scenario.rho0
        row = safety_row(scenario.model, scenario.barrier, scenario.alpha,
                         x0, th0, threshold=scenario.threshold0())
        sol = pointwise_filter(scenario.u_nominal(0.0, x0), [row],
                               scenario.input_box, scenario.slack_weight)
        x_dot = eval_true_dynamics(
            scenario.model, x0, sol.u, scenario.parameters.theta_true)
        rates = direct_rates(scenario.model, scenario.barrier, scenario.adaptation,
                             x0, th0, rho0)
        dt = scenario.dt
        euler = np.concatenate([
            x0 + dt * x_dot,
            th0 + dt * rates.theta_hat_dot,
            [rho0 + dt * rates.rho_dot],
        ])
        last = result.trace.data[-1]
        rk4 = np.concatenate([
            result.trace.block("x")[-1],
            result.trace.block("theta_hat")[-1],
            [result.trace.column("rho")[-1]],
        ])
        assert last[0] == dt
        assert np.max(np.abs(rk4 - euler)) <= 1e-11  # O(dt^2) with dt=1e-6

    def test_rk4_richardson_ratio_is_fourth_order(self):
        finals = []
        for dt in (2e-3, 1e-3, 5e-4):
            trace = run(short_a(T=0.5, dt=dt)).trace
            finals.append(np.concatenate([
                trace.block("x")[-1], trace.block("theta_hat")[-1],
                [trace.column("rho")[-1]],
            ]))
        coarse = np.linalg.norm(finals[0] - finals[1])
        fine = np.linalg.norm(finals[1] - finals[2])
        assert 8.0 <= coarse / fine <= 32.0

    def test_runs_are_bitwise_deterministic(self):
        a = run(short_a()).trace
        b = run(short_a()).trace
        assert a.columns == b.columns
        assert np.array_equal(a.data, b.data)

    def test_zero_uncertainty_reduces_to_plain_barrier_run(self):
        degenerate = ParameterBox(
            lower=np.array([1.2]), upper=np.array([1.2]), theta_true=np.array([1.2])
        )
        a = load_scenario("A")
        cfg = AdaptationConfig(law="direct", gamma=a.adaptation.gamma, eta=0.1,
                               scaling=arctan_plus_one(), projection=degenerate)
        scenario = scenario_with(a, parameters=degenerate, adaptation=cfg,
                                 theta_hat0=np.array([1.2]), rho0=0.5, T=1.0)
        assert scenario.threshold0() == 0.0
        result = run(scenario)
        report = monitor_report(scenario, result.trace, result.abort_reason)
        assert report.verdict == "PASS"
        assert report.min_h >= -1e-9
        assert np.max(np.abs(result.trace.block("theta_hat") - 1.2)) <= 1e-9


class TestAbortSemantics:
    def test_gain_state_domain_exit_aborts_with_reason(self):
        # positive coupling at rho=0 drives rho below the scaling domain
        a = load_scenario("A")
        scenario = scenario_with(a, x0=np.array([0.3, -0.4]),
                                 theta_hat0=np.array([0.7]), u_nominal=None)
        result = run(scenario)
        assert not result.completed
        assert "DomainError" in result.abort_reason
        assert len(result.trace) < scenario.steps + 1
        report = monitor_report(scenario, result.trace, result.abort_reason)
        assert report.verdict == "FAIL"
        assert report.abort_reason == result.abort_reason

    def test_infeasible_filter_aborts_or_continues_per_config(self):
        # zero-authority start below the threshold: no input can help there
        a = load_scenario("A")
        base = dict(x0=np.array([0.9, 0.9]), theta_hat0=np.array([1.0]),
                    rho0=0.5, check_initial_margin=False, T=0.05)
        aborted = run(scenario_with(a, **base))
        assert not aborted.completed
        assert "infeasible" in aborted.abort_reason
        tolerated = run(scenario_with(a, on_infeasible="continue", **base))
        assert tolerated.completed
        assert np.max(tolerated.trace.column("qp_status")) == 1.0


class TestTraceFiles:
    def test_csv_round_trip_is_bitwise_and_monitors_are_pure(self, tmp_path):
        scenario = short_a()
        result = run(scenario)
        path = tmp_path / "trace.csv"
        write_trace_csv(result.trace, path)
        again = read_trace_csv(path)
        assert again.columns == result.trace.columns
        assert np.array_equal(again.data, result.trace.data)
        assert monitor_report(scenario, again) == monitor_report(scenario, result.trace)

    def test_column_order_is_fixed(self):
        a = load_scenario("A")
        assert trace_columns(a) == (
            "t", "x0", "x1", "theta_hat0", "rho", "u0", "delta", "h_value",
            "barrier_like", "effective_gain", "threshold", "qp_status", "clamp_fired",
        )
        c = load_scenario("C")
        assert "s_value" in trace_columns(c)
        assert trace_columns(c).index("s_value") == trace_columns(c).index("h_value") + 1
        e = load_scenario("E")
        for name in ("phi_hat0", "varrho", "clf_value"):
            assert name in trace_columns(e)
        d = load_scenario("D")
        for name in ("bound_lo0", "bound_hi0"):
            assert name in trace_columns(d)


class TestLawsInTheLoop:
    def test_leaky_keeps_gain_state_in_range(self):
        result = run(scenario_with(load_scenario("B"), T=1.0))
        rho = result.trace.column("rho")
        assert result.completed
        assert rho.min() >= -1e-9
        assert np.isfinite(rho).all()

    def test_forced_zero_replenishment_decays(self):
        b = load_scenario("B")
        cfg = AdaptationConfig(law="leaky", gamma=b.adaptation.gamma, eta=0.1,
                               scaling=b.adaptation.scaling, sigma=1.0,
                               projection=b.parameters, force_w_zero=True)
        result = run(scenario_with(b, adaptation=cfg, rho0=0.5, T=1.0))
        rho = result.trace.column("rho")
        assert result.completed
        assert np.all(np.diff(rho) < 0.0)

    def test_estimator_tightens_threshold_in_the_loop(self):
        result = run(scenario_with(load_scenario("D"), T=0.5))
        trace = result.trace
        assert result.completed
        thresholds = trace.column("threshold")
        assert np.all(np.diff(thresholds) <= 1e-12)
        assert thresholds[-1] < thresholds[0]
        assert np.all(trace.block("bound_lo") <= 1.2 + 1e-12)
        assert np.all(trace.block("bound_hi") >= 1.2 - 1e-12)

    def test_high_order_logs_nonnegative_sliding_value(self):
        result = run(scenario_with(load_scenario("C"), T=0.5))
        assert result.completed
        assert result.trace.column("s_value").min() >= -1e-6
        assert result.trace.column("h_value").min() >= -1e-6

    def test_racbf_gain_is_unscaled(self):
        result = run(scenario_with(load_scenario("F"), T=0.5))
        assert result.completed
        gain = result.trace.column("effective_gain")
        assert np.array_equal(gain, np.full_like(gain, 2.0))
        assert np.array_equal(result.trace.column("rho"), np.zeros_like(gain))

    def test_tracking_value_decreases_with_dual_adaptation(self):
        result = run(scenario_with(load_scenario("E"), T=2.0))
        assert result.completed
        V = result.trace.column("clf_value")
        assert V[-1] < 0.5 * V[0]


class TestSweep:
    def test_gamma_sweep_flags_the_admissibility_boundary(self):
        a = short_a(T=0.1)
        h0 = float(a.barrier.h(a.x0, a.theta_hat0))
        bound = 1.0 / (2.0 * h0)  # unit box width
        rows = sweep(a, "gamma", [0.5 * bound, bound, 2.0 * bound])
        assert [r.admissible for r in rows] == [False, True, True]

    def test_overgained_run_still_passes(self):
        # a larger gain shrinks the certificate debit, so both clear the floor
        a = short_a(T=2.0)
        rows = sweep(a, "gamma", [a.adaptation.gamma, 5.0 * a.adaptation.gamma])
        assert all(r.verdict == "PASS" for r in rows)
        assert all(r.admissible for r in rows)

    def test_eta_sweep_scales_the_certificate_floor(self):
        rows = sweep(short_a(T=1.0), "eta", [0.01, 0.1, 1.0])
        assert all(r.verdict == "PASS" for r in rows)

    def test_dt_sweep_converges_to_three_digits(self):
        a = scenario_with(load_scenario("A"), T=1.0)
        rows = sweep(a, "dt", [1e-2, 1e-3, 1e-4])
        assert all(r.verdict == "PASS" for r in rows)
        fine, finest = rows[1].min_h, rows[2].min_h
        assert abs(fine - finest) <= 1e-3 * abs(finest)

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ConfigurationError):
            sweep(short_a(T=0.1), "zeta", [1.0])

    def test_parallel_sweep_matches_serial(self):
        a = short_a(T=0.1)
        serial = sweep(a, "eta", [0.05, 0.1, 0.2], jobs=1)
        parallel = sweep(a, "eta", [0.05, 0.1, 0.2], jobs=3)
        assert serial == parallel
