import math

import numpy as np
import pytest

from ucbf.barrier import (
    BarrierFamily,
    DerivativeStage,
    GridCertificate,
    box_grid,
    condition_margin,
    initial_condition_sets_check,
    make_sliding,
    racbf_modified_drift,
    tightened_threshold,
    verify_houcbf_grid,
    verify_ucbf_grid,
)
from ucbf.errors import ConfigurationError, InfeasibleStartError, UnsupportedFeatureError
from ucbf.model import ClassKInfinity, DynamicsModel

from conftest import planar_model, position_limit_barrier, velocity_ellipse_barrier


def central_diff(fn, z, eps=1e-6):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for i in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[i] += eps
        zm[i] -= eps
        out[i] = (fn(zp) - fn(zm)) / (2 * eps)
    return out


class TestGradients:
    def test_velocity_ellipse_grads_match_finite_differences(self):
        bar = velocity_ellipse_barrier()
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = rng.uniform(-1.2, 1.2, size=2)
            th = rng.uniform(0.5, 1.5, size=1)
            gx = central_diff(lambda z: bar.h(z, th), x)
            gt = central_diff(lambda z: bar.h(x, z), th)
            assert np.allclose(bar.grad_x(x, th), gx, atol=1e-7)
            assert np.allclose(bar.grad_theta(x, th), gt, atol=1e-7)

    def test_position_limit_chain_grads_match_finite_differences(self):
        bar = position_limit_barrier()
        stage = bar.chain[0]
        rng = np.random.default_rng(5)
        for _ in range(25):
            x = rng.uniform(-1.2, 1.2, size=2)
            th = rng.uniform(0.5, 1.5, size=1)
            assert np.allclose(
                stage.grad_x(x, th), central_diff(lambda z: stage.value(z, th), x), atol=1e-6
            )
            assert np.allclose(
                stage.grad_theta(x, th), central_diff(lambda z: stage.value(x, z), th), atol=1e-6
            )

    def test_chain_stage_is_derivative_along_uncertain_drift(self):
        # h_dot must equal grad_x(h) . (f - Delta^T theta) for the declared model
        model = planar_model()
        bar = position_limit_barrier()
        rng = np.random.default_rng(11)
        for _ in range(25):
            x = rng.uniform(-1.2, 1.2, size=2)
            th = rng.uniform(0.5, 1.5, size=1)
            drift = model.f(x) - model.regressor(x).T @ th
            expected = bar.grad_x(x, th) @ drift
            assert bar.chain[0].value(x, th) == pytest.approx(expected, abs=1e-12)


class TestThreshold:
    def test_scalar_case(self):
        assert tightened_threshold(0.5, [1.0]) == 1.0

    def test_vector_case(self):
        assert tightened_threshold(1.0, [0.3, 0.4]) == pytest.approx(0.125)

    def test_gain_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            tightened_threshold(0.0, [1.0])


class TestModifiedDrift:
    def test_zero_parameter_gradient_reduces_to_nominal(self):
        model = planar_model()
        bar = position_limit_barrier()  # grad_theta h = 0
        x = np.array([0.4, -0.3])
        th = np.array([1.1])
        nominal = model.f(x) - model.regressor(x).T @ th
        got = racbf_modified_drift(model, bar, x, th, gamma=2.0)
        assert np.allclose(got, nominal, atol=0.0)

    def test_hand_value_with_nonzero_parameter_gradient(self):
        # scalar system x_dot = -theta x + u, barrier h = theta - x
        model = DynamicsModel(
            n=1,
            m=1,
            p=1,
            f=lambda x: np.array([0.0]),
            regressor=lambda x: np.array([[x[0]]]),
            g=lambda x: np.array([[1.0]]),
        )
        bar = BarrierFamily(
            h=lambda x, th: th[0] - x[0],
            grad_x=lambda x, th: np.array([-1.0]),
            grad_theta=lambda x, th: np.array([1.0]),
        )
        got = racbf_modified_drift(model, bar, np.array([0.7]), np.array([1.1]), gamma=2.0)
        # shifted parameter is 1.1 - 2.0 = -0.9, drift = -x * shifted = 0.63
        assert np.allclose(got, [0.63], atol=1e-15)


class TestGridCertification:
    def test_pure_alpha_margin_with_no_authority(self):
        # f = 0, Delta = 0, g = 0: margin is alpha(h - offset) alone
        model = DynamicsModel(
            n=1,
            m=1,
            p=1,
            f=lambda x: np.array([0.0]),
            regressor=lambda x: np.array([[0.0]]),
            g=lambda x: np.array([[0.0]]),
        )
        bar = BarrierFamily(
            h=lambda x, th: 1.0 + x[0] ** 2,
            grad_x=lambda x, th: np.array([2.0 * x[0]]),
            grad_theta=lambda x, th: np.array([0.0]),
        )
        alpha = ClassKInfinity(gain=2.0)
        cert = verify_ucbf_grid(
            model, bar, alpha, [[-1.0, 1.0]], [[0.0]], box_grid([[-1.0, 1.0]], 5)
        )
        assert cert.passed
        assert cert.min_margin == 2.0  # alpha(min h) = 2 * 1
        assert cert.points_in_set == 5
        assert cert.points_zero_authority == 5
        assert cert.argmin_x == (0.0,)

    def test_insufficient_authority_fails_with_frozen_margin(self):
        # drift term -2 against authority 1 at the boundary: margin -1, FAIL
        model = DynamicsModel(
            n=1,
            m=1,
            p=1,
            f=lambda x: np.array([-2.0]),
            regressor=lambda x: np.array([[0.0]]),
            g=lambda x: np.array([[1.0]]),
        )
        bar = BarrierFamily(
            h=lambda x, th: x[0],
            grad_x=lambda x, th: np.array([1.0]),
            grad_theta=lambda x, th: np.array([0.0]),
        )
        alpha = ClassKInfinity(gain=1.0)
        cert = verify_ucbf_grid(model, bar, alpha, [[-1.0, 1.0]], [[0.0]], [[0.0]])
        assert not cert.passed
        assert cert.min_margin == -1.0
        assert cert.points_in_set == 1

    def test_points_below_offset_carry_no_requirement(self):
        model = planar_model()
        bar = velocity_ellipse_barrier()
        alpha = ClassKInfinity(gain=1.0)
        grid = box_grid([[-2.0, 2.0], [-2.0, 2.0]], 9)
        cert = verify_ucbf_grid(model, bar, alpha, [[-10.0, 10.0]], [[1.0]], grid, offset=0.5)
        assert cert.points_in_set < cert.points_total
        assert cert.passed

    def test_operating_set_certificate_for_velocity_ellipse(self):
        model = planar_model()
        bar = velocity_ellipse_barrier()
        alpha = ClassKInfinity(gain=1.0)
        theta_grid = box_grid([[0.5, 1.5]], 11)
        x_grid = box_grid([[-1.1, 1.1], [-2.8, 2.8]], 41)
        cert = verify_ucbf_grid(model, bar, alpha, [[-10.0, 10.0]], theta_grid, x_grid)
        assert cert.passed
        assert cert.min_margin >= 0.0

    def test_tightened_pass_implies_untightened_pass_per_point(self):
        model = planar_model()
        bar = velocity_ellipse_barrier()
        alpha = ClassKInfinity(gain=1.3)
        sigma = 0.3
        input_box = [[-10.0, 10.0]]
        for th in ([0.5], [1.0], [1.5]):
            for x in box_grid([[-1.1, 1.1], [-1.6, 1.6]], 9):
                m_tight, in_tight, _ = condition_margin(
                    model, bar, alpha, input_box, x, th, offset=sigma
                )
                m_plain, in_plain, _ = condition_margin(
                    model, bar, alpha, input_box, x, th, offset=0.0
                )
                if in_tight:
                    assert in_plain
                    # alpha monotone: shrinking the subtracted offset can only help
                    assert m_plain >= m_tight - 1e-12

    def test_certificate_text_roundtrip(self):
        model = planar_model()
        bar = velocity_ellipse_barrier()
        alpha = ClassKInfinity(gain=1.0)
        cert = verify_ucbf_grid(
            model, bar, alpha, [[-10.0, 10.0]], [[0.5], [1.5]], box_grid([[-1.0, 1.0], [-1.0, 1.0]], 7)
        )
        again = GridCertificate.from_text(cert.to_text())
        assert again == cert

    def test_houcbf_grid_on_sliding_variable(self):
        model = planar_model()
        sld = make_sliding(position_limit_barrier(), kind="linear", lambda1=2.0)
        alpha = ClassKInfinity(gain=4.0)
        theta_grid = box_grid([[0.5, 1.5]], 11)
        x_grid = box_grid([[-1.1, 1.1], [-1.5, 1.5]], 41)
        cert = verify_houcbf_grid(model, sld, alpha, [[-10.0, 10.0]], theta_grid, x_grid)
        assert cert.condition == "houcbf"
        assert cert.passed


class TestSliding:
    def test_linear_composition_is_exact(self):
        bar = position_limit_barrier()
        lam = 2.0
        sld = make_sliding(bar, kind="linear", lambda1=lam)
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, size=2)
            th = rng.uniform(0.5, 1.5, size=1)
            expected = bar.chain[0].value(x, th) + lam * bar.h(x, th)
            assert sld.value(x, th) == expected  # bitwise, same composition

    def test_state_dependent_grads_match_finite_differences(self):
        bar = position_limit_barrier()
        sld = make_sliding(bar, kind="state_dependent", lambda1=1.0, lambda2=0.5, q=2.0)
        rng = np.random.default_rng(9)
        for _ in range(20):
            x = rng.uniform(-1.4, 1.4, size=2)
            th = rng.uniform(0.5, 1.5, size=1)
            gx = central_diff(lambda z: sld.value(z, th), x)
            gt = central_diff(lambda z: sld.value(x, z), th)
            assert np.allclose(sld.grad_x(x, th), gx, atol=1e-6)
            assert np.allclose(sld.grad_theta(x, th), gt, atol=1e-6)

    def test_rejects_wrong_relative_degree(self):
        with pytest.raises(ConfigurationError):
            make_sliding(velocity_ellipse_barrier(), lambda1=1.0)

    def test_rejects_bad_params(self):
        bar = position_limit_barrier()
        with pytest.raises(ConfigurationError):
            make_sliding(bar, lambda1=0.0)
        with pytest.raises(ConfigurationError):
            make_sliding(bar, kind="state_dependent", lambda1=1.0, lambda2=-1.0)
        with pytest.raises(ConfigurationError):
            make_sliding(bar, kind="cubic", lambda1=1.0)


class TestInitialSets:
    def test_passing_point_has_frozen_levels(self):
        bar = position_limit_barrier()
        report = initial_condition_sets_check(bar, [0.2, 0.0], [1.0], lam=2.0)
        assert report.values[0] == pytest.approx(0.96)
        assert report.values[1] == pytest.approx(2.0)
        assert report.all_passed

    def test_failing_point_raises_when_asked(self):
        bar = position_limit_barrier()
        report = initial_condition_sets_check(bar, [0.5, 3.0], [1.0], lam=2.0)
        assert report.passed == (True, False)
        assert report.values[1] == pytest.approx(-1.0)
        with pytest.raises(InfeasibleStartError):
            initial_condition_sets_check(bar, [0.5, 3.0], [1.0], lam=2.0, raise_on_fail=True)

    def test_degree_one_has_single_level(self):
        bar = velocity_ellipse_barrier()
        report = initial_condition_sets_check(bar, [0.3, -0.4], [0.7], lam=1.0)
        assert len(report.values) == 1
        assert report.all_passed


class TestChainValidation:
    def test_missing_chain_rejected(self):
        with pytest.raises(ConfigurationError):
            BarrierFamily(
                h=lambda x, th: 0.0,
                grad_x=lambda x, th: np.zeros(2),
                grad_theta=lambda x, th: np.zeros(1),
                relative_degree=2,
                chain=(),
            )

    def test_box_grid_shapes(self):
        grid = box_grid([[0.0, 1.0], [0.0, 2.0]], 3)
        assert grid.shape == (9, 2)
        assert np.allclose(grid[0], [0.0, 0.0])
        assert np.allclose(grid[-1], [1.0, 2.0])
        with pytest.raises(ConfigurationError):
            box_grid([[1.0, 0.0]], 3)
