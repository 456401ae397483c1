"""Online adaptation laws pairing a parameter-estimate rate with a scaling
state rate.

All laws share one structure: the estimate moves along the scaled regressor
image of the barrier gradient, and the scalar state rho moves so that the
scaled barrier product v(rho) * (b + eta) absorbs the estimate's effect on
the barrier exactly.  The defining cancellation, enforced to rounding error,
is

    v(rho) * <grad_theta b, theta_hat_dot> + v'(rho) * rho_dot * (b + eta) = 0

for the direct, composite, and degree-two laws; the leaky law replaces the
right-hand side with v(rho) * (-sigma * rho + w) to keep rho nonnegative and
bounded at the price of an input-to-state rather than invariance guarantee.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, PreconditionError, SingularDenominatorError
from .model import ParameterBox, ScalingFunction, eval_scaling

_DENOM_GUARD = 1e-12

LAWS = ("direct", "leaky", "composite", "high_order", "racbf")


@dataclass(frozen=True)
class AdaptationConfig:
    law: str
    gamma: float
    eta: float
    scaling: ScalingFunction
    sigma: float = 0.0
    beta: float = 0.0
    projection: Optional[ParameterBox] = None
    force_w_zero: bool = False

    def __post_init__(self):
        if self.law not in LAWS:
            raise ConfigurationError(f"unknown adaptation law {self.law!r}")
        if not self.gamma > 0.0:
            raise ConfigurationError("gamma must be positive")
        if not self.eta > 0.0:
            raise ConfigurationError("eta must be positive")
        if self.law == "leaky" and not self.sigma > 0.0:
            raise ConfigurationError("leaky law needs sigma > 0")
        if self.law == "composite" and not self.beta > 0.0:
            raise ConfigurationError("composite law needs beta > 0")
        if self.force_w_zero and self.law != "leaky":
            raise ConfigurationError("force_w_zero applies to the leaky law only")


@dataclass(frozen=True)
class AdaptationRates:
    """One evaluation of an adaptation law.

    coupling is <grad_theta b, theta_hat_dot>, the term the rho rate is built
    to oppose; w is the leaky law's compensation input (zero elsewhere).
    """

    theta_hat_dot: np.ndarray
    rho_dot: float
    coupling: float
    w: float = 0.0


def _guarded_denominator(value, eta):
    denom = value + eta
    if abs(denom) <= _DENOM_GUARD:
        raise SingularDenominatorError(
            f"barrier-plus-eta denominator {denom!r} fell inside the numeric guard"
        )
    return denom


def direct_rates(model, barrier, cfg, x, theta_hat, rho):
    """Scaled certainty-equivalence law for degree-one barriers."""
    v, dv = eval_scaling(cfg.scaling, rho)
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(barrier.grad_x(x, theta_hat), dtype=float)
    theta_dot = (cfg.gamma * v) * (delta @ grad_x)
    coupling = float(np.asarray(barrier.grad_theta(x, theta_hat), dtype=float) @ theta_dot)
    denom = _guarded_denominator(float(barrier.h(x, theta_hat)), cfg.eta)
    rho_dot = -(v / dv) * coupling / denom
    return AdaptationRates(theta_dot, rho_dot, coupling)


def leaky_rates(model, barrier, cfg, x, theta_hat, rho):
    """Leak sigma * rho plus a compensation input w that switches on exactly
    when the estimate rate would otherwise push the scaled barrier down."""
    v, dv = eval_scaling(cfg.scaling, rho)
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(barrier.grad_x(x, theta_hat), dtype=float)
    unscaled = cfg.gamma * (delta @ grad_x)
    theta_dot = v * unscaled
    grad_theta = np.asarray(barrier.grad_theta(x, theta_hat), dtype=float)
    coupling = float(grad_theta @ theta_dot)
    unscaled_coupling = float(grad_theta @ unscaled)
    if cfg.force_w_zero or unscaled_coupling >= 0.0:
        w = 0.0
    else:
        w = -cfg.scaling.zeta * unscaled_coupling
    denom = _guarded_denominator(float(barrier.h(x, theta_hat)), cfg.eta)
    rho_dot = (v / dv) * (-cfg.sigma * rho + w) / denom
    return AdaptationRates(theta_dot, rho_dot, coupling, w=w)


def composite_rates(model, barrier, cfg, x, theta_hat, rho, epsilon):
    """Direct law plus a prediction-error correction -beta * Delta @ epsilon."""
    v, dv = eval_scaling(cfg.scaling, rho)
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(barrier.grad_x(x, theta_hat), dtype=float)
    epsilon = np.asarray(epsilon, dtype=float)
    theta_dot = (cfg.gamma * v) * (delta @ grad_x) - cfg.beta * (delta @ epsilon)
    coupling = float(np.asarray(barrier.grad_theta(x, theta_hat), dtype=float) @ theta_dot)
    denom = _guarded_denominator(float(barrier.h(x, theta_hat)), cfg.eta)
    rho_dot = -(v / dv) * coupling / denom
    return AdaptationRates(theta_dot, rho_dot, coupling)


def high_order_rates(model, sliding, cfg, x, theta_hat, rho):
    """Direct law posed on a sliding variable for degree-two barriers."""
    v, dv = eval_scaling(cfg.scaling, rho)
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(sliding.grad_x(x, theta_hat), dtype=float)
    theta_dot = (cfg.gamma * v) * (delta @ grad_x)
    coupling = float(np.asarray(sliding.grad_theta(x, theta_hat), dtype=float) @ theta_dot)
    denom = _guarded_denominator(float(sliding.value(x, theta_hat)), cfg.eta)
    rho_dot = -(v / dv) * coupling / denom
    return AdaptationRates(theta_dot, rho_dot, coupling)


def racbf_rates(model, barrier, cfg, x, theta_hat):
    """Baseline unscaled law; the constraint side compensates via the shifted
    drift rather than through a scaling state."""
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(barrier.grad_x(x, theta_hat), dtype=float)
    return cfg.gamma * (delta @ grad_x)


def tracking_rates(model, clf, cfg, x, phi_hat, varrho):
    """Dual of the direct law for the tracking certificate.

    The estimate moves to shrink the Lyapunov value, so the sign flips
    relative to the safety side; the cancellation structure is unchanged.
    """
    v, dv = eval_scaling(cfg.scaling, varrho)
    delta = np.asarray(model.regressor(x), dtype=float)
    grad_x = np.asarray(clf.grad_x(x, phi_hat), dtype=float)
    phi_dot = -(cfg.gamma * v) * (delta @ grad_x)
    coupling = float(np.asarray(clf.grad_phi(x, phi_hat), dtype=float) @ phi_dot)
    denom = _guarded_denominator(float(clf.V(x, phi_hat)), cfg.eta)
    varrho_dot = -(v / dv) * coupling / denom
    return AdaptationRates(phi_dot, varrho_dot, coupling)


def admissible_gain_lower_bound(vartheta, h0):
    """Smallest adaptation gain for which the tightened set is nonempty at the
    start: gamma >= vartheta^T vartheta / (2 h0).

    Equivalent to requiring the scaled barrier product to start at or above
    its floor when v(rho_0) = 1 and the estimation error is worst case.
    """
    if not h0 > 0.0:
        raise PreconditionError("initial barrier value must be positive")
    vartheta = np.asarray(vartheta, dtype=float)
    return float(vartheta @ vartheta) / (2.0 * h0)


def barrier_like_value(value, cfg, rho, theta_tilde):
    """Scaled barrier product v(rho) * (b + eta) - |theta_tilde|^2 / (2 gamma).

    The invariance proofs keep this quantity at or above v(rho) * eta; it is
    the monitored certificate along simulated trajectories.
    """
    v, _ = eval_scaling(cfg.scaling, rho)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    return v * (value + cfg.eta) - float(theta_tilde @ theta_tilde) / (2.0 * cfg.gamma)


def issf_floor(alpha, sf, sigma, rho):
    """Leaky-law barrier floor -alpha^{-1}(sigma * v(rho) * rho) / v(rho).

    Requires rho >= 0, which the leaky law maintains from rho_0 >= 0.
    """
    if rho < 0.0:
        raise PreconditionError("issf_floor requires rho >= 0")
    v, _ = eval_scaling(sf, rho)
    return -float(alpha.inverse(sigma * v * rho)) / v


@dataclass(frozen=True)
class BregmanPotential:
    """Strictly convex potential with gradient and Hessian evaluators."""

    value: callable
    grad: callable
    hessian: callable
    name: str = ""


def bregman_divergence(psi, y, x):
    """d_psi(y || x) = psi(y) - psi(x) - <y - x, grad psi(x)>."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return float(psi.value(y) - psi.value(x) - (y - x) @ np.asarray(psi.grad(x), dtype=float))


def bregman_divergence_rate(psi, y, x, x_dot):
    """Time derivative of d_psi(y || x(t)) for fixed y: (x - y)^T hess(x) x_dot."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    x_dot = np.asarray(x_dot, dtype=float)
    return float((x - y) @ (np.asarray(psi.hessian(x), dtype=float) @ x_dot))
