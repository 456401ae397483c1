"""State prediction errors and set-membership tightening of the parameter box.

The prediction error of the certainty-equivalence model,

    epsilon = x_dot - (f(x) - Delta(x)^T theta_hat + g(x) u),

equals Delta(x)^T (theta_hat - theta) identically, so each measured state
axis j yields a strip { theta : Delta[:, j] @ theta in [c_j - w, c_j + w] }
around c_j = Delta[:, j] @ theta_hat - epsilon_j.  Intersecting strips with
the running box, axis by axis via interval arithmetic, can only shrink it,
which makes the derived error bound (the box width) monotone non-increasing.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .barrier import tightened_threshold
from .errors import ConfigurationError, InconsistencyError
from .model import eval_true_dynamics

# absolute inflation applied to each strip so floating-point residue in the
# measured epsilon cannot expel the true parameter from the box
_STRIP_SLACK = 1e-12


def predictor_error(model, x, x_dot_measured, u, theta_hat):
    """epsilon = measured x_dot minus the estimate-model prediction."""
    predicted = eval_true_dynamics(model, x, u, theta_hat)
    x_dot_measured = np.asarray(x_dot_measured, dtype=float)
    if x_dot_measured.shape != (model.n,):
        raise ConfigurationError(f"x_dot shape {x_dot_measured.shape} != ({model.n},)")
    return x_dot_measured - predicted


class PredictorState:
    """Velocity source for the predictor: exact passthrough or filtered.

    Filtered mode runs w_dot = pole * (x - w) and reports pole * (x - w),
    discretized exactly for a linearly interpolated x over each step, so a
    constant-velocity segment converges to the true velocity with a pure
    exp(-pole * t) transient and no discretization bias.
    """

    def __init__(self, mode="exact", pole=50.0):
        if mode not in ("exact", "filtered"):
            raise ConfigurationError(f"unknown predictor mode {mode!r}")
        if mode == "filtered" and not pole > 0.0:
            raise ConfigurationError("filter pole must be positive")
        self.mode = mode
        self.pole = float(pole)
        self._w = None
        self._x_prev = None

    def reset(self, x0):
        self._w = np.asarray(x0, dtype=float).copy()
        self._x_prev = np.asarray(x0, dtype=float).copy()

    def velocity(self, x, dt=None, x_dot_exact=None):
        """Current velocity estimate at the new sample x."""
        if self.mode == "exact":
            if x_dot_exact is None:
                raise ConfigurationError("exact mode needs the true state derivative")
            return np.asarray(x_dot_exact, dtype=float)
        if dt is None or not dt > 0.0:
            raise ConfigurationError("filtered mode needs a positive step")
        x = np.asarray(x, dtype=float)
        if self._w is None:
            self.reset(x)
            return np.zeros_like(x)
        p = self.pole
        decay = math.exp(-p * dt)
        c = (x - self._x_prev) / dt
        # exact step of w_dot = p (x(t) - w) for x linear over the interval
        self._w = decay * self._w + self._x_prev * (1.0 - decay) + c * (dt - (1.0 - decay) / p)
        self._x_prev = x.copy()
        return p * (x - self._w)


@dataclass(frozen=True)
class UncertaintyBound:
    """Running axis-aligned bound on the unknown parameter."""

    lower: np.ndarray
    upper: np.ndarray
    updates: int = 0

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("bound arrays must be 1-d and equal length")
        if not np.all(lower <= upper):
            raise ConfigurationError("bound has lower > upper on some axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def vartheta(self):
        """Per-axis worst-case estimation error (box width)."""
        return self.upper - self.lower

    def contains(self, theta):
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))


def set_membership_update(bound, regressor_matrix, epsilon, theta_hat, noise_margin=0.0):
    """Intersect the bound with the measurement strips of one sample.

    regressor_matrix is Delta(x) with shape (p, n); epsilon is the prediction
    error at the same state under theta_hat.  noise_margin widens every strip
    symmetrically to cover bounded measurement noise.  Axes are tightened
    progressively (later axes see earlier tightenings within the same
    sample).  Raises InconsistencyError if some strip excludes the whole box,
    which noiseless consistent data cannot do.
    """
    if noise_margin < 0.0:
        raise ConfigurationError("noise margin must be nonnegative")
    delta = np.asarray(regressor_matrix, dtype=float)
    epsilon = np.asarray(epsilon, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    p = bound.lower.shape[0]
    if delta.ndim != 2 or delta.shape[0] != p:
        raise ConfigurationError(f"regressor shape {delta.shape} incompatible with p={p}")
    if epsilon.shape != (delta.shape[1],):
        raise ConfigurationError("epsilon length does not match the regressor columns")
    lower = bound.lower.copy()
    upper = bound.upper.copy()
    for j in range(delta.shape[1]):
        col = delta[:, j]
        if not np.any(col != 0.0):
            continue
        center = float(col @ theta_hat) - float(epsilon[j])
        slack = noise_margin + _STRIP_SLACK * (1.0 + abs(center))
        c_lo, c_hi = center - slack, center + slack
        for i in range(p):
            if col[i] == 0.0:
                continue
            # interval of sum_{k != i} col[k] theta_k over the current box
            rest_lo = 0.0
            rest_hi = 0.0
            for k in range(p):
                if k == i:
                    continue
                term_a = col[k] * lower[k]
                term_b = col[k] * upper[k]
                rest_lo += min(term_a, term_b)
                rest_hi += max(term_a, term_b)
            num_lo = c_lo - rest_hi
            num_hi = c_hi - rest_lo
            if col[i] > 0.0:
                axis_lo, axis_hi = num_lo / col[i], num_hi / col[i]
            else:
                axis_lo, axis_hi = num_hi / col[i], num_lo / col[i]
            new_lo = max(lower[i], axis_lo)
            new_hi = min(upper[i], axis_hi)
            if new_lo > new_hi:
                raise InconsistencyError(
                    f"measurement strip excludes the parameter box on axis {i}: "
                    f"[{new_lo}, {new_hi}]"
                )
            lower[i] = new_lo
            upper[i] = new_hi
    return UncertaintyBound(lower=lower, upper=upper, updates=bound.updates + 1)


def dynamic_threshold(bound, gamma):
    """Tightening threshold recomputed from the current bound width."""
    return tightened_threshold(gamma, bound.vartheta)
