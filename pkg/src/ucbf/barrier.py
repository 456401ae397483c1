"""Parameterized barrier families, sliding variables for relative degree two,
and grid certification of the input-availability condition.

A barrier family h_theta(x) defines the estimate-parameterized safe set
C_theta = {x : h_theta(x) >= 0}.  The certification routines check, on a
sampled operating box, that some admissible input can hold the barrier's
derivative above -alpha(h_theta(x) - offset) at every sampled point of the
offset superlevel set.  The supremum over a box input set is closed form:

    sup_{u in U} a^T u = a^T mid(U) + |a|^T halfwidth(U).
"""

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InfeasibleStartError, UnsupportedFeatureError


@dataclass(frozen=True)
class DerivativeStage:
    """One certainty-equivalence time derivative h^(i)_theta with gradients."""

    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_theta: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BarrierFamily:
    """Closed-form barrier h_theta(x) with exact gradients.

    chain holds the certainty-equivalence time derivatives h^(i)_theta for
    i = 1 .. relative_degree - 1 (empty for relative degree one).  These are
    derivatives along f(x) - Delta(x)^T theta only; by definition of the
    relative degree the input does not enter them.
    """

    h: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_theta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    relative_degree: int = 1
    chain: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.relative_degree < 1:
            raise ConfigurationError("relative degree must be >= 1")
        if len(self.chain) != self.relative_degree - 1:
            raise ConfigurationError(
                f"chain has {len(self.chain)} stages, expected relative_degree-1 = "
                f"{self.relative_degree - 1}"
            )


@dataclass(frozen=True)
class SlidingVariable:
    """Scalar surface s_theta(x) reducing a degree-two barrier to degree one.

    kind "linear":          s = h_dot + lambda1 * h
    kind "state_dependent": s = h_dot + (lambda1 + lambda2 * |h|^q) * h
    """

    kind: str
    lambda1: float
    lambda2: float
    q: float
    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_theta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    barrier: BarrierFamily


def make_sliding(barrier, kind="linear", lambda1=1.0, lambda2=0.0, q=1.0):
    """Build a sliding variable compositionally from a degree-two barrier."""
    if barrier.relative_degree == 1:
        raise ConfigurationError("sliding variable is for relative degree >= 2 barriers")
    if barrier.relative_degree > 2:
        raise UnsupportedFeatureError("only relative degree <= 2 is implemented")
    if kind not in ("linear", "state_dependent"):
        raise ConfigurationError(f"unknown sliding kind {kind!r}")
    if not lambda1 > 0.0:
        raise ConfigurationError("lambda1 must be positive")
    if kind == "state_dependent" and (lambda2 < 0.0 or not q > 0.0):
        raise ConfigurationError("state_dependent needs lambda2 >= 0 and q > 0")

    hdot = barrier.chain[0]

    if kind == "linear":

        def value(x, theta):
            return hdot.value(x, theta) + lambda1 * barrier.h(x, theta)

        def grad_x(x, theta):
            return hdot.grad_x(x, theta) + lambda1 * barrier.grad_x(x, theta)

        def grad_theta(x, theta):
            return hdot.grad_theta(x, theta) + lambda1 * barrier.grad_theta(x, theta)

    else:

        def _gain(h):
            return lambda1 + lambda2 * abs(h) ** q

        def _gain_times_h_slope(h):
            # d/dh of (lambda1 + lambda2 |h|^q) h
            return lambda1 + lambda2 * (q + 1.0) * abs(h) ** q

        def value(x, theta):
            h = barrier.h(x, theta)
            return hdot.value(x, theta) + _gain(h) * h

        def grad_x(x, theta):
            h = barrier.h(x, theta)
            return hdot.grad_x(x, theta) + _gain_times_h_slope(h) * barrier.grad_x(x, theta)

        def grad_theta(x, theta):
            h = barrier.h(x, theta)
            return hdot.grad_theta(x, theta) + _gain_times_h_slope(h) * barrier.grad_theta(x, theta)

    return SlidingVariable(
        kind=kind,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        q=float(q),
        value=value,
        grad_x=grad_x,
        grad_theta=grad_theta,
        barrier=barrier,
    )


def tightened_threshold(gamma, vartheta):
    """Robustness margin vartheta^T vartheta / (2 gamma) subtracted from the barrier."""
    if not gamma > 0.0:
        raise ConfigurationError("adaptation gain must be positive")
    vartheta = np.asarray(vartheta, dtype=float)
    return float(vartheta @ vartheta) / (2.0 * gamma)


def racbf_modified_drift(model, barrier, x, theta_hat, gamma):
    """Certainty-equivalence drift with the rate-compensating parameter shift.

    Returns f(x) - Delta(x)^T (theta_hat - gamma * grad_theta h(x, theta_hat)),
    the drift against which the baseline rate-adaptive constraint is posed.
    """
    if not gamma > 0.0:
        raise ConfigurationError("adaptation gain must be positive")
    shifted = theta_hat - gamma * barrier.grad_theta(x, theta_hat)
    return np.asarray(model.f(x), dtype=float) - np.asarray(
        model.regressor(x), dtype=float
    ).T @ shifted


def box_grid(box, points_per_axis):
    """Regular grid over an axis-aligned box, returned as an (N, d) array."""
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2:
        raise ConfigurationError("box must have shape (d, 2)")
    if np.any(box[:, 0] > box[:, 1]):
        raise ConfigurationError("box has lower > upper on some axis")
    if points_per_axis < 1:
        raise ConfigurationError("points_per_axis must be >= 1")
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _value_and_grad(barrier_like):
    """Uniform access to (value, grad_x) for barriers and sliding variables."""
    if hasattr(barrier_like, "h"):
        return barrier_like.h, barrier_like.grad_x
    return barrier_like.value, barrier_like.grad_x


_ZERO_AUTHORITY_TOL = 1e-12


def condition_margin(model, barrier_like, alpha, input_box, x, theta, offset=0.0, drift_fn=None):
    """Pointwise certification margin at one (x, theta) pair.

    Returns (margin, in_set, authority) where

        margin   = sup_u grad^T [drift + g(x) u] + alpha(value - offset)
        in_set   = value >= offset
        authority = max_i |(g^T grad)_i|

    drift_fn overrides the default f(x) - Delta(x)^T theta (used for the
    baseline law, whose constraint is posed against a shifted drift).
    """
    value_fn, grad_fn = _value_and_grad(barrier_like)
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    value = float(value_fn(x, theta))
    in_set = value >= offset
    grad = np.asarray(grad_fn(x, theta), dtype=float)
    if drift_fn is None:
        drift = np.asarray(model.f(x), dtype=float) - np.asarray(
            model.regressor(x), dtype=float
        ).T @ theta
    else:
        drift = np.asarray(drift_fn(x, theta), dtype=float)
    a = np.asarray(model.g(x), dtype=float).T @ grad
    box = np.asarray(input_box, dtype=float)
    mid = 0.5 * (box[:, 0] + box[:, 1])
    half = 0.5 * (box[:, 1] - box[:, 0])
    sup_term = float(a @ mid + np.abs(a) @ half)
    margin = float(grad @ drift) + sup_term + float(alpha(value - offset))
    authority = float(np.max(np.abs(a))) if a.size else 0.0
    return margin, in_set, authority


@dataclass(frozen=True)
class GridCertificate:
    """Result of sampling the availability condition over an operating grid.

    Margins are evaluated only on grid points inside the offset superlevel
    set; points below it are counted but carry no requirement.  Points where
    the input cannot move the barrier (zero authority) are counted separately
    since the condition must hold there through drift and alpha alone.
    """

    condition: str
    offset: float
    passed: bool
    min_margin: float
    argmin_x: tuple
    argmin_theta: tuple
    points_total: int
    points_in_set: int
    points_zero_authority: int
    note: str = ""

    def to_text(self):
        lines = ["grid certificate"]
        for key in (
            "condition",
            "offset",
            "passed",
            "min_margin",
            "argmin_x",
            "argmin_theta",
            "points_total",
            "points_in_set",
            "points_zero_authority",
            "note",
        ):
            value = getattr(self, key)
            if isinstance(value, tuple):
                value = list(value)
            lines.append(f"{key}: {json.dumps(value)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0] != "grid certificate":
            raise ConfigurationError("not a grid certificate document")
        fields = {}
        for ln in lines[1:]:
            key, _, raw = ln.partition(":")
            fields[key.strip()] = json.loads(raw.strip())
        fields["argmin_x"] = tuple(fields["argmin_x"])
        fields["argmin_theta"] = tuple(fields["argmin_theta"])
        return GridCertificate(**fields)

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.condition} grid certificate: {verdict} "
            f"min margin {self.min_margin:.6g} at x={list(self.argmin_x)}, "
            f"theta={list(self.argmin_theta)} "
            f"({self.points_in_set}/{self.points_total} points in set, "
            f"{self.points_zero_authority} zero-authority)"
        )


def _verify_grid(model, barrier_like, alpha, input_box, theta_grid, x_grid, offset, drift_fn, label):
    theta_grid = np.atleast_2d(np.asarray(theta_grid, dtype=float))
    x_grid = np.atleast_2d(np.asarray(x_grid, dtype=float))
    total = 0
    in_set_count = 0
    zero_auth = 0
    min_margin = math.inf
    arg_x = ()
    arg_theta = ()
    for theta in theta_grid:
        for x in x_grid:
            total += 1
            margin, in_set, authority = condition_margin(
                model, barrier_like, alpha, input_box, x, theta, offset=offset, drift_fn=drift_fn
            )
            if not in_set:
                continue
            in_set_count += 1
            if authority <= _ZERO_AUTHORITY_TOL:
                zero_auth += 1
            if margin < min_margin:
                min_margin = margin
                arg_x = tuple(float(v) for v in x)
                arg_theta = tuple(float(v) for v in theta)
    passed = (in_set_count == 0) or (min_margin >= 0.0)
    return GridCertificate(
        condition=label,
        offset=float(offset),
        passed=passed,
        min_margin=min_margin,
        argmin_x=arg_x,
        argmin_theta=arg_theta,
        points_total=total,
        points_in_set=in_set_count,
        points_zero_authority=zero_auth,
    )


def verify_ucbf_grid(model, barrier, alpha, input_box, theta_grid, x_grid, offset=0.0, drift_fn=None):
    """Sample the degree-one availability condition over a grid.

    PASS iff the margin is nonnegative at every sampled point of the offset
    superlevel set, for every sampled parameter value.
    """
    label = "ucbf" if drift_fn is None else "racbf"
    return _verify_grid(model, barrier, alpha, input_box, theta_grid, x_grid, offset, drift_fn, label)


def verify_houcbf_grid(model, sliding, alpha, input_box, theta_grid, x_grid, offset=0.0):
    """Sample the availability condition posed on a sliding variable."""
    return _verify_grid(model, sliding, alpha, input_box, theta_grid, x_grid, offset, None, "houcbf")


@dataclass(frozen=True)
class InitialSetsReport:
    values: tuple
    passed: tuple

    @property
    def all_passed(self):
        return all(self.passed)


def initial_condition_sets_check(barrier, x0, theta_hat0, lam, raise_on_fail=False):
    """Check (d/dt + lam)^i h >= 0 at the initial state for i = 0 .. r_b - 1.

    With a repeated surface eigenvalue lam these nested conditions guarantee
    that a nonnegative sliding variable keeps the barrier itself nonnegative.
    Only relative degree <= 2 is supported.
    """
    if not lam > 0.0:
        raise ConfigurationError("surface eigenvalue must be positive")
    x0 = np.asarray(x0, dtype=float)
    theta_hat0 = np.asarray(theta_hat0, dtype=float)
    levels = [float(barrier.h(x0, theta_hat0))]
    if barrier.relative_degree == 2:
        hdot = barrier.chain[0]
        levels.append(float(hdot.value(x0, theta_hat0)) + lam * levels[0])
    elif barrier.relative_degree > 2:
        raise UnsupportedFeatureError("only relative degree <= 2 is implemented")
    passed = tuple(v >= 0.0 for v in levels)
    report = InitialSetsReport(values=tuple(levels), passed=passed)
    if raise_on_fail and not report.all_passed:
        raise InfeasibleStartError(
            f"initial condition fails nested level sets: values={levels}"
        )
    return report
