"""Uncertain control-affine models and the scalar shaping functions.

Systems take the form

    x_dot = f(x) - Delta(x)^T theta + g(x) u

with state x in R^n, input u in R^m, and a constant parameter theta in R^p
that is unknown apart from membership in an axis-aligned box.  Delta is the
regressor mapping states to (p, n) matrices, so the uncertain drift term is
linear in theta.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class DynamicsModel:
    """Control-affine dynamics with a parameter-linear uncertain drift term.

    f    : x -> (n,) nominal drift
    regressor : x -> (p, n) matrix Delta(x); the uncertain drift is -Delta(x)^T theta
    g    : x -> (n, m) input matrix
    """

    n: int
    m: int
    p: int
    f: Callable[[np.ndarray], np.ndarray]
    regressor: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.p < 1:
            raise ConfigurationError(
                f"model dimensions must be positive, got n={self.n} m={self.m} p={self.p}"
            )


def eval_true_dynamics(model, x, u, theta):
    """Evaluate x_dot = f(x) - Delta(x)^T theta + g(x) u with shape checks.

    Raises ConfigurationError on any dimension mismatch between the arguments
    and the model's declared (n, m, p).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if x.shape != (model.n,):
        raise ConfigurationError(f"state shape {x.shape} != ({model.n},)")
    if u.shape != (model.m,):
        raise ConfigurationError(f"input shape {u.shape} != ({model.m},)")
    if theta.shape != (model.p,):
        raise ConfigurationError(f"parameter shape {theta.shape} != ({model.p},)")
    fx = np.asarray(model.f(x), dtype=float)
    dx = np.asarray(model.regressor(x), dtype=float)
    gx = np.asarray(model.g(x), dtype=float)
    if fx.shape != (model.n,):
        raise ConfigurationError(f"f(x) shape {fx.shape} != ({model.n},)")
    if dx.shape != (model.p, model.n):
        raise ConfigurationError(f"regressor shape {dx.shape} != ({model.p}, {model.n})")
    if gx.shape != (model.n, model.m):
        raise ConfigurationError(f"g(x) shape {gx.shape} != ({model.n}, {model.m})")
    return fx - dx.T @ theta + gx @ u


@dataclass(frozen=True)
class ParameterBox:
    """Axis-aligned admissible set for the unknown parameter.

    vartheta_sup bounds the worst-case estimation error per component.  The
    default is the box width, which dominates |theta_hat - theta| whenever
    both the estimate and the truth stay inside the box.
    """

    lower: np.ndarray
    upper: np.ndarray
    theta_true: Optional[np.ndarray] = None
    vartheta_sup: Optional[np.ndarray] = None

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("parameter bounds must be 1-d arrays of equal length")
        if not np.all(lower <= upper):
            raise ConfigurationError("parameter box has lower > upper on some axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.theta_true is not None:
            truth = np.atleast_1d(np.asarray(self.theta_true, dtype=float))
            if truth.shape != lower.shape:
                raise ConfigurationError("theta_true shape does not match the box")
            if not (np.all(lower <= truth) and np.all(truth <= upper)):
                raise ConfigurationError("theta_true lies outside the parameter box")
            object.__setattr__(self, "theta_true", truth)
        if self.vartheta_sup is None:
            object.__setattr__(self, "vartheta_sup", upper - lower)
        else:
            vs = np.atleast_1d(np.asarray(self.vartheta_sup, dtype=float))
            if vs.shape != lower.shape:
                raise ConfigurationError("vartheta_sup shape does not match the box")
            if not np.all(vs >= 0.0):
                raise ConfigurationError("vartheta_sup must be nonnegative")
            object.__setattr__(self, "vartheta_sup", vs)

    @property
    def p(self):
        return self.lower.shape[0]

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, theta):
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def clamp(self, theta):
        """Componentwise projection onto the box."""
        return np.minimum(np.maximum(theta, self.lower), self.upper)


@dataclass(frozen=True)
class ClassKInfinity:
    """Extended class-K-infinity comparison function with an explicit inverse.

    Built-in kind "linear" is alpha(r) = gain * r.  Kind "user" wraps caller
    supplied forward/inverse callables; certify_class_k checks the required
    properties on a sample grid either way.
    """

    kind: str = "linear"
    gain: float = 1.0
    forward: Optional[Callable[[float], float]] = None
    inverse_fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind == "linear":
            if not self.gain > 0.0:
                raise ConfigurationError("linear class-K gain must be positive")
        elif self.kind == "user":
            if self.forward is None or self.inverse_fn is None:
                raise ConfigurationError("user class-K needs forward and inverse callables")
        else:
            raise ConfigurationError(f"unknown class-K kind {self.kind!r}")

    def __call__(self, r):
        if self.kind == "linear":
            return self.gain * r
        return self.forward(r)

    def inverse(self, y):
        if self.kind == "linear":
            return y / self.gain
        return self.inverse_fn(y)


@dataclass(frozen=True)
class ClassKReport:
    passed: bool
    zero_at_zero: bool
    strictly_increasing: bool
    worst_superlinear_violation: float
    worst_violation_point: tuple

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"class-K certificate: {verdict} "
            f"(zero_at_zero={self.zero_at_zero}, increasing={self.strictly_increasing}, "
            f"worst superlinear violation={self.worst_superlinear_violation:.3e} "
            f"at (c, r)={self.worst_violation_point})"
        )


def certify_class_k(alpha, r_values=None, c_values=None, tol=1e-9):
    """Sample-grid certificate for the comparison-function requirements.

    Checks alpha(0) = 0, strict monotonicity on r_values, and the scaling
    property c * alpha(r) <= alpha(c * r) for every c >= 1 in c_values.  The
    report carries the worst scaling violation and where it occurred; a
    violation magnitude above tol fails the certificate.
    """
    if r_values is None:
        r_values = np.linspace(-5.0, 5.0, 201)
    if c_values is None:
        c_values = np.linspace(1.0, 4.0, 13)
    r_values = np.asarray(r_values, dtype=float)
    c_values = np.asarray(c_values, dtype=float)
    if np.any(c_values < 1.0):
        raise ConfigurationError("scaling factors c must satisfy c >= 1")

    zero_ok = abs(alpha(0.0)) <= tol
    vals = np.array([alpha(float(r)) for r in np.sort(r_values)])
    increasing = bool(np.all(np.diff(vals) > 0.0)) if len(vals) > 1 else True

    worst = -math.inf
    worst_point = (math.nan, math.nan)
    for c in c_values:
        for r in r_values:
            violation = c * alpha(float(r)) - alpha(float(c * r))
            if violation > worst:
                worst = violation
                worst_point = (float(c), float(r))
    passed = zero_ok and increasing and worst <= tol
    return ClassKReport(passed, zero_ok, increasing, worst, worst_point)


@dataclass(frozen=True)
class ScalingFunction:
    """Adaptation-gain scaling v(rho) with its slope, on a declared domain.

    Valid scalings satisfy 1 <= v(rho) <= zeta and v'(rho) > 0 on the domain;
    eval_scaling enforces both at every evaluation.
    """

    kind: str
    zeta: float
    domain: tuple
    value: Callable[[float], float]
    slope: Callable[[float], float]

    def __post_init__(self):
        lo, hi = self.domain
        if not (lo < hi):
            raise ConfigurationError("scaling domain must be a nonempty interval")
        if not (self.zeta > 1.0 and math.isfinite(self.zeta)):
            raise ConfigurationError("scaling bound zeta must be finite and > 1")


def arctan_plus_one(domain=(0.0, 10.0)):
    """v(rho) = arctan(rho) + 1 with bound zeta = 1 + pi/2."""
    return ScalingFunction(
        kind="arctan_plus_one",
        zeta=1.0 + math.pi / 2.0,
        domain=(float(domain[0]), float(domain[1])),
        value=lambda rho: math.atan(rho) + 1.0,
        slope=lambda rho: 1.0 / (1.0 + rho * rho),
    )


def exp_saturating(zeta=2.0):
    """v(rho) = zeta - (zeta - 1) * exp(-rho) on [0, inf); v(0) = 1."""
    z = float(zeta)
    if not z > 1.0:
        raise ConfigurationError("exp_saturating needs zeta > 1")
    return ScalingFunction(
        kind="exp_saturating",
        zeta=z,
        domain=(0.0, math.inf),
        value=lambda rho: z - (z - 1.0) * math.exp(-rho),
        slope=lambda rho: (z - 1.0) * math.exp(-rho),
    )


_SCALING_SLACK = 1e-12


def eval_scaling(sf, rho):
    """Return (v(rho), v'(rho)); raises DomainError outside the declared domain."""
    lo, hi = sf.domain
    if not (lo <= rho <= hi):
        raise DomainError(f"rho={rho!r} outside scaling domain [{lo}, {hi}]")
    v = sf.value(rho)
    dv = sf.slope(rho)
    if v < 1.0 - _SCALING_SLACK or v > sf.zeta + _SCALING_SLACK:
        raise ConfigurationError(f"scaling value v({rho})={v} violates 1 <= v <= zeta={sf.zeta}")
    if not dv > 0.0:
        raise ConfigurationError(f"scaling slope at rho={rho} is not positive")
    return v, dv
