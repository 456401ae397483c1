"""Small dense quadratic programs for pointwise safety filtering.

The controllers here minimize a strictly convex quadratic in (u, delta)
subject to hard safety half-spaces, soft tracking half-spaces relaxed by a
single slack delta >= 0, and an input box.  Problems are desk scale (m <= 4,
a handful of rows), so the solver enumerates working sets in deterministic
order (increasing size, lexicographic within a size) and returns the first
KKT-consistent candidate; for a strictly convex objective that candidate is
the unique global optimum.  Ties at degenerate vertices therefore resolve to
the lexicographically smallest working set.

Stacked constraint order, used by QPSolution.active_set indices: caller rows
first (in the order given), then the slack nonnegativity row when any
tracking row is present, then box lower bounds, then box upper bounds.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError

_FEAS_TOL = 1e-9
_DUAL_TOL = 1e-9


@dataclass(frozen=True)
class ConstraintRow:
    """Half-space a @ u <= b; tracking rows are relaxed to a @ u - delta <= b."""

    a: np.ndarray
    b: float
    kind: str = "safety_hard"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("safety_hard", "tracking_soft"):
            raise ConfigurationError(f"unknown row kind {self.kind!r}")
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", float(self.b))


@dataclass(frozen=True)
class ControlLyapunov:
    """Tracking certificate V(x, phi_hat) with required decay Q(x).

    grad_phi feeds the tracking-side adaptation; it is zero for
    estimate-independent Lyapunov functions.
    """

    V: callable
    grad_x: callable
    grad_phi: callable
    Q: callable
    name: str = ""


@dataclass(frozen=True)
class QPSolution:
    u: np.ndarray
    delta: float
    status: str
    objective: float
    kkt_residual: float
    active_set: tuple
    violated_rows: tuple = ()


def _value_and_grads(barrier_like):
    if hasattr(barrier_like, "h"):
        return barrier_like.h, barrier_like.grad_x
    return barrier_like.value, barrier_like.grad_x


def safety_row(model, barrier_like, alpha, x, theta_hat, threshold=0.0, drift_fn=None):
    """Hard row keeping the barrier (or sliding) derivative above its decay.

    Encodes grad^T [drift + g(x) u] >= -alpha(value - threshold) as
    a @ u <= b with a = -(g^T grad).  drift_fn overrides the default
    certainty-equivalence drift f(x) - Delta(x)^T theta_hat (the baseline
    law poses its constraint against a shifted drift).
    """
    value_fn, grad_fn = _value_and_grads(barrier_like)
    x = np.asarray(x, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    grad = np.asarray(grad_fn(x, theta_hat), dtype=float)
    if drift_fn is None:
        drift = np.asarray(model.f(x), dtype=float) - np.asarray(
            model.regressor(x), dtype=float
        ).T @ theta_hat
    else:
        drift = np.asarray(drift_fn(x, theta_hat), dtype=float)
    a = -(np.asarray(model.g(x), dtype=float).T @ grad)
    b = float(grad @ drift) + float(alpha(float(value_fn(x, theta_hat)) - threshold))
    return ConstraintRow(a=a, b=b, kind="safety_hard", label="safety")


def tracking_row(model, clf, x, phi_hat):
    """Soft row asking the Lyapunov derivative to fall below -Q(x).

    Encodes grad V^T [f - Delta^T phi_hat + g u] <= -Q(x) + delta as
    a @ u - delta <= b.
    """
    x = np.asarray(x, dtype=float)
    phi_hat = np.asarray(phi_hat, dtype=float)
    grad = np.asarray(clf.grad_x(x, phi_hat), dtype=float)
    drift = np.asarray(model.f(x), dtype=float) - np.asarray(
        model.regressor(x), dtype=float
    ).T @ phi_hat
    a = np.asarray(model.g(x), dtype=float).T @ grad
    b = -float(clf.Q(x)) - float(grad @ drift)
    return ConstraintRow(a=a, b=b, kind="tracking_soft", label="tracking")


def _stack(rows, input_box, m, slack_weight, u_ref):
    has_slack = any(r.kind == "tracking_soft" for r in rows)
    nz = m + (1 if has_slack else 0)
    H = np.eye(nz)
    if has_slack:
        H[m, m] = 2.0 * slack_weight
    c = np.zeros(nz)
    c[:m] = -u_ref
    G_rows = []
    d = []
    for row in rows:
        if row.a.shape != (m,):
            raise ConfigurationError(f"row has {row.a.shape[0]} input coefficients, expected {m}")
        g = np.zeros(nz)
        g[:m] = row.a
        if row.kind == "tracking_soft":
            g[m] = -1.0
        G_rows.append(g)
        d.append(row.b)
    if has_slack:
        g = np.zeros(nz)
        g[m] = -1.0
        G_rows.append(g)
        d.append(0.0)
    if input_box is not None:
        box = np.asarray(input_box, dtype=float)
        if box.shape != (m, 2):
            raise ConfigurationError(f"input box shape {box.shape} != ({m}, 2)")
        if np.any(box[:, 0] > box[:, 1]):
            raise ConfigurationError("input box has lower > upper on some axis")
        for i in range(m):
            g = np.zeros(nz)
            g[i] = -1.0
            G_rows.append(g)
            d.append(-box[i, 0])
        for i in range(m):
            g = np.zeros(nz)
            g[i] = 1.0
            G_rows.append(g)
            d.append(box[i, 1])
    G = np.array(G_rows) if G_rows else np.zeros((0, nz))
    return H, c, G, np.asarray(d, dtype=float), has_slack


def _kkt_residual(H, c, G, d, z, mu):
    stationarity = H @ z + c + (G.T @ mu if G.size else 0.0)
    res = float(np.max(np.abs(stationarity)))
    if G.size:
        slack = G @ z - d
        res = max(res, float(np.max(slack, initial=0.0)))
        res = max(res, float(np.max(-mu, initial=0.0)))
        res = max(res, float(np.max(np.abs(mu * slack), initial=0.0)))
    return res


def _solve_stacked(H, c, G, d):
    """Working-set enumeration for a strictly convex QP; None if infeasible."""
    nz = H.shape[0]
    K = G.shape[0]
    for size in range(0, nz + 1):
        for W in itertools.combinations(range(K), size):
            if size == 0:
                try:
                    z = np.linalg.solve(H, -c)
                except np.linalg.LinAlgError:
                    continue
                mu_w = np.zeros(0)
            else:
                Gw = G[list(W)]
                kkt = np.zeros((nz + size, nz + size))
                kkt[:nz, :nz] = H
                kkt[:nz, nz:] = Gw.T
                kkt[nz:, :nz] = Gw
                rhs = np.concatenate([-c, d[list(W)]])
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError:
                    continue
                z = sol[:nz]
                mu_w = sol[nz:]
            if mu_w.size and np.min(mu_w) < -_DUAL_TOL:
                continue
            if K and np.max(G @ z - d) > _FEAS_TOL:
                continue
            mu = np.zeros(K)
            for idx, w in enumerate(W):
                mu[w] = max(mu_w[idx], 0.0)
            return z, mu, W
    return None


def _least_violation(rows, input_box, m):
    """Box-clamped input minimizing the summed squared hard-row violations."""
    from scipy.optimize import minimize

    hard = [(r.a, r.b) for r in rows if r.kind == "safety_hard"]

    def objective(u):
        val = 0.0
        grad = np.zeros(m)
        for a, b in hard:
            viol = float(a @ u) - b
            if viol > 0.0:
                val += viol * viol
                grad += 2.0 * viol * a
        return val, grad

    if input_box is not None:
        box = np.asarray(input_box, dtype=float)
        bounds = [(lo, hi) for lo, hi in box]
        u0 = 0.5 * (box[:, 0] + box[:, 1])
    else:
        bounds = None
        u0 = np.zeros(m)
    result = minimize(objective, u0, jac=True, method="L-BFGS-B", bounds=bounds)
    return np.asarray(result.x, dtype=float)


def _solve(rows, input_box, m, slack_weight, u_ref):
    if m is None:
        if rows:
            m = len(np.atleast_1d(rows[0].a))
        elif input_box is not None:
            m = len(input_box)
        else:
            raise ConfigurationError("cannot infer input dimension from empty problem")
    if u_ref is None:
        u_ref = np.zeros(m)
    if not slack_weight > 0.0:
        raise ConfigurationError("slack weight must be positive")
    H, c, G, d, has_slack = _stack(rows, input_box, m, slack_weight, u_ref)
    found = _solve_stacked(H, c, G, d)
    if found is None:
        u = _least_violation(rows, input_box, m)
        violations = tuple(
            i
            for i, row in enumerate(rows)
            if row.kind == "safety_hard" and float(row.a @ u) - row.b > 1e-8
        )
        delta = 0.0
        for row in rows:
            if row.kind == "tracking_soft":
                delta = max(delta, float(row.a @ u) - row.b)
        return QPSolution(
            u=u,
            delta=delta,
            status="infeasible",
            objective=math.nan,
            kkt_residual=math.inf,
            active_set=(),
            violated_rows=violations,
        )
    z, mu, W = found
    u = z[:m]
    delta = float(z[m]) if has_slack else 0.0
    objective = 0.5 * float((u - u_ref) @ (u - u_ref)) + slack_weight * delta * delta
    residual = _kkt_residual(H, c, G, d, z, mu)
    return QPSolution(
        u=u,
        delta=delta,
        status="optimal",
        objective=objective,
        kkt_residual=residual,
        active_set=tuple(W),
    )


def solve_min_norm(rows, input_box=None, slack_weight=100.0, m=None):
    """Least-norm input subject to hard rows, soft rows, and the box.

    minimize 0.5 |u|^2 + slack_weight * delta^2.  Returns status "infeasible"
    with the offending hard-row indices and a box-clamped least-violation
    input when the hard rows and box admit no solution.
    """
    return _solve(rows, input_box, m, slack_weight, None)


def pointwise_filter(u_nominal, rows, input_box=None, slack_weight=100.0):
    """Minimally modify a nominal input to satisfy the rows and box.

    minimize 0.5 |u - u_nominal|^2 + slack_weight * delta^2.
    """
    u_nominal = np.atleast_1d(np.asarray(u_nominal, dtype=float))
    return _solve(rows, input_box, len(u_nominal), slack_weight, u_nominal)
