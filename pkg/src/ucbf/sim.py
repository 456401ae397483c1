"""Closed-loop runs: scenario container, RK4 stepping, trace files, monitors.

A run integrates the true plant under the certainty-equivalence safety
filter while the chosen adaptation law moves the estimate (and, for the
scaled laws, the gain state).  Every logged quantity that a monitor needs is
either a trace column or recomputable from one, so monitor reports are pure
functions of (scenario, trace) and survive a CSV round trip bit for bit.
"""

import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .adaptation import (
    AdaptationConfig,
    barrier_like_value,
    composite_rates,
    direct_rates,
    high_order_rates,
    issf_floor,
    leaky_rates,
    racbf_rates,
    tracking_rates,
)
from .barrier import (
    BarrierFamily,
    SlidingVariable,
    initial_condition_sets_check,
    racbf_modified_drift,
    tightened_threshold,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InconsistencyError,
    PreconditionError,
    PremiseViolationError,
    SingularDenominatorError,
)
from .estimator import (
    PredictorState,
    UncertaintyBound,
    dynamic_threshold,
    predictor_error,
    set_membership_update,
)
from .model import (
    ClassKInfinity,
    DynamicsModel,
    ParameterBox,
    eval_scaling,
    eval_true_dynamics,
)
from .qp import ControlLyapunov, pointwise_filter, safety_row, solve_min_norm, tracking_row

_H_TOL = 1e-6
_MARGIN_TOL = 1e-6
_RHO_TOL = 1e-9
_DERIV_TOL = 1e-3
_QP_OK = 0.0
_QP_INFEASIBLE = 1.0


@dataclass(frozen=True)
class EstimatorSettings:
    """Set-membership tightening applied every `cadence` steps."""

    cadence: int = 10
    noise_margin: float = 0.0
    mode: str = "exact"
    pole: float = 50.0

    def __post_init__(self):
        if self.cadence < 1:
            raise ConfigurationError("estimator cadence must be >= 1 steps")
        if self.noise_margin < 0.0:
            raise ConfigurationError("noise margin must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    """Everything a closed-loop run needs, in one immutable bundle."""

    name: str
    model: DynamicsModel
    barrier: BarrierFamily
    alpha: ClassKInfinity
    adaptation: AdaptationConfig
    parameters: ParameterBox
    x0: np.ndarray
    theta_hat0: np.ndarray
    rho0: float = 0.0
    T: float = 10.0
    dt: float = 1e-3
    sliding: Optional[SlidingVariable] = None
    clf: Optional[ControlLyapunov] = None
    clf_adaptation: Optional[AdaptationConfig] = None
    phi_hat0: Optional[np.ndarray] = None
    varrho0: float = 0.0
    input_box: Optional[np.ndarray] = None
    u_nominal: Optional[Callable] = None
    estimator: Optional[EstimatorSettings] = None
    slack_weight: float = 100.0
    check_initial_margin: bool = True
    on_infeasible: str = "abort"
    grid_box: Optional[np.ndarray] = None
    grid_points_per_axis: int = 21
    grid_theta_points: int = 11
    grid_offset: float = 0.0
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "theta_hat0", np.asarray(self.theta_hat0, dtype=float))
        if self.x0.shape != (self.model.n,):
            raise ConfigurationError(f"x0 shape {self.x0.shape} != ({self.model.n},)")
        if self.theta_hat0.shape != (self.model.p,):
            raise ConfigurationError(
                f"theta_hat0 shape {self.theta_hat0.shape} != ({self.model.p},)"
            )
        if self.parameters.theta_true is None:
            raise ConfigurationError("scenario needs parameters.theta_true to simulate")
        if not self.T > 0.0 or not self.dt > 0.0:
            raise ConfigurationError("horizon and step must be positive")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError("dt must divide T to a whole number of steps")
        if self.adaptation.law == "high_order" and self.sliding is None:
            raise ConfigurationError("high_order law needs a sliding variable")
        if (self.clf is None) != (self.clf_adaptation is None):
            raise ConfigurationError("clf and clf_adaptation come as a pair")
        if self.clf is not None and self.phi_hat0 is None:
            raise ConfigurationError("clf scenarios need phi_hat0")
        if self.phi_hat0 is not None:
            object.__setattr__(self, "phi_hat0", np.asarray(self.phi_hat0, dtype=float))
        if self.input_box is not None:
            box = np.asarray(self.input_box, dtype=float)
            if box.shape != (self.model.m, 2):
                raise ConfigurationError(f"input box shape {box.shape} != ({self.model.m}, 2)")
            object.__setattr__(self, "input_box", box)
        if self.on_infeasible not in ("abort", "continue"):
            raise ConfigurationError("on_infeasible must be 'abort' or 'continue'")
        if self.grid_box is not None:
            object.__setattr__(self, "grid_box", np.asarray(self.grid_box, dtype=float))

    @property
    def steps(self):
        return int(round(self.T / self.dt))

    @property
    def scaled_value(self):
        """Degree-one object the law and constraint act on."""
        return self.sliding if self.adaptation.law == "high_order" else self.barrier

    def threshold0(self):
        return tightened_threshold(self.adaptation.gamma, self.parameters.vartheta_sup)


def scenario_with(scenario, **overrides):
    """Copy with top-level or adaptation-level overrides (gamma, eta, sigma,
    beta, dt, T, ...); adaptation keys are routed into the law config."""
    adapt_keys = {k: overrides.pop(k) for k in ("gamma", "eta", "sigma", "beta") if k in overrides}
    if adapt_keys:
        overrides["adaptation"] = replace(scenario.adaptation, **adapt_keys)
    return replace(scenario, **overrides)


@dataclass(frozen=True)
class Trace:
    """Column-named (N+1) x C float matrix of one run."""

    columns: tuple
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise ConfigurationError("trace data does not match its column names")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "columns", tuple(self.columns))

    def __len__(self):
        return self.data.shape[0]

    def column(self, name):
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise KeyError(f"trace has no column {name!r}") from None
        return self.data[:, idx]

    def block(self, prefix):
        idx = [i for i, c in enumerate(self.columns) if c.startswith(prefix)
               and c[len(prefix):].isdigit()]
        if not idx:
            raise KeyError(f"trace has no column block {prefix!r}")
        return self.data[:, idx]

    def has_column(self, name):
        return name in self.columns


def trace_columns(scenario):
    model = scenario.model
    cols = ["t"]
    cols += [f"x{i}" for i in range(model.n)]
    cols += [f"theta_hat{i}" for i in range(model.p)]
    cols += ["rho"]
    cols += [f"u{i}" for i in range(model.m)]
    cols += ["delta", "h_value"]
    if scenario.adaptation.law == "high_order":
        cols += ["s_value"]
    cols += ["barrier_like", "effective_gain", "threshold"]
    if scenario.clf is not None:
        cols += [f"phi_hat{i}" for i in range(model.p)]
        cols += ["varrho", "clf_value"]
    if scenario.estimator is not None:
        cols += [f"bound_lo{i}" for i in range(model.p)]
        cols += [f"bound_hi{i}" for i in range(model.p)]
    cols += ["qp_status", "clamp_fired"]
    return tuple(cols)


def write_trace_csv(trace, path):
    header = ",".join(trace.columns)
    np.savetxt(path, trace.data, fmt="%.17g", delimiter=",", header=header, comments="")


def read_trace_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
    columns = tuple(header.split(","))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trace(columns=columns, data=data)


@dataclass(frozen=True)
class RunResult:
    scenario: Scenario
    trace: Trace
    abort_reason: Optional[str] = None
    abort_step: Optional[int] = None
    runtime_s: float = 0.0

    @property
    def completed(self):
        return self.abort_reason is None


def _law_rates(scenario, x, theta_hat, rho, epsilon_fn):
    cfg = scenario.adaptation
    if cfg.law == "direct":
        return direct_rates(scenario.model, scenario.barrier, cfg, x, theta_hat, rho)
    if cfg.law == "leaky":
        return leaky_rates(scenario.model, scenario.barrier, cfg, x, theta_hat, rho)
    if cfg.law == "composite":
        return composite_rates(
            scenario.model, scenario.barrier, cfg, x, theta_hat, rho, epsilon_fn(x, theta_hat)
        )
    if cfg.law == "high_order":
        return high_order_rates(scenario.model, scenario.sliding, cfg, x, theta_hat, rho)
    raise ConfigurationError(f"no state-space law for {cfg.law!r}")


def _control(scenario, t, x, theta_hat, phi_hat, threshold):
    model = scenario.model
    cfg = scenario.adaptation
    if cfg.law == "racbf":
        drift_fn = lambda xx, th: racbf_modified_drift(model, scenario.barrier, xx, th, cfg.gamma)
        row = safety_row(model, scenario.barrier, scenario.alpha, x, theta_hat,
                         threshold=threshold, drift_fn=drift_fn)
    else:
        row = safety_row(model, scenario.scaled_value, scenario.alpha, x, theta_hat,
                         threshold=threshold)
    rows = [row]
    if scenario.clf is not None:
        rows.append(tracking_row(model, scenario.clf, x, phi_hat))
    if scenario.u_nominal is not None:
        sol = pointwise_filter(scenario.u_nominal(t, x), rows, scenario.input_box,
                               scenario.slack_weight)
    else:
        sol = solve_min_norm(rows, scenario.input_box, scenario.slack_weight, m=model.m)
    if sol.status != "optimal" and scenario.on_infeasible == "abort":
        raise PremiseViolationError(
            f"safety filter infeasible at t={t:.6g} (violated rows {sol.violated_rows})"
        )
    return sol


def _check_premises(scenario):
    cfg = scenario.adaptation
    eval_scaling(cfg.scaling, scenario.rho0)
    value0 = float(scenario.scaled_value.value(scenario.x0, scenario.theta_hat0)) \
        if scenario.adaptation.law == "high_order" \
        else float(scenario.barrier.h(scenario.x0, scenario.theta_hat0))
    lam0 = scenario.threshold0()
    if scenario.check_initial_margin and value0 < lam0:
        raise PreconditionError(
            f"initial barrier value {value0:.6g} sits below the tightened "
            f"threshold {lam0:.6g}; the adaptation gain is inadmissible for this start"
        )
    if cfg.law == "high_order":
        initial_condition_sets_check(
            scenario.barrier, scenario.x0, scenario.theta_hat0,
            scenario.sliding.lambda1, raise_on_fail=True,
        )
    return value0, lam0


def run(scenario):
    """Integrate the closed loop with RK4, re-solving the filter per stage."""
    started = time.perf_counter()
    _check_premises(scenario)
    model = scenario.model
    cfg = scenario.adaptation
    theta_true = np.asarray(scenario.parameters.theta_true, dtype=float)
    n, p, m = model.n, model.p, model.m
    has_clf = scenario.clf is not None
    law_has_rho = cfg.law != "racbf"

    def epsilon_fn(x, theta_hat):
        x_dot = eval_true_dynamics(model, x, np.zeros(m), theta_true)
        return predictor_error(model, x, x_dot, np.zeros(m), theta_hat)

    bound = None
    predictor = None
    threshold = scenario.threshold0()
    if scenario.estimator is not None:
        bound = UncertaintyBound(
            lower=scenario.parameters.lower.copy(), upper=scenario.parameters.upper.copy()
        )
        predictor = PredictorState(mode=scenario.estimator.mode, pole=scenario.estimator.pole)
        predictor.reset(scenario.x0)
        threshold = dynamic_threshold(bound, cfg.gamma)

    size = n + p + 1 + ((p + 1) if has_clf else 0)

    def pack(x, th, rho, phi=None, vr=0.0):
        z = np.empty(size)
        z[:n] = x
        z[n:n + p] = th
        z[n + p] = rho
        if has_clf:
            z[n + p + 1:n + p + 1 + p] = phi
            z[-1] = vr
        return z

    def unpack(z):
        x = z[:n]
        th = z[n:n + p]
        rho = float(z[n + p])
        phi = z[n + p + 1:n + p + 1 + p] if has_clf else None
        vr = float(z[-1]) if has_clf else 0.0
        return x, th, rho, phi, vr

    def stage(t, z):
        x, th, rho, phi, vr = unpack(z)
        sol = _control(scenario, t, x, th, phi, threshold)
        x_dot = eval_true_dynamics(model, x, sol.u, theta_true)
        if law_has_rho:
            rates = _law_rates(scenario, x, th, rho, epsilon_fn)
            th_dot, rho_dot = rates.theta_hat_dot, rates.rho_dot
        else:
            th_dot = racbf_rates(model, scenario.barrier, cfg, x, th)
            rho_dot = 0.0
        if has_clf:
            crates = tracking_rates(model, scenario.clf, scenario.clf_adaptation, x, phi, vr)
            zdot = pack(x_dot, th_dot, rho_dot, crates.theta_hat_dot, crates.rho_dot)
        else:
            zdot = pack(x_dot, th_dot, rho_dot)
        return zdot, sol

    columns = trace_columns(scenario)
    steps = scenario.steps
    dt = scenario.dt
    data = np.empty((steps + 1, len(columns)))
    written = 0
    abort_reason = None
    abort_step = None

    def log_row(k, t, z, sol, clamp_fired):
        x, th, rho, phi, vr = unpack(z)
        theta_tilde = th - theta_true
        h = float(scenario.barrier.h(x, th))
        row = [t]
        row += list(x)
        row += list(th)
        row += [rho]
        row += list(sol.u)
        row += [sol.delta, h]
        if cfg.law == "high_order":
            s = float(scenario.sliding.value(x, th))
            row += [s]
            bl = barrier_like_value(s, cfg, rho, theta_tilde)
            gain = cfg.gamma * eval_scaling(cfg.scaling, rho)[0]
        elif cfg.law == "racbf":
            bl = h - float(theta_tilde @ theta_tilde) / (2.0 * cfg.gamma)
            gain = cfg.gamma
        else:
            bl = barrier_like_value(h, cfg, rho, theta_tilde)
            gain = cfg.gamma * eval_scaling(cfg.scaling, rho)[0]
        row += [bl, gain, threshold]
        if has_clf:
            row += list(phi)
            row += [vr, float(scenario.clf.V(x, phi))]
        if bound is not None:
            row += list(bound.lower)
            row += list(bound.upper)
        row += [_QP_OK if sol.status == "optimal" else _QP_INFEASIBLE, float(clamp_fired)]
        data[k, :] = row

    z = pack(scenario.x0, scenario.theta_hat0.copy(), scenario.rho0,
             scenario.phi_hat0, scenario.varrho0)
    clamp_pending = False

    def clamp(z, pending):
        if cfg.projection is None:
            return z, pending
        x, th, rho, phi, vr = unpack(z)
        lo = bound.lower if bound is not None else cfg.projection.lower
        hi = bound.upper if bound is not None else cfg.projection.upper
        clipped = np.clip(th, lo, hi)
        if np.array_equal(clipped, th):
            return z, pending
        return pack(x, clipped, rho, phi, vr), True

    try:
        for k in range(steps):
            t = k * dt
            if bound is not None and k % scenario.estimator.cadence == 0:
                x, th, rho, phi, vr = unpack(z)
                x_dot = predictor.velocity(
                    x, dt=scenario.estimator.cadence * dt,
                    x_dot_exact=eval_true_dynamics(model, x, np.zeros(m), theta_true),
                )
                eps = predictor_error(model, x, x_dot, np.zeros(m), th)
                bound = set_membership_update(
                    bound, model.regressor(x), eps, th, scenario.estimator.noise_margin
                )
                threshold = dynamic_threshold(bound, cfg.gamma)
            z, clamp_pending = clamp(z, clamp_pending)
            k1, sol = stage(t, z)
            log_row(k, t, z, sol, clamp_pending)
            written = k + 1
            clamp_pending = False
            k2, _ = stage(t + 0.5 * dt, z + (0.5 * dt) * k1)
            k3, _ = stage(t + 0.5 * dt, z + (0.5 * dt) * k2)
            k4, _ = stage(t + dt, z + dt * k3)
            z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = steps * dt
        z, clamp_pending = clamp(z, clamp_pending)
        _, sol = stage(t, z)
        log_row(steps, t, z, sol, clamp_pending)
        written = steps + 1
    except (DomainError, SingularDenominatorError, PremiseViolationError,
            InconsistencyError) as exc:
        abort_reason = f"{type(exc).__name__}: {exc}"
        abort_step = written - 1 if written else 0
    trace = Trace(columns=columns, data=data[:written, :])
    return RunResult(
        scenario=scenario,
        trace=trace,
        abort_reason=abort_reason,
        abort_step=abort_step,
        runtime_s=time.perf_counter() - started,
    )


@dataclass(frozen=True)
class MonitorReport:
    """Trajectory-level checks derived from one trace.

    Fields that do not apply to the scenario's law are None.  The verdict is
    PASS only if every applicable check holds and the run was not aborted.
    """

    law: str
    verdict: str
    abort_reason: Optional[str]
    min_h: float
    min_barrier_margin: float
    rho_range: tuple
    min_s: Optional[float] = None
    sign_opposition_violations: Optional[int] = None
    derivative_check_worst: Optional[float] = None
    issf_min_headroom: Optional[float] = None
    threshold_monotone: Optional[bool] = None
    truth_contained: Optional[bool] = None
    stability_gap: Optional[float] = None
    tracking_initial: Optional[float] = None
    tracking_final: Optional[float] = None
    checks: tuple = ()

    def to_text(self):
        lines = [f"monitor report ({self.law}): {self.verdict}"]
        if self.abort_reason:
            lines.append(f"  abort: {self.abort_reason}")
        for name, ok, detail in self.checks:
            lines.append(f"  [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        return "\n".join(lines) + "\n"


def monitor_report(scenario, trace, abort_reason=None):
    """Recompute every applicable trajectory check from the trace alone."""
    cfg = scenario.adaptation
    law = cfg.law
    t = trace.column("t")
    h = trace.column("h_value")
    rho = trace.column("rho")
    bl = trace.column("barrier_like")
    thr = trace.column("threshold")
    theta_hat = trace.block("theta_hat")
    x = trace.block("x")
    checks = []

    min_h = float(np.min(h))
    rho_range = (float(np.min(rho)), float(np.max(rho)))

    if law == "racbf":
        floor = np.zeros_like(bl)
    else:
        v_row = np.array([eval_scaling(cfg.scaling, r)[0] for r in rho])
        floor = v_row * cfg.eta
    margin = bl - floor
    min_margin = float(np.min(margin))

    min_s = None
    if law == "high_order":
        s = trace.column("s_value")
        min_s = float(np.min(s))
        checks.append(("sliding nonnegative", min_s >= -_H_TOL, f"min s {min_s:.3e}"))
        checks.append(("barrier nonnegative", min_h >= -_H_TOL, f"min h {min_h:.3e}"))

    sign_viol = None
    if law in ("direct", "composite", "high_order"):
        theta_true = np.asarray(scenario.parameters.theta_true, dtype=float)

        def eps_fn(xx, th):
            x_dot = eval_true_dynamics(scenario.model, xx, np.zeros(scenario.model.m), theta_true)
            return predictor_error(scenario.model, xx, x_dot, np.zeros(scenario.model.m), th)

        sign_viol = 0
        for k in range(len(trace)):
            rates = _law_rates(scenario, x[k], theta_hat[k], float(rho[k]), eps_fn)
            if abs(rates.coupling) <= 1e-10:
                continue
            if np.sign(rates.rho_dot) != -np.sign(rates.coupling):
                sign_viol += 1
        checks.append(
            ("gain state opposes the coupling", sign_viol == 0, f"{sign_viol} violations")
        )

    deriv_worst = None
    if law in ("direct", "composite", "high_order", "leaky") and len(trace) > 1:
        dt_row = np.diff(t)
        d_bl = np.diff(bl) / dt_row
        decay = np.array([float(scenario.alpha(m_)) for m_ in margin[:-1]])
        rhs = -decay
        if law == "leaky":
            v_head = floor[:-1] / cfg.eta
            rhs = rhs - cfg.sigma * v_head * rho[:-1]
        deriv_worst = float(np.min(d_bl - rhs))
        checks.append(
            (
                "scaled certificate decay bound",
                deriv_worst >= -_DERIV_TOL,
                f"worst slack {deriv_worst:.3e}",
            )
        )

    issf_headroom = None
    if law == "leaky":
        floors = np.array(
            [issf_floor(scenario.alpha, cfg.scaling, cfg.sigma, max(r, 0.0)) for r in rho]
        )
        issf_headroom = float(np.min(h - floors))
        checks.append(
            ("degradation floor", issf_headroom >= -_H_TOL, f"min headroom {issf_headroom:.3e}")
        )
        checks.append(("gain state nonnegative", rho_range[0] >= -_RHO_TOL,
                       f"min rho {rho_range[0]:.3e}"))

    thr_monotone = None
    truth_contained = None
    if scenario.estimator is not None:
        thr_monotone = bool(np.all(np.diff(thr) <= 1e-12))
        lo = trace.block("bound_lo")
        hi = trace.block("bound_hi")
        theta_true = np.asarray(scenario.parameters.theta_true, dtype=float)
        truth_contained = bool(
            np.all(lo <= theta_true[None, :] + 1e-12)
            and np.all(hi >= theta_true[None, :] - 1e-12)
        )
        checks.append(("threshold non-increasing", thr_monotone, ""))
        checks.append(("true parameter stays inside the bound", truth_contained, ""))

    stability_gap = None
    if law == "racbf":
        stability_gap = float(abs(h[-1] - thr[-1]))
        checks.append(
            (
                "barrier settles at the tightened threshold",
                stability_gap <= 0.05 * max(thr[-1], 1e-12),
                f"gap {stability_gap:.3e}",
            )
        )

    tracking_initial = tracking_final = None
    if scenario.clf is not None and trace.has_column("clf_value"):
        V = trace.column("clf_value")
        tracking_initial = float(V[0])
        tracking_final = float(V[-1])
        checks.append(
            (
                "tracking value decreases",
                tracking_final < tracking_initial,
                f"{tracking_initial:.4g} -> {tracking_final:.4g}",
            )
        )

    if law == "leaky":
        invariant = issf_headroom is not None and issf_headroom >= -_H_TOL
        checks.insert(0, ("barrier above its degraded floor", invariant, f"min h {min_h:.3e}"))
    elif law == "racbf":
        invariant = min_h >= -_H_TOL
        checks.insert(0, ("barrier nonnegative", invariant, f"min h {min_h:.3e}"))
    else:
        invariant = min_h >= -_H_TOL and min_margin >= -_MARGIN_TOL
        checks.insert(
            0,
            (
                "barrier nonnegative and certificate above its floor",
                invariant,
                f"min h {min_h:.3e}, min margin {min_margin:.3e}",
            ),
        )

    verdict = "PASS" if (abort_reason is None and all(ok for _, ok, _ in checks)) else "FAIL"
    return MonitorReport(
        law=law,
        verdict=verdict,
        abort_reason=abort_reason,
        min_h=min_h,
        min_barrier_margin=min_margin,
        rho_range=rho_range,
        min_s=min_s,
        sign_opposition_violations=sign_viol,
        derivative_check_worst=deriv_worst,
        issf_min_headroom=issf_headroom,
        threshold_monotone=thr_monotone,
        truth_contained=truth_contained,
        stability_gap=stability_gap,
        tracking_initial=tracking_initial,
        tracking_final=tracking_final,
        checks=tuple(checks),
    )


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    admissible: Optional[bool]
    verdict: str
    min_h: float
    min_barrier_margin: float
    final_h: float
    abort_reason: Optional[str]


def sweep(scenario, parameter, values, jobs=1):
    """Re-run the scenario across one parameter axis.

    Inadmissible gain values are flagged but still simulated (the initial
    margin check is disabled for sweep variants) so the table shows what the
    guarantee's failure actually looks like.
    """
    if parameter not in ("gamma", "eta", "sigma", "dt"):
        raise ConfigurationError(f"sweep parameter must be gamma|eta|sigma|dt, got {parameter!r}")

    def one(value):
        variant = scenario_with(scenario, check_initial_margin=False, **{parameter: value})
        admissible = None
        if parameter == "gamma":
            h0 = float(scenario.barrier.h(scenario.x0, scenario.theta_hat0)) \
                if scenario.adaptation.law != "high_order" \
                else float(scenario.sliding.value(scenario.x0, scenario.theta_hat0))
            vt = scenario.parameters.vartheta_sup
            admissible = bool(value >= float(vt @ vt) / (2.0 * h0))
        result = run(variant)
        report = monitor_report(variant, result.trace, result.abort_reason)
        h = result.trace.column("h_value")
        return SweepRow(
            parameter=parameter,
            value=float(value),
            admissible=admissible,
            verdict=report.verdict,
            min_h=report.min_h,
            min_barrier_margin=report.min_barrier_margin,
            final_h=float(h[-1]),
            abort_reason=result.abort_reason,
        )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


def write_sweep_csv(rows, path):
    with open(path, "w") as fh:
        fh.write("parameter,value,admissible,verdict,min_h,min_barrier_margin,"
                 "final_h,abort_reason\n")
        for r in rows:
            adm = "" if r.admissible is None else str(int(r.admissible))
            reason = r.abort_reason or ""
            fh.write(f"{r.parameter},{r.value:.17g},{adm},{r.verdict},{r.min_h:.17g},"
                     f"{r.min_barrier_margin:.17g},{r.final_h:.17g},{reason}\n")
