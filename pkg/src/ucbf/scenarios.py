"""Built-in scenario gallery and the JSON config layer in front of it.

Configs reference models, barriers, nominal laws, and tracking objectives by
id; there is no expression language, so new plants are added here in code
together with an operating grid for their availability certificate.  Builders
are cached so that equal configs produce identical callable objects and a
config that round-trips through JSON reloads to a field-identical Scenario.

Every gallery scenario carries a grid box; build_scenario re-checks the
availability condition on a coarse subgrid and rejects the scenario when the
certificate fails.
"""

import copy
import json
from dataclasses import dataclass, fields, is_dataclass
from functools import lru_cache

import numpy as np

from .adaptation import LAWS, AdaptationConfig, admissible_gain_lower_bound
from .barrier import (
    BarrierFamily,
    DerivativeStage,
    box_grid,
    make_sliding,
    racbf_modified_drift,
    tightened_threshold,
    verify_houcbf_grid,
    verify_ucbf_grid,
)
from .errors import ConfigurationError, PremiseViolationError
from .model import (
    ClassKInfinity,
    DynamicsModel,
    ParameterBox,
    arctan_plus_one,
    exp_saturating,
)
from .qp import ControlLyapunov
from .sim import EstimatorSettings, Scenario

_LOAD_POINTS_PER_AXIS = 9
_LOAD_THETA_POINTS = 5


# ---------------------------------------------------------------------------
# cached builders, keyed on the exact config values


@lru_cache(maxsize=None)
def model_by_id(kind):
    if kind == "planar":
        return DynamicsModel(
            n=2,
            m=1,
            p=1,
            f=lambda x: np.array([x[1], 0.0]),
            regressor=lambda x: np.array([[x[0], 0.0]]),
            g=lambda x: np.array([[0.0], [1.0]]),
            name="planar",
        )
    if kind == "scalar_decay":
        return DynamicsModel(
            n=1,
            m=1,
            p=1,
            f=lambda x: np.array([0.0]),
            regressor=lambda x: np.array([[x[0]]]),
            g=lambda x: np.array([[1.0]]),
            name="scalar_decay",
        )
    raise ConfigurationError(f"unknown model id {kind!r}")


@lru_cache(maxsize=None)
def barrier_by_id(kind, c=None):
    if kind == "velocity_ellipse":
        c = 0.25 if c is None else float(c)

        def h(x, th):
            z = x[1] - th[0] * x[0]
            return 1.0 - x[0] ** 2 - c * z * z

        def grad_x(x, th):
            z = x[1] - th[0] * x[0]
            return np.array([-2.0 * x[0] + 2.0 * c * z * th[0], -2.0 * c * z])

        def grad_theta(x, th):
            z = x[1] - th[0] * x[0]
            return np.array([2.0 * c * z * x[0]])

        return BarrierFamily(h=h, grad_x=grad_x, grad_theta=grad_theta,
                             name="velocity_ellipse")
    if kind == "position_limit":
        if c is not None:
            raise ConfigurationError("position_limit takes no shape constant")
        stage = DerivativeStage(
            value=lambda x, th: -2.0 * x[0] * (x[1] - th[0] * x[0]),
            grad_x=lambda x, th: np.array(
                [-2.0 * x[1] + 4.0 * th[0] * x[0], -2.0 * x[0]]
            ),
            grad_theta=lambda x, th: np.array([2.0 * x[0] ** 2]),
        )
        return BarrierFamily(
            h=lambda x, th: 1.0 - x[0] ** 2,
            grad_x=lambda x, th: np.array([-2.0 * x[0], 0.0]),
            grad_theta=lambda x, th: np.array([0.0]),
            relative_degree=2,
            chain=(stage,),
            name="position_limit",
        )
    if kind == "estimate_minus_state":
        if c is not None:
            raise ConfigurationError("estimate_minus_state takes no shape constant")
        return BarrierFamily(
            h=lambda x, th: float(th[0] - x[0]),
            grad_x=lambda x, th: np.array([-1.0]),
            grad_theta=lambda x, th: np.array([1.0]),
            name="estimate_minus_state",
        )
    raise ConfigurationError(f"unknown barrier id {kind!r}")


@lru_cache(maxsize=None)
def sliding_by_id(barrier_kind, barrier_c, kind, lambda1):
    barrier = barrier_by_id(barrier_kind, barrier_c)
    return make_sliding(barrier, kind=kind, lambda1=lambda1)


@lru_cache(maxsize=None)
def scaling_by_id(kind, *args):
    if kind == "arctan_plus_one":
        return arctan_plus_one(args)
    if kind == "exp_saturating":
        return exp_saturating(args[0])
    raise ConfigurationError(f"unknown scaling id {kind!r}")


@lru_cache(maxsize=None)
def nominal_by_id(kind, values):
    if kind == "linear_feedback":
        k = np.array(values, dtype=float)
        return lambda t, x: np.array([-float(k @ x)])
    if kind == "constant":
        u = np.array(values, dtype=float)
        return lambda t, x: u.copy()
    raise ConfigurationError(f"unknown nominal law id {kind!r}")


@lru_cache(maxsize=None)
def clf_by_id(kind, x_ref):
    if kind != "quadratic_tracking":
        raise ConfigurationError(f"unknown tracking objective id {kind!r}")
    ref = np.array(x_ref, dtype=float)
    return ControlLyapunov(
        V=lambda x, phi: 0.5 * float((x - ref) @ (x - ref)),
        grad_x=lambda x, phi: x - ref,
        grad_phi=lambda x, phi: np.zeros_like(phi),
        Q=lambda x: float((x - ref) @ (x - ref)),
        name="quadratic_tracking",
    )


# ---------------------------------------------------------------------------
# strict config schema


@dataclass(frozen=True)
class _Key:
    type: str
    required: bool = False
    default: object = None
    values: tuple = ()
    schema: object = None
    check: object = None
    why: str = ""


_POS = (lambda v: v > 0.0, "must be positive")
_NONNEG = (lambda v: v >= 0.0, "must be nonnegative")
_PAIR = (lambda v: len(v) == 2, "must have exactly two entries")
_PAIR_ROWS = (lambda v: all(len(r) == 2 for r in v), "rows must be [lower, upper] pairs")


def _key(type, required=False, default=None, values=(), schema=None, constraint=None):
    check, why = constraint if constraint else (None, "")
    return _Key(type=type, required=required, default=default, values=values,
                schema=schema, check=check, why=why)


_SCALING_SCHEMA = {
    "kind": _key("enum", required=True, values=("arctan_plus_one", "exp_saturating")),
    "domain": _key("vector", constraint=_PAIR),
    "zeta": _key("float", constraint=(lambda v: v > 1.0, "must exceed 1")),
}

_ADAPTATION_SCHEMA = {
    "law": _key("enum", required=True, values=LAWS),
    "gamma": _key("float", required=True, constraint=_POS),
    "eta": _key("float", required=True, constraint=_POS),
    "scaling": _key("section", required=True, schema=_SCALING_SCHEMA),
    "sigma": _key("float", default=0.0, constraint=_NONNEG),
    "beta": _key("float", default=0.0, constraint=_NONNEG),
    "projection": _key("bool", default=False),
    "force_w_zero": _key("bool", default=False),
}

_NOMINAL_SCHEMA = {
    "kind": _key("enum", required=True, values=("linear_feedback", "constant")),
    "k": _key("vector"),
    "value": _key("vector"),
}

_SCHEMA = {
    "name": _key("str", required=True),
    "description": _key("str", default=""),
    "model": _key("section", required=True, schema={
        "kind": _key("enum", required=True, values=("planar", "scalar_decay")),
    }),
    "barrier": _key("section", required=True, schema={
        "kind": _key("enum", required=True, values=(
            "velocity_ellipse", "position_limit", "estimate_minus_state")),
        "c": _key("float", constraint=_POS),
    }),
    "alpha": _key("section", required=True, schema={
        "kind": _key("enum", required=True, values=("linear",)),
        "gain": _key("float", required=True, constraint=_POS),
    }),
    "parameters": _key("section", required=True, schema={
        "lower": _key("vector", required=True),
        "upper": _key("vector", required=True),
        "theta_true": _key("vector", required=True),
    }),
    "adaptation": _key("section", required=True, schema=_ADAPTATION_SCHEMA),
    "sliding": _key("section", schema={
        "kind": _key("enum", required=True, values=("linear",)),
        "lambda1": _key("float", required=True, constraint=_POS),
    }),
    "clf": _key("section", schema={
        "kind": _key("enum", required=True, values=("quadratic_tracking",)),
        "x_ref": _key("vector", required=True),
        "adaptation": _key("section", required=True, schema=_ADAPTATION_SCHEMA),
    }),
    "estimator": _key("section", schema={
        "cadence": _key("int", default=10, constraint=(lambda v: v >= 1, "must be >= 1")),
        "noise_margin": _key("float", default=0.0, constraint=_NONNEG),
        "mode": _key("enum", default="exact", values=("exact", "filtered")),
        "pole": _key("float", default=50.0, constraint=_POS),
    }),
    "x0": _key("vector", required=True),
    "theta_hat0": _key("vector", required=True),
    "phi_hat0": _key("vector"),
    "rho0": _key("float", default=0.0),
    "varrho0": _key("float", default=0.0),
    "T": _key("float", default=10.0, constraint=_POS),
    "dt": _key("float", default=1e-3, constraint=_POS),
    "input_box": _key("matrix", constraint=_PAIR_ROWS),
    "controller": _key("section", schema={
        "nominal": _key("section", schema=_NOMINAL_SCHEMA),
        "slack_weight": _key("float", default=100.0, constraint=_POS),
    }),
    "grid": _key("section", schema={
        "box": _key("matrix", required=True, constraint=_PAIR_ROWS),
        "points_per_axis": _key("int", default=21, constraint=(lambda v: v >= 2, "must be >= 2")),
        "theta_points": _key("int", default=11, constraint=(lambda v: v >= 1, "must be >= 1")),
        "offset": _key("float", default=0.0, constraint=_NONNEG),
    }),
    "check_initial_margin": _key("bool", default=True),
    "on_infeasible": _key("enum", default="abort", values=("abort", "continue")),
}


def _coerce(name, spec, value):
    t = spec.type
    if t == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{name} must be a number, got {value!r}")
        out = float(value)
    elif t == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        out = value
    elif t == "bool":
        if not isinstance(value, bool):
            raise ConfigurationError(f"{name} must be true or false, got {value!r}")
        out = value
    elif t == "str":
        if not isinstance(value, str):
            raise ConfigurationError(f"{name} must be a string, got {value!r}")
        out = value
    elif t == "enum":
        if value not in spec.values:
            raise ConfigurationError(
                f"{name} must be one of {list(spec.values)}, got {value!r}"
            )
        out = value
    elif t == "vector":
        if not isinstance(value, (list, tuple)) or not value or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
        ):
            raise ConfigurationError(f"{name} must be a nonempty list of numbers")
        out = [float(v) for v in value]
    elif t == "matrix":
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigurationError(f"{name} must be a nonempty list")
        rows = value
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rows):
            rows = [list(rows)]
        out = []
        for row in rows:
            if not isinstance(row, (list, tuple)) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in row
            ):
                raise ConfigurationError(f"{name} rows must be lists of numbers")
            out.append([float(v) for v in row])
    elif t == "section":
        out = _validate_section(name + ".", spec.schema, value)
    else:  # pragma: no cover
        raise ConfigurationError(f"bad schema type {t!r}")
    if spec.check is not None and not spec.check(out):
        raise ConfigurationError(f"{name} {spec.why}, got {value!r}")
    return out


def _validate_section(prefix, schema, data):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{prefix.rstrip('.') or 'config'} must be an object")
    unknown = sorted(set(data) - set(schema))
    if unknown:
        raise ConfigurationError(
            f"unknown config key(s) {unknown} under {prefix.rstrip('.') or 'top level'}"
        )
    out = {}
    for key, spec in schema.items():
        if key in data:
            out[key] = _coerce(prefix + key, spec, data[key])
        elif spec.required:
            raise ConfigurationError(f"missing required config key {prefix + key}")
        elif spec.default is not None:
            out[key] = spec.default
    return out


def _cross_validate(cfg):
    barrier = cfg["barrier"]
    if barrier["kind"] != "velocity_ellipse" and "c" in barrier:
        raise ConfigurationError(f"barrier {barrier['kind']!r} takes no shape constant")
    if barrier["kind"] == "velocity_ellipse":
        barrier.setdefault("c", 0.25)
    for where, section in (("adaptation", cfg["adaptation"]),
                           ("clf.adaptation", cfg.get("clf", {}).get("adaptation"))):
        if section is None:
            continue
        scaling = section["scaling"]
        if scaling["kind"] == "arctan_plus_one" and "zeta" in scaling:
            raise ConfigurationError(f"{where}.scaling: arctan_plus_one has a fixed bound")
        if scaling["kind"] == "exp_saturating" and "domain" in scaling:
            raise ConfigurationError(f"{where}.scaling: exp_saturating has a fixed domain")
    if (cfg["adaptation"]["law"] == "high_order") != ("sliding" in cfg):
        raise ConfigurationError("a sliding section is required exactly for the high_order law")
    if ("clf" in cfg) != ("phi_hat0" in cfg):
        raise ConfigurationError("clf scenarios need phi_hat0 (and only they do)")
    nominal = cfg.get("controller", {}).get("nominal")
    if nominal is not None:
        if nominal["kind"] == "linear_feedback" and ("k" not in nominal or "value" in nominal):
            raise ConfigurationError("linear_feedback takes gains k and nothing else")
        if nominal["kind"] == "constant" and ("value" not in nominal or "k" in nominal):
            raise ConfigurationError("constant nominal takes value and nothing else")


def validate_config(config):
    """Check a raw config dict against the schema and return a filled copy.

    Unknown keys anywhere are rejected; defaults are made explicit so the
    returned dict is canonical (validating it again is the identity).
    """
    cfg = _validate_section("", _SCHEMA, config)
    _cross_validate(cfg)
    return cfg


def set_config_value(config, dotted_key, value):
    """Set one override like ("adaptation.gamma", 2.0), creating optional
    sections on the way; the key path must exist in the schema."""
    parts = dotted_key.split(".")
    schema = _SCHEMA
    node = config
    for depth, part in enumerate(parts):
        if part not in schema:
            raise ConfigurationError(f"unknown config key {dotted_key!r}")
        spec = schema[part]
        if depth == len(parts) - 1:
            node[part] = value
        else:
            if spec.type != "section":
                raise ConfigurationError(
                    f"config key {'.'.join(parts[:depth + 1])!r} has no sub-keys"
                )
            schema = spec.schema
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
    return config


# ---------------------------------------------------------------------------
# config -> Scenario


def _build_scaling(section):
    if section["kind"] == "arctan_plus_one":
        domain = section.get("domain", [0.0, 10.0])
        return scaling_by_id("arctan_plus_one", float(domain[0]), float(domain[1]))
    return scaling_by_id("exp_saturating", float(section.get("zeta", 2.0)))


def _build_adaptation(section, params):
    return AdaptationConfig(
        law=section["law"],
        gamma=section["gamma"],
        eta=section["eta"],
        scaling=_build_scaling(section["scaling"]),
        sigma=section["sigma"],
        beta=section["beta"],
        projection=params if section["projection"] else None,
        force_w_zero=section["force_w_zero"],
    )


def build_scenario(config, check_certificate=True):
    """Validate a config and assemble the Scenario it describes.

    When the config declares an operating grid, the availability certificate
    is re-checked on a coarse subgrid and a failing scenario is rejected here
    rather than at the first bad trajectory.
    """
    cfg = validate_config(config)
    model = model_by_id(cfg["model"]["kind"])
    barrier = barrier_by_id(cfg["barrier"]["kind"], cfg["barrier"].get("c"))
    params = ParameterBox(
        lower=np.array(cfg["parameters"]["lower"]),
        upper=np.array(cfg["parameters"]["upper"]),
        theta_true=np.array(cfg["parameters"]["theta_true"]),
    )
    sliding = None
    if "sliding" in cfg:
        sliding = sliding_by_id(
            cfg["barrier"]["kind"], cfg["barrier"].get("c"),
            cfg["sliding"]["kind"], cfg["sliding"]["lambda1"],
        )
    clf = None
    clf_adaptation = None
    if "clf" in cfg:
        clf = clf_by_id(cfg["clf"]["kind"], tuple(cfg["clf"]["x_ref"]))
        clf_adaptation = _build_adaptation(cfg["clf"]["adaptation"], params)
    controller = cfg.get("controller", {})
    nominal = None
    if controller.get("nominal") is not None:
        section = controller["nominal"]
        values = section["k"] if section["kind"] == "linear_feedback" else section["value"]
        nominal = nominal_by_id(section["kind"], tuple(values))
    grid = cfg.get("grid")
    estimator = None
    if "estimator" in cfg:
        estimator = EstimatorSettings(**cfg["estimator"])
    scenario = Scenario(
        name=cfg["name"],
        model=model,
        barrier=barrier,
        alpha=ClassKInfinity(kind=cfg["alpha"]["kind"], gain=cfg["alpha"]["gain"]),
        adaptation=_build_adaptation(cfg["adaptation"], params),
        parameters=params,
        x0=np.array(cfg["x0"]),
        theta_hat0=np.array(cfg["theta_hat0"]),
        rho0=cfg["rho0"],
        T=cfg["T"],
        dt=cfg["dt"],
        sliding=sliding,
        clf=clf,
        clf_adaptation=clf_adaptation,
        phi_hat0=np.array(cfg["phi_hat0"]) if "phi_hat0" in cfg else None,
        varrho0=cfg["varrho0"],
        input_box=np.array(cfg["input_box"]) if "input_box" in cfg else None,
        u_nominal=nominal,
        estimator=estimator,
        slack_weight=controller.get("slack_weight", 100.0),
        check_initial_margin=cfg["check_initial_margin"],
        on_infeasible=cfg["on_infeasible"],
        grid_box=np.array(grid["box"]) if grid else None,
        grid_points_per_axis=grid["points_per_axis"] if grid else 21,
        grid_theta_points=grid["theta_points"] if grid else 11,
        grid_offset=grid["offset"] if grid else 0.0,
        description=cfg["description"],
    )
    if check_certificate and scenario.grid_box is not None:
        cert = grid_certificate(
            scenario,
            points_per_axis=min(_LOAD_POINTS_PER_AXIS, scenario.grid_points_per_axis),
            theta_points=min(_LOAD_THETA_POINTS, scenario.grid_theta_points),
        )
        if not cert.passed:
            raise PremiseViolationError(
                f"scenario {scenario.name!r} rejected at load: {cert}"
            )
    return scenario


def grid_certificate(scenario, points_per_axis=None, theta_points=None):
    """Availability certificate over the scenario's declared operating grid."""
    if scenario.grid_box is None:
        raise ConfigurationError(f"scenario {scenario.name!r} declares no operating grid")
    if scenario.input_box is None:
        raise ConfigurationError("the grid condition needs the scenario's input box")
    theta_box = np.stack(
        [scenario.parameters.lower, scenario.parameters.upper], axis=-1
    )
    theta_grid = box_grid(theta_box, theta_points or scenario.grid_theta_points)
    x_grid = box_grid(scenario.grid_box, points_per_axis or scenario.grid_points_per_axis)
    law = scenario.adaptation.law
    if law == "racbf":
        gamma = scenario.adaptation.gamma

        def drift(x, theta_hat):
            return racbf_modified_drift(scenario.model, scenario.barrier, x, theta_hat, gamma)

        return verify_ucbf_grid(
            scenario.model, scenario.barrier, scenario.alpha, scenario.input_box,
            theta_grid, x_grid, offset=scenario.grid_offset, drift_fn=drift,
        )
    if law == "high_order":
        return verify_houcbf_grid(
            scenario.model, scenario.sliding, scenario.alpha, scenario.input_box,
            theta_grid, x_grid, offset=scenario.grid_offset,
        )
    return verify_ucbf_grid(
        scenario.model, scenario.barrier, scenario.alpha, scenario.input_box,
        theta_grid, x_grid, offset=scenario.grid_offset,
    )


# ---------------------------------------------------------------------------
# the gallery


def _planar_family_config():
    barrier = barrier_by_id("velocity_ellipse", 0.25)
    x0 = [-0.4, -1.0]
    theta_hat0 = [1.0]
    h0 = float(barrier.h(np.array(x0), np.array(theta_hat0)))
    vartheta = np.array([1.5]) - np.array([0.5])
    gamma = 2.0 * admissible_gain_lower_bound(vartheta, h0)
    return {
        "name": "A",
        "description": "",
        "model": {"kind": "planar"},
        "barrier": {"kind": "velocity_ellipse", "c": 0.25},
        "alpha": {"kind": "linear", "gain": 1.0},
        "parameters": {"lower": [0.5], "upper": [1.5], "theta_true": [1.2]},
        "adaptation": {
            "law": "direct",
            "gamma": gamma,
            "eta": 0.1,
            "scaling": {"kind": "arctan_plus_one", "domain": [0.0, 10.0]},
            "sigma": 0.0,
            "beta": 0.0,
            "projection": True,
            "force_w_zero": False,
        },
        "x0": x0,
        "theta_hat0": theta_hat0,
        "rho0": 0.0,
        "varrho0": 0.0,
        "T": 10.0,
        "dt": 0.001,
        "input_box": [[-10.0, 10.0]],
        "controller": {
            "nominal": {"kind": "linear_feedback", "k": [0.25, 3.0]},
            "slack_weight": 100.0,
        },
        "grid": {
            "box": [[-1.1, 1.1], [-2.8, 2.8]],
            "points_per_axis": 41,
            "theta_points": 11,
            "offset": tightened_threshold(gamma, vartheta),
        },
        "check_initial_margin": True,
        "on_infeasible": "abort",
    }


def _gallery():
    a = _planar_family_config()
    a["description"] = "direct adaptation with a scaled gain on the planar benchmark"

    b = copy.deepcopy(a)
    b["name"] = "B"
    b["description"] = "leaky adaptation trading invariance for a bounded-degradation floor"
    b["adaptation"]["law"] = "leaky"
    b["adaptation"]["scaling"] = {"kind": "exp_saturating", "zeta": 2.0}
    b["adaptation"]["sigma"] = 1.0

    c_vartheta = np.array([1.5]) - np.array([0.5])
    c = {
        "name": "C",
        "description": "high_order adaptation on a relative-degree-two position limit",
        "model": {"kind": "planar"},
        "barrier": {"kind": "position_limit"},
        "alpha": {"kind": "linear", "gain": 4.0},
        "parameters": {"lower": [0.5], "upper": [1.5], "theta_true": [0.8]},
        "adaptation": {
            "law": "high_order",
            "gamma": 1.0,
            "eta": 0.1,
            "scaling": {"kind": "arctan_plus_one", "domain": [0.0, 10.0]},
            "sigma": 0.0,
            "beta": 0.0,
            "projection": True,
            "force_w_zero": False,
        },
        "sliding": {"kind": "linear", "lambda1": 2.0},
        "x0": [0.2, 0.3],
        "theta_hat0": [1.0],
        "rho0": 0.0,
        "varrho0": 0.0,
        "T": 10.0,
        "dt": 0.001,
        "input_box": [[-10.0, 10.0]],
        "controller": {
            "nominal": {"kind": "linear_feedback", "k": [0.25, 3.0]},
            "slack_weight": 100.0,
        },
        "grid": {
            "box": [[-1.1, 1.1], [-1.5, 1.5]],
            "points_per_axis": 41,
            "theta_points": 11,
            "offset": tightened_threshold(1.0, c_vartheta),
        },
        "check_initial_margin": True,
        "on_infeasible": "abort",
    }

    d = copy.deepcopy(a)
    d["name"] = "D"
    d["description"] = "direct adaptation with set-membership threshold tightening"
    d["estimator"] = {"cadence": 10, "noise_margin": 0.05, "mode": "exact", "pole": 50.0}
    d["rho0"] = 0.25

    e = copy.deepcopy(a)
    e["name"] = "E"
    e["description"] = "safe tracking: safety row plus a soft tracking row, dual adaptation"
    e["controller"] = {"slack_weight": 100.0}
    e["clf"] = {
        "kind": "quadratic_tracking",
        "x_ref": [0.0, 0.4],
        "adaptation": {
            "law": "direct",
            "gamma": 1.0,
            "eta": 0.1,
            "scaling": {"kind": "arctan_plus_one", "domain": [0.0, 10.0]},
            "sigma": 0.0,
            "beta": 0.0,
            "projection": False,
            "force_w_zero": False,
        },
    }
    e["phi_hat0"] = [1.0]

    f_vartheta = np.array([1.2]) - np.array([0.8])
    f = {
        "name": "F",
        "description": "racbf baseline settling at the tightened threshold from outside",
        "model": {"kind": "scalar_decay"},
        "barrier": {"kind": "estimate_minus_state"},
        "alpha": {"kind": "linear", "gain": 1.0},
        "parameters": {"lower": [0.8], "upper": [1.2], "theta_true": [1.0]},
        "adaptation": {
            "law": "racbf",
            "gamma": 2.0,
            "eta": 0.1,
            "scaling": {"kind": "arctan_plus_one", "domain": [0.0, 10.0]},
            "sigma": 0.0,
            "beta": 0.0,
            "projection": False,
            "force_w_zero": False,
        },
        "x0": [1.08],
        "theta_hat0": [1.1],
        "rho0": 0.0,
        "varrho0": 0.0,
        "T": 30.0,
        "dt": 0.001,
        "input_box": [[-10.0, 10.0]],
        "controller": {
            "nominal": {"kind": "constant", "value": [0.5]},
            "slack_weight": 100.0,
        },
        "grid": {
            "box": [[-0.5, 1.5]],
            "points_per_axis": 41,
            "theta_points": 11,
            "offset": tightened_threshold(2.0, f_vartheta),
        },
        "check_initial_margin": False,
        "on_infeasible": "abort",
    }

    return {cfg["name"]: validate_config(cfg) for cfg in (a, b, c, d, e, f)}


_GALLERY = _gallery()


def scenario_ids():
    return tuple(_GALLERY)


def gallery_config(scenario_id):
    """Deep copy of one built-in config, safe to mutate with overrides."""
    if scenario_id not in _GALLERY:
        raise ConfigurationError(
            f"unknown scenario id {scenario_id!r}; built-ins are {list(_GALLERY)}"
        )
    return json.loads(json.dumps(_GALLERY[scenario_id]))


def gallery_document():
    """Machine-readable gallery: every built-in config keyed by id."""
    return {sid: gallery_config(sid) for sid in scenario_ids()}


def load_scenario(scenario_id, check_certificate=True):
    return build_scenario(gallery_config(scenario_id), check_certificate=check_certificate)


# ---------------------------------------------------------------------------
# equality that tolerates array fields


def _equal(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return (
            isinstance(a, np.ndarray)
            and isinstance(b, np.ndarray)
            and a.shape == b.shape
            and bool(np.array_equal(a, b))
        )
    if is_dataclass(a) and not isinstance(a, type):
        if type(a) is not type(b):
            return False
        return all(_equal(getattr(a, f.name), getattr(b, f.name)) for f in fields(a))
    return a == b


def scenario_equal(a, b):
    """Field-by-field equality; arrays by value, callables by identity."""
    return _equal(a, b)
