"""Run-configuration files (TOML).

Required keys: ``graph.edges``, ``graph.anchors``, ``formation.p_star0``,
``scenario.kind``, ``gains.k_p``, ``sim.dt``, ``sim.t_final``. Everything else
has a default. Vertex ids are 1-based; vectors are flat ``[x1, y1, x2, y2, ...]``.
"""

import copy
import math
import sys

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .estimator import EstimatorGains
from .graph import FormationGraph
from .reference import DEFAULT_PARAMS, ScenarioSpec
from .sim import ControlOptions, InitialConditions, SimConfig

REQUIRED = (
    "graph.edges",
    "graph.anchors",
    "formation.p_star0",
    "scenario.kind",
    "gains.k_p",
    "sim.dt",
    "sim.t_final",
)

SWEEPABLE = ("gains.k_p", "sim.dt")


def _get(raw, dotted, default=KeyError):
    node = raw
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is KeyError:
                raise ConfigError(f"missing required key '{dotted}'")
            return default
        node = node[part]
    return node


def _flat_pairs(values, n, key):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != 2 * n:
        raise ConfigError(f"'{key}' must hold {2 * n} numbers (2 per agent), got {arr.size}")
    return arr.reshape(n, 2)


def load_raw(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def from_dict(raw):
    """Build a SimConfig from a parsed config document."""
    for key in REQUIRED:
        _get(raw, key)
    try:
        p_star0 = np.asarray(_get(raw, "formation.p_star0"), dtype=float).ravel()
        if p_star0.size < 4 or p_star0.size % 2:
            raise ConfigError("'formation.p_star0' must hold 2 numbers per agent for at least 2 agents")
        n = p_star0.size // 2
        graph = FormationGraph(n, [tuple(e) for e in _get(raw, "graph.edges")], tuple(_get(raw, "graph.anchors")))
        scenario = ScenarioSpec(str(_get(raw, "scenario.kind")), p_star0.reshape(n, 2),
                                dict(_get(raw, "scenario.params", {})))
        if scenario.kind == "custom":
            raise ConfigError("custom scenarios cannot be declared in a config file")

        ref0 = scenario.sample_all(0.0)
        positions = _get(raw, "initial.positions", None)
        positions = ref0.p_star.copy() if positions is None else _flat_pairs(positions, n, "initial.positions")
        headings = _get(raw, "initial.headings", None)
        if headings is None:
            headings = ref0.theta_star.copy()
        else:
            headings = np.asarray(headings, dtype=float).ravel()
            if headings.size != n:
                raise ConfigError(f"'initial.headings' must hold {n} numbers, got {headings.size}")
        estimates = _get(raw, "initial.estimates", None)
        if estimates is None:
            offset = np.asarray(_get(raw, "initial.estimate_offset", [0.0, 0.0]), dtype=float)
            if offset.shape != (2,):
                raise ConfigError("'initial.estimate_offset' must be a 2-vector")
            estimates = positions + offset
        else:
            estimates = _flat_pairs(estimates, n, "initial.estimates")

        control = ControlOptions(**dict(_get(raw, "control", {})))
        sim = raw["sim"]
        unknown = set(sim) - {"dt", "t_final", "record_every", "open_loop_input", "oracle_every"}
        if unknown:
            raise ConfigError(f"unknown keys in [sim]: {sorted(unknown)}")
        return SimConfig(
            graph=graph,
            scenario=scenario,
            initial=InitialConditions(positions, headings, estimates),
            gains=EstimatorGains(float(_get(raw, "gains.k_p"))),
            dt=float(sim["dt"]),
            t_final=float(sim["t_final"]),
            record_every=int(sim.get("record_every", 1)),
            control=control,
            open_loop_input=sim.get("open_loop_input"),
            oracle_every=int(sim.get("oracle_every", 0)),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path):
    return from_dict(load_raw(path))


def _floats(arr):
    return [float(v) for v in np.ravel(arr)]


def to_dict(config):
    """Fully explicit config document; ``from_dict(to_dict(c))`` rebuilds ``c``."""
    sc = config.scenario
    if sc.kind == "custom":
        raise ConfigError("custom scenarios cannot be serialized")
    params = {}
    for key, val in sc.params.items():
        if isinstance(val, bool):
            params[key] = val
        elif np.ndim(val):
            params[key] = _floats(val)
        else:
            params[key] = float(val)
    sim = {"dt": float(config.dt), "t_final": float(config.t_final), "record_every": int(config.record_every)}
    if config.open_loop_input is not None:
        sim["open_loop_input"] = _floats(config.open_loop_input)
    if config.oracle_every:
        sim["oracle_every"] = int(config.oracle_every)
    control = {"gain": float(config.control.gain), "omega_perp": config.control.omega_perp}
    if config.control.v_max is not None:
        control["v_max"] = float(config.control.v_max)
    if config.control.omega_max is not None:
        control["omega_max"] = float(config.control.omega_max)
    return {
        "graph": {"edges": [list(e) for e in config.graph.edges], "anchors": list(config.graph.anchors)},
        "formation": {"p_star0": _floats(sc.base_formation)},
        "scenario": {"kind": sc.kind, "params": params},
        "gains": {"k_p": float(config.gains.k_p)},
        "sim": sim,
        "control": control,
        "initial": {
            "positions": _floats(config.initial.positions),
            "headings": _floats(config.initial.headings),
            "estimates": _floats(config.initial.estimates),
        },
    }


def dumps(config):
    return tomli_w.dumps(to_dict(config))


def check_sweep_param(raw, name):
    if name in SWEEPABLE:
        return
    prefix = "scenario.params."
    if name.startswith(prefix):
        kind = _get(raw, "scenario.kind")
        key = name[len(prefix):]
        default = DEFAULT_PARAMS.get(kind, {}).get(key)
        if isinstance(default, (int, float)) and not isinstance(default, bool):
            return
    raise ConfigError(
        f"cannot sweep '{name}'; choose gains.k_p, sim.dt or a numeric scenario.params.* entry"
    )


def with_override(raw, name, value):
    """Copy of ``raw`` with the dotted key ``name`` set to ``value``."""
    check_sweep_param(raw, name)
    if not math.isfinite(value):
        raise ConfigError(f"sweep value {value} is not finite")
    out = copy.deepcopy(raw)
    node = out
    parts = name.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out
