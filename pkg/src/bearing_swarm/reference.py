"""Desired formation trajectories.

Every scenario is described by the desired positions and their first two time
derivatives; heading, speed and turn rate follow from the unicycle-consistent
relations ``p*' = v* h(theta*)`` and ``omega* = (x' y'' - y' x'') / v*^2``.

Built-in kinds:

``sinusoid``
    The whole formation translates along ``(c t, A sin(w_s c t))``. Bearings
    are constant. Parameters ``amplitude``, ``spatial_frequency``, ``speed``.
``rotation``
    The formation rotates rigidly about ``center`` at ``rate`` rad/s. Bearings
    rotate with it. ``allow_stationary=True`` permits an agent at the centre,
    which then spins in place (``v* = 0``, ``theta* = rate * t``).
``custom``
    ``params["trajectory"]`` is a callable ``t -> (p, p_dot, p_ddot)``, each an
    ``(n, 2)`` array. Library use only; not expressible in a config file.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidScenario
from .geometry import EPS_DEG, bearing

KINDS = ("sinusoid", "rotation", "custom")

DEFAULT_PARAMS = {
    "sinusoid": {"amplitude": 2.0, "spatial_frequency": 0.1, "speed": 1.0},
    "rotation": {"center": [0.0, -10.0], "rate": 0.3, "allow_stationary": False},
    "custom": {},
}

# Desired formation at t = 0 for the 7-agent simulations.
PAPER_P_STAR0 = (7, 0, 3, 3, 3, -3, 0, 0, -3, 3, -3, -3, -7, 0)

_STATIONARY_SPEED = 1e-12


@dataclass(frozen=True)
class ReferenceSample:
    p_star: np.ndarray
    p_star_dot: np.ndarray
    theta_star: float
    v_star: float
    omega_star: float


@dataclass(frozen=True)
class ReferenceBatch:
    """Reference for all agents at one instant (arrays indexed by agent)."""

    p_star: np.ndarray
    p_star_dot: np.ndarray
    theta_star: np.ndarray
    v_star: np.ndarray
    omega_star: np.ndarray


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    kind: str
    base_formation: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidScenario(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        base = np.asarray(self.base_formation, dtype=float)
        if base.ndim == 1:
            if base.size % 2:
                raise InvalidScenario("flat base formation must have an even length")
            base = base.reshape(-1, 2)
        if base.ndim != 2 or base.shape[1] != 2 or base.shape[0] < 1:
            raise InvalidScenario(f"base formation must be (n, 2), got {base.shape}")
        if not np.all(np.isfinite(base)):
            raise InvalidScenario("base formation has non-finite entries")
        base.setflags(write=False)
        params = dict(DEFAULT_PARAMS[self.kind])
        unknown = set(self.params) - set(params) - ({"trajectory"} if self.kind == "custom" else set())
        if unknown:
            raise InvalidScenario(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        params.update(self.params)
        object.__setattr__(self, "base_formation", base)
        object.__setattr__(self, "params", params)
        self._validate()

    @property
    def n(self):
        return self.base_formation.shape[0]

    def _validate(self):
        p = self.params
        if self.kind == "sinusoid":
            for key in ("amplitude", "spatial_frequency", "speed"):
                if not math.isfinite(float(p[key])):
                    raise InvalidScenario(f"sinusoid parameter {key} must be finite")
            if not float(p["speed"]) > 0:
                raise InvalidScenario("sinusoid forward speed must be positive")
        elif self.kind == "rotation":
            center = np.asarray(p["center"], dtype=float)
            if center.shape != (2,):
                raise InvalidScenario("rotation center must be a 2-vector")
            rate = float(p["rate"])
            if not (math.isfinite(rate) and rate != 0):
                raise InvalidScenario("rotation rate must be finite and nonzero")
            radii = np.linalg.norm(self.base_formation - center, axis=1)
            if not p["allow_stationary"] and np.any(radii <= EPS_DEG):
                bad = [int(i) + 1 for i in np.flatnonzero(radii <= EPS_DEG)]
                raise InvalidScenario(f"agents {bad} sit at the rotation center, so their desired speed is zero")
        elif self.kind == "custom":
            if not callable(p.get("trajectory")):
                raise InvalidScenario("custom scenario needs a callable params['trajectory']")

    def stationary_agents(self):
        """1-based ids of agents whose desired speed is identically zero."""
        if self.kind != "rotation":
            return []
        radii = np.linalg.norm(self.base_formation - np.asarray(self.params["center"], dtype=float), axis=1)
        return [int(i) + 1 for i in np.flatnonzero(radii <= EPS_DEG)]

    def kinematics(self, t):
        """Desired ``(p, p_dot, p_ddot)`` for all agents, each ``(n, 2)``."""
        p = self.params
        base = self.base_formation
        if self.kind == "sinusoid":
            A, ws, c = float(p["amplitude"]), float(p["spatial_frequency"]), float(p["speed"])
            phase = ws * c * t
            off = np.array([c * t, A * math.sin(phase)])
            vel = np.array([c, A * ws * c * math.cos(phase)])
            acc = np.array([0.0, -A * (ws * c) ** 2 * math.sin(phase)])
            return base + off, np.broadcast_to(vel, base.shape), np.broadcast_to(acc, base.shape)
        if self.kind == "rotation":
            center = np.asarray(p["center"], dtype=float)
            w = float(p["rate"])
            ct, st = math.cos(w * t), math.sin(w * t)
            r0 = base - center
            r = np.stack([ct * r0[:, 0] - st * r0[:, 1], st * r0[:, 0] + ct * r0[:, 1]], axis=1)
            vel = w * np.stack([-r[:, 1], r[:, 0]], axis=1)
            return center + r, vel, -(w * w) * r
        pos, vel, acc = p["trajectory"](t)
        return (np.asarray(pos, dtype=float).reshape(-1, 2),
                np.asarray(vel, dtype=float).reshape(-1, 2),
                np.asarray(acc, dtype=float).reshape(-1, 2))

    def sample_all(self, t):
        pos, vel, acc = self.kinematics(t)
        speed = np.hypot(vel[:, 0], vel[:, 1])
        moving = speed > _STATIONARY_SPEED
        theta = np.arctan2(vel[:, 1], vel[:, 0])
        omega = np.zeros_like(speed)
        omega[moving] = (vel[moving, 0] * acc[moving, 1] - vel[moving, 1] * acc[moving, 0]) / speed[moving] ** 2
        if not np.all(moving):
            if self.kind == "rotation" and self.params["allow_stationary"]:
                w = float(self.params["rate"])
                theta[~moving] = w * t
                omega[~moving] = w
            else:
                bad = [int(i) + 1 for i in np.flatnonzero(~moving)]
                raise InvalidScenario(f"desired speed of agents {bad} is not positive at t={t}")
        return ReferenceBatch(pos, vel, theta, speed, omega)


def sample(spec, i, t):
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if not 1 <= i <= spec.n:
        raise IndexError(f"agent id {i} outside 1..{spec.n}")
    b = spec.sample_all(t)
    k = i - 1
    return ReferenceSample(b.p_star[k].copy(), b.p_star_dot[k].copy(), float(b.theta_star[k]),
                           float(b.v_star[k]), float(b.omega_star[k]))


def desired_bearing(spec, i, j, t):
    pos = spec.kinematics(t)[0]
    return bearing(pos[j - 1] - pos[i - 1])


def _wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi


def finite_difference_audit(spec, i, t, h):
    """Largest gap between central differences of sampled ``p*``/``theta*`` and the analytic rates."""
    if not h > 0:
        raise ValueError("step h must be positive")
    k = i - 1
    lo, mid, hi = spec.sample_all(t - h), spec.sample_all(t), spec.sample_all(t + h)
    p_rate = (hi.p_star[k] - lo.p_star[k]) / (2 * h)
    th_rate = _wrap(hi.theta_star[k] - lo.theta_star[k]) / (2 * h)
    return float(max(np.max(np.abs(p_rate - mid.p_star_dot[k])), abs(th_rate - mid.omega_star[k])))
