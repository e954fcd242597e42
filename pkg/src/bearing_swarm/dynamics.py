"""Planar unicycle model."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AgentState:
    x: float
    y: float
    theta: float  # unwrapped; only ever used through cos/sin

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.theta)):
            raise ValueError(f"non-finite agent state {self!r}")

    @property
    def position(self):
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class ControlInput:
    v: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and math.isfinite(self.omega)):
            raise ValueError(f"non-finite control input {self!r}")


def heading_vector(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def heading_perp(theta):
    return np.array([-math.sin(theta), math.cos(theta)])


def unicycle_rhs(s, u):
    """Return ``(x_dot, y_dot, theta_dot)`` for state ``s`` under input ``u``."""
    return np.array([u.v * math.cos(s.theta), u.v * math.sin(s.theta), u.omega])


def clamp_input(v, omega, v_max=None, omega_max=None):
    """Optional actuator saturation; works on scalars or arrays. Off unless limits are given."""
    if v_max is not None:
        v = np.clip(v, -v_max, v_max)
    if omega_max is not None:
        omega = np.clip(omega, -omega_max, omega_max)
    return v, omega
