"""Observer-based formation tracking law.

With ``xi = k (p* - p_hat) + v* h* + w* h_perp`` the commanded inputs are the
body-frame coordinates of ``xi``: ``v = h . xi`` and ``omega = h_perp . xi``.
``h``/``h_perp`` belong to the agent's actual heading. The feedforward turn
term uses the agent's own perpendicular by default; ``omega_perp="reference"``
switches it to the reference perpendicular for experiments.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import ControlInput

OMEGA_PERP_CHOICES = ("agent", "reference")


@dataclass(frozen=True)
class ControlLawInput:
    p_star: tuple
    v_star: float
    theta_star: float
    omega_star: float
    p_hat: tuple
    theta: float

    def __post_init__(self):
        if not self.v_star > 0:
            raise ValueError(f"desired speed must be positive, got {self.v_star}")


def _xi(p_star, v_star, theta_star, omega_star, p_hat, theta, gain, omega_perp):
    """``xi`` as an array whose last axis is (x, y)."""
    if omega_perp == "agent":
        perp_angle = theta
    elif omega_perp == "reference":
        perp_angle = theta_star
    else:
        raise ValueError(f"omega_perp must be one of {OMEGA_PERP_CHOICES}, got {omega_perp!r}")
    err = gain * (np.asarray(p_star, dtype=float) - np.asarray(p_hat, dtype=float))
    xi = np.empty_like(err)
    xi[..., 0] = err[..., 0] + v_star * np.cos(theta_star) - omega_star * np.sin(perp_angle)
    xi[..., 1] = err[..., 1] + v_star * np.sin(theta_star) + omega_star * np.cos(perp_angle)
    return xi


def control_law(inp, gain=1.0, omega_perp="agent"):
    xi = _xi(inp.p_star, inp.v_star, inp.theta_star, inp.omega_star,
             inp.p_hat, inp.theta, gain, omega_perp)
    c, s = np.cos(inp.theta), np.sin(inp.theta)
    return ControlInput(v=float(c * xi[0] + s * xi[1]), omega=float(-s * xi[0] + c * xi[1]))


def control_law_stacked(p_star, v_star, theta_star, omega_star, p_hat, theta,
                        gain=1.0, omega_perp="agent"):
    """Vectorised :func:`control_law` over agents; returns arrays ``(v, omega)``.

    Does not enforce ``v_star > 0`` so that agents parked at a rotation centre
    can be simulated.
    """
    theta = np.asarray(theta, dtype=float)
    xi = _xi(p_star, v_star, theta_star, omega_star, p_hat, theta, gain, omega_perp)
    c, s = np.cos(theta), np.sin(theta)
    return c * xi[:, 0] + s * xi[:, 1], -s * xi[:, 0] + c * xi[:, 1]


def tracking_error(p, p_star):
    p_tilde = np.asarray(p, dtype=float) - np.asarray(p_star, dtype=float)
    return p_tilde, float(np.linalg.norm(p_tilde))
