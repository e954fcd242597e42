"""Distributed bearing-based position observer.

Each agent integrates

    p_hat_i' = -k_p * sum_{j in N_i} P(g_ij) (p_hat_i - p_hat_j) - k_p * f_i + v_i h_i

where ``P(g) = I - g g^T``, ``f_i = p_hat_i - p_i`` for anchors and zero
otherwise. Bearings are measurements, so they always come from true positions.

Three evaluation routes are provided: :func:`estimator_rhs` (one agent, sees
only its neighbours), :func:`estimator_rhs_stacked` (all agents at once,
edge-local scatter; used by the simulator), and :func:`error_system_matrix`
(the stacked linear error system, used as an oracle).
"""

from dataclasses import dataclass

import numpy as np

from .errors import AnchorWithoutPosition, MissingBearing
from .geometry import anchor_matrix, bearing, bearing_laplacian, edge_bearings


@dataclass(frozen=True)
class EstimatorGains:
    k_p: float = 1.0

    def __post_init__(self):
        if not self.k_p > 0:
            raise ValueError(f"estimator gain k_p must be positive, got {self.k_p}")


def estimator_rhs(p_hat_i, neighbor_estimates, bearings, gains, v_i, theta_i,
                  is_anchor=False, p_i_true=None):
    """Estimate derivative for a single agent.

    ``neighbor_estimates`` and ``bearings`` map neighbour id ``j`` to ``p_hat_j``
    and to the measured bearing ``g_ij`` (pointing from ``i`` to ``j``). Nothing
    else about the network is visible here.
    """
    p_hat_i = np.asarray(p_hat_i, dtype=float)
    acc = np.zeros_like(p_hat_i)
    for j, p_hat_j in neighbor_estimates.items():
        if j not in bearings:
            raise MissingBearing(f"no bearing measurement for neighbour {j}")
        g = np.asarray(bearings[j], dtype=float)
        diff = p_hat_i - np.asarray(p_hat_j, dtype=float)
        acc += diff - g * (g @ diff)
    out = -gains.k_p * acc
    if is_anchor:
        if p_i_true is None:
            raise AnchorWithoutPosition("anchor agent needs its true position")
        out -= gains.k_p * (p_hat_i - np.asarray(p_i_true, dtype=float))
    out += v_i * np.array([np.cos(theta_i), np.sin(theta_i)])
    return out


def local_view(graph, i, p_hat, p_true):
    """Information available to agent ``i``: neighbour estimates and measured bearings.

    ``p_hat`` and ``p_true`` are ``(n, 2)`` arrays; returns
    ``(p_hat_i, neighbor_estimates, bearings, p_i_true_or_None)``.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    p_true = np.asarray(p_true, dtype=float)
    nbrs = graph.neighbors(i)
    estimates = {j: p_hat[j - 1] for j in nbrs}
    bearings = {j: bearing(p_true[j - 1] - p_true[i - 1]) for j in nbrs}
    p_i = p_true[i - 1] if graph.is_anchor(i) else None
    return p_hat[i - 1], estimates, bearings, p_i


def estimator_rhs_stacked(graph, p_hat, p_true, v, theta, gains, G=None):
    """All agents' estimate derivatives, ``(n, 2)``.

    Each edge contributes ``P(g_k)(p_hat_tail - p_hat_head)`` to its tail with a
    minus sign and the opposite to its head (a scatter through the incidence
    matrix); this is the per-agent rule summed over edges. ``G`` may carry
    precomputed edge bearings.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    p_true = np.asarray(p_true, dtype=float)
    if G is None:
        G = edge_bearings(graph, p_true.ravel())
    tail, head = graph.edge_index_arrays()
    diff = p_hat[tail] - p_hat[head]
    proj = diff - G * np.einsum("kd,kd->k", G, diff)[:, None]
    out = gains.k_p * (graph.incidence_T @ proj)
    anchors = graph.anchor_index
    out[anchors] -= gains.k_p * (p_hat[anchors] - p_true[anchors])
    theta = np.asarray(theta, dtype=float)
    v = np.asarray(v, dtype=float)
    out[:, 0] += v * np.cos(theta)
    out[:, 1] += v * np.sin(theta)
    return out


def error_system_matrix(graph, p_true, gains):
    """``-k_p (L_B + A)``: the localization error obeys ``delta' = M delta``."""
    p_true = np.asarray(p_true, dtype=float).ravel()
    return -gains.k_p * (bearing_laplacian(graph, p_true) + anchor_matrix(graph))


def estimation_error(p_hat, p_true):
    """Per-agent errors ``p_hat_i - p_i`` (rows) and the norm of the stacked error."""
    p_hat = np.asarray(p_hat, dtype=float)
    p_true = np.asarray(p_true, dtype=float)
    if p_hat.shape != p_true.shape:
        raise ValueError(f"shape mismatch: estimates {p_hat.shape} vs positions {p_true.shape}")
    delta = (p_hat - p_true).reshape(-1, 2)
    return delta, float(np.linalg.norm(delta))
