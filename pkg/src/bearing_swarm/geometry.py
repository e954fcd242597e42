"""Bearing vectors, orthogonal projectors and the bearing Laplacian.

Geometry is dimension-generic; stacked position vectors have length ``d * n``
and are ordered agent by agent.
"""

import numpy as np

from .errors import DegenerateEdge
from .graph import incidence_matrix

EPS_DEG = 1e-9  # metres; edges at or below this length have no bearing


def bearing(e, eps=EPS_DEG):
    e = np.asarray(e, dtype=float)
    norm = np.linalg.norm(e)
    if not norm > eps:
        raise DegenerateEdge(f"edge length {norm:.3g} m is below the degeneracy threshold {eps:g} m")
    return e / norm


def projector(g):
    g = np.asarray(g, dtype=float)
    return np.eye(g.size) - np.outer(g, g)


def edge_bearings(graph, p, d=2):
    """Bearings ``g_k`` of every edge (tail -> head) for stacked positions ``p``.

    Returns an ``(m, d)`` array. Raises DegenerateEdge naming the offending edge.
    """
    P = np.asarray(p, dtype=float).reshape(graph.n, d)
    tail, head = graph.edge_index_arrays()
    e = P[head] - P[tail]
    lengths = np.linalg.norm(e, axis=1)
    bad = np.flatnonzero(~(lengths > EPS_DEG))
    if bad.size:
        k = int(bad[0])
        edge = graph.edges[k]
        raise DegenerateEdge(
            f"edge {edge} has length {lengths[k]:.3g} m below the degeneracy threshold", edge=edge
        )
    return e / lengths[:, None]


def bearing_laplacian(graph, p, d=2):
    """Dense H_bar^T Pi H_bar, with H_bar = H kron I_d and Pi = blockdiag(projectors)."""
    G = edge_bearings(graph, p, d)
    Hbar = np.kron(incidence_matrix(graph), np.eye(d))
    Pi = np.zeros((d * graph.m, d * graph.m))
    for k in range(graph.m):
        Pi[d * k:d * k + d, d * k:d * k + d] = projector(G[k])
    return Hbar.T @ Pi @ Hbar


def bearing_laplacian_edgewise(graph, p, d=2):
    """Same matrix as :func:`bearing_laplacian`, accumulated block by block per edge."""
    G = edge_bearings(graph, p, d)
    L = np.zeros((d * graph.n, d * graph.n))
    for k, (i, j) in enumerate(graph.edges):
        P = projector(G[k])
        a, b = d * (i - 1), d * (j - 1)
        L[a:a + d, a:a + d] += P
        L[b:b + d, b:b + d] += P
        L[a:a + d, b:b + d] -= P
        L[b:b + d, a:a + d] -= P
    return L


def anchor_matrix(graph, d=2):
    diag = np.zeros(d * graph.n)
    for a in graph.anchors:
        diag[d * (a - 1):d * a] = 1.0
    return np.diag(diag)
