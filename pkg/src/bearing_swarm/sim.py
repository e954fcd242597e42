"""Closed-loop simulation: true unicycles, distributed estimators and the tracking controller.

The coupled state is packed as ``[x1, y1, ..., xn, yn, theta1..thetan, xhat1, yhat1, ...]``
and integrated with classical fixed-step RK4. Time at step ``k`` is ``k * dt``
(never accumulated) so identical configs give bit-identical traces.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .controller import OMEGA_PERP_CHOICES, control_law_stacked
from .dynamics import clamp_input
from .errors import CollisionFailure, DegenerateEdge, InvalidGraph, NonFiniteState
from .estimator import EstimatorGains, error_system_matrix, estimator_rhs_stacked
from .geometry import edge_bearings

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControlOptions:
    gain: float = 1.0
    omega_perp: str = "agent"
    v_max: float = None
    omega_max: float = None

    def __post_init__(self):
        if self.omega_perp not in OMEGA_PERP_CHOICES:
            raise ValueError(f"omega_perp must be one of {OMEGA_PERP_CHOICES}")


@dataclass(frozen=True, eq=False)
class InitialConditions:
    positions: np.ndarray
    headings: np.ndarray
    estimates: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        est = np.asarray(self.estimates, dtype=float).reshape(-1, 2)
        hd = np.asarray(self.headings, dtype=float).ravel()
        if not (pos.shape == est.shape and hd.shape == (pos.shape[0],)):
            raise ValueError("initial positions, headings and estimates disagree on agent count")
        for name, arr in (("positions", pos), ("headings", hd), ("estimates", est)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"initial {name} contain non-finite values")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "headings", hd)
        object.__setattr__(self, "estimates", est)

    @classmethod
    def from_reference(cls, scenario, position_offset=(0.0, 0.0), estimate_offset=(0.0, 0.0)):
        """Start on the reference at t = 0, optionally displaced."""
        ref = scenario.sample_all(0.0)
        pos = ref.p_star + np.asarray(position_offset, dtype=float)
        return cls(pos, ref.theta_star.copy(), pos + np.asarray(estimate_offset, dtype=float))


@dataclass(frozen=True, eq=False)
class SimConfig:
    graph: object
    scenario: object
    initial: InitialConditions
    gains: EstimatorGains = field(default_factory=EstimatorGains)
    dt: float = 0.01
    t_final: float = 10.0
    record_every: int = 1
    control: ControlOptions = field(default_factory=ControlOptions)
    # Constant (v, omega) applied to every agent instead of the control law.
    open_loop_input: tuple = None
    # Compare the estimator against the matrix form on every k-th recorded row (0 = never).
    oracle_every: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be an integer >= 1, got {self.record_every}")
        n = self.graph.n
        if self.scenario.n != n or self.initial.positions.shape[0] != n:
            raise InvalidGraph(
                f"agent count mismatch: graph {n}, formation {self.scenario.n}, "
                f"initial {self.initial.positions.shape[0]}"
            )
        if self.open_loop_input is not None:
            object.__setattr__(self, "open_loop_input", tuple(float(u) for u in self.open_loop_input))

    @property
    def n(self):
        return self.graph.n

    @property
    def n_steps(self):
        return int(math.floor(self.t_final / self.dt + 1e-9))


@dataclass(frozen=True, eq=False)
class SystemState:
    positions: np.ndarray
    headings: np.ndarray
    estimates: np.ndarray
    t: float = 0.0

    def pack(self):
        return np.concatenate([np.ravel(self.positions), np.ravel(self.headings), np.ravel(self.estimates)])

    @classmethod
    def unpack(cls, y, n, t=0.0):
        y = np.asarray(y, dtype=float)
        return cls(y[:2 * n].reshape(n, 2), y[2 * n:3 * n], y[3 * n:].reshape(n, 2), t)

    @classmethod
    def initial(cls, config):
        ic = config.initial
        return cls(ic.positions.copy(), ic.headings.copy(), ic.estimates.copy(), 0.0)


@dataclass(frozen=True)
class MetricsRow:
    delta_norm: float
    ptilde_norm: float
    bearing_err_max: float
    min_edge_dist: float
    W1: float
    delta_i: np.ndarray
    ptilde_i: np.ndarray


@dataclass
class SimTrace:
    """Recorded rows of one run. Arrays share the leading (row) axis."""

    t: np.ndarray
    positions: np.ndarray   # (rows, n, 2)
    headings: np.ndarray    # (rows, n)
    estimates: np.ndarray   # (rows, n, 2)
    delta_i: np.ndarray     # (rows, n)
    ptilde_i: np.ndarray    # (rows, n)
    delta_norm: np.ndarray
    ptilde_norm: np.ndarray
    bearing_err_max: np.ndarray
    min_edge_dist: np.ndarray
    W1: np.ndarray
    oracle_residuals: list = field(default_factory=list)
    failure: str = None

    def __len__(self):
        return len(self.t)

    @property
    def n(self):
        return self.positions.shape[1]

    def final(self):
        return {
            "t": float(self.t[-1]),
            "delta_norm": float(self.delta_norm[-1]),
            "ptilde_norm": float(self.ptilde_norm[-1]),
            "bearing_err_max": float(self.bearing_err_max[-1]),
            "min_edge_dist": float(self.min_edge_dist[-1]),
            "W1": float(self.W1[-1]),
        }


def _inputs(t, P, theta, P_hat, config):
    if config.open_loop_input is not None:
        v0, w0 = config.open_loop_input
        return np.full(config.n, v0), np.full(config.n, w0)
    ref = config.scenario.sample_all(t)
    c = config.control
    v, w = control_law_stacked(ref.p_star, ref.v_star, ref.theta_star, ref.omega_star,
                               P_hat, theta, gain=c.gain, omega_perp=c.omega_perp)
    return clamp_input(v, w, c.v_max, c.omega_max)


def _rhs(t, y, config):
    n = config.n
    P = y[:2 * n].reshape(n, 2)
    theta = y[2 * n:3 * n]
    P_hat = y[3 * n:].reshape(n, 2)
    G = edge_bearings(config.graph, P)  # measurements: true positions only
    v, w = _inputs(t, P, theta, P_hat, config)
    c, s = np.cos(theta), np.sin(theta)
    p_dot = np.stack([v * c, v * s], axis=1)
    p_hat_dot = estimator_rhs_stacked(config.graph, P_hat, P, v, theta, config.gains, G=G)
    return np.concatenate([p_dot.ravel(), w, p_hat_dot.ravel()])


def coupled_rhs(state, config):
    """Time derivative of the full closed-loop state, returned as a SystemState of rates."""
    dy = _rhs(state.t, state.pack(), config)
    return SystemState.unpack(dy, config.n, state.t)


def metrics(state, spec, graph):
    P = np.asarray(state.positions, dtype=float).reshape(-1, 2)
    P_hat = np.asarray(state.estimates, dtype=float).reshape(-1, 2)
    P_star = spec.kinematics(state.t)[0]
    delta = P_hat - P
    ptilde = P - P_star
    delta_norm = float(np.linalg.norm(delta))
    if graph.m:
        G = edge_bearings(graph, P)
        G_star = edge_bearings(graph, P_star)
        tail, head = graph.edge_index_arrays()
        bearing_err = float(np.max(np.linalg.norm(G - G_star, axis=1)))
        min_dist = float(np.min(np.linalg.norm(P[head] - P[tail], axis=1)))
    else:
        bearing_err, min_dist = 0.0, math.inf
    return MetricsRow(
        delta_norm=delta_norm,
        ptilde_norm=float(np.linalg.norm(ptilde)),
        bearing_err_max=bearing_err,
        min_edge_dist=min_dist,
        W1=0.5 * delta_norm ** 2,
        delta_i=np.linalg.norm(delta, axis=1),
        ptilde_i=np.linalg.norm(ptilde, axis=1),
    )


def oracle_residual(state, config):
    """Max gap between the simulated localization-error rate and ``-k_p (L_B + A) delta``."""
    d = coupled_rhs(state, config)
    rate = (np.asarray(d.estimates) - np.asarray(d.positions)).ravel()
    delta = (np.asarray(state.estimates) - np.asarray(state.positions)).ravel()
    M = error_system_matrix(config.graph, state.positions, config.gains)
    return float(np.max(np.abs(rate - M @ delta)))


class _Recorder:
    def __init__(self, config):
        self.config = config
        self.rows = []
        self.oracle = []

    def record(self, t, y):
        n = self.config.n
        state = SystemState.unpack(y.copy(), n, t)
        m = metrics(state, self.config.scenario, self.config.graph)
        k = self.config.oracle_every
        if k and len(self.rows) % k == 0:
            self.oracle.append((t, oracle_residual(state, self.config)))
        self.rows.append((t, state, m))

    def trace(self, failure=None):
        rows = self.rows
        n = self.config.n

        def stack(values, shape):
            return np.array(values, dtype=float).reshape((len(rows),) + shape)

        return SimTrace(
            t=stack([r[0] for r in rows], ()),
            positions=stack([r[1].positions for r in rows], (n, 2)),
            headings=stack([r[1].headings for r in rows], (n,)),
            estimates=stack([r[1].estimates for r in rows], (n, 2)),
            delta_i=stack([r[2].delta_i for r in rows], (n,)),
            ptilde_i=stack([r[2].ptilde_i for r in rows], (n,)),
            delta_norm=stack([r[2].delta_norm for r in rows], ()),
            ptilde_norm=stack([r[2].ptilde_norm for r in rows], ()),
            bearing_err_max=stack([r[2].bearing_err_max for r in rows], ()),
            min_edge_dist=stack([r[2].min_edge_dist for r in rows], ()),
            W1=stack([r[2].W1 for r in rows], ()),
            oracle_residuals=list(self.oracle),
            failure=failure,
        )


def integrate(config):
    """Run the closed loop with RK4 over ``[0, t_final]`` and return the recorded trace.

    Raises CollisionFailure or NonFiniteState; the exception's ``trace``
    attribute holds every row recorded before the failure.
    """
    dt = config.dt
    y = SystemState.initial(config).pack()
    rec = _Recorder(config)
    t = 0.0
    try:
        rec.record(0.0, y)
        for k in range(config.n_steps):
            t = k * dt
            k1 = _rhs(t, y, config)
            k2 = _rhs(t + 0.5 * dt, y + (0.5 * dt) * k1, config)
            k3 = _rhs(t + 0.5 * dt, y + (0.5 * dt) * k2, config)
            k4 = _rhs(t + dt, y + dt * k3, config)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = (k + 1) * dt
            if not np.all(np.isfinite(y)):
                msg = f"state became non-finite at t={t:.6g} s"
                raise NonFiniteState(msg, t=t, trace=rec.trace(failure=msg))
            if (k + 1) % config.record_every == 0:
                rec.record(t, y)
    except DegenerateEdge as exc:
        msg = f"collision on edge {exc.edge} at t={t:.6g} s: {exc}"
        log.error(msg)
        raise CollisionFailure(msg, edge=exc.edge, t=t, trace=rec.trace(failure=msg)) from exc
    return rec.trace()


@dataclass(frozen=True)
class AgentCondition:
    agent: int
    delta0: float
    ptilde0: float
    estimate_bound: float
    tracking_bound: float
    estimate_ok: bool
    tracking_ok: bool

    @property
    def estimate_margin(self):
        return self.estimate_bound - self.delta0

    @property
    def tracking_margin(self):
        return self.tracking_bound - self.ptilde0


@dataclass(frozen=True)
class InitialConditionReport:
    half_min_edge: float
    agents: tuple

    @property
    def all_ok(self):
        return all(a.estimate_ok and a.tracking_ok for a in self.agents)

    def violations(self):
        return [a for a in self.agents if not (a.estimate_ok and a.tracking_ok)]


def check_initial_conditions(config, n_samples=1001):
    """Evaluate the sufficient initial conditions for convergence.

    For every agent the estimate error must stay below half the shortest desired
    edge (over all edges, at its infimum over the horizon) minus the agent's peak
    desired speed, and the tracking error below half the shortest desired edge.
    Infimum and supremum are taken over ``n_samples`` evenly spaced times.
    Violations are reported, never raised: the conditions are sufficient only.
    """
    graph, spec = config.graph, config.scenario
    times = np.linspace(0.0, config.t_final, n_samples) if config.t_final > 0 else np.zeros(1)
    tail, head = graph.edge_index_arrays()
    min_edge = math.inf
    v_sup = np.zeros(graph.n)
    for t in times:
        ref = spec.sample_all(float(t))
        if graph.m:
            e = ref.p_star[head] - ref.p_star[tail]
            min_edge = min(min_edge, float(np.min(np.linalg.norm(e, axis=1))))
        v_sup = np.maximum(v_sup, ref.v_star)
    half = 0.5 * min_edge
    ref0 = spec.sample_all(0.0)
    ic = config.initial
    delta0 = np.linalg.norm(ic.estimates - ic.positions, axis=1)
    ptilde0 = np.linalg.norm(ic.positions - ref0.p_star, axis=1)
    agents = []
    for i in range(graph.n):
        eb = half - float(v_sup[i])
        agents.append(AgentCondition(
            agent=i + 1,
            delta0=float(delta0[i]),
            ptilde0=float(ptilde0[i]),
            estimate_bound=eb,
            tracking_bound=half,
            estimate_ok=bool(delta0[i] < eb),
            tracking_ok=bool(ptilde0[i] < half),
        ))
    return InitialConditionReport(half, tuple(agents))


def format_report(report):
    lines = [
        f"half shortest desired edge: {report.half_min_edge:.6g} m",
        f"{'agent':>5}  {'|delta0|':>10}  {'bound':>10}  {'margin':>10}  {'est':>4}"
        f"  {'|ptilde0|':>10}  {'bound':>10}  {'margin':>10}  {'trk':>4}",
    ]
    for a in report.agents:
        lines.append(
            f"{a.agent:>5}  {a.delta0:>10.4g}  {a.estimate_bound:>10.4g}  {a.estimate_margin:>10.4g}"
            f"  {'ok' if a.estimate_ok else 'FAIL':>4}"
            f"  {a.ptilde0:>10.4g}  {a.tracking_bound:>10.4g}  {a.tracking_margin:>10.4g}"
            f"  {'ok' if a.tracking_ok else 'FAIL':>4}"
        )
    lines.append("all initial conditions hold" if report.all_ok
                 else "initial conditions violated for agents "
                 + ", ".join(str(a.agent) for a in report.violations())
                 + " (sufficient conditions only; the run may still converge)")
    return "\n".join(lines)
