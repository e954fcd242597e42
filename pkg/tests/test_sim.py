import dataclasses
import math

import numpy as np
import pytest

from bearing_swarm.config import load_config
from bearing_swarm.errors import CollisionFailure, NonFiniteState
from bearing_swarm.estimator import EstimatorGains, error_system_matrix
from bearing_swarm.graph import FormationGraph, default_topology
from bearing_swarm.presets import path
from bearing_swarm.reference import PAPER_P_STAR0, ScenarioSpec
from bearing_swarm.sim import (
    InitialConditions,
    SimConfig,
    SystemState,
    check_initial_conditions,
    coupled_rhs,
    format_report,
    integrate,
    metrics,
)

PAPER_P = np.asarray(PAPER_P_STAR0, dtype=float).reshape(7, 2)


def straight_line_config(**kw):
    spec = ScenarioSpec("sinusoid", PAPER_P_STAR0, {"amplitude": 0.0, "speed": 1.0})
    base = dict(graph=default_topology(), scenario=spec, initial=InitialConditions.from_reference(spec),
                dt=0.01, t_final=1.0)
    base.update(kw)
    return SimConfig(**base)


def two_agent_circle(dt, t_final=20.0, v=1.0, w=0.5):
    """Open-loop constant input; reference is the exact circle, so |p_tilde| is the global error."""
    r = v / w
    spec = ScenarioSpec("rotation", [[r, 0.0], [-r, 0.0]], {"center": [0, 0], "rate": w})
    ic = InitialConditions([[r, 0], [-r, 0]], [math.pi / 2, -math.pi / 2], [[r, 0], [-r, 0]])
    return SimConfig(FormationGraph(2, [(1, 2)], [1]), spec, ic, dt=dt, t_final=t_final,
                     record_every=int(round(t_final / dt)), open_loop_input=(v, w))


def test_exact_tracking_equilibrium():
    cfg = straight_line_config()
    ref = cfg.scenario.sample_all(0.0)
    d = coupled_rhs(SystemState(ref.p_star, ref.theta_star, ref.p_star, 0.0), cfg)
    np.testing.assert_allclose(d.estimates, ref.p_star_dot, atol=1e-14)
    np.testing.assert_allclose(d.positions, ref.p_star_dot, atol=1e-14)
    np.testing.assert_allclose(d.headings, 0, atol=1e-14)


def test_estimator_error_rate_matches_matrix(rng):
    cfg = load_config(path("paper_circle.cfg"))
    for _ in range(20):
        p = PAPER_P + rng.normal(scale=0.5, size=(7, 2))
        state = SystemState(p, rng.uniform(-3, 3, 7), p + rng.normal(size=(7, 2)), float(rng.uniform(0, 50)))
        d = coupled_rhs(state, cfg)
        M = error_system_matrix(cfg.graph, p, cfg.gains)
        rate = (d.estimates - d.positions).ravel()
        np.testing.assert_allclose(rate, M @ (state.estimates - p).ravel(), atol=1e-12, rtol=0)


def test_paper_default_smoke():
    cfg = load_config(path("paper_sine.cfg"))
    d = coupled_rhs(SystemState.initial(cfg), cfg)
    assert np.all(np.isfinite(d.pack()))


def test_zero_horizon_single_row():
    tr = integrate(straight_line_config(t_final=0.0))
    assert len(tr) == 1 and tr.t[0] == 0.0


@pytest.mark.parametrize("t_final, dt, every", [(1.0, 0.01, 1), (1.0, 0.01, 7), (2.5, 0.1, 3), (0.05, 0.01, 10)])
def test_row_count(t_final, dt, every):
    tr = integrate(straight_line_config(t_final=t_final, dt=dt, record_every=every))
    assert len(tr) == math.floor(t_final / (dt * every) + 1e-9) + 1
    assert np.all(np.diff(tr.t) > 0)


def test_rk4_fourth_order_against_circle():
    errs = [integrate(two_agent_circle(dt)).ptilde_norm[-1] for dt in (0.04, 0.02, 0.01)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 16 * 0.8 <= r <= 16 * 1.2
    assert errs[-1] < 1e-10


def test_determinism():
    cfg = straight_line_config(t_final=3.0, initial=load_config(path("paper_sine.cfg")).initial)
    a, b = integrate(cfg), integrate(cfg)
    for field in ("positions", "headings", "estimates", "delta_norm", "ptilde_norm", "W1"):
        assert np.array_equal(getattr(a, field), getattr(b, field))


def test_anchor_pinning_closed_form():
    g = FormationGraph(3, [], [1, 2, 3], require_connected=False)
    spec = ScenarioSpec("sinusoid", [[0, 0], [5, 0], [0, 5]])
    delta0 = np.array([[1.0, -2.0], [0.5, 0.5], [-3.0, 1.0]])
    p0 = spec.base_formation
    ic = InitialConditions(p0, np.zeros(3), p0 + delta0)
    cfg = SimConfig(g, spec, ic, gains=EstimatorGains(0.8), dt=0.01, t_final=5.0, record_every=50)
    tr = integrate(cfg)
    # agents move under the controller, but the error dynamics are delta' = -k_p delta
    expected = np.linalg.norm(delta0) * np.exp(-0.8 * tr.t)
    np.testing.assert_allclose(tr.delta_norm, expected, rtol=1e-9)


def test_w1_monotone_and_oracle_spot_checks():
    cfg = dataclasses.replace(load_config(path("paper_circle.cfg")), t_final=20.0, oracle_every=5)
    tr = integrate(cfg)
    W = tr.W1
    assert np.all(W[1:] <= W[:-1] + 1e-8 * (1 + W[:-1]))
    assert len(tr.oracle_residuals) == math.ceil(len(tr) / 5)
    assert max(r for _, r in tr.oracle_residuals) <= 1e-10


def test_collision_failure_reports_edge_and_time():
    spec = ScenarioSpec("sinusoid", [[0, 0], [3, 0]])
    ic = InitialConditions([[1, 1], [1, 1]], [0, 0], [[1, 1], [1, 1]])
    cfg = SimConfig(FormationGraph(2, [(1, 2)], [1]), spec, ic, dt=0.01, t_final=1.0)
    with pytest.raises(CollisionFailure) as info:
        integrate(cfg)
    assert info.value.edge == (1, 2) and info.value.t == 0.0
    assert len(info.value.trace) == 0


def test_collision_mid_run_keeps_partial_trace():
    # head-on open-loop approach: 4 m apart, closing at 2 m/s
    spec = ScenarioSpec("sinusoid", [[0, 0], [4, 0]])
    ic = InitialConditions([[0, 0], [4, 0]], [0, math.pi], [[0, 0], [4, 0]])
    cfg = SimConfig(FormationGraph(2, [(1, 2)], [1]), spec, ic, dt=0.01, t_final=5.0, open_loop_input=(1.0, 0.0))
    with pytest.raises(CollisionFailure) as info:
        integrate(cfg)
    tr = info.value.trace
    assert 150 <= len(tr) <= 201
    assert info.value.t == pytest.approx(2.0, abs=0.011)
    assert tr.failure


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_state():
    spec = ScenarioSpec("sinusoid", [[0, 0], [4, 0]])
    ic = InitialConditions([[0, 0], [4, 0]], [0, math.pi / 2], [[0, 0], [4, 0]])
    cfg = SimConfig(FormationGraph(2, [(1, 2)], [1]), spec, ic, dt=1.0, t_final=5.0, open_loop_input=(1e308, 0.0))
    with pytest.raises(NonFiniteState) as info:
        integrate(cfg)
    assert len(info.value.trace) == 1


def test_initial_conditions_all_hold():
    cfg = straight_line_config()
    rep = check_initial_conditions(cfg)
    assert rep.half_min_edge == pytest.approx(1.5 * math.sqrt(2), abs=1e-12)
    for a in rep.agents:
        assert a.estimate_ok and a.tracking_ok
        assert a.estimate_margin == pytest.approx(1.5 * math.sqrt(2) - 1, abs=1e-9)
        assert a.tracking_margin == pytest.approx(1.5 * math.sqrt(2), abs=1e-12)
    assert rep.all_ok
    assert "all initial conditions hold" in format_report(rep)


def test_initial_conditions_paper_violation():
    rep = check_initial_conditions(load_config(path("paper_circle_literal.cfg")))
    a2 = rep.agents[1]
    assert a2.delta0 == pytest.approx(5.0, abs=1e-12)
    assert not a2.estimate_ok
    # the bound over all edges never exceeds the single-edge comparison |e*_24| - v*_2
    assert a2.estimate_bound <= 3 * math.sqrt(2) - 1.73 + 1e-12
    assert a2.tracking_ok and a2.ptilde0 == 0
    assert not rep.all_ok


def test_metrics_perfect_state():
    g = default_topology()
    spec = ScenarioSpec("sinusoid", PAPER_P_STAR0)
    ref = spec.sample_all(3.0)
    m = metrics(SystemState(ref.p_star, ref.theta_star, ref.p_star, 3.0), spec, g)
    assert m.delta_norm == 0 and m.W1 == 0
    assert m.ptilde_norm == pytest.approx(0, abs=1e-12)
    assert m.bearing_err_max == pytest.approx(0, abs=1e-12)
    assert m.min_edge_dist == pytest.approx(3 * math.sqrt(2), abs=1e-12)


def test_metrics_w1_and_antipodal_bearing():
    g = FormationGraph(2, [(1, 2)], [1])
    spec = ScenarioSpec("sinusoid", [[0, 0], [2, 0]], {"amplitude": 0.0})
    p = np.array([[2.0, 0.0], [0.0, 0.0]])  # swapped: bearing reversed
    p_hat = p + [[0.3, -0.4], [1.2, 0.0]]
    m = metrics(SystemState(p, np.zeros(2), p_hat, 0.0), spec, g)
    assert m.bearing_err_max == pytest.approx(2.0, abs=1e-15)
    assert m.W1 == 0.5 * m.delta_norm ** 2
    assert m.delta_norm == pytest.approx(math.sqrt(0.25 + 1.44))


def test_config_validation():
    with pytest.raises(ValueError):
        straight_line_config(dt=0.0)
    with pytest.raises(ValueError):
        straight_line_config(record_every=0)
    with pytest.raises(ValueError):
        straight_line_config(t_final=-1.0)
