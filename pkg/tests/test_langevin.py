import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from patchygsl.errors import ParameterError
from patchygsl.estimator import PotentialField
from patchygsl.grid_world import GridWorld, empty_world
from patchygsl.langevin import (PlannerParams, RobotState, langevin_step, sample_chain,
                                sample_chains, trajectory_length)

from oracles import polyline
from potentials import TiltedWell, double_well, double_well_grad, gibbs_chi2, gibbs_mass


def planted(world, fn):
    xs = (np.arange(world.n_cols) + 0.5) * world.cell_size
    ys = (np.arange(world.n_rows) + 0.5) * world.cell_size
    X, Y = np.meshgrid(xs, ys)
    phi = fn(X, Y).astype(float)
    phi[world.occupancy] = np.nan
    return PotentialField(phi, world)


W = empty_world(20, 20, 0.5, (10.25, 10.25))


def params(**kw):
    return PlannerParams(**kw).resolved(W)


def test_defaults_resolve_from_cell_size():
    p = PlannerParams().resolved(W)
    assert p.eta == pytest.approx(0.125) and p.h == 0.5
    with pytest.raises(ParameterError):
        PlannerParams(v_max=0).resolved(W)
    with pytest.raises(ParameterError):
        RobotState(0, (1.0, 1.0), 0.0)


def test_zero_temperature_flat_field_stays():
    f = planted(W, lambda x, y: 0 * x + 2.0)
    r = RobotState(0, (5.3, 7.1), 1.0)
    out = langevin_step(r, f, params(), W, np.random.default_rng(0), tau=0.0)
    assert out.pos == r.pos


def test_zero_temperature_linear_drift():
    f = planted(W, lambda x, y: 0.3 * x + 0 * y)
    p = params(eta=0.2)
    r = RobotState(0, (5.3, 7.1), 1.0)
    out = langevin_step(r, f, p, W, np.random.default_rng(0), tau=0.0)
    assert out.pos == pytest.approx((5.3 - 0.2 * 0.3, 7.1), abs=1e-12)


def test_steep_ramp_moves_exactly_vmax_dt():
    f = planted(W, lambda x, y: -400.0 * y + 0 * x)
    p = params(eta=0.5, v_max=0.5, dt=0.5)
    r = RobotState(0, (5.3, 7.1), 1.0)
    out = langevin_step(r, f, p, W, np.random.default_rng(0), tau=0.0)
    assert math.dist(out.pos, r.pos) == pytest.approx(0.25, abs=1e-12)
    assert out.pos[1] > r.pos[1]


def test_step_uses_euler_maruyama_update():
    f = planted(W, lambda x, y: 0.1 * x - 0.05 * y)
    p = params(eta=0.05)
    r = RobotState(0, (8.0, 8.0), 0.4)
    out = langevin_step(r, f, p, W, np.random.default_rng(5))
    xi = np.random.default_rng(5).standard_normal(2)
    want = np.array([8.0, 8.0]) - 0.05 * np.array([0.1, -0.05]) + math.sqrt(2 * 0.05 * 0.4) * xi
    assert out.pos == pytest.approx(tuple(want), abs=1e-12)


def test_total_displacement_capped():
    f = planted(W, lambda x, y: 0 * x)
    p = params(eta=0.5)
    r = RobotState(0, (10.0, 10.0), 50.0)
    rng = np.random.default_rng(1)
    for _ in range(200):
        out = langevin_step(r, f, p, W, rng)
        assert math.dist(out.pos, r.pos) <= 2 * p.v_max * p.dt + 1e-12


def test_truncated_at_wall():
    occ = np.zeros((10, 10), bool)
    occ[:, 6] = True
    w = GridWorld(10, 10, 1.0, occ, (1.5, 1.5), require_connected=False)
    f = planted(w, lambda x, y: -100.0 * x + 0 * y)
    p = PlannerParams(eta=0.5, v_max=1.0, dt=1.0).resolved(w)
    r = RobotState(0, (5.5, 4.5), 1.0)
    out = langevin_step(r, f, p, w, np.random.default_rng(0), tau=0.0)
    assert out.pos[0] == pytest.approx(6.0 - 0.01)
    assert w.is_free_pos(out.pos)


def test_determinism():
    f = planted(W, lambda x, y: (x - 3) ** 2 + (y - 4) ** 2)
    a = RobotState(0, (12.0, 12.0), 0.3)
    b = RobotState(0, (12.0, 12.0), 0.3)
    ra, rb = np.random.default_rng(8), np.random.default_rng(8)
    for _ in range(30):
        a = langevin_step(a, f, params(), W, ra)
        b = langevin_step(b, f, params(), W, rb)
    assert a.trajectory == b.trajectory and a.path_len == b.path_len


def _maze():
    occ = np.zeros((16, 16), bool)
    occ[4, 2:14] = True
    occ[10, 0:9] = True
    occ[10:15, 12] = True
    return GridWorld(8, 8, 0.5, occ, (0.25, 0.25))


@given(seed=st.integers(0, 10_000), tau=st.floats(0.01, 20), n=st.integers(1, 40))
def test_stays_free_and_bookkeeping_matches(seed, tau, n):
    w = _maze()
    f = planted(w, lambda x, y: np.sin(x) * np.cos(y) * 3)
    p = PlannerParams(eta=0.3).resolved(w)
    r = RobotState(0, (3.1, 3.1), tau)
    rng = np.random.default_rng(seed)
    for _ in range(n):
        r = langevin_step(r, f, p, w, rng)
        assert w.is_free_pos(r.pos)
    pts = [q for _, q in r.trajectory]
    assert abs(r.path_len - polyline(pts)) < 1e-9
    assert abs(trajectory_length(r.trajectory) - r.path_len) < 1e-9
    times = [t for t, _ in r.trajectory]
    assert times == sorted(times) and len(times) == n + 1


# -- analytic-potential properties -------------------------------------------
def test_gibbs_histogram_fast_mixing():
    s = sample_chain(double_well_grad, -1.0, 1e-3, 1.0, 10**6, np.random.default_rng(3), burn_in=10**4)
    stat, p, n, bins = gibbs_chi2(s, double_well, 1.0)
    assert bins == 20 and p > 0.01


def test_gibbs_check_has_power():
    # the same samples scored against the wrong temperature are rejected
    s = sample_chain(double_well_grad, -1.0, 1e-3, 1.0, 10**6, np.random.default_rng(3), burn_in=10**4)
    assert gibbs_chi2(s, double_well, 0.4)[1] < 1e-3


def _first_hits(well, x0, tau, eta, n_steps, rng, target=1.0):
    x = np.array(x0, float)
    hit = np.full(len(x), -1)
    for k in range(n_steps):
        x = sample_chains(well.grad, x, eta, tau, 1, rng)
        new = (hit < 0) & (x >= target)
        hit[new] = k + 1
        if (hit >= 0).all():
            break
    return hit


def test_escape_from_shallow_well():
    well = TiltedWell(1.0, 1.0)
    tau = 0.1 * well.deep_barrier
    hits = _first_hits(well, np.full(100, -1.0), tau, 0.02, 10**4, np.random.default_rng(0))
    assert (hits >= 0).mean() >= 0.95


def test_gradient_flow_is_trapped():
    well = TiltedWell(1.0, 1.0)
    starts = np.linspace(-1.6, well.x_top - 0.05, 100)
    hits = _first_hits(well, starts, 0.0, 0.02, 10**4, np.random.default_rng(0))
    assert (hits < 0).all()


def _occupancy_ratio(well, tau, rng, chains=400, burn=3000, steps=20000, eta=0.01):
    x = np.full(chains, -1.0)
    x = sample_chains(well.grad, x, eta, tau, burn, rng)
    deep = 0
    for _ in range(steps):
        x = sample_chains(well.grad, x, eta, tau, 1, rng)
        deep += int((x > well.x_top).sum())
    total = chains * steps
    return deep / (total - deep)


def test_deep_well_dominates_and_ratio_matches_quadrature():
    well = TiltedWell(1.0, 1.0)
    rng = np.random.default_rng(11)
    for tau in (0.3, 1.0, 3.0):
        assert _occupancy_ratio(well, tau, rng, chains=200, steps=5000) > 1.0
    tau = 0.5
    m_deep = gibbs_mass(well, tau, well.x_top, 4.0)
    want = m_deep / (1.0 - m_deep)
    got = _occupancy_ratio(well, tau, rng)
    assert got == pytest.approx(want, rel=0.1)
    # small wells: the ratio tracks exp(depth difference / tau) up to curvature
    assert want == pytest.approx(math.exp(well.D / tau), rel=0.5)
