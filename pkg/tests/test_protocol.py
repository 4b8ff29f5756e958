import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cooplearn import graph, protocol
from cooplearn.protocol import NoiseModel, ProtocolState, StepsizeSchedule, StepsizeWarning

from test_graph import graphs


# -- stepsizes


def test_stepsize_values():
    s = StepsizeSchedule(0.75, offset=0.0)
    assert s(1) == 1.0
    assert s(16) == pytest.approx(0.5)
    s1 = StepsizeSchedule(0.5)
    assert s1(1) == pytest.approx(2**-0.5)
    assert np.allclose(s1.values(3, 4), [s1(t) for t in range(3, 7)])


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2, 1.5])
def test_stepsize_epsilon_range(eps):
    with pytest.raises(ValueError):
        StepsizeSchedule(eps)


def test_stepsize_time_starts_at_one():
    with pytest.raises(ValueError):
        protocol.stepsize(StepsizeSchedule(0.5), 0)


def test_unit_stepsize_is_strict_by_default():
    g = graph.generate("complete", 2)
    state = ProtocolState(np.zeros(2), 1)
    sched = StepsizeSchedule(0.75, offset=0.0)
    noise = NoiseModel(sigma=0.0)
    with pytest.raises(ValueError):
        protocol.step(state, g, [0], sched, noise, 1.0)
    with pytest.warns(StepsizeWarning):
        out = protocol.step(state, g, [0], sched, noise, 1.0, strict=False)
    assert out.v[:, 0].tolist() == [0.25, 0.0]


# -- one step by hand


def test_noiseless_two_node_step():
    g = graph.generate("complete", 2)
    sched = StepsizeSchedule(0.5)
    d = sched(1)
    out = protocol.step(ProtocolState([0.0, 0.0]), g, [0], sched, NoiseModel(sigma=0.0), 1.0)
    assert out.t == 2
    assert out.v[:, 0] == pytest.approx([d / 4, 0.0])


def test_noiseless_line_step_with_offsets():
    g = graph.generate("line", 3)
    sched = StepsizeSchedule(0.5)
    d = sched(5)
    v = np.array([1.0, 3.0, -2.0])
    out = protocol.step(ProtocolState(v, 5), g, [2], sched, NoiseModel(sigma=0.0), 0.5)
    expected = v + d / 4 * np.array([(3 - 1) / 2, (1 - 3) / 2 + (-2 - 3) / 2, (3 + 2) / 2 + (0.5 + 2)])
    assert out.v[:, 0] == pytest.approx(expected)


def test_offset_noise_enters_per_directed_edge():
    g = graph.generate("line", 3)
    sched = StepsizeSchedule(0.5)
    d = sched(1)
    offset = np.array([[1.0], [2.0], [3.0], [4.0]])  # (0,1) (1,0) (1,2) (2,1)
    draws = protocol.NoiseDraws(offset, np.zeros((0, 1)))
    out = protocol.step(ProtocolState(np.zeros(3)), g, [], sched, NoiseModel(), 0.0, draws=draws)
    assert out.v[:, 0] == pytest.approx(d / 4 * np.array([1 / 2, 2 / 2 + 3 / 2, 4 / 2]))


def test_fixed_point_without_noise():
    g = graph.generate("lollipop", 8)
    mu = np.array([0.3, -2.0])
    state = ProtocolState(np.tile(mu, (8, 1)), 3)
    out = protocol.step(state, g, [0, 7], StepsizeSchedule(0.4), NoiseModel(sigma=0.0), mu)
    assert np.array_equal(out.v, state.v)


@given(graphs(min_n=2, max_n=8), st.integers(0, 10**6))
def test_mean_preserved_without_measurements(g, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(g.n, 2))
    out = protocol.step(ProtocolState(v, 4), g, [], StepsizeSchedule(0.5), NoiseModel(sigma=0.0), [0.0, 0.0])
    assert np.allclose(out.v.mean(axis=0), v.mean(axis=0), atol=1e-12)


# -- noise


def test_draw_order_is_agents_then_neighbors_then_measurements():
    g = graph.generate("line", 3)
    noise = NoiseModel(sigma=2.0, sigma_prime=0.5)
    draws = noise.draw(np.random.default_rng(5), g, [2, 0], l=2)
    raw = np.random.default_rng(5).standard_normal(4 * 2 + 2 * 2)
    assert np.array_equal(draws.offset, 0.5 * raw[:8].reshape(4, 2))
    assert np.array_equal(draws.measurement, 2.0 * raw[8:].reshape(2, 2))


def test_zero_scale_channels_consume_nothing():
    g = graph.generate("star", 4)
    noise = NoiseModel(sigma=1.0, sigma_prime=0.0)
    assert noise.draw_counts(g, 1, 3) == (0, 3)
    draws = noise.draw(np.random.default_rng(1), g, [0], 3)
    assert np.array_equal(draws.measurement[0], np.random.default_rng(1).standard_normal(3))
    assert not draws.offset.any()
    assert NoiseModel(sigma=0.0).draw(None, g, [0], 1).measurement.tolist() == [[0.0]]


def test_symmetric_offset_noise_is_antisymmetric():
    g = graph.generate("lollipop", 6)
    noise = NoiseModel(sigma_prime=1.0, symmetric_offset_noise=True)
    d = noise.draw(np.random.default_rng(2), g, [], 1)
    src, dst = g.directed_edges
    pos = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(src, dst))}
    for (i, j), k in pos.items():
        assert d.offset[k, 0] == -d.offset[pos[(j, i)], 0]
    assert noise.draw_counts(g, 0, 1) == (g.num_edges, 0)


@pytest.mark.parametrize("dist", protocol.DISTRIBUTIONS)
def test_standard_draws_are_zero_mean_unit_variance(dist):
    x = NoiseModel(distribution=dist).standard(np.random.default_rng(0), 200_000)
    assert abs(x.mean()) < 5 / math.sqrt(x.size)
    assert x.var() == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("dist", protocol.DISTRIBUTIONS)
def test_block_draws_equal_sequential_draws(dist):
    nm = NoiseModel(distribution=dist)
    a = nm.standard(np.random.default_rng(3), 70)
    rng = np.random.default_rng(3)
    b = np.concatenate([nm.standard(rng, 30), nm.standard(rng, 40)])
    assert np.array_equal(a, b)


def test_uniform_and_rademacher_support():
    u = NoiseModel(distribution="uniform").standard(np.random.default_rng(0), 10_000)
    assert np.abs(u).max() <= math.sqrt(3)
    r = NoiseModel(distribution="rademacher").standard(np.random.default_rng(0), 1000)
    assert set(np.unique(r)) == {-1.0, 1.0}


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(sigma=-1)
    with pytest.raises(ValueError):
        NoiseModel(distribution="cauchy")
    with pytest.raises(ValueError):
        NoiseModel(sigma=1).draw(None, graph.generate("line", 2), [0], 1)


def test_observe_offset():
    state = ProtocolState(np.array([[1.0], [4.0]]))
    assert protocol.observe_offset(state, 0, 1, NoiseModel(sigma_prime=0.0)).tolist() == [3.0]
    noisy = protocol.observe_offset(state, 0, 1, NoiseModel(sigma_prime=1.0), np.random.default_rng(0))
    assert noisy[0] == pytest.approx(3.0 + np.random.default_rng(0).standard_normal())
    with pytest.raises(ValueError):
        protocol.observe_offset(state, 1, 1, NoiseModel())


# -- the two step implementations


@st.composite
def step_cases(draw):
    g = draw(graphs(min_n=1, max_n=10))
    l = draw(st.integers(1, 3))
    s = sorted(draw(st.sets(st.integers(0, g.n - 1))))
    noise = NoiseModel(
        sigma=draw(st.floats(0, 3)),
        sigma_prime=draw(st.floats(0, 3)),
        distribution=draw(st.sampled_from(protocol.DISTRIBUTIONS)),
        symmetric_offset_noise=draw(st.booleans()),
    )
    sched = StepsizeSchedule(draw(st.floats(0.01, 0.99)), draw(st.floats(0.0, 10.0)))
    t = draw(st.integers(2, 10**5))
    seed = draw(st.integers(0, 2**32 - 1))
    return g, l, s, noise, sched, t, seed


@given(step_cases())
def test_step_matches_matrix_form(case):
    g, l, s, noise, sched, t, seed = case
    rng = np.random.default_rng(seed)
    state = ProtocolState(rng.normal(0, 5, (g.n, l)), t)
    mu = rng.normal(size=l)
    draws = noise.draw(rng, g, s, l)
    a = protocol.step(state, g, s, sched, noise, mu, draws=draws).v
    b = protocol.step_matrix_form(state, g, s, sched, draws, mu).v
    assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(1.0, np.abs(b)))


def test_step_draws_from_rng_like_explicit_draws():
    g = graph.generate("star", 5)
    noise = NoiseModel(sigma=1.0, sigma_prime=0.3)
    state = ProtocolState(np.arange(5.0), 2)
    a = protocol.step(state, g, [0, 3], StepsizeSchedule(0.5), noise, 1.0, rng=np.random.default_rng(8))
    draws = noise.draw(np.random.default_rng(8), g, [3, 0], 1)
    b = protocol.step(state, g, [0, 3], StepsizeSchedule(0.5), noise, 1.0, draws=draws)
    assert np.array_equal(a.v, b.v)


# -- state, schedules and metrics


def test_state_validation():
    assert ProtocolState([1.0, 2.0]).v.shape == (2, 1)
    with pytest.raises(FloatingPointError):
        ProtocolState([1.0, np.nan])
    with pytest.raises(ValueError):
        ProtocolState([1.0], t=0)
    with pytest.raises(ValueError):
        protocol.step(ProtocolState([1.0, 2.0]), graph.generate("line", 3), [], StepsizeSchedule(0.5), NoiseModel(), 0.0)
    with pytest.raises(ValueError):
        protocol.as_target([1.0, 2.0], 3)


def test_variance_and_max_error():
    state = ProtocolState(np.array([[1.0, 2.0], [0.0, -1.0]]))
    assert protocol.variance(state, [0.0, 0.0]) == 6.0
    assert protocol.max_error(state, [0.0, 1.0]) == 2.0
    assert protocol.variance(np.array([1.0, 3.0]), 1.0) == 4.0


def test_periodic_schedule():
    s = protocol.MeasurementSchedule.periodic([4, 1], period=3)
    assert (s.T, s.M) == (3, 2)
    assert [s(t) for t in range(1, 8)] == [(1, 4), (), (), (1, 4), (), (), (1, 4)]
    s.validate(5, 30)
    with pytest.raises(ValueError):
        s.validate(4, 10)


def test_rotating_schedule():
    s = protocol.MeasurementSchedule.periodic([0, 2, 5], period=2, rotate=True)
    assert (s.T, s.M) == (2, 1)
    assert [s(t) for t in range(1, 8)] == [(0,), (), (2,), (), (5,), (), (0,)]


def test_schedule_gap_validation():
    bad = protocol.MeasurementSchedule(lambda t: (0,) if t in (1, 5) else (), T=3, M=1)
    with pytest.raises(ValueError):
        bad.validate(2, 6)
    late = protocol.MeasurementSchedule(lambda t: (0,) if t > 1 else (), T=1, M=1)
    with pytest.raises(ValueError):
        late.validate(2, 3)
    with pytest.raises(ValueError):
        protocol.MeasurementSchedule.periodic([])
