import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cooplearn import analysis, checks, graph
from cooplearn.graph import GraphError

from test_graph import graphs, to_nx


def walk_hitting_time(g, source, target, walks, seed):
    """Monte Carlo mean number of lazy-walk steps from ``source`` to ``target``."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(np.asarray(analysis.lazy_metropolis_transition(g)), axis=1)
    pos = np.full(walks, source)
    steps = np.zeros(walks)
    active = pos != target
    while active.any():
        idx = np.flatnonzero(active)
        u = rng.random(idx.size)
        nxt = (u[:, None] > cdf[pos[idx]]).sum(axis=1)
        pos[idx] = np.minimum(nxt, g.n - 1)
        steps[idx] += 1
        active[idx] = pos[idx] != target
    return steps.mean(), steps.std(ddof=1) / math.sqrt(walks)


def power_iteration(a, iters=20000, seed=0):
    x = np.random.default_rng(seed).normal(size=a.shape[0])
    for _ in range(iters):
        x = a @ x
        x /= np.linalg.norm(x)
    return float(x @ a @ x)


# -- hitting times


@pytest.mark.parametrize("family, n, value", [("complete", 2, 4.0), ("line", 3, 24.0), ("complete", 3, 8.0)])
def test_hitting_time_hand_values(family, n, value):
    assert analysis.hitting_times(graph.generate(family, n)).max_value == pytest.approx(value, abs=1e-9)


def test_hitting_time_matrix_orientation():
    h = analysis.hitting_times(graph.generate("line", 3))
    assert h[0, 0] == 0.0
    assert h[0, 2] == pytest.approx(24.0, abs=1e-9)
    # middle to end: h1 = 1 + 3/4 h1 + 1/8 h2 and h2 = 8 + h1
    assert h[1, 0] == pytest.approx(16.0, abs=1e-9)


def test_hitting_time_matches_random_walks_on_three_node_line():
    g = graph.generate("line", 3)
    mean, se = walk_hitting_time(g, 0, 2, 10**6, seed=1)
    assert mean == pytest.approx(24.0, rel=0.01)
    assert abs(mean - 24.0) < 5 * se


def test_hitting_time_matches_random_walks_on_lollipop():
    g = graph.generate("lollipop", 6)
    h = analysis.hitting_times(g)
    mean, se = walk_hitting_time(g, 0, 5, 2 * 10**5, seed=2)
    assert abs(mean - h[0, 5]) < 5 * se


def test_hitting_times_need_connectivity():
    with pytest.raises(GraphError):
        analysis.hitting_times(graph.build_graph(3, [(0, 1)]))


def test_lazy_walk_is_stochastic():
    p = np.asarray(analysis.lazy_metropolis_transition(graph.generate("lollipop", 8)))
    assert np.allclose(p.sum(axis=1), 1.0)
    assert np.all(np.diag(p) >= 0.75 - 1e-12)


# -- sieve constant


def test_two_node_sieve_constant_both_conventions():
    a = graph.metropolis_matrix(graph.generate("complete", 2))
    ordered = analysis.sieve_constant(a, ordered=True)
    unordered = analysis.sieve_constant(a, ordered=False)
    assert ordered.value == pytest.approx((5 - math.sqrt(17)) / 2, abs=1e-12)
    assert unordered.value == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    assert ordered.lower_bound == pytest.approx(0.5)


def test_two_node_graph_falls_below_eta_over_n_diameter():
    # a known exception of the eta/(nD) bound; eta/(n(D+1)) still holds
    a = graph.metropolis_matrix(graph.generate("complete", 2))
    for ordered in (True, False):
        k = analysis.sieve_constant(a, ordered=ordered).value
        assert k < analysis.sieve_lower_bound(a)
        assert k >= 1 / (2 * 2)


def test_sieve_constant_of_disconnected_graph_is_zero():
    a = graph.metropolis_matrix(graph.build_graph(4, [(0, 1), (2, 3)]))
    res = analysis.sieve_constant(a)
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.lower_bound is None


@pytest.mark.parametrize("seed", range(4))
def test_sieve_constant_matches_random_search(seed):
    rng = np.random.default_rng(seed)
    g = checks.random_connected_graph(rng, 3)
    a = graph.metropolis_matrix(g)
    k = analysis.sieve_constant(a).value
    lap = analysis.sieve_form_matrix(a)
    x = rng.normal(size=(400_000, g.n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    form = np.einsum("si,ij,sj->s", x, lap, x)
    sampled = min(float((x[:, m] ** 2 + form).min()) for m in range(g.n))
    assert sampled >= k - 1e-12
    assert sampled <= k + 1e-3


@given(graphs(min_n=2, max_n=7))
def test_sieve_form_matches_pair_sums(g):
    a = np.asarray(graph.metropolis_matrix(g))
    x = np.random.default_rng(g.num_edges).normal(size=g.n)
    ordered = sum(a[k, l] * (x[k] - x[l]) ** 2 for k in range(g.n) for l in range(g.n) if k != l)
    unordered = sum(a[k, l] * (x[k] - x[l]) ** 2 for k in range(g.n) for l in range(k + 1, g.n))
    assert x @ analysis.sieve_form_matrix(a, True) @ x == pytest.approx(ordered, abs=1e-10)
    assert x @ analysis.sieve_form_matrix(a, False) @ x == pytest.approx(unordered, abs=1e-10)


@given(graphs(min_n=2, max_n=7))
def test_sieve_constant_range_and_convention_order(g):
    a = graph.metropolis_matrix(g)
    ko = analysis.sieve_constant(a, True).value
    ku = analysis.sieve_constant(a, False).value
    assert 0 <= ku <= ko <= 1 + 1e-12
    assert ko <= 2 * ku + 1e-12


def test_sieve_lower_bound_holds_on_random_graphs_from_three_nodes():
    res = checks.check_sieve_bound(graphs=60, seed=3)
    assert res.passed, res.counterexample


def test_sieve_lower_bound_uses_smallest_entry_and_diameter():
    a = graph.metropolis_matrix(graph.generate("line", 4))
    # smallest positive off-diagonal entry 1/2, diameter 3
    assert analysis.sieve_lower_bound(a) == pytest.approx(0.5 / (4 * 3))


# -- eigenvalues and the norm identity


def test_two_node_lambda_max():
    a = graph.protocol_matrix(graph.generate("complete", 2), [0])
    assert analysis.lambda_max(a) == pytest.approx((5 + math.sqrt(5)) / 8, abs=1e-12)


@pytest.mark.parametrize("family, n, s", [("line", 6, [5]), ("star", 7, [0]), ("lollipop", 8, [7, 0])])
def test_lambda_max_matches_power_iteration(family, n, s):
    a = np.asarray(graph.protocol_matrix(graph.generate(family, n), s))
    assert analysis.lambda_max(a) == pytest.approx(power_iteration(a), abs=1e-7)


def test_lambda_max_rejects_asymmetric():
    with pytest.raises(ValueError):
        analysis.lambda_max(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalue_gap_small_graphs_exhaustive():
    res = checks.check_eigenvalue_gap(max_n=4)
    assert res.passed and res.cases == 601


@given(
    st.integers(1, 7).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-2, 2), min_size=n * n, max_size=n * n),
            st.lists(st.floats(-100, 100), min_size=n, max_size=n),
        )
    )
)
def test_norm_decrease_identity(data):
    flat, x = data
    n = len(x)
    m = np.array(flat).reshape(n, n)
    a = (m + m.T) / 2
    x = np.array(x)
    lhs, rhs = analysis.norm_decrease_identity(a, x)
    assert abs(lhs - rhs) <= 1e-10 * max(float(x @ x), 1e-300) + 1e-12


def test_norm_identity_shape_errors():
    with pytest.raises(ValueError):
        analysis.norm_decrease_identity(np.eye(3), np.ones(2))
    with pytest.raises(ValueError):
        analysis.norm_decrease_identity(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2))


@given(graphs(min_n=1, max_n=9))
def test_diameter_matches_networkx(g):
    if g.is_connected():
        assert analysis.diameter(g) == nx.diameter(to_nx(g))
    else:
        with pytest.raises(GraphError):
            analysis.diameter(g)
