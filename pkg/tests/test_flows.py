import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlbounds.flows import (
    BudgetExceeded,
    Dag,
    DegreeBounds,
    DomainError,
    count_flows_exact,
    degree_bounds,
    enumerate_flows,
    eval_flow_series,
    flow_feasible,
    netflow,
    suffix_component,
    terminal_vertices,
)
from dlbounds.laurent import SparsePoly

K3 = Dag(3, ((2, 1), (3, 1), (3, 2)))
K3_UP = Dag(3, ((1, 2), (1, 3), (2, 3)))


def brute_count(g, N):
    """Independent oracle: scan every edge assignment in a box."""
    B = sum(v for v in N if v > 0)
    count = 0
    for vals in itertools.product(range(B + 1), repeat=len(g.edges)):
        if netflow(g, dict(zip(g.edges, vals))) == list(N):
            count += 1
    return count


@st.composite
def small_instances(draw, max_n=4, r=3):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 5))) if pairs else []
    perm = draw(st.permutations(range(1, n + 1)))
    edges = tuple(sorted((perm[i - 1], perm[j - 1]) for i, j in chosen))
    head = draw(st.lists(st.integers(-r, r), min_size=n - 1, max_size=n - 1))
    return Dag(n, edges), tuple(head) + (-sum(head),)


# --- graph validation


def test_dag_validation():
    with pytest.raises(DomainError):
        Dag(2, ((1, 2), (2, 1)))
    with pytest.raises(DomainError):
        Dag(2, ((1, 1),))
    with pytest.raises(DomainError):
        Dag(2, ((1, 3),))
    assert Dag.from_json(K3.to_json()) == K3


def test_terminal_vertices_examples():
    assert terminal_vertices(Dag(2, ((1, 2),))) == {2}
    assert terminal_vertices(K3_UP) == {3}
    assert terminal_vertices(Dag(3, ())) == {1, 2, 3}


def test_suffix_component_examples():
    k4 = Dag(4, tuple((i, j) for i in range(1, 5) for j in range(i + 1, 5)))
    assert suffix_component(k4, 2) == {2, 3, 4}
    bip = Dag(4, ((3, 1), (4, 1), (3, 2), (4, 2)))
    assert suffix_component(bip, 3) == {3}
    assert suffix_component(K3, 3) == {3}


# --- counting


def test_count_examples():
    assert count_flows_exact(K3, (2, 0, -2)) == 3
    assert count_flows_exact(K3, (1, 0, -1)) == 2
    assert count_flows_exact(K3, (-1, 0, 1)) == 0


def test_count_rejects_bad_netflow():
    with pytest.raises(DomainError):
        count_flows_exact(K3, (1, 0, 0))
    with pytest.raises(DomainError):
        count_flows_exact(K3, (1, -1))


def test_kostant_partition_function_values():
    # type A_3 Kostant values on the complete DAG
    k4 = Dag(4, tuple((j, i) for i in range(1, 5) for j in range(i + 1, 5)))
    assert count_flows_exact(k4, (3, 0, 0, -3)) == brute_count(k4, (3, 0, 0, -3))
    assert count_flows_exact(k4, (1, 1, 1, -3)) == brute_count(k4, (1, 1, 1, -3)) == 7


@settings(max_examples=150, deadline=None)
@given(small_instances())
def test_count_matches_brute_force(inst):
    g, N = inst
    assert count_flows_exact(g, N) == brute_count(g, N)


@settings(max_examples=100, deadline=None)
@given(small_instances())
def test_enumerated_flows_are_valid_and_distinct(inst):
    g, N = inst
    flows = list(enumerate_flows(g, N))
    assert all(netflow(g, f) == list(N) for f in flows)
    assert len({tuple(sorted(f.items())) for f in flows}) == len(flows)


def test_budget_exceeded():
    k4 = Dag(4, tuple((j, i) for i in range(1, 5) for j in range(i + 1, 5)))
    with pytest.raises(BudgetExceeded):
        count_flows_exact(k4, (6, 6, 0, -12), budget=50)


# --- feasibility


def test_feasibility_examples():
    e = Dag(2, ((1, 2),))
    ok, cert = flow_feasible(e, (-1, 1))
    assert ok and cert == {(1, 2): 1}
    assert flow_feasible(e, (1, -1)) == (False, None)
    ok, cert = flow_feasible(K3, (2, 0, -2))
    assert ok and netflow(K3, cert) == [2, 0, -2]


def test_fractional_certificate_type():
    ok, cert = flow_feasible(K3, (2, 0, -2), mode="fractional")
    assert ok and all(isinstance(v, Fraction) for v in cert.values())
    with pytest.raises(ValueError):
        flow_feasible(K3, (2, 0, -2), mode="real")


@settings(max_examples=150, deadline=None)
@given(small_instances())
def test_feasible_iff_count_positive(inst):
    g, N = inst
    ok, cert = flow_feasible(g, N)
    assert ok == (count_flows_exact(g, N) > 0)
    if ok:
        assert netflow(g, cert) == list(N)


# --- series


def test_series_examples():
    assert eval_flow_series(Dag(2, ((1, 2),)), (2, 1)) == 2
    assert eval_flow_series(Dag(3, ()), (5, 1, 3)) == 1
    assert eval_flow_series(Dag(3, ((2, 1), (3, 1))), (1, 2, 4)) == Fraction(8, 3)
    assert isinstance(eval_flow_series(Dag(2, ((1, 2),)), (2.0, 1.0)), float)


def test_series_domain_errors():
    with pytest.raises(DomainError):
        eval_flow_series(Dag(2, ((1, 2),)), (1, 1))
    with pytest.raises(DomainError):
        eval_flow_series(Dag(2, ((1, 2),)), (1, -1))
    with pytest.raises(DomainError):
        eval_flow_series(Dag(2, ((1, 2),)), (1,))


def _truncated_series(g, T):
    p = SparsePoly.one(g.n)
    for t, h in g.edges:
        factor = {}
        for k in range(T + 1):
            e = [0] * g.n
            e[h - 1] += k
            e[t - 1] -= k
            factor[tuple(e)] = factor.get(tuple(e), 0) + 1
        p = p * SparsePoly(g.n, factor)
    return p


@pytest.mark.parametrize("g", [Dag(2, ((1, 2),)), Dag(3, ((2, 1), (3, 1))), K3, Dag(3, ((1, 2), (3, 2)))])
def test_series_against_truncated_expansion(g):
    rng = random.Random(3)
    T = 30
    for _ in range(5):
        order = list(g.topological_order)
        xs = {}
        val = 8.0
        for v in order:
            xs[v] = val
            val *= rng.uniform(0.2, 0.6)
        x = [xs[v] for v in range(1, g.n + 1)]
        closed = eval_flow_series(g, x)
        approx = float(_truncated_series(g, T).evaluate(x))
        rmax = max(x[h - 1] / x[t - 1] for t, h in g.edges)
        err = closed * (1 - (1 - rmax**T) ** len(g.edges))
        assert approx <= closed * (1 + 1e-12)
        assert closed - approx <= err * (1 + 1e-9) + 1e-12


def test_series_coefficients_are_flow_counts():
    p = _truncated_series(K3, 6)
    for N in [(2, 0, -2), (1, 0, -1), (1, 1, -2), (0, 2, -2)]:
        assert p.coeff(N) == count_flows_exact(K3, N)


# --- degree bounds


def test_degree_bound_examples():
    N = (1, 0, -1)
    assert degree_bounds(K3, N, 2) == DegreeBounds(upper=1, lower=None)
    assert degree_bounds(K3, N, 3) == DegreeBounds(upper=0, lower=None)


def test_degree_bound_reversed_orientation():
    # with edges pointing up, the same magnitude shows up as a lower bound
    assert degree_bounds(K3_UP, (-1, 0, 1), 2) == DegreeBounds(upper=None, lower=-1)
    assert degree_bounds(K3_UP, (-1, 0, 1), 3) == DegreeBounds(upper=None, lower=0)


def _free_below(g, N, i, B):
    """Net-flows at i over flows matching N above i, any net-flow below."""
    values = set()
    for vals in itertools.product(range(B + 1), repeat=len(g.edges)):
        nf = netflow(g, dict(zip(g.edges, vals)))
        if all(nf[j - 1] == N[j - 1] for j in range(i + 1, g.n + 1)):
            values.add(nf[i - 1])
    return values


@settings(max_examples=60, deadline=None)
@given(small_instances(max_n=3, r=2), st.data())
def test_degree_bounds_hold_on_reachable_values(inst, data):
    g, N = inst
    i = data.draw(st.integers(1, g.n))
    b = degree_bounds(g, N, i)
    reach = _free_below(g, N, i, 4)
    if b.upper is not None:
        assert all(v <= b.upper for v in reach)
    if b.lower is not None:
        assert all(v >= b.lower for v in reach)


def test_degree_bound_tight_for_larger_to_smaller_labels():
    # edges point from larger to smaller labels; the upper bound s is attained
    g = Dag(3, ((2, 1), (3, 1), (3, 2)))
    for N in [(2, 0, -2), (1, 1, -2), (0, 1, -1)]:
        for i in (1, 2):
            b = degree_bounds(g, N, i)
            assert b.upper in _free_below(g, N, i, 4)
