import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import null_space
from scipy.optimize import minimize

from dlbounds.capacity import (
    CapacityInstance,
    SchurFactor,
    capacity_optimize,
    capacity_split_lower_bound,
    dual_flow_eval,
    edge_capacity_closed_form,
    edge_factor,
    log_objective,
    newton_member,
    support_member,
)
from dlbounds.flows import Dag, DomainError, count_flows_exact, enumerate_flows, flow_feasible
from dlbounds.tableaux import compositions, kostka, schur_eval

EDGE = Dag(2, ((1, 2),))
K3 = Dag(3, ((2, 1), (3, 1), (3, 2)))


def cap(g, N, **kw):
    return capacity_optimize(CapacityInstance(g, tuple(N)), **kw)


def real_flow_sup(g, N):
    """Independent oracle: maximise sum log h(phi_e) over real flows,
    parametrised as phi = phi0 + Z w with Z spanning the cycle space."""
    m = len(g.edges)
    A = np.zeros((g.n, m))
    for k, (t, h) in enumerate(g.edges):
        A[h - 1, k] += 1
        A[t - 1, k] -= 1
    ok, cert = flow_feasible(g, N)
    phi0 = np.array([cert[e] for e in g.edges], float)
    Z = null_space(A)
    if Z.shape[1] == 0:
        return math.exp(sum(math.log(edge_factor(a)) for a in phi0))

    def neg(w):
        phi = np.maximum(phi0 + Z @ w, 0)
        return -sum((a + 1) * math.log1p(a) - (a * math.log(a) if a > 0 else 0.0) for a in phi)

    # start from the average integral flow, which avoids the kink at phi_e = 0
    flows = [np.array([f[e] for e in g.edges], float) for f in enumerate_flows(g, N)]
    w0 = Z.T @ (np.mean(flows, axis=0) - phi0)
    res = minimize(neg, w0, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda w: phi0 + Z @ w}],
                   options={"ftol": 1e-15, "maxiter": 2000})
    assert res.status in (0, 8, 9), res.message
    return math.exp(-res.fun)


@st.composite
def small_instances(draw, max_n=4, r=3):
    n = draw(st.integers(2, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=len(pairs)))
    perm = draw(st.permutations(range(1, n + 1)))
    edges = tuple(sorted((perm[i - 1], perm[j - 1]) for i, j in chosen))
    head = draw(st.lists(st.integers(-r, r), min_size=n - 1, max_size=n - 1))
    return Dag(n, edges), tuple(head) + (-sum(head),)


# --- closed forms


@pytest.mark.parametrize("k", range(1, 11))
def test_single_edge_closed_form(k):
    res = cap(EDGE, (-k, k))
    exact = (k + 1) ** (k + 1) / k**k
    assert res.status == "attained"
    assert abs(res.value - exact) <= 1e-9 * exact


def test_spec_examples():
    assert abs(cap(EDGE, (-1, 1)).value - 4.0) < 1e-6
    assert abs(cap(EDGE, (-2, 2)).value - 6.75) < 1e-6
    res = cap(EDGE, (1, -1))
    assert res.status == "zero" and res.value == 0


def test_edge_capacity_closed_form():
    assert edge_capacity_closed_form(0, 0) == 1
    assert edge_capacity_closed_form(1, 0) == 4
    assert edge_capacity_closed_form(3, 1) == Fraction(27, 4)
    with pytest.raises(DomainError):
        edge_capacity_closed_form(0, 1)


def test_dual_flow_eval_examples():
    assert dual_flow_eval(K3, {}) == 1
    assert dual_flow_eval(EDGE, {(1, 2): 1}) == 4
    assert dual_flow_eval(EDGE, {(1, 2): 2}) == 6.75
    assert abs(dual_flow_eval(EDGE, {(1, 2): 0.5}) - edge_factor(0.5)) < 1e-15
    assert abs(edge_factor(0.5) - 1.5**1.5 / 0.5**0.5) < 1e-12
    with pytest.raises(DomainError):
        dual_flow_eval(EDGE, {(2, 1): 1})


def test_zero_target_on_edgeless_graph():
    res = cap(Dag(3, ()), (0, 0, 0))
    assert res.value == pytest.approx(1.0)


def test_degree_mismatch():
    with pytest.raises(DomainError):
        cap(EDGE, (0, 1))
    with pytest.raises(DomainError):
        CapacityInstance(EDGE, (0, 0, 0))


# --- membership


def test_support_member_examples():
    assert support_member(EDGE, (-3, 3))
    assert not support_member(EDGE, (0, 1))
    assert support_member(K3, (2, 0, -2))


@settings(max_examples=200, deadline=None)
@given(small_instances())
def test_zero_iff_no_flow(inst):
    g, N = inst
    res = cap(g, N)
    assert (res.status == "zero") == (count_flows_exact(g, N) == 0)
    if res.status != "zero":
        assert res.value >= 1 - 1e-9


def _brute_schur_member(inst):
    part = inst.schur_parts[0]
    for nu in compositions(part.size, len(part.variables)):
        if kostka(part.partition, nu) == 0:
            continue
        rest = list(inst.target)
        for v, c in zip(part.variables, nu):
            rest[v - 1] -= c
        if count_flows_exact(inst.graph, rest) > 0:
            return True
    return False


@settings(max_examples=150, deadline=None)
@given(
    st.sampled_from([(1,), (2,), (1, 1), (2, 1), (1, 1, 1), (3, 1)]),
    st.sampled_from([(1, 2), (2, 3), (1, 2, 3), (1, 3)]),
    st.lists(st.integers(-2, 3), min_size=3, max_size=3),
)
def test_schur_membership_matches_enumeration(lam, variables, alpha):
    g = Dag(3, ((2, 1), (3, 2)))
    alpha = tuple(alpha)
    if sum(alpha) != sum(lam):
        return
    inst = CapacityInstance(g, alpha, (SchurFactor(lam, variables),))
    member, cert = newton_member(inst)
    assert member == _brute_schur_member(inst)
    if member:
        flow, (nu,) = cert
        assert kostka(lam, nu) > 0


# --- optimizer invariants


@settings(max_examples=40, deadline=None)
@given(small_instances(), st.data())
def test_pin_invariance(inst, data):
    g, N = inst
    base = cap(g, N)
    pin = data.draw(st.integers(1, g.n))
    other = cap(g, N, pin=pin)
    assert other.value == pytest.approx(base.value, rel=1e-8, abs=1e-12)


def _domain_point(rng, g):
    rank = {v: k for k, v in enumerate(g.topological_order)}
    return np.array([-2.0 * rank[v] + rng.uniform(-0.5, 0.5) for v in range(1, g.n + 1)])


@pytest.mark.parametrize("seed", range(5))
def test_objective_is_convex_along_segments(seed):
    rng = random.Random(seed)
    g = Dag(4, ((1, 2), (1, 3), (2, 4), (3, 4), (1, 4)))
    F = log_objective(CapacityInstance(g, (-3, 1, 0, 2)))
    for _ in range(20):
        a, b = _domain_point(rng, g), _domain_point(rng, g)
        for t in (0.25, 0.5, 0.75):
            assert F(t * a + (1 - t) * b) <= t * F(a) + (1 - t) * F(b) + 1e-9


def test_objective_is_infinite_off_domain():
    F = log_objective(CapacityInstance(EDGE, (-1, 1)))
    assert F(np.array([0.0, 0.0])) == math.inf
    assert F(np.array([0.0, 1.0])) == math.inf
    assert math.isfinite(F(np.array([1.0, 0.0])))


@settings(max_examples=60, deadline=None)
@given(small_instances(max_n=3))
def test_weak_duality(inst):
    g, N = inst
    res = cap(g, N)
    for phi in enumerate_flows(g, N):
        assert dual_flow_eval(g, phi) <= res.value * (1 + 1e-6)


@pytest.mark.parametrize("g, N", [
    (K3, (2, 0, -2)),
    (K3, (1, 1, -2)),
    (Dag(3, ((1, 2), (3, 2))), (-1, 3, -2)),
    (Dag(4, ((4, 1), (1, 3), (4, 2), (2, 3), (4, 3))), (0, 0, 1, -1)),
    (Dag(4, ((2, 1), (3, 1), (4, 1), (3, 2), (4, 2), (4, 3))), (2, 1, -1, -2)),
])
def test_capacity_equals_real_flow_supremum(g, N):
    assert cap(g, N).value == pytest.approx(real_flow_sup(g, N), rel=1e-6)


def test_integral_flows_can_fall_short_of_capacity():
    best = max(dual_flow_eval(K3, phi) for phi in enumerate_flows(K3, (2, 0, -2)))
    value = cap(K3, (2, 0, -2)).value
    assert best == 64
    assert value == pytest.approx(real_flow_sup(K3, (2, 0, -2)), rel=1e-6)
    assert value > 75


def test_gradient_method_agrees_on_easy_instances():
    for k in (1, 2, 5):
        a = cap(EDGE, (-k, k), method="gradient")
        b = cap(EDGE, (-k, k))
        assert a.value == pytest.approx(b.value, rel=1e-6)
    with pytest.raises(ValueError):
        cap(EDGE, (-1, 1), method="bfgs")


def test_boundary_status_when_infimum_at_infinity():
    # target on a face: the optimum sends an edge ratio to zero
    res = cap(K3, (1, 0, -1))
    assert res.status in ("attained", "boundary")
    assert res.value == pytest.approx(real_flow_sup(K3, (1, 0, -1)), rel=1e-6)


def test_result_json():
    obj = cap(EDGE, (-1, 1)).to_json()
    assert set(obj) == {"value", "status", "iterations", "gradient_norm"}


# --- schur factors


def _schur_capacity_oracle(lam, alpha):
    """Direct minimisation of log s_lam(e^y) - <alpha, y> with tableau sums."""
    n = len(alpha)

    def F(z):
        y = np.concatenate([z, [0.0]])
        return math.log(schur_eval(lam, list(np.exp(y)))) - float(np.dot(alpha, y))

    res = minimize(F, np.zeros(n - 1), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    return math.exp(res.fun)


@pytest.mark.parametrize("lam, alpha", [((2, 1), (1, 1, 1)), ((2,), (1, 1)), ((3, 1), (2, 1, 1)), ((2, 2), (2, 1, 1))])
def test_pure_schur_capacity(lam, alpha):
    n = len(alpha)
    inst = CapacityInstance(Dag(n, ()), alpha, (SchurFactor(lam, tuple(range(1, n + 1))),))
    assert capacity_optimize(inst).value == pytest.approx(_schur_capacity_oracle(lam, alpha), rel=1e-6)
    # the capacity is at least the coefficient
    assert capacity_optimize(inst).value >= kostka(lam, alpha) * (1 - 1e-9)


def test_schur_outside_variables_is_zero():
    inst = CapacityInstance(Dag(3, ()), (1, 1, 1), (SchurFactor((2, 1), (1, 2)),))
    assert capacity_optimize(inst).status == "zero"


# --- split lower bound


def test_split_single_factor():
    assert capacity_split_lower_bound([(EDGE, (-1, 1))]) == pytest.approx(4.0, rel=1e-9)
    assert capacity_split_lower_bound([]) == 1.0


def test_split_disjoint_edges_matches_joint():
    g = Dag(4, ((1, 2), (3, 4)))
    joint = cap(g, (-1, 1, -2, 2)).value
    split = capacity_split_lower_bound(
        [(Dag(4, ((1, 2),)), (-1, 1, 0, 0)), (Dag(4, ((3, 4),)), (0, 0, -2, 2))], alpha=(-1, 1, -2, 2)
    )
    assert split == pytest.approx(joint, rel=1e-6)
    assert joint == pytest.approx(27.0, rel=1e-6)


def test_split_with_schur_factor_is_a_lower_bound():
    g = Dag(3, ((2, 1), (3, 2)))
    sf = SchurFactor((2, 1), (1, 2))
    inst = CapacityInstance(g, (2, 2, -1), (sf,))
    joint = capacity_optimize(inst).value
    split = capacity_split_lower_bound([(sf, (2, 1, 0)), (g, (0, 1, -1))], alpha=(2, 2, -1))
    assert split == pytest.approx(kostka((2, 1), (2, 1)) * 4.0, rel=1e-6)
    assert split <= joint * (1 + 1e-9)
    with pytest.raises(DomainError):
        capacity_split_lower_bound([(sf, (2, 1, 0))], alpha=(2, 2, -1))
