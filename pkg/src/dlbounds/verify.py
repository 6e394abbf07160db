"""Verification sweeps comparing every bound against exact oracles."""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import laurent
from .bounds import count_contingency_tables, ct_bound, flow_factors, laurent_coeff_bound
from .capacity import (
    CapacityInstance,
    capacity_optimize,
    dual_flow_eval,
    edge_capacity_closed_form,
    newton_member,
)
from .flows import Dag, count_flows_exact, enumerate_flows, flow_feasible, suffix_component
from .tableaux import kostka, partitions, compositions, schur_eval
from .verma import (
    VermaInstance,
    build_GJ,
    capacity_instance,
    character_coefficient_exact,
    character_series,
    decompose_J,
    expansion_order,
    lambda_parts,
    verma_bound,
    verma_explicit_bound,
)

SOUND_RTOL = 1e-9
MAX_EXAMPLES = 10


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failure_count: int = 0
    failures: List[dict] = field(default_factory=list)
    elapsed: float = 0.0
    limit: float = math.inf
    notes: dict = field(default_factory=dict)

    @property
    def within_time(self) -> bool:
        return self.elapsed <= self.limit

    @property
    def passed(self) -> bool:
        return self.failure_count == 0 and self.within_time

    def check(self, ok: bool, **details):
        self.checked += 1
        if not ok:
            self.failure_count += 1
            if len(self.failures) < MAX_EXAMPLES:
                self.failures.append(details)

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failure_count": self.failure_count,
            "counterexamples": self.failures,
            "time_limit_seconds": self.limit,
            "within_time": self.within_time,
            "notes": self.notes,
        }


def _sound(bound: float, exact: int) -> bool:
    return bound <= exact + SOUND_RTOL * max(1, exact)


# ---------------------------------------------------------------- graphs


def all_dags(n: int) -> List[Dag]:
    """Every labelled DAG on n vertices."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.append((a, b))
            elif s == 2:
                edges.append((b, a))
        try:
            out.append(Dag(n, tuple(edges)))
        except ValueError:
            continue
    return out


class Canonicalizer:
    """Maps labelled (graph, net-flow) instances to an isomorphism-class key.

    Capacities and flow counts only depend on the class, so sweeps compute
    them once per key.
    """

    def __init__(self):
        self._graphs: Dict[Tuple, Tuple] = {}

    def _graph(self, g: Dag):
        key = (g.n, g.edges)
        if key not in self._graphs:
            best = None
            perms = []
            for p in itertools.permutations(range(1, g.n + 1)):
                pm = dict(zip(range(1, g.n + 1), p))
                e = tuple(sorted((pm[t], pm[h]) for t, h in g.edges))
                if best is None or e < best:
                    best, perms = e, [p]
                elif e == best:
                    perms.append(p)
            self._graphs[key] = (best, perms)
        return self._graphs[key]

    def key(self, g: Dag, N: Sequence[int]):
        canon, perms = self._graph(g)
        best = None
        for p in perms:
            v = [0] * g.n
            for i, x in enumerate(N):
                v[p[i] - 1] = x
            v = tuple(v)
            if best is None or v < best:
                best = v
        return g.n, canon, best


def box_netflows(n: int, r: int):
    """Integer vectors in [-r, r]^n with zero sum."""
    for head in itertools.product(range(-r, r + 1), repeat=n - 1):
        last = -sum(head)
        if -r <= last <= r:
            yield head + (last,)


def random_dag(rng: random.Random, n: int, p: float = 0.5) -> Dag:
    order = list(range(1, n + 1))
    rng.shuffle(order)
    edges = [(order[a], order[b]) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Dag(n, tuple(edges))


def random_netflows(rng: random.Random, g: Dag, r: int, count: int):
    """Half uniform from the box, half net-flows of random integer flows."""
    box = list(box_netflows(g.n, r))
    out = [tuple(v) for v in rng.sample(box, min(count // 2, len(box)))]
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        nf = [0] * g.n
        for t, h in g.edges:
            x = rng.randint(0, 2)
            nf[h - 1] += x
            nf[t - 1] -= x
        if max(map(abs, nf), default=0) <= r:
            out.append(tuple(nf))
    return out


# ---------------------------------------------------------------- suites


def suite_stirling(seed: int = 0) -> SuiteResult:
    """(k/e)^k <= k! <= (k+1)((k+1)/e)^k from the capacity of e^x at k.

    The capacity inf e^x / x^k = (e/k)^k dominates the coefficient 1/k!,
    and capacity * g(k) lower-bounds it.
    """
    res = SuiteResult("stirling", limit=1.0)
    for k in range(1, 21):
        cap = math.exp(k) / k**k
        fact = math.factorial(k)
        lower = 1.0 / cap
        upper = 1.0 / laurent_coeff_bound(cap, [k])
        ref = (k + 1) * ((k + 1) / math.e) ** k
        res.check(
            (fact - lower) / fact >= -1e-12 and (upper - fact) / fact >= -1e-12
            and math.isclose(upper, ref, rel_tol=1e-12),
            k=k, lower=lower, factorial=fact, upper=upper,
        )
    return res


def suite_closed_form(seed: int = 0) -> SuiteResult:
    res = SuiteResult("closed-form", limit=1.0)
    g = Dag(2, ((1, 2),))
    for k in range(1, 11):
        got = capacity_optimize(CapacityInstance(g, (-k, k))).value
        want = float(edge_capacity_closed_form(k))
        res.check(abs(got - want) <= 1e-6 * want, k=k, optimizer=got, closed_form=want)
    return res


def suite_duality(seed: int = 0, max_vertices: int = 4, r: int = 3) -> SuiteResult:
    """Integral flows against the capacity of the flow series.

    Checks that no flow's dual value exceeds the capacity, and that the best
    integral flow reaches it within 1e-4.  ``notes`` also reports the worst
    relative gap between the two.
    """
    res = SuiteResult("duality", limit=120.0)
    canon = Canonicalizer()
    cache = {}
    worst = (0.0, None)
    for n in range(1, max_vertices + 1):
        for g in all_dags(n):
            for N in box_netflows(n, r):
                key = canon.key(g, N)
                if key not in cache:
                    cap = capacity_optimize(CapacityInstance(g, N))
                    best = 0.0
                    over = None
                    for phi in enumerate_flows(g, N):
                        d = dual_flow_eval(g, phi)
                        best = max(best, d)
                        if d > cap.value * (1 + 1e-6) and over is None:
                            over = {e_to_str(e): v for e, v in phi.items()}
                    cache[key] = (cap.value, best, over, N, g)
    for key, (cap, best, over, N, g) in cache.items():
        gap = (cap - best) / cap if cap > 0 else 0.0
        if gap > worst[0]:
            worst = (gap, {"edges": [list(e) for e in g.edges], "netflow": list(N)})
        res.check(
            over is None and abs(best - cap) <= 1e-4 * max(cap, 1e-300),
            edges=[list(e) for e in g.edges], netflow=list(N), capacity=cap,
            best_integral_dual=best, flow_above_capacity=over,
        )
    res.notes["isomorphism_classes"] = len(cache)
    res.notes["worst_relative_gap"] = worst[0]
    res.notes["worst_instance"] = worst[1]
    res.notes["dual_above_capacity"] = sum(1 for v in cache.values() if v[2] is not None)
    return res


def e_to_str(e):
    return f"{e[0]}->{e[1]}"


def suite_flows(seed: int = 0, r: int = 4, n_random: int = 200, per_graph: int = 50) -> SuiteResult:
    """Flow-count bound against exhaustive enumeration."""
    res = SuiteResult("flows", limit=300.0)
    canon = Canonicalizer()
    cache = {}

    def info(g, N):
        key = canon.key(g, N)
        if key not in cache:
            feasible = flow_feasible(g, N)[0]
            exact = count_flows_exact(g, N)
            cap = capacity_optimize(CapacityInstance(g, N))
            cache[key] = (feasible, exact, cap)
        return cache[key]

    def run(g, N):
        feasible, exact, cap = info(g, N)
        fs, _ = flow_factors(g, N)
        prod = Fraction(1)
        for f in fs:
            prod *= f.g
        bound = cap.value * float(prod)
        res.check(
            _sound(bound, exact) and (bound > 0) == feasible and (exact > 0) == feasible,
            edges=[list(e) for e in g.edges], netflow=list(N), bound=bound, exact=exact,
            feasible=feasible, status=cap.status,
        )

    for n in range(1, 5):
        for g in all_dags(n):
            for N in box_netflows(n, r):
                run(g, N)
    rng = random.Random(seed)
    for _ in range(n_random):
        g = random_dag(rng, 5)
        for N in random_netflows(rng, g, r, per_graph):
            run(g, N)
    res.notes["isomorphism_classes"] = len(cache)
    res.notes["boundary_status"] = sum(1 for v in cache.values() if v[2].status == "boundary")
    return res


def random_margins(rng: random.Random, max_len: int = 4, max_total: int = 12):
    n = rng.randint(1, max_len)
    m = rng.randint(1, max_len)
    total = rng.randint(0, max_total)

    def comp(k):
        cuts = sorted(rng.randint(0, total) for _ in range(k - 1))
        return [b - a for a, b in zip([0] + cuts, cuts + [total])]

    return tuple(sorted(comp(n), reverse=True)), tuple(comp(m))


def suite_ct(seed: int = 0, count: int = 200) -> SuiteResult:
    res = SuiteResult("ct", limit=60.0)
    spot = count_contingency_tables((2, 1), (1, 1, 1))
    res.check(spot == 3, spot="CT((2,1),(1,1,1))", got=spot)
    rng = random.Random(seed)
    for _ in range(count):
        alpha, beta = random_margins(rng)
        rep = ct_bound(alpha, beta, with_exact=True)
        res.check(_sound(rep.bound, rep.exact), alpha=list(alpha), beta=list(beta),
                  bound=rep.bound, exact=rep.exact)
    return res


def verma_instances(n: int, max_entry: int = 3, r: int = 4, schur_vars: str = "as_stated"):
    """All (J, lambda) with entries <= max_entry and every mu_exponent in
    [-r, r]^(n+1) of the right total."""
    for size in range(n + 1):
        for J in itertools.combinations(range(1, n + 1), size):
            J = frozenset(J)
            for lam in itertools.product(range(max_entry + 1), repeat=n + 1):
                if any(lam[i - 1] < lam[i] for i in J):
                    continue
                probe = VermaInstance(n, J, lam, _any_mu(n, J, lam), schur_vars)
                total = sum(sum(p) for p in lambda_parts(probe))
                mus = [mu for mu in itertools.product(range(-r, r + 1), repeat=n + 1) if sum(mu) == total]
                yield J, lam, mus


def _any_mu(n, J, lam):
    runs, _ = decompose_J(n, J)
    total = sum(lam[i - 1] - lam[run[-1]] for run in runs for i in run)
    return (total,) + (0,) * n


def suite_verma(seed: int = 0, n: int = 3, schur_vars: str = "as_stated", factor_range: str = "proof",
                expansion_n: int = 2) -> SuiteResult:
    res = SuiteResult("verma", limit=300.0)
    cache = {}
    flow_counts: Dict[frozenset, dict] = {}
    for J, lam, mus in verma_instances(n, schur_vars=schur_vars):
        for mu in mus:
            inst = VermaInstance(n, J, lam, mu, schur_vars)
            key = (J, tuple(lambda_parts(inst)), mu)
            if key not in cache:
                counts = flow_counts.setdefault(J, {})
                exact = character_coefficient_exact(inst, counts=counts)
                rep = verma_bound(inst, factor_range=factor_range)
                member, cert = newton_member(capacity_instance(inst))
                explicit = None
                if member:
                    flow, contents = cert
                    nu = [0] * (n + 1)
                    for f, c in zip(capacity_instance(inst).schur_parts, contents):
                        for v, x in zip(f.variables, c):
                            nu[v - 1] = x
                    explicit = verma_explicit_bound(inst, nu, flow, factor_range).bound
                cache[key] = (exact, rep.bound, explicit, rep.capacity.status)
            exact, bound, explicit, status = cache[key]
            ok = _sound(bound, exact)
            ok = ok and (explicit is None or explicit <= bound * (1 + 1e-6) + 1e-300)
            ok = ok and (bound > 0) == (exact > 0)
            res.check(ok, J=sorted(J), lam=list(lam), mu=list(mu), bound=bound, exact=exact,
                      explicit=explicit, status=status)
    res.notes["distinct_instances"] = len(cache)
    # exact oracle against a direct truncated expansion
    series_checked = 0
    for m in range(1, expansion_n + 1):
        seen = set()
        for J, lam, mus in verma_instances(m, schur_vars=schur_vars):
            probe = VermaInstance(m, J, lam, _any_mu(m, J, lam), schur_vars)
            pkey = (J, tuple(lambda_parts(probe)))
            if pkey in seen or not mus:
                continue
            seen.add(pkey)
            insts = [VermaInstance(m, J, lam, mu, schur_vars) for mu in mus]
            order = max(expansion_order(i) for i in insts)
            series = character_series(insts[0], order)
            for inst in insts:
                a = character_coefficient_exact(inst)
                b = series.coeff(inst.mu_exponent)
                series_checked += 1
                res.check(a == b, check="expansion", n=m, J=sorted(J), lam=list(lam),
                          mu=list(inst.mu_exponent), oracle=a, expansion=str(b))
    res.notes["expansion_checked"] = series_checked
    return res


def _poly_project_support(g: Dag, gamma: Sequence[int]):
    n = g.n
    T = sum(gamma)
    p = laurent.SparsePoly.monomial(gamma)
    for t, h in g.edges:
        terms = {}
        for k in range(T + 1):
            e = [0] * n
            e[h - 1] += k
            e[t - 1] -= k
            terms[tuple(e)] = 1
        p = laurent.poly_project(p * laurent.SparsePoly(n, terms, degree=0))
    return p.support()


def slice_sequence(g: Dag, x: Sequence[float], kmax: int = 8, terms: int = 400):
    """Coefficients of x_n^k (|k| <= kmax) in the flow series, evaluated at
    the other coordinates of ``x``.

    The factor from edges not touching n is a common positive constant and
    is dropped; so is a geometric rescaling.  Neither affects log-concavity.
    """
    n = g.n
    # measured in units of x_n, i.e. the k-th entry is scaled by x_n^k
    inn = [x[n - 1] / x[t - 1] for t in g.in_nbrs[n]]
    out = [x[h - 1] / x[n - 1] for h in g.out_nbrs[n]]

    def complete(vals):
        series = np.zeros(terms)
        series[0] = 1.0
        for v in vals:
            geo = v ** np.arange(terms)
            series = np.convolve(series, geo)[:terms]
        return series

    A = complete(inn)
    B = complete(out)
    seq = []
    for k in range(-kmax, kmax + 1):
        if k >= 0:
            seq.append(float(np.dot(A[k:], B[: terms - k])))
        else:
            seq.append(float(np.dot(A[: terms + k], B[-k:])))
    return seq


def _float_log_concave(seq, rtol=1e-9):
    nz = [k for k, v in enumerate(seq) if v > 0]
    if not nz:
        return True
    if any(seq[k] <= 0 for k in range(nz[0], nz[-1] + 1)):
        return False
    return all(seq[k] ** 2 >= seq[k - 1] * seq[k + 1] * (1 - rtol) for k in range(1, len(seq) - 1))


def _interior_point(rng: random.Random, g: Dag, ratio: float = 0.7):
    """A point with x_h / x_t <= ratio on every edge."""
    y = [0.0] * g.n
    for v in reversed(g.topological_order):
        lo = max((y[h - 1] for h in g.out_nbrs[v]), default=None)
        base = 0.0 if lo is None else lo - math.log(ratio)
        y[v - 1] = base + rng.uniform(0.0, 1.0)
    return [math.exp(v) for v in y]


def suite_structural(seed: int = 0, count: int = 50) -> SuiteResult:
    res = SuiteResult("structural", limit=60.0)
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(2, 4)
        g = random_dag(rng, n, 0.6)
        gamma = tuple(rng.randint(0, 2) for _ in range(n))
        if sum(gamma) == 0:
            gamma = (1,) + gamma[1:]
        chk = laurent.is_m_convex(_poly_project_support(g, gamma))
        res.check(chk.ok, check="m-convex", edges=[list(e) for e in g.edges], gamma=list(gamma),
                  witness=str(chk.witness))
    for _ in range(count):
        n = rng.randint(2, 5)
        g = random_dag(rng, n, 0.6)
        x = _interior_point(rng, g)
        seq = slice_sequence(g, x)
        res.check(_float_log_concave(seq), check="slice", edges=[list(e) for e in g.edges],
                  point=x, sequence=seq)
    n = 4
    for size in range(n + 1):
        for J in itertools.combinations(range(1, n + 1), size):
            g = build_GJ(n, J)
            comp = [i for i in range(1, n + 1) if i not in J]
            top = max(comp, default=0)
            for i in range(1, n + 2):
                want = frozenset(range(i, n + 2)) if i <= top else frozenset({i})
                res.check(suffix_component(g, i) == want, check="suffix", J=list(J), i=i)
            mu = tuple(rng.randint(-4, 4) for _ in range(n + 1))
            l = sum(mu)
            for i in range(1, top + 1):
                m = abs(sum(mu[k - 1] for k in suffix_component(g, i)))
                res.check(m == abs(l - sum(mu[: i - 1])), check="sigma", J=list(J), i=i, mu=list(mu))
    return res


def suite_combinatorial(seed: int = 0) -> SuiteResult:
    res = SuiteResult("combinatorial", limit=30.0)
    for size in range(0, 7):
        for lam in partitions(size):
            res.check(kostka(lam, lam) == 1, check="K_lam_lam", lam=list(lam))
            for m in range(1, 5):
                total = sum(kostka(lam, nu) for nu in compositions(size, m))
                val = schur_eval(lam, [1] * m)
                res.check(val == total, check="schur_ones", lam=list(lam), m=m, schur=str(val), kostka_sum=total)
    res.check(kostka((2, 1), (1, 1, 1)) == 2, check="K_21_111")
    return res


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "stirling": suite_stirling,
    "closed-form": suite_closed_form,
    "duality": suite_duality,
    "flows": suite_flows,
    "ct": suite_ct,
    "verma": suite_verma,
    "structural": suite_structural,
    "combinatorial": suite_combinatorial,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    res = SUITES[name](seed=seed)
    res.elapsed = time.perf_counter() - t0
    return res
