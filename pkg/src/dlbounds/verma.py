"""Parabolic Verma characters as flow series times Schur polynomials.

For sl_{n+1} and a subset J of the simple roots {1..n}, the relevant series
is f_{G_J} * prod_t s_{lam_t}, where G_J has the edge i -> j (i < j) whenever
the interval [i, j-1] is not contained in J.  All computations take the raw
exponent vector ``mu_exponent`` of that product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .bounds import BoundReport, Factor, _assemble, correction_factor
from .capacity import CapacityInstance, SchurFactor, capacity_optimize, dual_flow_eval
from .flows import DEFAULT_BUDGET, Dag, DomainError, count_flows_exact, netflow, suffix_component
from .laurent import SparsePoly
from .tableaux import Partition, kostka, schur_terms, strip_zeros

SCHUR_VARS = ("as_stated", "extended")
FACTOR_RANGES = ("proof", "stated")


def decompose_J(n: int, J) -> Tuple[List[Tuple[int, ...]], List[int]]:
    """Maximal runs of J and the complement points.

    With J^c = {i_1 < ... < i_r}, i_0 = 0 and i_{r+1} = n+1, run t is
    [i_t + 1, i_{t+1} - 1]; empty runs are kept so there are always r+1.
    """
    J = set(J)
    if not J <= set(range(1, n + 1)):
        raise DomainError(f"J must be a subset of 1..{n}")
    comp = [i for i in range(1, n + 1) if i not in J]
    cuts = [0] + comp + [n + 1]
    runs = [tuple(range(a + 1, b)) for a, b in zip(cuts, cuts[1:])]
    return runs, comp


def build_GJ(n: int, J) -> Dag:
    J = set(J)
    decompose_J(n, J)
    edges = [
        (i, j)
        for i in range(1, n + 2)
        for j in range(i + 1, n + 2)
        if not set(range(i, j)) <= J
    ]
    return Dag(n + 1, tuple(edges))


@dataclass(frozen=True)
class VermaInstance:
    n: int
    J: frozenset
    lam: Tuple[int, ...]
    mu_exponent: Tuple[int, ...]
    schur_vars: str = "as_stated"
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "J", frozenset(int(j) for j in self.J))
        object.__setattr__(self, "lam", tuple(int(v) for v in self.lam))
        object.__setattr__(self, "mu_exponent", tuple(int(v) for v in self.mu_exponent))
        decompose_J(self.n, self.J)
        if len(self.lam) != self.n + 1 or len(self.mu_exponent) != self.n + 1:
            raise DomainError(f"lambda and mu_exponent need length {self.n + 1}")
        if self.schur_vars not in SCHUR_VARS:
            raise DomainError(f"schur_vars must be one of {SCHUR_VARS}")
        for i in self.J:
            gap = self.lam[i - 1] - self.lam[i]
            if gap < 0 or (self.strict and gap == 0):
                raise DomainError(f"lambda is not J-dominant at {i}")
        size = sum(sum(p) for p in lambda_parts(self))
        if sum(self.mu_exponent) != size:
            raise DomainError(f"mu_exponent sums to {sum(self.mu_exponent)}, expected {size}")

    @property
    def graph(self) -> Dag:
        return build_GJ(self.n, self.J)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "J": sorted(self.J),
            "lambda": list(self.lam),
            "mu_exponent": list(self.mu_exponent),
            "schur_vars": self.schur_vars,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VermaInstance":
        return cls(
            int(obj["n"]),
            frozenset(obj["J"]),
            tuple(obj["lambda"]),
            tuple(obj["mu_exponent"]),
            obj.get("schur_vars", "as_stated"),
            bool(obj.get("strict", False)),
        )


def lambda_parts(inst: VermaInstance) -> List[Partition]:
    """lam_t = (lam_i - lam_{1 + max J_t} : i in J_t) for each run J_t."""
    runs, _ = decompose_J(inst.n, inst.J)
    out = []
    for run in runs:
        if not run:
            out.append(())
            continue
        base = inst.lam[run[-1]]  # lam at index 1 + max(run), 1-based
        part = tuple(inst.lam[i - 1] - base for i in run)
        if any(v < 0 for v in part) or any(part[k] < part[k + 1] for k in range(len(part) - 1)):
            raise DomainError(f"lambda is not J-dominant on {run}")
        out.append(part)
    return out


def schur_factors(inst: VermaInstance) -> List[SchurFactor]:
    """One Schur factor per run, on J_t or on J_t plus the next cut point."""
    runs, _ = decompose_J(inst.n, inst.J)
    out = []
    for run, part in zip(runs, lambda_parts(inst)):
        if not run:
            continue
        vars_ = run + (run[-1] + 1,) if inst.schur_vars == "extended" else run
        lam = part + (0,) if inst.schur_vars == "extended" else part
        out.append(SchurFactor(lam, vars_))
    return out


def capacity_instance(inst: VermaInstance) -> CapacityInstance:
    return CapacityInstance(inst.graph, inst.mu_exponent, tuple(schur_factors(inst)))


def _contents(factors: Sequence[SchurFactor], nvars: int):
    """Joint content vectors with their Kostka weight, as (nu, weight)."""
    per = [schur_terms(f.partition, len(f.variables)) for f in factors]
    for combo in itertools.product(*per):
        nu = [0] * nvars
        weight = 1
        for f, (content, K) in zip(factors, combo):
            for v, c in zip(f.variables, content):
                nu[v - 1] = c
            weight *= K
        yield tuple(nu), weight


def character_coefficient_exact(
    inst: VermaInstance, budget: int = DEFAULT_BUDGET, counts: Optional[Dict] = None
) -> int:
    """Coefficient of x^mu in f_{G_J} * prod s_{lam_t}.

    Sums prod K over joint contents nu times the number of flows on G_J with
    net-flow mu - nu.  ``counts`` may be a shared cache of flow counts keyed
    by net-flow.
    """
    g = inst.graph
    mu = inst.mu_exponent
    if counts is None:
        counts = {}
    total = 0
    for nu, weight in _contents(schur_factors(inst), g.n):
        target = tuple(a - b for a, b in zip(mu, nu))
        if target not in counts:
            counts[target] = count_flows_exact(g, target, budget)
        total += weight * counts[target]
    return total


def _complete_homogeneous(k: int, variables: Sequence[int], nvars: int) -> SparsePoly:
    if k < 0:
        return SparsePoly(nvars, {})
    terms = {}
    for combo in itertools.combinations_with_replacement(variables, k):
        e = [0] * nvars
        for v in combo:
            e[v - 1] += 1
        terms[tuple(e)] = 1
    return SparsePoly(nvars, terms, degree=k)


def _schur_jacobi_trudi(lam: Sequence[int], variables: Sequence[int], nvars: int) -> SparsePoly:
    """s_lam = det(h_{lam_i - i + j}), expanded over permutations."""
    lam = strip_zeros(lam)
    L = len(lam)
    if L == 0:
        return SparsePoly.one(nvars)
    h = {}
    total = SparsePoly(nvars, {})
    for perm in itertools.permutations(range(L)):
        sign = 1
        for a in range(L):
            for b in range(a + 1, L):
                if perm[a] > perm[b]:
                    sign = -sign
        term = SparsePoly.one(nvars)
        for i in range(L):
            k = lam[i] - i + perm[i]
            if k not in h:
                h[k] = _complete_homogeneous(k, variables, nvars)
            term = term * h[k]
            if not term.terms:
                break
        total = total + term * sign
    return total


def character_series(inst: VermaInstance, order: int) -> SparsePoly:
    """f_{G_J} truncated to edge exponents <= order, times the Schur factors
    built from complete homogeneous polynomials."""
    g = inst.graph
    nv = g.n
    p = SparsePoly.one(nv)
    for f in schur_factors(inst):
        p = p * _schur_jacobi_trudi(f.partition, f.variables, nv)
    for t, h in g.edges:
        terms = {}
        for k in range(order + 1):
            e = [0] * nv
            e[h - 1] += k
            e[t - 1] -= k
            terms[tuple(e)] = 1
        p = p * SparsePoly(nv, terms, degree=0)
    return p


def expansion_order(inst: VermaInstance) -> int:
    """Edge-value bound sufficient for reading the mu coefficient exactly."""
    size = sum(f.size for f in schur_factors(inst))
    return sum(max(0, -m) for m in inst.mu_exponent) + size


def character_coefficient_expanded(inst: VermaInstance) -> int:
    """Same coefficient as ``character_coefficient_exact``, read off a direct
    truncated expansion of the product."""
    c = character_series(inst, expansion_order(inst)).coeff(inst.mu_exponent)
    assert c.denominator == 1
    return int(c)


def verma_factors(inst: VermaInstance, factor_range: str = "proof") -> List[Factor]:
    """g(|m_i|) with m_i the sum of mu over the suffix component of i.

    Every edge of G_J increases the label, so
    -sum_{C_i - {i}} mu bounds the x_i-degree from below.
    """
    if factor_range not in FACTOR_RANGES:
        raise DomainError(f"factor_range must be one of {FACTOR_RANGES}")
    g = inst.graph
    mu = inst.mu_exponent
    rng = range(2, inst.n + 2) if factor_range == "proof" else range(1, inst.n + 1)
    out = []
    for i in rng:
        m = abs(sum(mu[k - 1] for k in suffix_component(g, i)))
        out.append(Factor(i, m, correction_factor(m)))
    return out


def verma_bound(
    inst: VermaInstance,
    with_exact: bool = False,
    factor_range: str = "proof",
    tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
    capacity=None,
    exact: Optional[int] = None,
) -> BoundReport:
    if capacity is None:
        capacity = capacity_optimize(capacity_instance(inst), tol=tol)
    factors = verma_factors(inst, factor_range)
    if with_exact and exact is None:
        exact = character_coefficient_exact(inst, budget)
    return _assemble("verma", capacity, capacity.value, factors, exact if with_exact else None,
                     factor_range=factor_range, schur_vars=inst.schur_vars)


def verma_explicit_bound(
    inst: VermaInstance, nu: Sequence[int], flow: Mapping, factor_range: str = "proof"
) -> BoundReport:
    """Bound from a content vector nu and a flow with net-flow mu - nu:
    dual value of the flow times prod K_{lam_t, nu_t} times the factors."""
    g = inst.graph
    nu = tuple(int(v) for v in nu)
    if len(nu) != g.n or any(v < 0 for v in nu):
        raise DomainError("nu must be a nonnegative vector of length n+1")
    factors = schur_factors(inst)
    covered = {v for f in factors for v in f.variables}
    if any(nu[v - 1] for v in range(1, g.n + 1) if v not in covered):
        raise DomainError("nu must vanish outside the Schur variables")
    K = 1
    for f in factors:
        part = [nu[v - 1] for v in f.variables]
        if sum(part) != f.size:
            raise DomainError(f"nu restricted to {f.variables} must sum to {f.size}")
        K *= kostka(f.partition, part)
    want = [a - b for a, b in zip(inst.mu_exponent, nu)]
    if netflow(g, flow) != want:
        raise DomainError("flow does not have net-flow mu - nu")
    term = dual_flow_eval(g, flow) * K
    return _assemble("verma-explicit", None, term, verma_factors(inst, factor_range),
                     factor_range=factor_range, schur_vars=inst.schur_vars)
