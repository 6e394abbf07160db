"""Coefficient lower bounds: capacity times per-coordinate correction factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Mapping, Optional, Sequence, Tuple

from .capacity import CapacityInstance, CapacityResult, capacity_optimize, dual_flow_eval
from .flows import (
    DEFAULT_BUDGET,
    Dag,
    DomainError,
    as_netflow,
    count_flows_exact,
    degree_bounds,
    netflow,
)


def correction_factor(k: int) -> Fraction:
    """g(k) = k^k / (k+1)^(k+1), with 0^0 = 1."""
    k = int(k)
    if k < 0:
        raise DomainError("correction factor needs k >= 0")
    return Fraction(k**k if k else 1, (k + 1) ** (k + 1))


def laurent_coeff_bound(capacity_value: float, factor_specs: Sequence[int]) -> float:
    """capacity_value * prod g(k) over the given distances k."""
    out = Fraction(1)
    for k in factor_specs:
        out *= correction_factor(k)
    return float(capacity_value) * float(out)


@dataclass(frozen=True)
class Factor:
    i: int
    m: int
    g: Fraction

    def to_json(self) -> dict:
        return {"i": self.i, "m": self.m, "g": float(self.g)}


@dataclass
class BoundReport:
    theorem: str
    capacity: Optional[CapacityResult]
    capacity_term: float
    factors: List[Factor]
    bound: float
    exact: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        if self.capacity is not None:
            cap = self.capacity.to_json()
        else:
            cap = {"value": float(self.capacity_term), "status": "explicit"}
        out = {
            "theorem": self.theorem,
            "capacity": cap,
            "factors": [f.to_json() for f in self.factors],
            "bound": float(self.bound),
            "exact": None if self.exact is None else str(self.exact),
        }
        out.update(self.extra)
        return out


def _assemble(theorem, capacity, capacity_term, factors, exact=None, **extra) -> BoundReport:
    prod = Fraction(1)
    for f in factors:
        prod *= f.g
    return BoundReport(theorem, capacity, capacity_term, factors, capacity_term * float(prod), exact, extra)


def _factors_in_labels(g: Dag, N: Sequence[int]) -> Optional[List[Factor]]:
    out = []
    for i in range(2, g.n + 1):
        db = degree_bounds(g, N, i)
        cands = db.candidates()
        if not cands:
            return None
        m = min(abs(b - N[i - 1]) for b in cands)
        out.append(Factor(i, m, correction_factor(m)))
    return out


def flow_factors(g: Dag, target: Sequence[int]) -> Tuple[List[Factor], Tuple[int, ...]]:
    """Correction factors for the flow series of ``g`` at ``target``.

    Factors run over every coordinate but the first in some ordering of the
    vertices.  The given labels are used when each vertex 2..n admits a
    degree bound under them.  Otherwise the vertices are reordered so every
    edge runs from a later to an earlier position, where the bounds always
    exist.  Returns the factors (keyed by original label) and the ordering.
    """
    N = as_netflow(g, target)
    natural = tuple(range(1, g.n + 1))
    fs = _factors_in_labels(g, N)
    if fs is not None:
        return fs, natural
    order = tuple(reversed(g.topological_order))
    pos = {v: k + 1 for k, v in enumerate(order)}
    h = g.relabel(pos)
    Nh = [0] * g.n
    for v, p in pos.items():
        Nh[p - 1] = N[v - 1]
    fs = _factors_in_labels(h, Nh)
    return [Factor(order[f.i - 1], f.m, f.g) for f in fs], order


def dag_flow_bound(
    g: Dag,
    target: Sequence[int],
    with_exact: bool = False,
    tol: float = 1e-9,
    budget: int = DEFAULT_BUDGET,
    capacity: Optional[CapacityResult] = None,
    exact: Optional[int] = None,
) -> BoundReport:
    """Lower bound on the number of integer flows with net-flow ``target``.

    ``capacity`` and ``exact`` may be supplied to reuse earlier results.
    """
    N = as_netflow(g, target)
    if capacity is None:
        capacity = capacity_optimize(CapacityInstance(g, N), tol=tol)
    factors, order = flow_factors(g, N)
    if with_exact and exact is None:
        exact = count_flows_exact(g, N, budget)
    return _assemble("flow", capacity, capacity.value, factors, exact if with_exact else None,
                     vertex_order=list(order))


def explicit_flow_bound(g: Dag, target: Sequence[int], flow: Mapping) -> BoundReport:
    """Same factors as ``dag_flow_bound`` with the capacity replaced by the
    dual value of a given (possibly fractional) flow with that net-flow."""
    N = as_netflow(g, target)
    if netflow(g, flow) != list(N):
        raise DomainError("flow does not have the requested net-flow")
    factors, order = flow_factors(g, N)
    return _assemble("flow-explicit", None, dual_flow_eval(g, flow), factors, vertex_order=list(order))


def bipartite_graph(n_rows: int, n_cols: int) -> Dag:
    """Complete bipartite DAG: column vertices n+j point at every row vertex i."""
    return Dag(n_rows + n_cols, tuple((n_rows + j, i) for j in range(1, n_cols + 1) for i in range(1, n_rows + 1)))


def _check_margins(alpha, beta):
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    if any(v < 0 for v in alpha + beta):
        raise DomainError("margins must be nonnegative")
    if sum(alpha) != sum(beta):
        raise DomainError(f"marginal mismatch: {sum(alpha)} != {sum(beta)}")
    return alpha, beta


def count_contingency_tables(alpha: Sequence[int], beta: Sequence[int]) -> int:
    """Number of nonnegative integer matrices with row sums alpha and column
    sums beta, filled one column at a time over the remaining row sums."""
    alpha, beta = _check_margins(alpha, beta)

    @lru_cache(maxsize=None)
    def rec(j, residual):
        if j == len(beta):
            return 1 if not any(residual) else 0
        total = 0
        for col in _bounded_compositions(beta[j], residual):
            total += rec(j + 1, tuple(r - c for r, c in zip(residual, col)))
        return total

    return rec(0, alpha)


def _bounded_compositions(total, caps):
    if not caps:
        if total == 0:
            yield ()
        return
    rest_cap = sum(caps[1:])
    for first in range(max(0, total - rest_cap), min(total, caps[0]) + 1):
        for rest in _bounded_compositions(total - first, caps[1:]):
            yield (first,) + rest


def ct_bound(
    alpha: Sequence[int],
    beta: Sequence[int],
    with_exact: bool = False,
    tol: float = 1e-9,
    capacity: Optional[CapacityResult] = None,
) -> BoundReport:
    """Lower bound on the contingency tables with margins (alpha, beta).

    Rows are the heads 1..n and columns the tails n+1..n+m of the complete
    bipartite graph.  Row sums must be nonincreasing, which makes g(alpha_i)
    the best factor at row i; every column j contributes g(beta_j).
    """
    alpha, beta = _check_margins(alpha, beta)
    if any(alpha[k] < alpha[k + 1] for k in range(len(alpha) - 1)):
        raise DomainError("row sums must be in nonincreasing order")
    n, m = len(alpha), len(beta)
    g = bipartite_graph(n, m)
    N = alpha + tuple(-b for b in beta)
    if capacity is None:
        capacity = capacity_optimize(CapacityInstance(g, N), tol=tol)
    factors = [Factor(i, alpha[i - 1], correction_factor(alpha[i - 1])) for i in range(2, n + 1)]
    factors += [Factor(n + j, beta[j - 1], correction_factor(beta[j - 1])) for j in range(1, m + 1)]
    exact = count_contingency_tables(alpha, beta) if with_exact else None
    return _assemble("contingency", capacity, capacity.value, factors, exact)
