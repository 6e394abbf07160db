"""Directed acyclic graphs, integer flows and the flow generating series.

Vertices are labelled 1..n.  An edge ``(t, h)`` carries flow from its tail
``t`` to its head ``h``; the net-flow at a vertex is inflow minus outflow.
The flow series of G is the product over edges of 1/(1 - x_h/x_t), whose
coefficient at x^N counts the nonnegative integer flows with net-flow N.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple

import networkx as nx

Edge = Tuple[int, int]

DEFAULT_BUDGET = 10**8


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class BudgetExceeded(RuntimeError):
    """An enumeration visited more nodes than allowed."""

    def __init__(self, budget: int):
        super().__init__(f"enumeration budget of {budget} nodes exhausted")
        self.budget = budget


@dataclass(frozen=True)
class Dag:
    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple(sorted((int(t), int(h)) for t, h in self.edges))
        if self.n < 0:
            raise DomainError("vertex count must be nonnegative")
        if len(set(edges)) != len(edges):
            raise DomainError("parallel duplicate edges")
        for t, h in edges:
            if not (1 <= t <= self.n and 1 <= h <= self.n):
                raise DomainError(f"edge {(t, h)} has an endpoint outside 1..{self.n}")
            if t == h:
                raise DomainError(f"self-loop at vertex {t}")
        object.__setattr__(self, "edges", edges)
        if self._topological_order() is None:
            raise DomainError("graph has a directed cycle")

    def _topological_order(self) -> Optional[Tuple[int, ...]]:
        indeg = {v: 0 for v in range(1, self.n + 1)}
        for _, h in self.edges:
            indeg[h] += 1
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for h in self.out_nbrs[v]:
                indeg[h] -= 1
                if indeg[h] == 0:
                    ready.append(h)
            ready.sort()
        return tuple(order) if len(order) == self.n else None

    @cached_property
    def out_nbrs(self) -> Dict[int, Tuple[int, ...]]:
        out = {v: [] for v in range(1, self.n + 1)}
        for t, h in self.edges:
            out[t].append(h)
        return {v: tuple(hs) for v, hs in out.items()}

    @cached_property
    def in_nbrs(self) -> Dict[int, Tuple[int, ...]]:
        inn = {v: [] for v in range(1, self.n + 1)}
        for t, h in self.edges:
            inn[h].append(t)
        return {v: tuple(ts) for v, ts in inn.items()}

    @cached_property
    def topological_order(self) -> Tuple[int, ...]:
        return self._topological_order()

    @cached_property
    def depth(self) -> Dict[int, int]:
        """Length of the longest directed path ending at each vertex."""
        d = {}
        for v in self.topological_order:
            d[v] = max((d[t] + 1 for t in self.in_nbrs[v]), default=0)
        return d

    def relabel(self, perm: Mapping[int, int]) -> "Dag":
        return Dag(self.n, tuple((perm[t], perm[h]) for t, h in self.edges))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "Dag":
        return cls(int(obj["n"]), tuple(tuple(e) for e in obj["edges"]))


def as_netflow(g: Dag, target: Sequence[int]) -> Tuple[int, ...]:
    """Validate a net-flow vector for ``g`` and return it as a tuple."""
    if isinstance(target, Mapping):
        target = target["values"]
    vals = tuple(int(v) for v in target)
    if len(vals) != g.n:
        raise DomainError(f"net-flow has length {len(vals)}, graph has {g.n} vertices")
    if sum(vals) != 0:
        raise DomainError("net-flow entries must sum to zero")
    return vals


def netflow(g: Dag, flow: Mapping[Edge, object]) -> list:
    """Net-flow (inflow minus outflow) of an edge assignment."""
    edges = set(g.edges)
    out = [0] * g.n
    for e, v in flow.items():
        e = tuple(e)
        if e not in edges:
            raise DomainError(f"{e} is not an edge of the graph")
        if v < 0:
            raise DomainError(f"negative flow {v} on edge {e}")
        t, h = e
        out[h - 1] += v
        out[t - 1] -= v
    return out


def terminal_vertices(g: Dag) -> frozenset:
    return frozenset(v for v in range(1, g.n + 1) if not g.out_nbrs[v])


def _check_vertex(g: Dag, i: int):
    if not 1 <= i <= g.n:
        raise DomainError(f"vertex {i} out of range 1..{g.n}")


def suffix_component(g: Dag, i: int) -> frozenset:
    """Component of ``i`` in the undirected subgraph induced on {i, ..., n}."""
    _check_vertex(g, i)
    seen = {i}
    stack = [i]
    while stack:
        v = stack.pop()
        for w in g.out_nbrs[v] + g.in_nbrs[v]:
            if w >= i and w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


@dataclass(frozen=True)
class DegreeBounds:
    upper: Optional[int]
    lower: Optional[int]

    def candidates(self):
        return [b for b in (self.upper, self.lower) if b is not None]


def degree_bounds(g: Dag, target: Sequence[int], i: int) -> DegreeBounds:
    """Bounds on the net-flow at ``i`` over flows whose net-flow is fixed on
    the vertices above ``i`` and free below it.

    Let C be the suffix component of ``i`` and s = -(sum of N over C - {i}).
    The edges between C and {1, ..., i-1} decide which bounds hold:

    * if none of them points into C, the total net-flow of C is <= 0, so
      s is an upper bound;
    * if none points out of C, s is a lower bound;
    * a vertex without in-edges has net-flow <= 0, a terminal vertex >= 0.

    When edges run from larger to smaller labels this is exactly "upper bound
    s, and lower bound 0 at terminal vertices".
    """
    _check_vertex(g, i)
    N = as_netflow(g, target)
    comp = suffix_component(g, i)
    s = -sum(N[j - 1] for j in comp if j != i)
    into = any(t < i for v in comp for t in g.in_nbrs[v])
    outof = any(h < i for v in comp for h in g.out_nbrs[v])
    uppers = []
    lowers = []
    if not into:
        uppers.append(s)
    if not g.in_nbrs[i]:
        uppers.append(0)
    if not outof:
        lowers.append(s)
    if not g.out_nbrs[i]:
        lowers.append(0)
    return DegreeBounds(min(uppers) if uppers else None, max(lowers) if lowers else None)


def _flow_search(g: Dag, target: Sequence[int], budget: int, collect: bool):
    """Depth-first search over edge values, edges in (tail, head) order.

    Yields complete assignments when ``collect`` is true; otherwise yields
    ``None`` once per flow.  An edge whose removal leaves one of its endpoints
    without unassigned edges gets its value forced.
    """
    N = as_netflow(g, target)
    edges = g.edges
    m = len(edges)
    B = sum(v for v in N if v > 0)
    # remaining[v] = number of unassigned edges at v after assigning edges[:k]
    rem_in = [[0] * (g.n + 1) for _ in range(m + 1)]
    rem_out = [[0] * (g.n + 1) for _ in range(m + 1)]
    for k in range(m, -1, -1):
        for t, h in edges[k:]:
            rem_out[k][t] += 1
            rem_in[k][h] += 1
    # residual[v] = target minus net-flow contributed by assigned edges
    residual = [0] + list(N)
    values = [0] * m
    visited = 0

    def feasible_after(k):
        for v in (edges[k][0], edges[k][1]):
            r = residual[v]
            if rem_in[k + 1][v] == 0 and r > 0:
                return False
            if rem_out[k + 1][v] == 0 and r < 0:
                return False
        return True

    def rec(k):
        nonlocal visited
        visited += 1
        if visited > budget:
            raise BudgetExceeded(budget)
        if k == m:
            if all(r == 0 for r in residual[1:]):
                yield dict(zip(edges, values)) if collect else None
            return
        t, h = edges[k]
        if rem_in[k + 1][h] == 0 and rem_out[k + 1][h] == 0:
            choices = [residual[h]]
        elif rem_in[k + 1][t] == 0 and rem_out[k + 1][t] == 0:
            choices = [-residual[t]]
        else:
            choices = range(B + 1)
        for x in choices:
            if x < 0 or x > B:
                continue
            residual[h] -= x
            residual[t] += x
            if feasible_after(k):
                values[k] = x
                yield from rec(k + 1)
            residual[h] += x
            residual[t] -= x

    # vertices untouched by any edge must already balance
    isolated_ok = all(N[v - 1] == 0 for v in range(1, g.n + 1) if not g.in_nbrs[v] and not g.out_nbrs[v])
    if isolated_ok:
        yield from rec(0)


def enumerate_flows(g: Dag, target: Sequence[int], budget: int = DEFAULT_BUDGET) -> Iterator[Dict[Edge, int]]:
    """All nonnegative integer flows on ``g`` with the given net-flow."""
    return _flow_search(g, target, budget, collect=True)


def count_flows_exact(g: Dag, target: Sequence[int], budget: int = DEFAULT_BUDGET) -> int:
    """Exact number of integer flows with net-flow ``target``.

    Raises BudgetExceeded rather than returning a partial count.
    """
    return sum(1 for _ in _flow_search(g, target, budget, collect=False))


def _transshipment_network(g: Dag, target: Sequence[int]) -> nx.DiGraph:
    N = target
    net = nx.DiGraph()
    net.add_nodes_from(["s", "t"])
    net.add_nodes_from(range(1, g.n + 1))
    for t, h in g.edges:
        net.add_edge(t, h)  # no capacity attribute: unbounded
    for v in range(1, g.n + 1):
        if N[v - 1] < 0:
            net.add_edge("s", v, capacity=-N[v - 1])
        elif N[v - 1] > 0:
            net.add_edge(v, "t", capacity=N[v - 1])
    return net


def flow_feasible(g: Dag, target: Sequence[int], mode: str = "integral"):
    """Does a nonnegative flow with net-flow ``target`` exist?

    Returns ``(feasible, certificate)``.  The certificate is an edge -> value
    map with ints (``mode="integral"``) or Fractions (``"fractional"``), or
    None when infeasible.  The answer itself does not depend on ``mode``.
    """
    if mode not in ("integral", "fractional"):
        raise ValueError(f"unknown mode {mode!r}")
    N = as_netflow(g, target)
    supply = sum(-v for v in N if v < 0)
    if supply == 0:
        cert = {e: 0 for e in g.edges}
    else:
        net = _transshipment_network(g, N)
        value, fd = nx.maximum_flow(net, "s", "t")
        if value != supply:
            return False, None
        cert = {(t, h): int(fd[t][h]) for t, h in g.edges}
    if mode == "fractional":
        cert = {e: Fraction(v) for e, v in cert.items()}
    return True, cert


def eval_flow_series(g: Dag, x: Sequence):
    """Closed form of the flow series at a point of its domain.

    Exact (Fraction) if every coordinate is rational, float otherwise.
    """
    if len(x) != g.n:
        raise DomainError(f"point has length {len(x)}, graph has {g.n} vertices")
    exact = all(isinstance(v, Rational) for v in x)
    pt = [Fraction(v) if exact else float(v) for v in x]
    if any(v <= 0 for v in pt):
        raise DomainError("point must have positive coordinates")
    val = Fraction(1) if exact else 1.0
    for t, h in g.edges:
        if pt[t - 1] <= pt[h - 1]:
            raise DomainError(f"edge {(t, h)} needs x_{t} > x_{h}")
        val = val / (1 - pt[h - 1] / pt[t - 1])
    return val
