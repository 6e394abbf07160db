"""Capacity of flow series, optionally multiplied by Schur polynomials.

For p = f_G * prod_t s_{lam_t}(x_{V_t}) and an exponent vector alpha the
capacity is inf p(x)/x^alpha over the convergence domain.  In log
coordinates y = log x this is the minimum of the convex function

    F(y) = -sum_e log(1 - exp(y_h - y_t)) + sum_t log s_t(exp(y)) - <alpha, y>

over the open polyhedron {y_t > y_h for every edge (t, h)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .flows import Dag, DomainError, flow_feasible, netflow
from .tableaux import as_partition, conjugate, kostka, schur_terms, strip_zeros

ARMIJO = 1e-4
SHRINK = 0.5
STALL_RTOL = 1e-12
STALL_STEPS = 50
POLISH_RTOL = 1e-15

ATTAINED = "attained"
BOUNDARY = "boundary"
ZERO = "zero"


@dataclass(frozen=True)
class SchurFactor:
    """s_partition evaluated at the variables listed (1-based vertex labels)."""

    partition: Tuple[int, ...]
    variables: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "partition", as_partition(self.partition))
        object.__setattr__(self, "variables", tuple(int(v) for v in self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise DomainError("repeated Schur variable")

    @property
    def size(self) -> int:
        return sum(self.partition)


@dataclass(frozen=True)
class CapacityInstance:
    graph: Dag
    target: Tuple[int, ...]
    schur_parts: Tuple[SchurFactor, ...] = ()

    def __post_init__(self):
        target = tuple(int(v) for v in self.target)
        if len(target) != self.graph.n:
            raise DomainError(f"target has length {len(target)}, graph has {self.graph.n} vertices")
        parts = tuple(
            p if isinstance(p, SchurFactor) else SchurFactor(*p) for p in self.schur_parts
        )
        used = set()
        for p in parts:
            for v in p.variables:
                if not 1 <= v <= self.graph.n:
                    raise DomainError(f"Schur variable {v} out of range")
                if v in used:
                    raise DomainError("Schur variable sets must be disjoint")
                used.add(v)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "schur_parts", parts)

    @property
    def kind(self) -> str:
        return "flow-series-times-schur" if self.schur_parts else "flow-series"

    @property
    def degree(self) -> int:
        return sum(p.size for p in self.schur_parts)


@dataclass
class CapacityResult:
    value: float
    status: str
    iterations: int
    gradient_norm: float
    argmin: Optional[np.ndarray] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "status": self.status,
            "iterations": int(self.iterations),
            "gradient_norm": float(self.gradient_norm),
        }


def support_member(g: Dag, alpha: Sequence[int]) -> bool:
    """Is ``alpha`` in the Newton polytope of the flow series of ``g``?"""
    alpha = [int(a) for a in alpha]
    if len(alpha) != g.n or sum(alpha) != 0:
        return False
    return flow_feasible(g, alpha, mode="fractional")[0]


def newton_member(inst: CapacityInstance):
    """Membership of the target in the Newton polytope of the whole product.

    The target must split as (net-flow of a nonnegative flow) + (one content
    vector per Schur factor).  A content nu of shape lam exists iff a 0/1
    matrix with column sums conj(lam) and row sums nu exists, so each column
    of each shape becomes a supply node joined to the factor's variables by
    unit arcs.  One max-flow decides everything.

    Returns ``(member, certificate)`` with certificate ``(flow, contents)``:
    an integer edge flow and, per Schur factor, its content vector.
    """
    g = inst.graph
    alpha = inst.target
    if sum(alpha) != inst.degree:
        return False, None
    if not inst.schur_parts:
        ok, cert = flow_feasible(g, alpha)
        return ok, ((cert, ()) if ok else None)
    net = nx.DiGraph()
    net.add_nodes_from(["s", "t"])
    for t, h in g.edges:
        net.add_edge(("v", t), ("v", h))
    supply = 0
    for k, part in enumerate(inst.schur_parts):
        for c, height in enumerate(conjugate(part.partition)):
            node = ("col", k, c)
            net.add_edge("s", node, capacity=height)
            supply += height
            for v in part.variables:
                net.add_edge(node, ("v", v), capacity=1)
    for v in range(1, g.n + 1):
        a = alpha[v - 1]
        if a < 0:
            net.add_edge("s", ("v", v), capacity=-a)
            supply -= a
        elif a > 0:
            net.add_edge(("v", v), "t", capacity=a)
    if supply == 0:
        return True, ({e: 0 for e in g.edges}, tuple((0,) * len(p.variables) for p in inst.schur_parts))
    value, fd = nx.maximum_flow(net, "s", "t")
    if value != supply:
        return False, None
    flow = {(t, h): int(fd[("v", t)][("v", h)]) for t, h in g.edges}
    contents = []
    for k, part in enumerate(inst.schur_parts):
        nu = [0] * len(part.variables)
        for c in range(len(conjugate(part.partition))):
            for j, v in enumerate(part.variables):
                nu[j] += int(fd[("col", k, c)][("v", v)])
        contents.append(tuple(nu))
    return True, (flow, tuple(contents))


class _Objective:
    """Vectorised F, its gradient and Hessian in log coordinates.

    Given a certificate (flow phi, contents nu) with alpha = netflow(phi) + nu,
    the linear term is distributed over the factors:

        F = sum_e [-log(1 - e^{u_e}) - phi_e u_e] + sum_t log(s_t(e^y) / e^{<nu_t, y>})

    with u_e = y_h - y_t.  Each summand stays small where F does, so there is
    no cancellation between huge terms when the minimiser runs off to
    infinity.  Without a certificate the plain form is used.
    """

    def __init__(self, inst: CapacityInstance, cert=None):
        g = inst.graph
        self.n = g.n
        self.tails = np.array([t - 1 for t, _ in g.edges], dtype=int)
        self.heads = np.array([h - 1 for _, h in g.edges], dtype=int)
        resid = np.array(inst.target, dtype=float)
        flow, contents = cert if cert is not None else ({}, None)
        self.phi = np.array([float(flow.get(e, 0)) for e in g.edges])
        np.add.at(resid, self.heads, -self.phi)
        np.add.at(resid, self.tails, self.phi)
        self.schur = []
        for k, part in enumerate(inst.schur_parts):
            idx = np.array([v - 1 for v in part.variables], dtype=int)
            nu = np.zeros(len(idx)) if contents is None else np.array(contents[k], dtype=float)
            resid[idx] -= nu
            if not strip_zeros(part.partition):
                continue
            terms = schur_terms(part.partition, len(part.variables))
            E = np.array([c for c, _ in terms], dtype=float) - nu
            logK = np.log(np.array([K for _, K in terms], dtype=float))
            self.schur.append((idx, E, logK))
        self.resid = resid

    def value(self, y: np.ndarray) -> float:
        u = y[self.heads] - y[self.tails]
        if u.size and u.max() >= 0:
            return math.inf
        f = np.sum(-np.log(-np.expm1(u)) - self.phi * u) - self.resid @ y
        for idx, E, logK in self.schur:
            z = logK + E @ y[idx]
            zmax = z.max()
            f += zmax + math.log(np.sum(np.exp(z - zmax)))
        return float(f)

    def derivatives(self, y: np.ndarray, hessian: bool = True):
        n = self.n
        u = y[self.heads] - y[self.tails]
        with np.errstate(over="ignore"):
            sigma = 1.0 / np.expm1(-u)
        grad = -self.resid.copy()
        np.add.at(grad, self.heads, sigma - self.phi)
        np.add.at(grad, self.tails, self.phi - sigma)
        H = None
        if hessian:
            H = np.zeros((n, n))
            w = sigma * (1.0 + sigma)
            np.add.at(H, (self.heads, self.heads), w)
            np.add.at(H, (self.tails, self.tails), w)
            np.add.at(H, (self.heads, self.tails), -w)
            np.add.at(H, (self.tails, self.heads), -w)
        for idx, E, logK in self.schur:
            z = logK + E @ y[idx]
            p = np.exp(z - z.max())
            p /= p.sum()
            mean = E.T @ p
            grad[idx] += mean
            if hessian:
                cov = (E.T * p) @ E - np.outer(mean, mean)
                H[np.ix_(idx, idx)] += cov
        return grad, H


def log_objective(inst: CapacityInstance):
    """The convex function F(y) = log p(e^y) - <alpha, y> (inf off-domain)."""
    member, cert = newton_member(inst)
    return _Objective(inst, cert if member else None).value


def _interaction_components(inst: CapacityInstance):
    parent = list(range(inst.graph.n + 1))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        parent[find(a)] = find(b)

    for t, h in inst.graph.edges:
        union(t, h)
    for part in inst.schur_parts:
        if strip_zeros(part.partition):
            for v in part.variables[1:]:
                union(part.variables[0], v)
    comps = {}
    for v in range(1, inst.graph.n + 1):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def capacity_optimize(
    inst: CapacityInstance,
    tol: float = 1e-9,
    max_iter: int = 2000,
    method: str = "newton",
    pin: Optional[int] = None,
) -> CapacityResult:
    """Capacity of the instance's series at its target.

    A non-member target returns status "zero" straight from the max-flow
    certificate.  Otherwise F is minimised from y = -depth, with one
    coordinate per interaction component held fixed (F is invariant under
    shifting a whole component once the target is balanced on it).  The
    vertex ``pin`` is preferred when choosing the fixed coordinates; the
    default is the largest label of each component.

    ``method="newton"`` takes damped Newton steps and, once the gradient is
    below ``tol``, keeps polishing until the objective stops moving, which
    matters when the infimum lies at infinity.  ``method="gradient"`` is
    plain steepest descent with the same line search.
    """
    if method not in ("newton", "gradient"):
        raise ValueError(f"unknown method {method!r}")
    if sum(inst.target) != inst.degree:
        raise DomainError(
            f"degree mismatch: target sums to {sum(inst.target)}, series has degree {inst.degree}"
        )
    member, cert = newton_member(inst)
    if not member:
        return CapacityResult(0.0, ZERO, 0, 0.0, None)

    obj = _Objective(inst, cert)
    g = inst.graph
    y = np.array([-float(g.depth[v]) for v in range(1, g.n + 1)])
    pinned = []
    for comp in _interaction_components(inst):
        pinned.append((pin if pin in comp else max(comp)) - 1)
    free = np.array(sorted(set(range(g.n)) - set(pinned)), dtype=int)

    f = obj.value(y)
    if free.size == 0:
        return CapacityResult(math.exp(f), ATTAINED, 0, 0.0, y)

    gnorm = math.inf
    small = 0
    last_dec = math.inf
    step = 1.0
    it = 0
    status = None
    for it in range(1, max_iter + 1):
        grad, H = obj.derivatives(y, hessian=(method == "newton"))
        gf = grad[free]
        gnorm = float(np.linalg.norm(gf))
        if gnorm <= tol and (method == "gradient" or last_dec <= POLISH_RTOL * max(1.0, abs(f))):
            status = ATTAINED
            break
        if method == "newton":
            d = _newton_direction(H[np.ix_(free, free)], gf)
            if d is None or gf @ d >= 0:
                d = -gf
            t0 = 1.0
        else:
            d = -gf
            t0 = min(1.0, 2.0 * step) if it > 1 else 1.0
        found = _line_search(obj, y, free, d, f, float(gf @ d), t0, expand=(method == "newton"))
        if found is None and method == "newton":
            found = _roundoff_step(obj, y, free, d, f, gnorm)
        if found is None:
            break
        step, y, fnew = found
        last_dec = f - fnew
        small = small + 1 if last_dec < STALL_RTOL * max(1.0, abs(f)) else 0
        f = fnew
        if small >= STALL_STEPS and gnorm > tol:
            break
    if status is None:
        grad, _ = obj.derivatives(y, hessian=False)
        gnorm = float(np.linalg.norm(grad[free]))
        status = ATTAINED if gnorm <= tol else BOUNDARY
    return CapacityResult(math.exp(f), status, it, gnorm, y)


def _newton_direction(H: np.ndarray, g: np.ndarray):
    scale = max(1.0, float(np.abs(np.diag(H)).max()))
    mu = 0.0
    for _ in range(8):
        try:
            L = np.linalg.cholesky(H + mu * np.eye(len(g)))
        except np.linalg.LinAlgError:
            mu = 1e-12 * scale if mu == 0.0 else mu * 100
            continue
        z = np.linalg.solve(L, -g)
        return np.linalg.solve(L.T, z)
    return None


def _line_search(obj, y, free, d, f, slope, t0, expand):
    """Backtracking (Armijo) search along ``d`` on the free coordinates.

    Infeasible trial points evaluate to +inf and are rejected like any other
    failed step.  When the first trial is accepted and ``expand`` is set,
    the step keeps doubling while the objective keeps dropping.
    """
    t = t0
    while t > 1e-20:
        yt = y.copy()
        yt[free] += t * d
        ft = obj.value(yt)
        if ft <= f + ARMIJO * t * slope:
            break
        t *= SHRINK
    else:
        return None
    if expand and t == t0:
        for _ in range(30):
            y2 = y.copy()
            y2[free] += 2 * t * d
            f2 = obj.value(y2)
            if not f2 < ft:
                break
            t, yt, ft = 2 * t, y2, f2
    if not ft < f:
        return None
    return t, yt, ft


def _roundoff_step(obj, y, free, d, f, gnorm):
    """Full Newton step judged by the gradient once F changes only at the
    level of rounding error, where value-based tests become meaningless."""
    yt = y.copy()
    yt[free] += d
    ft = obj.value(yt)
    if not ft <= f + 1e-13 * max(1.0, abs(f)):
        return None
    grad, _ = obj.derivatives(yt, hessian=False)
    if not np.linalg.norm(grad[free]) < gnorm:
        return None
    return 1.0, yt, min(ft, f)


def _edge_factor_exact(a: int) -> Fraction:
    return Fraction((a + 1) ** (a + 1), a**a if a else 1)


def edge_factor(a) -> float:
    """(a+1)^(a+1) / a^a with 0^0 = 1."""
    if a < 0:
        raise DomainError(f"negative flow value {a}")
    if isinstance(a, int) or (isinstance(a, Fraction) and a.denominator == 1):
        return float(_edge_factor_exact(int(a)))
    a = float(a)
    if a == 0.0:
        return 1.0
    return math.exp((a + 1) * math.log1p(a) - a * math.log(a))


def dual_flow_eval(g: Dag, flow: Mapping) -> float:
    """Product over edges of (phi+1)^(phi+1)/phi^phi; missing edges carry 0."""
    netflow(g, flow)  # validates edges and signs
    vals = [flow.get(e, 0) for e in g.edges]
    if all(isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1) for v in vals):
        out = Fraction(1)
        for v in vals:
            out *= _edge_factor_exact(int(v))
        return float(out)
    return math.exp(sum(math.log(edge_factor(v)) for v in vals))


def edge_capacity_closed_form(k: int, n_offset: int = 0) -> Fraction:
    """Capacity at (t-k, k) of the single-edge series truncated below at n_offset."""
    if k < n_offset:
        raise DomainError("k below the truncation offset: capacity is zero")
    return _edge_factor_exact(k - n_offset)


def capacity_split_lower_bound(parts, alpha: Optional[Sequence[int]] = None) -> float:
    """Product of per-factor capacity lower bounds for a split of the target.

    ``parts`` is a list of ``(factor, alpha_part)``.  A ``Dag`` factor
    contributes its flow-series capacity at ``alpha_part``; a ``SchurFactor``
    contributes the Kostka number of its content, which never exceeds that
    factor's capacity.  ``alpha``, if given, must equal the sum of the parts.
    """
    if not parts:
        return 1.0
    if alpha is not None:
        total = [0] * len(alpha)
        for _, ap in parts:
            if len(ap) != len(alpha):
                raise DomainError("split parts must have the target's length")
            total = [a + b for a, b in zip(total, ap)]
        if total != [int(a) for a in alpha]:
            raise DomainError("split does not sum to the target")
    out = 1.0
    for factor, ap in parts:
        ap = [int(a) for a in ap]
        if isinstance(factor, SchurFactor):
            inside = set(factor.variables)
            if any(a for v, a in enumerate(ap, 1) if v not in inside):
                return 0.0
            nu = [ap[v - 1] for v in factor.variables]
            if min(nu, default=0) < 0 or sum(nu) != factor.size:
                return 0.0
            out *= kostka(factor.partition, nu)
        elif isinstance(factor, Dag):
            if sum(ap) != 0:
                return 0.0
            out *= capacity_optimize(CapacityInstance(factor, tuple(ap))).value
        else:
            raise TypeError(f"unsupported factor {factor!r}")
    return out
