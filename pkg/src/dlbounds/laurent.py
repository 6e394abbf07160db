"""Sparse Laurent polynomials with exact rational coefficients.

Infinite series are only ever handled through finite truncations, so every
object here is a finite map ``exponent vector -> Fraction``.  The module also
carries the coefficient-level checks used elsewhere: log-concavity of
sequences, M-convexity of supports, and the Lorentzian eigenvalue test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

EIG_RTOL = 1e-9


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("coefficients must be exact (int, Fraction or string)")
    return Fraction(c)


@dataclass(frozen=True)
class SparsePoly:
    """A finite Laurent polynomial in ``nvars`` variables.

    ``terms`` maps integer exponent tuples to nonzero ``Fraction`` coefficients.
    ``degree``, when set, asserts homogeneity and is checked on construction.
    """

    nvars: int
    terms: Mapping[tuple, Fraction] = field(default_factory=dict)
    degree: Optional[int] = None

    def __post_init__(self):
        clean = {}
        for exp, c in dict(self.terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {self.nvars}")
            c = _frac(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        if self.degree is not None:
            for exp in clean:
                if sum(exp) != self.degree:
                    raise ValueError(f"exponent {exp} does not have degree {self.degree}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "SparsePoly":
        return cls(len(exp), {tuple(exp): coeff}, degree=sum(exp))

    @classmethod
    def one(cls, nvars: int) -> "SparsePoly":
        return cls(nvars, {(0,) * nvars: 1}, degree=0)

    def coeff(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def support(self) -> frozenset:
        return frozenset(self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def total_degree(self) -> Optional[int]:
        """Common degree of all terms, or None if empty or inhomogeneous."""
        degs = {sum(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        deg = self.degree if self.degree == other.degree else None
        return SparsePoly(self.nvars, out, degree=deg)

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            c = _frac(other)
            return SparsePoly(self.nvars, {e: v * c for e, v in self.terms.items()}, self.degree)
        self._check_compatible(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        deg = None
        if self.degree is not None and other.degree is not None:
            deg = self.degree + other.degree
        return SparsePoly(self.nvars, out, degree=deg)

    __rmul__ = __mul__

    def shift(self, exp: Sequence[int]) -> "SparsePoly":
        """Multiply by the monomial x^exp."""
        exp = tuple(exp)
        deg = None if self.degree is None else self.degree + sum(exp)
        return SparsePoly(
            self.nvars,
            {tuple(a + b for a, b in zip(e, exp)): c for e, c in self.terms.items()},
            degree=deg,
        )

    def evaluate(self, x: Sequence):
        total = 0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                term = term * xi**ei
            total = total + term
        return total

    def _check_compatible(self, other):
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")

    def to_json(self) -> dict:
        return {
            "vars": self.nvars,
            "degree": self.degree,
            "terms": [
                {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                for e, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SparsePoly":
        terms = {}
        for t in obj["terms"]:
            terms[tuple(t["exp"])] = Fraction(int(t["num"]), int(t.get("den", "1")))
        return cls(int(obj["vars"]), terms, degree=obj.get("degree"))


@dataclass(frozen=True)
class CoeffSequence:
    """Coefficients ``values[k]`` sitting at index ``offset + k``."""

    offset: int
    values: tuple

    def __post_init__(self):
        vals = tuple(_frac(v) for v in self.values)
        if any(v < 0 for v in vals):
            raise ValueError("coefficient sequences must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, m: int) -> Fraction:
        k = m - self.offset
        if 0 <= k < len(self.values):
            return self.values[k]
        return Fraction(0)

    @property
    def window(self) -> range:
        return range(self.offset, self.offset + len(self.values))


@dataclass(frozen=True)
class Check:
    """Boolean verdict with an optional witness of failure."""

    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


def poly_project(p: SparsePoly) -> SparsePoly:
    """Keep only the terms whose exponents are all nonnegative."""
    return SparsePoly(
        p.nvars, {e: c for e, c in p.terms.items() if min(e, default=0) >= 0}, p.degree
    )


def truncate(p: SparsePoly, var: int, t: int, side: str) -> SparsePoly:
    """Cut ``p`` along variable ``var`` (0-based) at exponent ``t``.

    ``side="below"`` keeps terms with exponent >= t and divides by x_var^t, so
    the window [t, inf) maps onto [0, inf) and the degree drops by t.
    ``side="above"`` keeps terms with exponent <= t; the window is unchanged.
    """
    if not 0 <= var < p.nvars:
        raise IndexError(f"variable index {var} out of range for {p.nvars} variables")
    if side == "below":
        kept = {}
        for e, c in p.terms.items():
            if e[var] >= t:
                e2 = list(e)
                e2[var] -= t
                kept[tuple(e2)] = c
        deg = None if p.degree is None else p.degree - t
        return SparsePoly(p.nvars, kept, deg)
    if side == "above":
        return SparsePoly(p.nvars, {e: c for e, c in p.terms.items() if e[var] <= t}, p.degree)
    raise ValueError(f"side must be 'below' or 'above', got {side!r}")


def normalize(p: SparsePoly) -> SparsePoly:
    """Divide each coefficient by the product of factorials of its exponent."""
    out = {}
    for e, c in p.terms.items():
        if min(e, default=0) < 0:
            raise ValueError(f"normalize needs nonnegative exponents, got {e}")
        out[e] = c / math.prod(math.factorial(k) for k in e)
    return SparsePoly(p.nvars, out, p.degree)


def _internal_zero(values: Sequence) -> Optional[int]:
    nz = [k for k, v in enumerate(values) if v]
    if not nz:
        return None
    for k in range(nz[0], nz[-1] + 1):
        if not values[k]:
            return k
    return None


def is_log_concave(s: CoeffSequence, weights: Optional[CoeffSequence] = None) -> Check:
    """Log-concavity with no internal zeros; witness is the failing index.

    With ``weights`` the test is applied to ``s / weights`` pointwise.  A
    nonzero value above a zero weight fails at that index.
    """
    vals = list(s.values)
    if weights is not None:
        if weights.window != s.window:
            raise ValueError("weights must cover the same index window")
        k = _internal_zero(weights.values)
        if k is not None:
            raise ValueError(f"weights have an internal zero at index {weights.offset + k}")
        for k, (v, w) in enumerate(zip(s.values, weights.values)):
            if w == 0:
                if v != 0:
                    return Check(False, s.offset + k)
            else:
                vals[k] = v / w
    k = _internal_zero(vals)
    if k is not None:
        return Check(False, s.offset + k)
    for k in range(1, len(vals) - 1):
        if vals[k] * vals[k] < vals[k - 1] * vals[k + 1]:
            return Check(False, s.offset + k)
    return Check(True)


def is_m_convex(support: Iterable[Sequence[int]]) -> Check:
    """Exchange axiom: for x, y in S and x_i > y_i there is j with y_j > x_j
    such that x - e_i + e_j and y + e_i - e_j both lie in S.

    The witness on failure is ``(x, y, i)``.
    """
    pts = {tuple(v) for v in support}
    if not pts:
        raise ValueError("support must be nonempty")
    n = len(next(iter(pts)))
    if any(len(v) != n for v in pts):
        raise ValueError("exponent vectors must have a common length")
    for x in pts:
        for y in pts:
            for i in range(n):
                if x[i] <= y[i]:
                    continue
                found = False
                for j in range(n):
                    if y[j] <= x[j]:
                        continue
                    xa = list(x)
                    xa[i] -= 1
                    xa[j] += 1
                    ya = list(y)
                    ya[i] += 1
                    ya[j] -= 1
                    if tuple(xa) in pts and tuple(ya) in pts:
                        found = True
                        break
                if not found:
                    return Check(False, (x, y, i))
    return Check(True)


@dataclass(frozen=True)
class LorentzianVerdict:
    passed: bool
    method: str
    witness: object = None

    def __bool__(self):
        return self.passed


def _derivative(p: SparsePoly, idx: Sequence[int]) -> SparsePoly:
    out = p
    for i in idx:
        terms = {}
        for e, c in out.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                terms[tuple(e2)] = c * e[i]
        out = SparsePoly(p.nvars, terms)
    return out


def _quadratic_matrix(q: SparsePoly) -> np.ndarray:
    n = q.nvars
    H = np.zeros((n, n))
    for e, c in q.terms.items():
        nz = [k for k in range(n) if e[k]]
        if len(nz) == 1:
            H[nz[0], nz[0]] = 2 * float(c)
        else:
            a, b = nz
            H[a, b] = H[b, a] = float(c)
    return H


def lorentzian_check(p: SparsePoly) -> LorentzianVerdict:
    """Decide whether a homogeneous polynomial with nonnegative coefficients
    is Lorentzian.

    Two variables: exact, via ultra log-concavity of the coefficients.
    Otherwise: M-convex support plus "at most one positive eigenvalue" for the
    Hessian of every (d-2)-fold partial derivative.  Those Hessians are
    constant matrices, so a single eigen-solve per derivative suffices.
    """
    if min((min(e) for e in p.terms), default=0) < 0 or any(c < 0 for c in p.terms.values()):
        raise ValueError("expected a polynomial with nonnegative coefficients")
    if not p.terms:
        return LorentzianVerdict(True, "trivial")
    d = p.total_degree()
    if d is None:
        raise ValueError("lorentzian_check needs a homogeneous polynomial")
    nontrivial = [k for k in range(p.nvars) if any(e[k] for e in p.terms)]
    if len(nontrivial) <= 2 or d <= 1:
        if d <= 1:
            return LorentzianVerdict(True, "bivariate-exact")
        a, b = (nontrivial + [None, None])[:2]
        if b is None:
            return LorentzianVerdict(True, "bivariate-exact")
        seq = [p.coeff(_pair_exp(p.nvars, a, b, k, d - k)) / math.comb(d, k) for k in range(d + 1)]
        chk = is_log_concave(CoeffSequence(0, tuple(seq)))
        return LorentzianVerdict(chk.ok, "bivariate-exact", chk.witness)
    mc = is_m_convex(p.support())
    if not mc:
        return LorentzianVerdict(False, "hessian", {"support": mc.witness})
    for idx in itertools.combinations_with_replacement(range(p.nvars), d - 2):
        q = _derivative(p, idx)
        if not q.terms:
            continue
        H = _quadratic_matrix(q)
        eig = np.linalg.eigvalsh(H)
        tol = EIG_RTOL * np.abs(H).max()
        if int(np.sum(eig > tol)) > 1:
            return LorentzianVerdict(False, "hessian", {"derivative": idx})
    return LorentzianVerdict(True, "hessian")


def _pair_exp(n, a, b, ka, kb):
    e = [0] * n
    e[a] = ka
    e[b] = kb
    return tuple(e)


def convergence_ratio_interval(s: CoeffSequence, side: str = "two-sided"):
    """Interval ``(inf a_m/a_{m+1}, sup a_m/a_{m+1})`` over the window.

    ``side`` says which end of the true sequence is finite: a lower-bounded
    sequence reports 0 as its infimum, an upper-bounded one reports +inf as
    its supremum, ``"finite"`` does both.
    """
    if side not in ("two-sided", "lower-bounded", "upper-bounded", "finite"):
        raise ValueError(f"unknown side {side!r}")
    if any(v == 0 for v in s.values):
        raise ValueError("sequence must be positive on its window")
    if not is_log_concave(s):
        raise ValueError("sequence is not log-concave")
    ratios = [s.values[k] / s.values[k + 1] for k in range(len(s) - 1)]
    lo = min(ratios) if ratios else math.inf
    hi = max(ratios) if ratios else 0
    if side in ("lower-bounded", "finite"):
        lo = Fraction(0)
    if side in ("upper-bounded", "finite"):
        hi = math.inf
    return lo, hi
