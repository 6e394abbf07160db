"""Partitions, semistandard tableaux, Kostka numbers and Schur polynomials."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterator, List, Sequence, Tuple

Partition = Tuple[int, ...]


def as_partition(parts: Sequence[int]) -> Partition:
    """Validate a partition; trailing zeros are kept."""
    p = tuple(int(v) for v in parts)
    if any(v < 0 for v in p):
        raise ValueError(f"partition {p} has a negative part")
    if any(p[k] < p[k + 1] for k in range(len(p) - 1)):
        raise ValueError(f"partition {p} is not nonincreasing")
    return p


def strip_zeros(lam: Sequence[int]) -> Partition:
    return tuple(v for v in lam if v)


def conjugate(lam: Sequence[int]) -> Partition:
    lam = strip_zeros(lam)
    if not lam:
        return ()
    return tuple(sum(1 for v in lam if v > c) for c in range(lam[0]))


def partitions(total: int, max_part: int = None) -> Iterator[Partition]:
    """Partitions of ``total`` in reverse lexicographic order."""
    if max_part is None:
        max_part = total
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in partitions(total - first, first):
            yield (first,) + rest


def compositions(total: int, k: int) -> Iterator[Tuple[int, ...]]:
    """Weak compositions of ``total`` into ``k`` nonnegative parts."""
    if k == 0:
        if total == 0:
            yield ()
        return
    if k == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, k - 1):
            yield (first,) + rest


def _horizontal_strips(lam: Partition, size: int) -> Iterator[Partition]:
    """Shapes mu inside lam with lam/mu a horizontal strip of ``size`` boxes."""
    lam = strip_zeros(lam)
    L = len(lam)

    def rec(r, left, acc):
        if r == L:
            if left == 0:
                yield strip_zeros(acc)
            return
        lo = lam[r + 1] if r + 1 < L else 0
        for mu_r in range(lam[r], lo - 1, -1):
            take = lam[r] - mu_r
            if take > left:
                break
            yield from rec(r + 1, left - take, acc + (mu_r,))

    yield from rec(0, size, ())


@lru_cache(maxsize=None)
def _kostka(lam: Partition, nu: Tuple[int, ...]) -> int:
    if not nu:
        return 1 if not lam else 0
    if len(lam) > len(nu):
        return 0
    last = nu[-1]
    return sum(_kostka(mu, nu[:-1]) for mu in _horizontal_strips(lam, last))


def kostka(lam: Sequence[int], nu: Sequence[int]) -> int:
    """Number of SSYT of shape ``lam`` and content ``nu``.

    Removing the boxes labelled by the largest entry leaves a horizontal strip,
    so the count is a sum over strips of the counts for the content prefix.
    """
    lam = strip_zeros(as_partition(lam))
    nu = tuple(int(v) for v in nu)
    if any(v < 0 for v in nu):
        raise ValueError("content entries must be nonnegative")
    if sum(lam) != sum(nu):
        raise ValueError(f"size mismatch: |lam| = {sum(lam)}, |nu| = {sum(nu)}")
    return _kostka(lam, nu)


@lru_cache(maxsize=None)
def schur_terms(lam: Partition, k: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    """Monomial expansion of s_lam in ``k`` variables as (content, K) pairs."""
    lam = strip_zeros(as_partition(lam))
    out = []
    for nu in compositions(sum(lam), k):
        K = _kostka(lam, nu)
        if K:
            out.append((nu, K))
    return tuple(out)


def iter_ssyt(lam: Sequence[int], k: int) -> Iterator[List[List[int]]]:
    """Every semistandard tableau of shape ``lam`` with entries 1..k.

    Cells are filled row by row; each entry is at least its left neighbour
    and strictly more than the entry above it.
    """
    lam = strip_zeros(as_partition(lam))
    cells = [(r, c) for r, length in enumerate(lam) for c in range(length)]
    T = [[0] * length for length in lam]

    def rec(idx):
        if idx == len(cells):
            yield [row[:] for row in T]
            return
        r, c = cells[idx]
        lo = 1
        if c > 0:
            lo = max(lo, T[r][c - 1])
        if r > 0:
            lo = max(lo, T[r - 1][c] + 1)
        for v in range(lo, k + 1):
            T[r][c] = v
            yield from rec(idx + 1)
        T[r][c] = 0

    yield from rec(0)


def schur_eval(lam: Sequence[int], x: Sequence, gradient: bool = False):
    """Evaluate s_lam(x) as a sum over explicitly enumerated tableaux.

    With ``gradient=True`` returns ``(value, grad)``, where
    grad_v = sum over tableaux of content_v * x^content / x_v.
    Exact arithmetic when all coordinates are rational.
    """
    k = len(x)
    exact = all(isinstance(v, Rational) for v in x)
    pt = [Fraction(v) if exact else float(v) for v in x]
    zero = Fraction(0) if exact else 0.0
    value = zero
    grad = [zero] * k
    for T in iter_ssyt(lam, k):
        content = [0] * k
        for row in T:
            for v in row:
                content[v - 1] += 1
        mono = Fraction(1) if exact else 1.0
        for xi, ci in zip(pt, content):
            mono = mono * xi**ci
        value += mono
        if gradient:
            for v in range(k):
                if content[v]:
                    grad[v] += content[v] * mono / pt[v]
    return (value, grad) if gradient else value
