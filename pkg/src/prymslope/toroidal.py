"""Slope for boundary-weighted classes on arbitrary toroidal models and the
bounded brute-force check that trace minimization over nonzero integral PSD
matrices is attained at rank one.

All matrix arithmetic here is exact: positive semidefiniteness of rational
matrices is decided by pivoted symmetric elimination over Fraction, and the
integral candidate search uses integer principal minors.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as iter_product
from typing import NamedTuple, Sequence

import numpy as np

from .divisors import SlopeValue, _as_fraction

FULL_MIN_MAX_DIM = 3


def _as_symmetric_rows(entries) -> tuple[tuple[Fraction, ...], ...]:
    rows = tuple(tuple(_as_fraction(x) for x in row) for row in entries)
    n = len(rows)
    if n == 0 or any(len(row) != n for row in rows):
        raise ValueError("entries must form a nonempty square matrix")
    for i in range(n):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise ValueError("matrix must be symmetric")
    return rows


def is_positive_semidefinite(entries) -> bool:
    """Exact PSD test by pivoted symmetric elimination (no floating point)."""
    rows = _as_symmetric_rows(entries)
    n = len(rows)
    a = [list(row) for row in rows]
    for k in range(n):
        pivot = a[k][k]
        if pivot < 0:
            return False
        if pivot == 0:
            # a PSD matrix with zero diagonal entry has zero row and column
            if any(a[k][j] != 0 for j in range(k, n)):
                return False
            continue
        for i in range(k + 1, n):
            factor = a[i][k] / pivot
            if factor == 0:
                continue
            for j in range(i, n):
                a[i][j] -= factor * a[k][j]
                a[j][i] = a[i][j]
    return True


def symmetric_rank(entries) -> int:
    """Exact rank of a symmetric rational matrix."""
    rows = _as_symmetric_rows(entries)
    n = len(rows)
    a = [list(row) for row in rows]
    rank = 0
    row = 0
    for col in range(n):
        pivot_row = next((r for r in range(row, n) if a[r][col] != 0), None)
        if pivot_row is None:
            continue
        a[row], a[pivot_row] = a[pivot_row], a[row]
        pivot = a[row][col]
        for r in range(row + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] / pivot
                for c in range(col, n):
                    a[r][c] -= factor * a[row][c]
        rank += 1
        row += 1
    return rank


@dataclass(frozen=True)
class SemiIntegralMatrix:
    """Symmetric PSD matrix with integer diagonal, half-integer off-diagonal."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = _as_symmetric_rows(self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        for i in range(n):
            if rows[i][i].denominator != 1:
                raise ValueError("diagonal entries must be integers")
            for j in range(i + 1, n):
                if (2 * rows[i][j]).denominator != 1:
                    raise ValueError("off-diagonal entries must be half-integers")
        if not is_positive_semidefinite(rows):
            raise ValueError("matrix must be positive semidefinite")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def doubled(self) -> tuple[tuple[int, ...], ...]:
        """2S as an integer matrix (even diagonal)."""
        return tuple(tuple(int(2 * x) for x in row) for row in self.entries)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "entries": [[f"{x.numerator}/{x.denominator}" for x in row] for row in self.entries],
        }


@dataclass(frozen=True)
class IntegralPSDMatrix:
    """Symmetric integer PSD matrix."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = _as_symmetric_rows(self.entries)
        if any(x.denominator != 1 for row in rows for x in row):
            raise ValueError("entries must be integers")
        object.__setattr__(self, "entries", tuple(tuple(int(x) for x in row) for row in rows))
        if not is_positive_semidefinite(rows):
            raise ValueError("matrix must be positive semidefinite")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def rank(self) -> int:
        return symmetric_rank(self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)


@dataclass(frozen=True)
class BoundaryWeightedClass:
    """a L - sum b_i D_i with effective-form coefficients a, b_i >= 0."""

    a: Fraction
    b: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", _as_fraction(self.a))
        object.__setattr__(self, "b", tuple(_as_fraction(x) for x in self.b))
        if self.a < 0 or any(x < 0 for x in self.b):
            raise ValueError("effective-form coefficients must be nonnegative")


def general_slope(h: BoundaryWeightedClass, positive_only: bool = True) -> SlopeValue:
    """a divided by the minimal boundary coefficient.

    By default the minimum runs over the positive b_i (a class missing a
    boundary component entirely does not force slope a/0); set
    positive_only=False for the literal minimum over all b_i, under which
    any vanishing coefficient makes the slope infinite.
    """
    bs = [x for x in h.b if x > 0] if positive_only else list(h.b)
    if not bs or min(bs) == 0:
        return SlopeValue.infinite()
    return SlopeValue.finite(h.a / min(bs))


class RankOneMin(NamedTuple):
    value: Fraction
    argmin: tuple[int, ...]


class FullMin(NamedTuple):
    value: Fraction
    argmin: IntegralPSDMatrix
    rank: int


def _quad_form(doubled: Sequence[Sequence[int]], x: Sequence[int]) -> Fraction:
    n = len(x)
    total = 0
    for i in range(n):
        xi = x[i]
        if xi:
            row = doubled[i]
            total += xi * sum(row[j] * x[j] for j in range(n))
    return Fraction(total, 2)


def rank_one_min(S: SemiIntegralMatrix, B: int) -> RankOneMin:
    """Minimum of x S x^t over nonzero integer vectors with entries in [-B, B].

    x and -x give the same value, so candidates are canonicalized to have a
    positive first nonzero entry; the reported argmin is the lexicographically
    smallest canonical vector attaining the minimum.
    """
    if B < 1:
        raise ValueError("B must be a positive integer")
    doubled = S.doubled()
    best: Fraction | None = None
    arg: tuple[int, ...] = ()
    for x in iter_product(range(-B, B + 1), repeat=S.dim):
        first = next((v for v in x if v != 0), 0)
        if first <= 0:
            continue
        value = _quad_form(doubled, x)
        if best is None or value < best:
            best, arg = value, x
    assert best is not None
    return RankOneMin(value=best, argmin=arg)


@lru_cache(maxsize=8)
def _psd_candidates(dim: int, entry_bound: int) -> np.ndarray:
    """All nonzero symmetric integer PSD matrices with entries in
    [-entry_bound, entry_bound], as packed rows (diagonal then upper
    off-diagonal entries) in lexicographic generation order.

    PSD forces 0 <= X_ii <= entry_bound and X_ij^2 <= X_ii X_jj, so the
    enumeration ranges only over those boxes; dim 3 additionally filters on
    the determinant.
    """
    M = entry_bound
    if dim == 1:
        return np.arange(1, M + 1, dtype=np.int64).reshape(-1, 1)
    if dim == 2:
        rows = []
        for d1 in range(M + 1):
            for d2 in range(M + 1):
                c = math.isqrt(d1 * d2)
                off = np.arange(-c, c + 1, dtype=np.int64)
                block = np.empty((off.size, 3), dtype=np.int64)
                block[:, 0] = d1
                block[:, 1] = d2
                block[:, 2] = off
                rows.append(block)
        out = np.concatenate(rows)
        return out[np.any(out != 0, axis=1)]
    if dim == 3:
        rows = []
        for d1 in range(M + 1):
            for d2 in range(M + 1):
                c12 = math.isqrt(d1 * d2)
                o12 = np.arange(-c12, c12 + 1, dtype=np.int64)
                for d3 in range(M + 1):
                    c13 = math.isqrt(d1 * d3)
                    c23 = math.isqrt(d2 * d3)
                    a, b, c = np.meshgrid(
                        o12,
                        np.arange(-c13, c13 + 1, dtype=np.int64),
                        np.arange(-c23, c23 + 1, dtype=np.int64),
                        indexing="ij",
                    )
                    a, b, c = a.ravel(), b.ravel(), c.ravel()
                    det = d1 * (d2 * d3 - c * c) - a * (a * d3 - b * c) + b * (a * c - b * d2)
                    keep = det >= 0
                    block = np.empty((int(keep.sum()), 6), dtype=np.int64)
                    block[:, 0] = d1
                    block[:, 1] = d2
                    block[:, 2] = d3
                    block[:, 3] = a[keep]
                    block[:, 4] = b[keep]
                    block[:, 5] = c[keep]
                    rows.append(block)
        out = np.concatenate(rows)
        return out[np.any(out != 0, axis=1)]
    raise ValueError(f"exhaustive search is limited to dim <= {FULL_MIN_MAX_DIM}")


def _unpack_candidate(dim: int, row: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    row = [int(v) for v in row]
    if dim == 1:
        return ((row[0],),)
    if dim == 2:
        return ((row[0], row[2]), (row[2], row[1]))
    return (
        (row[0], row[3], row[4]),
        (row[3], row[1], row[5]),
        (row[4], row[5], row[2]),
    )


def full_min(S: SemiIntegralMatrix, B: int) -> FullMin:
    """Minimum of tr(S X) over nonzero integral PSD X with entries bounded
    by B^2 * dim, reporting an argmin and its rank.

    The argmin is the first minimizer in lexicographic order on (diagonal,
    upper off-diagonal) entries.
    """
    if B < 1:
        raise ValueError("B must be a positive integer")
    dim = S.dim
    if dim > FULL_MIN_MAX_DIM:
        raise ValueError(f"exhaustive search is limited to dim <= {FULL_MIN_MAX_DIM}")
    candidates = _psd_candidates(dim, B * B * dim)
    doubled = S.doubled()
    # tr(2S X) over packed candidates: diagonal weights once, off-diagonal twice
    weights = [doubled[i][i] for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            weights.append(2 * doubled[i][j])
    traces = candidates @ np.asarray(weights, dtype=np.int64)
    pos = int(np.argmin(traces))
    entries = _unpack_candidate(dim, candidates[pos])
    argmin = IntegralPSDMatrix(entries)
    return FullMin(value=Fraction(int(traces[pos]), 2), argmin=argmin, rank=argmin.rank())


def random_semi_integral_psd(rng: random.Random, dim: int) -> SemiIntegralMatrix:
    """Seed-deterministic PSD sample on the semi-integral lattice.

    Draws an integer matrix M with entries in [-2, 2] and projects
    (1/2) M^t M to the lattice: off-diagonal entries are already
    half-integers, and the diagonal is rounded up to the next integer
    (adding a nonnegative diagonal preserves PSD).
    """
    m = [[rng.randint(-2, 2) for _ in range(dim)] for _ in range(dim)]
    gram = [[sum(m[k][i] * m[k][j] for k in range(dim)) for j in range(dim)] for i in range(dim)]
    entries = [
        [
            Fraction(math.ceil(Fraction(gram[i][j], 2))) if i == j else Fraction(gram[i][j], 2)
            for j in range(dim)
        ]
        for i in range(dim)
    ]
    return SemiIntegralMatrix(tuple(tuple(row) for row in entries))


@dataclass
class BarnesCohnReport:
    """Outcome of a bounded rank-one minimization check.

    The search is bounded, so it can confirm the rank-one claim on the
    sampled instances but can never refute the unbounded statement.
    """

    dim: int
    trials: int
    bound: int
    seed: int
    passes: int = 0
    failures: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.passes == self.trials and not self.failures

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "trials": self.trials,
            "passes": self.passes,
            "failures": self.failures,
            "bound": self.bound,
            "seed": self.seed,
            "scope": f"search bounded by |x_i| <= {self.bound} and |X_ij| <= {self.bound ** 2 * self.dim}; "
                     "confirms the sampled instances only",
        }


def verify_barnes_cohn(trials: int, dim: int, B: int, seed: int) -> BarnesCohnReport:
    """Check full_min == rank_one_min on pseudo-random semi-integral PSD
    matrices; failures are recorded in the report, not raised."""
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = random.Random(seed)
    report = BarnesCohnReport(dim=dim, trials=trials, bound=B, seed=seed)
    for trial in range(trials):
        S = random_semi_integral_psd(rng, dim)
        r1 = rank_one_min(S, B)
        full = full_min(S, B)
        if r1.value == full.value:
            report.passes += 1
        else:
            report.failures.append(
                {
                    "trial": trial,
                    "matrix": S.to_json_dict(),
                    "rank_one_min": str(r1.value),
                    "full_min": str(full.value),
                    "full_argmin_rank": full.rank,
                }
            )
    return report
