"""Numerical theta constants with characteristics and the vanishing-order
fits along rank-one boundary degenerations.

A theta constant is the lattice sum

    sum over n in Z^g of exp(pi i (n + eps/2)^t (tau (n + eps/2) + delta))

truncated to the box |n_i + eps_i/2| <= N with a certified geometric tail
bound.  The box is symmetric under n -> -n - eps, so odd characteristics
cancel pairwise in the summation itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .characteristics import Characteristic, pair, vanishing_count

DEFAULT_TAIL_TOL = 1e-12

# |value| below ZERO_FACTOR * tail_tol is reported as identically zero
# rather than as a small nonzero value.
ZERO_FACTOR = 1e3

_MAX_LATTICE_POINTS = 4_000_000


class TruncationError(ValueError):
    """The requested tail bound cannot be certified at the given radius."""


class IdenticallyZeroError(ArithmeticError):
    """Theta values were below the zero threshold at every sample."""


class PeriodMatrix:
    """A symmetric complex g x g matrix with positive definite imaginary part."""

    def __init__(self, entries):
        a = np.asarray(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("period matrix must be exactly symmetric")
        lam = float(np.linalg.eigvalsh(a.imag)[0])
        if lam <= 0.0:
            raise ValueError("imaginary part must be positive definite")
        self._entries = a
        self._entries.setflags(write=False)
        self._min_im_eigenvalue = lam

    @property
    def genus(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def min_im_eigenvalue(self) -> float:
        return self._min_im_eigenvalue

    @classmethod
    def from_json_dict(cls, data: dict) -> "PeriodMatrix":
        g = int(data["genus"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.shape != (g, g) or im.shape != (g, g):
            raise ValueError(f"re/im must be {g}x{g} matrices")
        return cls(re + 1j * im)

    def to_json_dict(self) -> dict:
        return {
            "genus": self.genus,
            "re": [[_fmt_float(x) for x in row] for row in self._entries.real.tolist()],
            "im": [[_fmt_float(x) for x in row] for row in self._entries.imag.tolist()],
        }


def _fmt_float(x: float) -> float:
    # round-trips through a >=17 significant digit decimal rendering
    return float(f"{x:.17g}")


def load_period_matrix(path) -> PeriodMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return PeriodMatrix.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class DegenerationPath:
    """The family tau(t) = [[t, b^t], [b, base]] with Im(t) -> infinity.

    q = exp(2 pi i t) is the coordinate transverse to the rank-one boundary;
    the ramified transversal coordinate is w = q^(1/2).
    """

    base: PeriodMatrix
    b: tuple[complex, ...]
    t: complex

    def __post_init__(self):
        b = tuple(complex(z) for z in self.b)
        if len(b) != self.base.genus:
            raise ValueError(f"b must have length {self.base.genus}")
        object.__setattr__(self, "b", b)
        self.period_matrix()  # validates Im(tau(t)) > 0

    @property
    def genus(self) -> int:
        return self.base.genus + 1

    @property
    def q(self) -> complex:
        return complex(np.exp(2j * np.pi * self.t))

    @property
    def w(self) -> complex:
        return complex(np.exp(1j * np.pi * self.t))

    def with_im_t(self, im_t: float) -> "DegenerationPath":
        return DegenerationPath(self.base, self.b, complex(self.t.real, im_t))

    def period_matrix(self) -> PeriodMatrix:
        g = self.genus
        full = np.empty((g, g), dtype=complex)
        full[0, 0] = self.t
        full[0, 1:] = self.b
        full[1:, 0] = self.b
        full[1:, 1:] = self.base.entries
        return PeriodMatrix(full)

    @classmethod
    def from_json_dict(cls, data: dict) -> "DegenerationPath":
        base = PeriodMatrix.from_json_dict(data)
        b = [complex(re, im) for re, im in zip(data["b_re"], data["b_im"])]
        return cls(base, tuple(b), complex(0.0, float(data["im_t"])))


def _one_d_full_sum(lam: float, offset: float) -> float:
    """sum over n in Z of exp(-pi lam (n + offset)^2), by direct summation."""
    total = math.exp(-math.pi * lam * offset * offset)
    for n in range(1, 100_000):
        term = math.exp(-math.pi * lam * (n + offset) ** 2) + math.exp(-math.pi * lam * (n - offset) ** 2)
        total += term
        if term < 1e-300:
            return total
    raise TruncationError(f"1d lattice sum does not converge fast enough (lambda={lam})")


def _one_d_tail(lam: float, offset: float, radius: int) -> float:
    """Geometric bound for sum over lattice points |n + offset| > radius."""
    p0 = radius + 1 - offset  # smallest lattice point > radius on either side
    ratio = math.exp(-math.pi * lam * (2 * p0 + 1))
    if ratio >= 1.0:
        return math.inf
    return 2.0 * math.exp(-math.pi * lam * p0 * p0) / (1.0 - ratio)


def tail_estimate(genus: int, lambda_min: float, radius: int) -> float:
    """Upper bound for the discarded lattice tail at the given box radius."""
    if lambda_min <= 0.0:
        raise ValueError("lambda_min must be positive")
    full = max(_one_d_full_sum(lambda_min, 0.0), _one_d_full_sum(lambda_min, 0.5))
    tail = max(_one_d_tail(lambda_min, 0.0, radius), _one_d_tail(lambda_min, 0.5, radius))
    return genus * tail * full ** (genus - 1)


@dataclass(frozen=True)
class TruncationBound:
    """Lattice box radius together with the certified tail tolerance."""

    radius: int
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be a positive integer")
        if not (self.tail_tol > 0.0):
            raise ValueError("tail_tol must be positive")

    @classmethod
    def choose(cls, lambda_min: float, genus: int, tail_tol: float = DEFAULT_TAIL_TOL,
               max_radius: int = 64) -> "TruncationBound":
        """Smallest radius whose tail estimate certifies below tail_tol."""
        for radius in range(1, max_radius + 1):
            if tail_estimate(genus, lambda_min, radius) < tail_tol:
                return cls(radius, tail_tol)
        raise TruncationError(
            f"no radius <= {max_radius} certifies tail < {tail_tol} at lambda_min={lambda_min}"
        )


def _lattice_box(m: Characteristic, radius: int) -> np.ndarray:
    """All n in Z^g with |n_i + eps_i/2| <= radius, in lexicographic order."""
    ranges = []
    for e in m.eps_bits():
        if e:
            ranges.append(np.arange(-radius, radius, dtype=np.int64))
        else:
            ranges.append(np.arange(-radius, radius + 1, dtype=np.int64))
    count = 1
    for r in ranges:
        count *= r.size
    if count > _MAX_LATTICE_POINTS:
        raise TruncationError(f"lattice box with {count} points exceeds the resource bound")
    grids = np.meshgrid(*ranges, indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, m.genus)


def theta_constant(m: Characteristic, tau: PeriodMatrix, tb: TruncationBound | None = None) -> complex:
    """Truncated theta lattice sum with a certified tail below tb.tail_tol.

    Summation is over a fixed lexicographic box and reduced with exactly
    rounded compensated accumulation, so the result is deterministic.
    """
    if m.genus != tau.genus:
        raise ValueError(f"genus mismatch: {m.genus} != {tau.genus}")
    if tb is None:
        tb = TruncationBound.choose(tau.min_im_eigenvalue, tau.genus)
    est = tail_estimate(tau.genus, tau.min_im_eigenvalue, tb.radius)
    if not (est < tb.tail_tol):
        raise TruncationError(
            f"tail estimate {est:.3e} at radius {tb.radius} does not certify below {tb.tail_tol:.3e}"
        )
    p = _lattice_box(m, tb.radius) + np.asarray(m.eps_bits(), dtype=float) / 2.0
    quad = np.einsum("ki,ij,kj->k", p, tau.entries, p)
    lin = p @ np.asarray(m.delta_bits(), dtype=float)
    terms = np.exp(1j * np.pi * (quad + lin))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def leading_fj_exponent(m: Characteristic, mu: Characteristic) -> Fraction:
    """Order in q of theta_m along the cusp mu: pair(m, mu)/8."""
    if mu.is_zero():
        raise ValueError("mu must be a nonzero two-torsion point")
    return Fraction(pair(m, mu), 8)


def fit_order_from_samples(im_ts: Sequence[float], log_abs_values: Sequence[float]) -> float:
    """Least-squares slope of log|value| against -2 pi Im(t)."""
    x = -2.0 * np.pi * np.asarray(im_ts, dtype=float)
    y = np.asarray(log_abs_values, dtype=float)
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def fit_vanishing_order(m: Characteristic, path: DegenerationPath, samples: Sequence[float],
                        tb: TruncationBound | None = None) -> float:
    """Estimate the q-order of theta_m along a rank-one degeneration.

    Evaluates theta at each Im(t) in samples and fits log|theta| against
    -2 pi Im(t).  Raises IdenticallyZeroError when every sample is below
    the zero threshold (odd characteristics).
    """
    if m.genus < 2:
        raise ValueError("degeneration fits require genus >= 2")
    if m.genus != path.genus:
        raise ValueError(f"genus mismatch: {m.genus} != {path.genus}")
    samples = [float(y) for y in samples]
    if len(samples) < 3 or any(b <= a for a, b in zip(samples, samples[1:])):
        raise ValueError("samples must be at least 3 increasing Im(t) values")
    tail_tol = tb.tail_tol if tb is not None else DEFAULT_TAIL_TOL
    values = []
    for y in samples:
        tau = path.with_im_t(y).period_matrix()
        bound = tb if tb is not None else TruncationBound.choose(tau.min_im_eigenvalue, tau.genus, tail_tol)
        values.append(abs(theta_constant(m, tau, bound)))
    if all(v < ZERO_FACTOR * tail_tol for v in values):
        raise IdenticallyZeroError(f"theta_{m} is numerically zero at all samples")
    return fit_order_from_samples(samples, [math.log(v) for v in values])


def product_vanishing_order(eta: Characteristic, mu: Characteristic, g: int | None = None) -> Fraction:
    """Vanishing order of the perp-even theta product at the cusp (eta, mu).

    The count of factors vanishing to order 1/8 is doubled on the ramified
    boundary (pair(mu, eta) = 1), where the transversal coordinate is
    w = q^(1/2); the order is zero at mu = eta.
    """
    if mu == eta:
        return Fraction(0)
    doubling = 2 if pair(mu, eta) == 1 else 1
    return Fraction(doubling * vanishing_count(eta, mu, g), 8)
