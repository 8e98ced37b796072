"""Exact-rational divisor-class calculus on the compactified moduli spaces
of abelian varieties (A_bar), curves (M_bar) and two-torsion covers (R_bar),
with the pullback/pushforward maps of the covering and the Prym extension,
and the slope bound they induce.

All arithmetic is over Fraction; no operation here produces floats except
the explicit decimal renderings.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Mapping

from .characteristics import (
    Characteristic,
    pair,
    perp_even_set,
    standard_eta,
    vanishing_count,
)

A_BAR = "A_bar"
M_BAR = "M_bar"
R_BAR = "R_bar"

R_LAMBDA1 = "lambda1"
R_DELTA0_PRIME = "delta0_prime"
R_DELTA0_DOUBLE_PRIME = "delta0_double_prime"
R_DELTA0_RAM = "delta0_ram"
R_OTHER = "other"

_DISPLAY = {
    R_DELTA0_PRIME: "delta0'",
    R_DELTA0_DOUBLE_PRIME: "delta0''",
}


def basis_labels(space: str, genus: int) -> tuple[str, ...]:
    if space == A_BAR:
        return ("L", "D")
    if space == M_BAR:
        return ("lambda1",) + tuple(f"delta{i}" for i in range(genus // 2 + 1))
    if space == R_BAR:
        return (R_LAMBDA1, R_DELTA0_PRIME, R_DELTA0_DOUBLE_PRIME, R_DELTA0_RAM, R_OTHER)
    raise ValueError(f"unknown space {space!r}")


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("coefficients must be exact rationals, not floats")
    return Fraction(x)


class PicardClass:
    """An exact-rational divisor class over the basis of one moduli space."""

    __slots__ = ("space", "genus", "_coeffs")

    def __init__(self, space: str, genus: int, coeffs: Mapping[str, object]):
        if genus < 1:
            raise ValueError(f"genus must be positive, got {genus}")
        labels = basis_labels(space, genus)
        unknown = set(coeffs) - set(labels)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} not in the {space} basis at genus {genus}")
        self.space = space
        self.genus = genus
        self._coeffs = {lab: _as_fraction(coeffs.get(lab, 0)) for lab in labels}

    @classmethod
    def on_A(cls, genus: int, L=0, D=0) -> "PicardClass":
        return cls(A_BAR, genus, {"L": L, "D": D})

    @classmethod
    def on_M(cls, genus: int, **coeffs) -> "PicardClass":
        return cls(M_BAR, genus, coeffs)

    @classmethod
    def on_R(cls, genus: int, **coeffs) -> "PicardClass":
        return cls(R_BAR, genus, coeffs)

    @property
    def coeffs(self) -> dict[str, Fraction]:
        return dict(self._coeffs)

    def coeff(self, label: str) -> Fraction:
        if label not in self._coeffs:
            raise KeyError(f"{label!r} is not in the {self.space} basis at genus {self.genus}")
        return self._coeffs[label]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self._coeffs.values())

    def _check_compatible(self, other: "PicardClass") -> None:
        if self.space != other.space or self.genus != other.genus:
            raise ValueError(
                f"incompatible classes: {self.space} genus {self.genus} vs {other.space} genus {other.genus}"
            )

    def __add__(self, other: "PicardClass") -> "PicardClass":
        self._check_compatible(other)
        return PicardClass(
            self.space, self.genus,
            {lab: self._coeffs[lab] + other._coeffs[lab] for lab in self._coeffs},
        )

    def __sub__(self, other: "PicardClass") -> "PicardClass":
        self._check_compatible(other)
        return PicardClass(
            self.space, self.genus,
            {lab: self._coeffs[lab] - other._coeffs[lab] for lab in self._coeffs},
        )

    def __neg__(self) -> "PicardClass":
        return PicardClass(self.space, self.genus, {lab: -c for lab, c in self._coeffs.items()})

    def __rmul__(self, scalar) -> "PicardClass":
        s = _as_fraction(scalar)
        return PicardClass(self.space, self.genus, {lab: s * c for lab, c in self._coeffs.items()})

    __mul__ = __rmul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PicardClass):
            return NotImplemented
        return (self.space, self.genus, self._coeffs) == (other.space, other.genus, other._coeffs)

    def __hash__(self):
        return hash((self.space, self.genus, tuple(sorted(self._coeffs.items()))))

    def render(self) -> str:
        """Compact text form, e.g. "108L-14D" or "lambda1-(1/4)delta0_ram"."""
        parts = []
        for lab, c in self._coeffs.items():
            if c == 0:
                continue
            name = _DISPLAY.get(lab, lab)
            mag = abs(c)
            if mag == 1:
                body = name
            elif mag.denominator == 1:
                body = f"{mag}{name}"
            else:
                body = f"({mag}){name}"
            sign = "-" if c < 0 else "+"
            if not parts and sign == "+":
                sign = ""
            parts.append(sign + body)
        return "".join(parts) if parts else "0"

    def __repr__(self):
        return f"PicardClass({self.space}, g={self.genus}, {self.render()})"

    def to_json_dict(self) -> dict:
        return {
            "space": self.space,
            "genus": self.genus,
            "coeffs": {
                lab: f"{c.numerator}/{c.denominator}" for lab, c in self._coeffs.items() if c != 0
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PicardClass":
        coeffs = {lab: Fraction(text) for lab, text in data["coeffs"].items()}
        return cls(data["space"], int(data["genus"]), coeffs)


def decimal_str(value: Fraction, digits: int = 10) -> str:
    """Decimal rendering of an exact rational to the given significance."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(value.numerator) / Decimal(value.denominator))


def mixed_str(value: Fraction) -> str:
    """Mixed rendering q+r/d, e.g. "7+4198/6269"."""
    q, r = divmod(value.numerator, value.denominator)
    if r == 0:
        return str(q)
    if q == 0:
        return f"{r}/{value.denominator}"
    return f"{q}+{r}/{value.denominator}"


@dataclass(frozen=True)
class SlopeValue:
    """An exact slope, or the distinguished infinite value."""

    value: Fraction | None = None

    @classmethod
    def finite(cls, value) -> "SlopeValue":
        return cls(_as_fraction(value))

    @classmethod
    def infinite(cls) -> "SlopeValue":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        if self.is_infinite:
            return "infinite"
        return f"{self.value.numerator}/{self.value.denominator}"

    def decimal(self, digits: int = 10) -> str:
        if self.is_infinite:
            return "infinite"
        return decimal_str(self.value, digits)


def _require_space(c: PicardClass, space: str) -> None:
    if c.space != space:
        raise ValueError(f"expected a class on {space}, got {c.space}")


def _require_supported(c: PicardClass, supported: tuple[str, ...]) -> None:
    for lab, coeff in c.coeffs.items():
        if lab not in supported and coeff != 0:
            raise ValueError(f"nonzero coefficient on unsupported basis element {lab!r}")


def pi_pullback(c: PicardClass) -> PicardClass:
    """Pullback under the degree 2^(2g)-1 covering of curve moduli.

    lambda1 -> lambda1 and delta0 -> delta0' + delta0'' + 2 delta0_ram,
    extended linearly; delta_i with i >= 1 are outside the modeled range.
    """
    _require_space(c, M_BAR)
    _require_supported(c, ("lambda1", "delta0"))
    lam = c.coeff("lambda1")
    d0 = c.coeff("delta0")
    return PicardClass.on_R(
        c.genus,
        lambda1=lam,
        delta0_prime=d0,
        delta0_double_prime=d0,
        delta0_ram=2 * d0,
    )


def pi_pushforward(c: PicardClass) -> PicardClass:
    """Pushforward under the covering: lambda1 -> (2^(2g)-1) lambda1,
    delta0' -> (2^(2g-1)-2) delta0, delta0'' -> delta0,
    delta0_ram -> 2^(2g-2) delta0."""
    _require_space(c, R_BAR)
    _require_supported(c, (R_LAMBDA1, R_DELTA0_PRIME, R_DELTA0_DOUBLE_PRIME, R_DELTA0_RAM))
    g = c.genus
    lam = (2 ** (2 * g) - 1) * c.coeff(R_LAMBDA1)
    d0 = (
        (2 ** (2 * g - 1) - 2) * c.coeff(R_DELTA0_PRIME)
        + c.coeff(R_DELTA0_DOUBLE_PRIME)
        + 2 ** (2 * g - 2) * c.coeff(R_DELTA0_RAM)
    )
    return PicardClass.on_M(g, lambda1=lam, delta0=d0)


def _require_prym_genus(g: int) -> None:
    if g < 6:
        raise ValueError(f"the Prym pullback rules hold for genus >= 6, got {g}")


def prym_pullback(c: PicardClass, g: int) -> PicardClass:
    """Pullback from A_bar at genus g-1 to R_bar at genus g:
    L -> lambda1 - (1/4) delta0_ram and D -> delta0'.

    The output never contains delta0'' or the reserved block.
    """
    _require_prym_genus(g)
    _require_space(c, A_BAR)
    if c.genus != g - 1:
        raise ValueError(f"input class must live at genus {g - 1}, got {c.genus}")
    a = c.coeff("L")
    b = c.coeff("D")
    return PicardClass.on_R(
        g,
        lambda1=a,
        delta0_ram=-Fraction(1, 4) * a,
        delta0_prime=b,
    )


def theta_null_class(g: int) -> PicardClass:
    """Class of the vanishing locus of the even theta-constant product:
    2^(g-2) (2^g+1) L - 2^(2g-5) D."""
    if g < 2:
        raise ValueError("theta-null class requires genus >= 2")
    return PicardClass.on_A(g, L=Fraction(2, 1) ** (g - 2) * (2 ** g + 1), D=-(Fraction(2, 1) ** (2 * g - 5)))


def andreotti_mayer_class(g: int) -> PicardClass:
    """Class of the non-theta-null component of the singular-theta locus."""
    if g < 4:
        raise ValueError("Andreotti-Mayer class requires genus >= 4")
    fact_g = 1
    for k in range(2, g + 1):
        fact_g *= k
    fact_g1 = fact_g * (g + 1)
    L = Fraction(fact_g1, 4) + Fraction(fact_g, 2) - 2 ** (g - 3) * (2 ** g + 1)
    D = Fraction(fact_g1, 24) - 2 ** (2 * g - 6)
    return PicardClass.on_A(g, L=L, D=-D)


def canonical_class_A(g: int) -> PicardClass:
    """(g+1) L - D."""
    if g < 2:
        raise ValueError("canonical class requires genus >= 2")
    return PicardClass.on_A(g, L=g + 1, D=-1)


def modular_form_class(weight, cusp_order, genus: int) -> PicardClass:
    """weight * L - cusp_order * D: modular forms of a given weight and
    boundary vanishing order."""
    w = _as_fraction(weight)
    c = _as_fraction(cusp_order)
    if w < 0 or c < 0:
        raise ValueError("weight and cusp order must be nonnegative")
    return PicardClass.on_A(genus, L=w, D=-c)


def slope_A(c: PicardClass) -> SlopeValue:
    """Slope a/b of an effective-form class aL - bD."""
    _require_space(c, A_BAR)
    a = c.coeff("L")
    b = -c.coeff("D")
    if a < 0 or b < 0:
        raise ValueError("slope is defined for classes aL - bD with a, b >= 0")
    if b == 0:
        return SlopeValue.infinite()
    return SlopeValue.finite(a / b)


def slope_M(c: PicardClass) -> SlopeValue:
    """min over boundary indices of a/b_i for a lambda1 - sum b_i delta_i."""
    _require_space(c, M_BAR)
    a = c.coeff("lambda1")
    bs = [-coeff for lab, coeff in c.coeffs.items() if lab != "lambda1"]
    if a < 0 or any(b < 0 for b in bs):
        raise ValueError("slope is defined for effective-form coefficients")
    positive = [b for b in bs if b > 0]
    if not positive:
        return SlopeValue.infinite()
    return SlopeValue.finite(min(a / b for b in positive))


def pi_star_p_star(c: PicardClass, g: int) -> PicardClass:
    """The composition pushforward-after-pullback from A_bar at genus g-1
    to M_bar at genus g."""
    return pi_pushforward(prym_pullback(c, g))


def derive_prym_pullback(g: int, use_closed_form: bool = False):
    """Solve the pullback ansatz p*L = a lambda1 - b delta0_ram, p*D = c delta0'
    against the counted boundary orders of the perp-even theta product.

    The counts come from perp_even_set and vanishing_count at the standard
    cusp positions (or from their closed forms when use_closed_form is set);
    nothing is hardcoded.  Returns (a, b, c) = (1, 1/4, 1).
    """
    _require_prym_genus(g)
    if use_closed_form:
        n_perp = 2 ** (g - 1) * (2 ** (g - 1) + 1)
        count_ram = 2 ** (g - 2) * (2 ** (g - 1) + 1)
        count_prime = 2 ** (2 * g - 3)
        count_eta = 0
    else:
        eta = standard_eta(g)
        mu_ram = Characteristic(g, 1 << (g - 1), 0)
        mu_prime = Characteristic(g, 0, 1 << (g - 2))
        if pair(mu_ram, eta) != 1 or pair(mu_prime, eta) != 0:
            raise AssertionError("standard cusp representatives are misconfigured")
        n_perp = len(perp_even_set(eta))
        count_ram = vanishing_count(eta, mu_ram)
        count_prime = vanishing_count(eta, mu_prime)
        count_eta = vanishing_count(eta, eta)

    # left side: the doubled theta-null class one genus down
    doubled = 2 * theta_null_class(g - 1)
    weight_lhs = doubled.coeff("L")
    cusp_lhs = -doubled.coeff("D")

    # right side: the product of n_perp theta constants of weight one half,
    # with order count/8 on delta0' and twice that on the ramified boundary
    weight_product = Fraction(n_perp, 2)
    order_ram = Fraction(2 * count_ram, 8)
    order_prime = Fraction(count_prime, 8)
    order_double_prime = Fraction(count_eta, 8)

    if order_double_prime != 0:
        raise ArithmeticError(
            "inconsistent system: the delta0'' order of the pullback must vanish, "
            f"got {order_double_prime}"
        )
    a = weight_product / weight_lhs
    b = order_ram / weight_lhs
    c = order_prime / cusp_lhs
    return a, b, c


@dataclass(frozen=True)
class ConsistencyWitness:
    """Scalar factorization witness for the composed theta-null image."""

    scalar: int
    cofactor: PicardClass

    def factored(self) -> PicardClass:
        return self.scalar * self.cofactor


def consistency_identity(g: int) -> ConsistencyWitness:
    """Check that the composed image of the theta-null class factors as

        (2^(g-1)+1) (2^g-1) (2^(g-3) (2^g+1) lambda1 - 2^(2g-6) delta0)

    and return the scalar and cofactor.  Raises on inequality.
    """
    _require_prym_genus(g)
    computed = pi_star_p_star(theta_null_class(g - 1), g)
    scalar = (2 ** (g - 1) + 1) * (2 ** g - 1)
    cofactor = PicardClass.on_M(
        g,
        lambda1=Fraction(2, 1) ** (g - 3) * (2 ** g + 1),
        delta0=-(Fraction(2, 1) ** (2 * g - 6)),
    )
    if computed != scalar * cofactor:
        raise ArithmeticError(
            f"composed theta-null image {computed.render()} does not factor as "
            f"{scalar} * ({cofactor.render()})"
        )
    return ConsistencyWitness(scalar=scalar, cofactor=cofactor)


def slope_lower_bound(g: int, s_M) -> Fraction:
    """Lower bound for slopes on A_bar at genus g-1 induced by a minimal
    slope s_M on M_bar at genus g:

        s >= s_M (2^(2g-1) - 2) / ((2^(2g) - 1) - s_M 2^(2g-4)).
    """
    _require_prym_genus(g)
    s = _as_fraction(s_M)
    if s < 0:
        raise ValueError("s_M must be nonnegative")
    numerator = s * (2 ** (2 * g - 1) - 2)
    denominator = (2 ** (2 * g) - 1) - s * 2 ** (2 * g - 4)
    if denominator <= 0:
        raise ValueError(
            f"s_M = {s} is too large: the composed class gives no information "
            f"(requires s_M < {Fraction(2 ** (2 * g) - 1, 2 ** (2 * g - 4))})"
        )
    return numerator / denominator
