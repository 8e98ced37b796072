"""Theta characteristics over F2: parity, symplectic pairing, perpendicular
sets, vanishing-order counts, and orbit closure under transvections.

A characteristic is a pair of length-g bit rows [eps; delta].  Rows are packed
into integers MSB-first, so entry 1 of a row is the highest bit and the
integer order of (eps, delta) agrees with the string order of "eps;delta".
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

LABEL_FIXED = "fixed-point"
LABEL_PERP = "perp"
LABEL_NONPERP = "non-perp"

# Orbit closure allocates a visited bitmap of size 4**g.
ORBIT_MAX_GENUS = 6


class ResourceLimitError(RuntimeError):
    """Raised when an enumeration would exceed its configured bound."""


@dataclass(frozen=True, order=True)
class Characteristic:
    """A two-torsion point [eps; delta] with rows in (Z/2Z)^g."""

    genus: int
    eps: int
    delta: int

    def __post_init__(self):
        if self.genus < 1:
            raise ValueError(f"genus must be positive, got {self.genus}")
        top = 1 << self.genus
        if not (0 <= self.eps < top and 0 <= self.delta < top):
            raise ValueError(f"row out of range for genus {self.genus}")

    @classmethod
    def from_bits(cls, eps_bits: Sequence[int], delta_bits: Sequence[int]) -> "Characteristic":
        if len(eps_bits) != len(delta_bits) or not eps_bits:
            raise ValueError("rows must be nonempty and of equal length")
        g = len(eps_bits)
        eps = sum((int(b) & 1) << (g - 1 - i) for i, b in enumerate(eps_bits))
        delta = sum((int(b) & 1) << (g - 1 - i) for i, b in enumerate(delta_bits))
        return cls(g, eps, delta)

    @classmethod
    def from_string(cls, text: str) -> "Characteristic":
        """Parse "000000;100000" (top row first)."""
        try:
            top, bottom = text.strip().split(";")
        except ValueError:
            raise ValueError(f"expected 'eps;delta', got {text!r}") from None
        if len(top) != len(bottom) or not top:
            raise ValueError(f"rows must be nonempty and of equal length: {text!r}")
        if set(top + bottom) - {"0", "1"}:
            raise ValueError(f"rows must be binary strings: {text!r}")
        return cls(len(top), int(top, 2), int(bottom, 2))

    @classmethod
    def from_index(cls, genus: int, index: int) -> "Characteristic":
        """Inverse of .index: index = eps * 2^g + delta."""
        return cls(genus, index >> genus, index & ((1 << genus) - 1))

    @property
    def index(self) -> int:
        return (self.eps << self.genus) | self.delta

    def eps_bits(self) -> tuple[int, ...]:
        g = self.genus
        return tuple((self.eps >> (g - 1 - i)) & 1 for i in range(g))

    def delta_bits(self) -> tuple[int, ...]:
        g = self.genus
        return tuple((self.delta >> (g - 1 - i)) & 1 for i in range(g))

    def is_zero(self) -> bool:
        return self.eps == 0 and self.delta == 0

    def __add__(self, other: "Characteristic") -> "Characteristic":
        if self.genus != other.genus:
            raise ValueError("genus mismatch")
        return Characteristic(self.genus, self.eps ^ other.eps, self.delta ^ other.delta)

    def to_string(self) -> str:
        g = self.genus
        return f"{self.eps:0{g}b};{self.delta:0{g}b}"

    def __str__(self) -> str:
        return self.to_string()


def parity(m: Characteristic) -> int:
    """0 for even characteristics (eps . delta = 0 mod 2), 1 for odd."""
    return (m.eps & m.delta).bit_count() & 1


def pair(m: Characteristic, n: Characteristic) -> int:
    """Symplectic pairing eps_m . delta_n + eps_n . delta_m mod 2."""
    if m.genus != n.genus:
        raise ValueError(f"genus mismatch: {m.genus} != {n.genus}")
    return ((m.eps & n.delta).bit_count() + (n.eps & m.delta).bit_count()) & 1


def standard_eta(g: int) -> Characteristic:
    """The distinguished cusp point [0...0; 10...0]."""
    return Characteristic(g, 0, 1 << (g - 1))


def all_characteristics(g: int) -> Iterator[Characteristic]:
    """All 4^g characteristics in canonical (eps, delta) order."""
    for idx in range(1 << (2 * g)):
        yield Characteristic.from_index(g, idx)


def even_characteristics(g: int) -> tuple[Characteristic, ...]:
    return tuple(m for m in all_characteristics(g) if parity(m) == 0)


def odd_characteristics(g: int) -> tuple[Characteristic, ...]:
    return tuple(m for m in all_characteristics(g) if parity(m) == 1)


@lru_cache(maxsize=64)
def _parity_table(g: int) -> np.ndarray:
    """parity_table[v] = popcount(v) mod 2 for v < 2^g (read-only)."""
    v = np.arange(1 << g, dtype=np.uint32)
    t = np.zeros(1 << g, dtype=np.uint8)
    while v.any():
        t ^= (v & 1).astype(np.uint8)
        v >>= 1
    t.setflags(write=False)
    return t


def _split_indices(g: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return idx >> g, idx & ((1 << g) - 1)


def _pair_with(g: int, idx: np.ndarray, other: Characteristic) -> np.ndarray:
    """Vectorized pairing of packed indices against a fixed characteristic."""
    par = _parity_table(g)
    eps, delta = _split_indices(g, idx)
    return par[eps & other.delta] ^ par[delta & other.eps]


@lru_cache(maxsize=4096)
def _perp_even_indices(g: int, eta_idx: int) -> np.ndarray:
    """Sorted packed indices of even m with pair(m, eta) = 0."""
    eta = Characteristic.from_index(g, eta_idx)
    par = _parity_table(g)
    idx = np.arange(1 << (2 * g), dtype=np.int64)
    eps, delta = _split_indices(g, idx)
    even = par[eps & delta] == 0
    perp = _pair_with(g, idx, eta) == 0
    out = idx[even & perp]
    out.setflags(write=False)
    return out


def _require_nonzero(name: str, m: Characteristic) -> None:
    if m.is_zero():
        raise ValueError(f"{name} must be a nonzero two-torsion point")


def perp_even_set(eta: Characteristic, g: int | None = None) -> tuple[Characteristic, ...]:
    """All even m with pair(m, eta) = 0, in canonical order.

    For even eta the set has 2^(g-1) (2^(g-1) + 1) elements; for odd eta it
    has 4^(g-1).
    """
    _require_nonzero("eta", eta)
    if g is not None and g != eta.genus:
        raise ValueError(f"genus mismatch: {g} != {eta.genus}")
    g = eta.genus
    return tuple(Characteristic.from_index(g, int(i)) for i in _perp_even_indices(g, eta.index))


def vanishing_count(eta: Characteristic, mu: Characteristic, g: int | None = None) -> int:
    """Number of even m with pair(m, eta) = 0 and pair(m, mu) = 1.

    The "pair(m, mu) = 1" criterion reads the cusp coordinate invariantly:
    at the standard cusp mu = [0...0;10...0] it agrees with the first
    top-row entry of m.  For even eta the count is 2^(g-2) (2^(g-1) + 1)
    when pair(mu, eta) = 1, 2^(2g-3) when pair(mu, eta) = 0 with mu even
    and mu != eta, and 0 when mu = eta.
    """
    _require_nonzero("eta", eta)
    _require_nonzero("mu", mu)
    if eta.genus != mu.genus:
        raise ValueError(f"genus mismatch: {eta.genus} != {mu.genus}")
    if g is not None and g != eta.genus:
        raise ValueError(f"genus mismatch: {g} != {eta.genus}")
    g = eta.genus
    idx = _perp_even_indices(g, eta.index)
    return int(np.count_nonzero(_pair_with(g, idx, mu)))


@dataclass(frozen=True)
class Transvection:
    """The map x -> x + pair(x, v) v; an involution preserving the pairing."""

    v: Characteristic

    @property
    def genus(self) -> int:
        return self.v.genus

    def __call__(self, x: Characteristic) -> Characteristic:
        if pair(x, self.v):
            return x + self.v
        return x


@dataclass(frozen=True)
class OrbitPartition:
    """Orbits of the nonzero two-torsion points under a stabilizer subgroup."""

    genus: int
    orbits: tuple[tuple[Characteristic, ...], ...]
    invariant_labels: tuple[str, ...]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(o) for o in self.orbits)

    def to_json_dict(self) -> dict:
        return {
            "genus": self.genus,
            "orbits": [
                {"label": label, "size": len(orbit), "members": [str(m) for m in orbit]}
                for label, orbit in zip(self.invariant_labels, self.orbits)
            ],
        }


def _orbit_closure(g: int, seed: int, gens: np.ndarray, visited: np.ndarray) -> np.ndarray:
    """BFS closure of one point under an array of transvection vectors."""
    par = _parity_table(g)
    mask = (1 << g) - 1
    g_eps, g_delta = gens >> g, gens & mask
    members = []
    frontier = np.array([seed], dtype=np.int64)
    visited[seed] = True
    while frontier.size:
        members.append(frontier)
        f_eps, f_delta = frontier >> g, frontier & mask
        hit = par[f_eps[:, None] & g_delta[None, :]] ^ par[f_delta[:, None] & g_eps[None, :]]
        images = np.unique(frontier[:, None] ^ (gens[None, :] * hit))
        frontier = images[~visited[images]]
        visited[frontier] = True
    return np.sort(np.concatenate(members))


def stabilizer_orbits(eta: Characteristic, g: int | None = None) -> OrbitPartition:
    """Partition the nonzero points by closure under {T_v : pair(v, eta) = 0}.

    Exactly three orbits are expected: {eta}, the rest of the perp
    hyperplane, and the non-perp complement, of sizes 1, 2^(2g-1) - 2 and
    2^(2g-1).  The three-orbit structure is checked, not assumed.
    """
    _require_nonzero("eta", eta)
    if g is not None and g != eta.genus:
        raise ValueError(f"genus mismatch: {g} != {eta.genus}")
    g = eta.genus
    if g < 2:
        raise ValueError("orbit partition requires genus >= 2")
    if g > ORBIT_MAX_GENUS:
        raise ResourceLimitError(f"orbit closure over 4^{g} points exceeds the genus<={ORBIT_MAX_GENUS} bound")

    total = 1 << (2 * g)
    idx = np.arange(total, dtype=np.int64)
    gens = idx[(_pair_with(g, idx, eta) == 0) & (idx != 0)]

    visited = np.zeros(total, dtype=bool)
    visited[0] = True
    raw_orbits = []
    for seed in range(1, total):
        if not visited[seed]:
            raw_orbits.append(_orbit_closure(g, seed, gens, visited))

    if len(raw_orbits) != 3:
        raise ArithmeticError(f"expected 3 orbits under the stabilizer action, found {len(raw_orbits)}")

    def label_of(orbit: np.ndarray) -> str:
        reps = np.asarray(orbit)
        pairings = _pair_with(g, reps, eta)
        if not (pairings == pairings[0]).all():
            raise ArithmeticError("orbit is not constant under the pairing invariant")
        if pairings[0] == 1:
            return LABEL_NONPERP
        if orbit.size == 1 and int(orbit[0]) == eta.index:
            return LABEL_FIXED
        if np.isin(eta.index, orbit):
            raise ArithmeticError("eta is not a fixed point of its stabilizer")
        return LABEL_PERP

    by_label = {label_of(orbit): orbit for orbit in raw_orbits}
    if set(by_label) != {LABEL_FIXED, LABEL_PERP, LABEL_NONPERP}:
        raise ArithmeticError(f"unexpected orbit labels: {sorted(by_label)}")

    ordered_labels = (LABEL_FIXED, LABEL_PERP, LABEL_NONPERP)
    orbits = tuple(
        tuple(Characteristic.from_index(g, int(i)) for i in by_label[label])
        for label in ordered_labels
    )
    return OrbitPartition(genus=g, orbits=orbits, invariant_labels=ordered_labels)


def sj_pair(n: Characteristic) -> tuple[Characteristic, Characteristic]:
    """Lift a genus g-1 characteristic to the pair (j(n), j(n) + eta_std).

    j prepends a zero entry to both rows; eta_std = [0...0;10...0] at genus
    g.  Both outputs pair to zero with eta_std and inherit the parity of n.
    """
    g = n.genus + 1
    lifted = Characteristic(g, n.eps, n.delta)
    return lifted, lifted + standard_eta(g)
