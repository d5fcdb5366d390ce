"""Algebraic bookkeeping for sl(r+1|s+1): grading, weights, roots, labels."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np


class ModelError(ValueError):
    """Invalid rank, diagram or configuration data."""


@dataclass(frozen=True)
class Rank:
    r: int
    s: int

    def __post_init__(self):
        if self.r < 0 or self.s < 0:
            raise ModelError(f"rank entries must be nonnegative, got ({self.r},{self.s})")

    @property
    def n_letters(self) -> int:
        return self.r + self.s + 2

    @property
    def n_colors(self) -> int:
        return self.r + self.s + 1

    @property
    def letters(self) -> range:
        return range(1, self.n_letters + 1)

    @property
    def even_letters(self) -> range:
        return range(1, self.r + 2)

    @property
    def odd_letters(self) -> range:
        return range(self.r + 2, self.n_letters + 1)

    def parity(self, a: int) -> int:
        if not 1 <= a <= self.n_letters:
            raise ModelError(f"letter {a} outside J = {{1..{self.n_letters}}}")
        return 0 if a <= self.r + 1 else 1

    @property
    def grading(self) -> tuple[int, ...]:
        return tuple(self.parity(a) for a in self.letters)

    def t(self, a: int) -> int:
        """Sign t_a attached to color a."""
        return 1 if a <= self.r + 1 else -1

    def deg(self, a: int) -> int:
        return 1 if a == self.r + 1 else 0

    def __str__(self):
        return f"sl({self.r + 1}|{self.s + 1})"

    @classmethod
    def parse(cls, text: str) -> "Rank":
        try:
            r, s = (int(x) for x in text.split(","))
        except ValueError:
            raise ModelError(f"rank must look like 'r,s', got {text!r}") from None
        return cls(r, s)


@dataclass(frozen=True)
class WeightVector:
    """Weight in the redundant basis eps_1..eps_{r+1}, delta_1..delta_{s+1}."""

    eps: tuple[complex, ...]
    delta: tuple[complex, ...]

    @property
    def rank(self) -> Rank:
        return Rank(len(self.eps) - 1, len(self.delta) - 1)

    def _check(self, other: "WeightVector"):
        if len(self.eps) != len(other.eps) or len(self.delta) != len(other.delta):
            raise ModelError("weight vectors belong to different ranks")

    def __add__(self, other):
        self._check(other)
        return WeightVector(
            tuple(x + y for x, y in zip(self.eps, other.eps)),
            tuple(x + y for x, y in zip(self.delta, other.delta)),
        )

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, k):
        return WeightVector(tuple(k * x for x in self.eps), tuple(k * x for x in self.delta))

    def equivalent(self, other: "WeightVector", tol: float = 1e-12) -> bool:
        """Equality modulo the null vector sum(eps) - sum(delta)."""
        self._check(other)
        diff = self - other
        shift = diff.eps[0]
        return all(abs(x - shift) <= tol for x in diff.eps) and all(
            abs(y + shift) <= tol for y in diff.delta
        )

    @classmethod
    def zero(cls, rank: Rank) -> "WeightVector":
        return cls((0,) * (rank.r + 1), (0,) * (rank.s + 1))

    @classmethod
    def epsilon(cls, rank: Rank, i: int) -> "WeightVector":
        eps = [0] * (rank.r + 1)
        eps[i - 1] = 1
        return cls(tuple(eps), (0,) * (rank.s + 1))

    @classmethod
    def delta_(cls, rank: Rank, j: int) -> "WeightVector":
        delta = [0] * (rank.s + 1)
        delta[j - 1] = 1
        return cls((0,) * (rank.r + 1), tuple(delta))


def inner_product(x: WeightVector, y: WeightVector) -> complex:
    """(eps_i|eps_j) = delta_ij, (delta_i|delta_j) = -delta_ij, mixed pairs vanish."""
    x._check(y)
    return sum(a * b for a, b in zip(x.eps, y.eps)) - sum(a * b for a, b in zip(x.delta, y.delta))


def simple_roots(rank: Rank) -> list[WeightVector]:
    """Distinguished simple roots alpha_1..alpha_{r+s+1}."""
    e = lambda i: WeightVector.epsilon(rank, i)  # noqa: E731
    d = lambda j: WeightVector.delta_(rank, j)  # noqa: E731
    roots = [e(i) - e(i + 1) for i in range(1, rank.r + 1)]
    roots.append(e(rank.r + 1) - d(1))
    roots += [d(j) - d(j + 1) for j in range(1, rank.s + 1)]
    return roots


def gram_matrix(rank: Rank) -> np.ndarray:
    roots = simple_roots(rank)
    return np.array([[int(inner_product(a, b).real) for b in roots] for a in roots], dtype=int)


def rho(rank: Rank) -> WeightVector:
    r, s = rank.r, rank.s
    eps = tuple(Fraction(r - s - 2 * i + 1, 2) for i in range(1, r + 2))
    delta = tuple(Fraction(r + s - 2 * j + 3, 2) for j in range(1, s + 2))
    return WeightVector(eps, delta)


def omega(rank: Rank) -> WeightVector:
    return WeightVector((1,) * (rank.r + 1), (0,) * (rank.s + 1))


# -- diagrams -> weights ---------------------------------------------------

def _row(mu: Sequence[int], i: int) -> int:
    return mu[i - 1] if i <= len(mu) else 0


def _col(mu: Sequence[int], j: int) -> int:
    return sum(1 for m in mu if m >= j)


def check_hook(rank: Rank, mu: Sequence[int]):
    if _row(mu, rank.r + 2) > rank.s + 1:
        raise ModelError(
            f"diagram {tuple(mu)} violates the hook condition mu_{rank.r + 2} <= {rank.s + 1}"
        )


def eta(rank: Rank, mu: Sequence[int]) -> tuple[int, ...]:
    """eta_j = max(mu'_j - r - 1, 0) for j = 1..s+1."""
    return tuple(max(_col(mu, j) - rank.r - 1, 0) for j in range(1, rank.s + 2))


def highest_weight(rank: Rank, mu: Sequence[int], c: complex = 0) -> WeightVector:
    check_hook(rank, mu)
    eps = tuple(_row(mu, i) + c for i in range(1, rank.r + 2))
    return WeightVector(eps, eta(rank, mu))


@dataclass(frozen=True)
class KacDynkinLabel:
    b: tuple[complex, ...]

    def __getitem__(self, a: int):
        """1-based access, b[a] = b_a."""
        return self.b[a - 1]

    def __len__(self):
        return len(self.b)


def kac_dynkin_from_diagram(rank: Rank, mu: Sequence[int]) -> KacDynkinLabel:
    check_hook(rank, mu)
    r, s = rank.r, rank.s
    et = eta(rank, mu) + (0,)
    b = [_row(mu, j) - _row(mu, j + 1) for j in range(1, r + 1)]
    b.append(_row(mu, r + 1) + et[0])
    b += [et[j - 1] - et[j] for j in range(1, s + 1)]
    return KacDynkinLabel(tuple(b))


def kac_dynkin_from_weight(rank: Rank, weight: WeightVector) -> KacDynkinLabel:
    """b_a = t_a (Lambda|alpha_a)."""
    return KacDynkinLabel(
        tuple(rank.t(a) * inner_product(weight, alpha) for a, alpha in enumerate(simple_roots(rank), 1))
    )


def typicality_margin(rank: Rank, mu: Sequence[int], c: complex = 0) -> complex:
    """mu_{r+1} + eta_{s+1} - s + c; positive (real c) means typical."""
    check_hook(rank, mu)
    return _row(mu, rank.r + 1) + eta(rank, mu)[-1] - rank.s + c


def is_typical(rank: Rank, mu: Sequence[int], c: float = 0) -> bool:
    margin = typicality_margin(rank, mu, c)
    if isinstance(margin, complex) and margin.imag != 0:
        raise ModelError("typicality is only classified for real c")
    return margin.real > 0


def typical_dimension(rank: Rank, label: KacDynkinLabel):
    """Kac dimension formula; exact integer for integer labels."""
    if len(label) != rank.n_colors:
        raise ModelError(f"label has {len(label)} entries, expected {rank.n_colors}")
    used = [x for a, x in enumerate(label.b, 1) if a != rank.r + 1]
    exact = all(isinstance(x, (int, Fraction)) for x in used)
    one = Fraction(1) if exact else 1.0
    value = one * 2 ** ((rank.r + 1) * (rank.s + 1))

    def block(lo, hi):
        nonlocal value
        for i in range(lo, hi + 1):
            for j in range(i, hi + 1):
                value *= (sum(label[k] for k in range(i, j + 1)) + j - i + 1) / (one * (j - i + 1))

    block(1, rank.r)
    block(rank.r + 2, rank.r + rank.s + 1)
    if exact and value.denominator == 1:
        return int(value)
    return value


# -- model configuration ---------------------------------------------------

@dataclass(frozen=True)
class Site:
    w: complex
    b: complex


@dataclass(frozen=True)
class ModelConfig:
    rank: Rank
    q: complex
    sites: tuple[Site, ...] = ()
    allow_unit_q: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "sites", tuple(self.sites))
        if abs(abs(self.q) - 1.0) < 1e-12 and not self.allow_unit_q:
            raise ModelError("q must be generic: |q| = 1 is rejected (pass allow_unit_q to override)")
        if abs(self.q - 1) < 1e-14 or abs(self.q + 1) < 1e-14:
            raise ModelError("q = +-1 makes the q-bracket singular")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def t(self) -> tuple[int, ...]:
        return tuple(self.rank.t(a) for a in range(1, self.rank.n_colors + 1))

    @property
    def log_q(self) -> complex:
        return cmath.log(self.q)

    @classmethod
    def random(cls, rank: Rank, rng: np.random.Generator, n_sites: int = 1, spread: float = 1.0):
        """Generic q (modulus in [1.1, 2], uniform phase) and random complex sites."""
        q = random_q(rng)
        sites = tuple(
            Site(complex(*rng.uniform(-spread, spread, 2)), complex(*rng.uniform(-spread, spread, 2)))
            for _ in range(n_sites)
        )
        return cls(rank, q, sites)


def random_q(rng: np.random.Generator) -> complex:
    return cmath.rect(rng.uniform(1.1, 2.0), rng.uniform(-math.pi, math.pi))
