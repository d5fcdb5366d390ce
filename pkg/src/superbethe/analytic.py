"""Numeric kernel: q-bracket, Q-functions, vacuum parts and box functions.

Every eigenvalue object is a signed sum of products of ``Q_b(u + shift)`` and
``psi_a(u + shift)``.  Such products are kept symbolically as ``Monomial``
objects whose shifts are integers plus an integer multiple of the deformation
parameter ``c``; numeric evaluation is vectorized over arrays of ``u``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Protocol, Sequence

import numpy as np

from .model import ModelConfig, ModelError, Rank

DISTINCT_TOL = 1e-9
POLE_PRECISION = 1e-13
Z_MEMO_SIZE = 4096


class PoleProximityError(ArithmeticError):
    """A box function was evaluated on (or numerically at) one of its poles."""


class ContourError(ArithmeticError):
    """Non-finite value met on an integration contour."""


def bracket(u, q: complex):
    """[u] = (q^u - q^-u)/(q - q^-1) with the principal branch of log q."""
    log_q = cmath.log(q)
    u = np.asarray(u, dtype=complex)
    qu = np.exp(u * log_q)
    return (qu - 1 / qu) / (q - 1 / q)


# -- symbolic shifts and monomials ----------------------------------------------

class Shift(NamedTuple):
    """The affine shift ``k + m*c``."""

    k: int
    m: int = 0

    def __add__(self, other):
        if isinstance(other, int):
            return Shift(self.k + other, self.m)
        return Shift(self.k + other.k, self.m + other.m)

    def __neg__(self):
        return Shift(-self.k, -self.m)

    def value(self, c: complex = 0) -> complex:
        return self.k + self.m * c if self.m else self.k

    def format(self, var: str = "u") -> str:
        text = var
        if self.k:
            text += f"{self.k:+d}"
        if self.m:
            text += {1: "+c", -1: "-c"}.get(self.m, f"{self.m:+d}c")
        return text


@dataclass(frozen=True)
class Monomial:
    """sign * prod Q_b(u+shift)^p * prod psi_a(u+shift)^p.

    ``factors`` holds sorted ``(kind, index, shift, power)`` entries with
    kind ``"Q"`` or ``"psi"`` and nonzero powers.
    """

    sign: int = 1
    factors: tuple = ()

    @classmethod
    def build(cls, sign: int, items: Iterable[tuple[str, int, Shift, int]]) -> "Monomial":
        acc: dict[tuple[str, int, Shift], int] = {}
        for kind, index, shift, power in items:
            key = (kind, index, shift)
            acc[key] = acc.get(key, 0) + power
        factors = tuple(sorted((k[0], k[1], k[2], p) for k, p in acc.items() if p))
        return cls(sign, factors)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial.build(self.sign * other.sign, self.factors + other.factors)

    def shifted(self, by: Shift) -> "Monomial":
        return Monomial(self.sign, tuple(sorted((k, i, s + by, p) for k, i, s, p in self.factors)))

    def with_sign(self, sign: int) -> "Monomial":
        return Monomial(self.sign * sign, self.factors)

    def drop_psi(self, trivial: Callable[[int], bool]) -> "Monomial":
        """Remove psi factors that are identically 1."""
        return Monomial(self.sign, tuple(f for f in self.factors if not (f[0] == "psi" and trivial(f[1]))))

    def denominators(self, kind: str = "Q") -> list[tuple[int, Shift]]:
        return [(i, s) for k, i, s, p in self.factors if k == kind and p < 0]

    def format(self) -> str:
        def fmt(k, i, s):
            name = "Q" if k == "Q" else "psi"
            return f"{name}_{i}({s.format()})"

        def product(items):
            out = []
            for k, i, s, p in items:
                out += [fmt(k, i, s)] * abs(p)
            return " ".join(out)

        num = [f for f in self.factors if f[3] > 0]
        den = [f for f in self.factors if f[3] < 0]
        body = product(num) or "1"
        if den:
            body += " / (" + product(den) + ")"
        return ("+ " if self.sign > 0 else "- ") + body


# -- Bethe roots ----------------------------------------------------------------

@dataclass(frozen=True)
class BetheState:
    """Bethe roots per color 1..n_colors (index 0 of ``roots`` is color 1)."""

    roots: tuple[tuple[complex, ...], ...]
    tol: float = field(default=DISTINCT_TOL, compare=False)

    def __post_init__(self):
        roots = tuple(tuple(complex(x) for x in color) for color in self.roots)
        object.__setattr__(self, "roots", roots)
        for a, color in enumerate(roots, 1):
            for i in range(len(color)):
                for j in range(i + 1, len(color)):
                    if abs(color[i] - color[j]) < self.tol:
                        raise ModelError(f"color {a} roots {color[i]} and {color[j]} collide")

    @property
    def n_colors(self) -> int:
        return len(self.roots)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.roots)

    def color(self, a: int) -> tuple[complex, ...]:
        return self.roots[a - 1]

    def flat(self) -> np.ndarray:
        return np.array([x for color in self.roots for x in color], dtype=complex)

    def with_flat(self, values: Sequence[complex]) -> "BetheState":
        out, pos = [], 0
        for n in self.counts:
            out.append(tuple(values[pos : pos + n]))
            pos += n
        return BetheState(tuple(out), self.tol)

    def perturbed(self, delta: complex = 1e-3) -> "BetheState":
        return BetheState(tuple(tuple(x + delta for x in color) for color in self.roots), self.tol)

    def canonical(self) -> "BetheState":
        key = lambda z: (round(z.real, 9), round(z.imag, 9))  # noqa: E731
        return BetheState(tuple(tuple(sorted(color, key=key)) for color in self.roots), self.tol)

    @classmethod
    def empty(cls, n_colors: int) -> "BetheState":
        return cls(((),) * n_colors)

    @classmethod
    def random(cls, counts: Sequence[int], rng: np.random.Generator, spread: float = 1.0) -> "BetheState":
        return cls(
            tuple(
                tuple(complex(x, y) for x, y in rng.uniform(-spread, spread, (n, 2)))
                for n in counts
            )
        )


# -- vacuum parts -----------------------------------------------------------------

class Vacuum(Protocol):
    def psi(self, a: int, u: np.ndarray) -> np.ndarray: ...

    def critical_points(self, a: int) -> list[complex]: ...


@dataclass(frozen=True)
class RestrictedVacuum:
    """psi_a for quantum spaces with Kac-Dynkin labels b_j delta_{a,r+1}."""

    config: ModelConfig

    def psi(self, a: int, u):
        rank = self.config.rank
        u = np.asarray(u, dtype=complex)
        if rank.parity(a) == 0:
            return np.ones_like(u)
        out = np.ones_like(u)
        for site in self.config.sites:
            x = u - site.w + rank.r + 1
            out = out * bracket(x - site.b, self.config.q) / bracket(x + site.b, self.config.q)
        return out

    def trivial(self, a: int) -> bool:
        """psi_a is identically 1 on the even letters."""
        return self.config.rank.parity(a) == 0

    def critical_points(self, a: int) -> list[complex]:
        rank = self.config.rank
        if rank.parity(a) == 0:
            return []
        return [site.w - rank.r - 1 + sgn * site.b for site in self.config.sites for sgn in (1, -1)]


@dataclass(frozen=True)
class VacuumHook:
    """User-supplied vacuum part for general quantum spaces."""

    func: Callable[[int, np.ndarray], np.ndarray]
    critical: Callable[[int], list[complex]] = lambda a: []
    trivial_colors: tuple[int, ...] = ()

    def psi(self, a, u):
        return np.asarray(self.func(a, np.asarray(u, dtype=complex)), dtype=complex)

    def critical_points(self, a):
        return list(self.critical(a))

    def trivial(self, a) -> bool:
        return a in self.trivial_colors


# -- box functions --------------------------------------------------------------

@dataclass(frozen=True)
class BoxModel:
    """Grading plus the Q/psi content of each box z(a; u)."""

    grading: tuple[int, ...]
    boxes: tuple[Monomial, ...]  # index a-1, unsigned, shifts relative to u
    n_colors: int

    def box(self, a: int) -> Monomial:
        return self.boxes[a - 1]

    def sign(self, a: int) -> int:
        return -1 if self.grading[a - 1] else 1

    @property
    def n_letters(self) -> int:
        return len(self.grading)


def distinguished_boxes(rank: Rank) -> BoxModel:
    """z(a; u) for the distinguished grading; Q_0 = Q_{r+s+2} = 1."""
    r, n = rank.r, rank.n_letters
    boxes = []
    for a in rank.letters:
        if rank.parity(a) == 0:
            shifts = [(a - 1, a + 1, 1), (a, a - 2, 1), (a - 1, a - 1, -1), (a, a, -1)]
        else:
            shifts = [
                (a - 1, 2 * r - a + 1, 1),
                (a, 2 * r - a + 4, 1),
                (a - 1, 2 * r - a + 3, -1),
                (a, 2 * r - a + 2, -1),
            ]
        items = [("psi", a, Shift(0), 1)]
        items += [("Q", b, Shift(k), p) for b, k, p in shifts if 0 < b < n]
        boxes.append(Monomial.build(1, items))
    return BoxModel(rank.grading, tuple(boxes), rank.n_colors)


class EvalContext:
    """Evaluation environment: model configuration, Bethe roots, vacuum, boxes."""

    def __init__(
        self,
        config: ModelConfig,
        state: BetheState | None = None,
        vacuum: Vacuum | None = None,
        boxes: BoxModel | None = None,
        precision: float = POLE_PRECISION,
    ):
        self.config = config
        self.rank = config.rank
        self.boxes = boxes if boxes is not None else distinguished_boxes(config.rank)
        self.state = state if state is not None else BetheState.empty(self.boxes.n_colors)
        if self.state.n_colors != self.boxes.n_colors:
            raise ModelError(
                f"state has {self.state.n_colors} colors, model needs {self.boxes.n_colors}"
            )
        self.vacuum = vacuum if vacuum is not None else RestrictedVacuum(config)
        self.precision = precision
        self.q = config.q
        self.log_q = cmath.log(config.q)
        self._roots = [np.asarray(c, dtype=complex) for c in self.state.roots]
        self._z_memo: dict = {}

    def with_state(self, state: BetheState) -> "EvalContext":
        return EvalContext(self.config, state, self.vacuum, self.boxes, self.precision)

    @property
    def period(self) -> complex:
        """[u + period] = -[u]."""
        return 1j * math.pi / self.log_q

    def bracket(self, u):
        return bracket(u, self.q)

    def Q(self, b: int, u):
        if not 0 <= b <= self.boxes.n_colors + 1:
            raise ModelError(f"color {b} out of range 0..{self.boxes.n_colors + 1}")
        u = np.asarray(u, dtype=complex)
        if b == 0 or b == self.boxes.n_colors + 1 or not len(self._roots[b - 1]):
            return np.ones_like(u)
        return np.prod(self.bracket(u[..., None] - self._roots[b - 1]), axis=-1)

    def phi(self, u):
        u = np.asarray(u, dtype=complex)
        out = np.ones_like(u)
        for site in self.config.sites:
            out = out * self.bracket(u - site.w)
        return out

    def psi(self, a: int, u):
        return self.vacuum.psi(a, u)

    def eval_monomial(self, mono: Monomial, u, c: complex = 0, cache: dict | None = None):
        u = np.asarray(u, dtype=complex)
        cache = {} if cache is None else cache
        out = np.full(u.shape, mono.sign, dtype=complex)
        for kind, index, shift, power in mono.factors:
            key = (kind, index, shift.value(c))
            val = cache.get(key)
            if val is None:
                x = u + key[2]
                val = self.Q(index, x) if kind == "Q" else self.psi(index, x)
                cache[key] = val
            out = out * (val if power == 1 else val**power)
        return out

    def z(self, a: int, u):
        """Vectorized box function without pole checks."""
        return self.eval_monomial(self.boxes.box(a), u)

    def z_all(self, u) -> np.ndarray:
        """Array (n_letters, *u.shape) of signed boxes (-1)^p(a) z(a; u).

        Results are memoized per point set, since tableau sums over many
        shapes revisit the same shifted points.
        """
        u = np.asarray(u, dtype=complex)
        key = (u.shape, u.tobytes())
        hit = self._z_memo.get(key)
        if hit is not None:
            return hit
        cache: dict = {}
        out = np.stack(
            [self.boxes.sign(a) * self.eval_monomial(self.boxes.box(a), u, cache=cache)
             for a in range(1, self.boxes.n_letters + 1)]
        )
        out.setflags(write=False)
        if len(self._z_memo) >= Z_MEMO_SIZE:
            self._z_memo.clear()
        self._z_memo[key] = out
        return out

    def singular_points(self, kind: str, index: int) -> list[complex]:
        """Points p with the factor ``kind_index(u)`` singular or vanishing at u = p (mod period)."""
        if kind == "Q":
            return list(self._roots[index - 1]) if 0 < index <= self.boxes.n_colors else []
        return self.vacuum.critical_points(index)

    def separation(self, catalog, u) -> np.ndarray:
        """Smallest normalized bracket modulus |q^x - q^-x| / (|q^x| + |q^-x|) over a catalog.

        Zero exactly on a candidate singularity, one far away from all of them;
        used to keep random identity-test points off near-cancelling poles.
        """
        u = np.asarray(u, dtype=complex)
        out = np.ones(u.shape)
        for kind, index, shift in catalog:
            for p in self.singular_points(kind, index):
                e = np.exp((u + shift - p) * self.log_q)
                out = np.minimum(out, np.abs(e - 1 / e) / (np.abs(e) + np.abs(1 / e)))
        return out

    def near_zero(self, b: int, x: complex) -> bool:
        """True when Q_b(x) vanishes to within the pole-proximity threshold."""
        for root in self._roots[b - 1] if 0 < b <= self.boxes.n_colors else ():
            p = cmath.exp((x - root) * self.log_q)
            if abs(p - 1 / p) < self.precision * (abs(p) + abs(1 / p)):
                return True
        return False


# -- scalar operations -----------------------------------------------------------

def q_function(a: int, u, ctx: EvalContext):
    return ctx.Q(a, u)


def phi(u, ctx: EvalContext):
    return ctx.phi(u)


def psi(a: int, u, ctx: EvalContext):
    return ctx.psi(a, u)


def z_box(a: int, u: complex, ctx: EvalContext) -> complex:
    """Box function z(a; u); raises PoleProximityError on a Q pole."""
    for kind, index, shift, power in ctx.boxes.box(a).factors:
        if kind == "Q" and power < 0 and ctx.near_zero(index, u + shift.k):
            raise PoleProximityError(f"z({a}; {u}) sits on a zero of Q_{index}")
    return complex(ctx.z(a, u))


def contour_values(f: Callable, center: complex, radius: float, samples: int = 32):
    if radius <= 0:
        raise ValueError("radius must be positive")
    if samples < 16:
        raise ValueError("at least 16 contour samples are required")
    phase = np.exp(2j * np.pi * np.arange(samples) / samples)
    values = np.asarray(f(center + radius * phase), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ContourError(f"non-finite value on contour |u-{center}|={radius}")
    return phase, values


def contour_residue(f: Callable, center: complex, radius: float, samples: int = 32) -> complex:
    """(1/2 pi i) times the contour integral of f, by the trapezoidal rule."""
    phase, values = contour_values(f, center, radius, samples)
    return complex(radius * np.mean(values * phase))


def relative_residue(f: Callable, center: complex, radius: float, samples: int = 32):
    """Residue and its size relative to radius * max|f| on the contour.

    A simple pole that survives gives a ratio of order one; an analytic
    point gives rounding noise.
    """
    phase, values = contour_values(f, center, radius, samples)
    res = complex(radius * np.mean(values * phase))
    scale = radius * float(np.max(np.abs(values)))
    return res, (abs(res) / scale if scale > 0 else 0.0)
