"""Eigenvalue formulas in dressed vacuum form.

All constructors return an ``EigenFunction``: a vectorized map ``u -> value``
that also knows its candidate-pole catalog and, when cheap enough, its
term-by-term expansion into ``Monomial`` objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .analytic import EvalContext, Monomial, Shift
from .diagrams import (
    CELL_CAP,
    SkewShape,
    conjugate,
    count_tableaux,
    enumerate_tableaux,
    feasible_letters,
    part,
    partition,
    transfer_sum,
)
from .model import ModelError, Rank

Catalog = frozenset  # of (kind, index, shift value)


class CapExceeded(ModelError):
    """Tableau-sum construction refused for an oversized shape."""


@dataclass
class EigenFunction:
    label: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    catalog_fn: Callable[[], Catalog]
    expand_fn: Callable[[], list[Monomial]] | None = None
    c: complex = 0
    terms: int | None = None
    flags: tuple[str, ...] = ()
    magnitude_fn: Callable[[np.ndarray], np.ndarray] | None = None
    _catalog: Catalog | None = field(default=None, repr=False)

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        flat = np.atleast_1d(u).ravel()
        out = np.broadcast_to(self.evaluate(flat), flat.shape)
        return out.reshape(u.shape) if u.shape else complex(out[0])

    def magnitude(self, u) -> np.ndarray:
        """Sum of the moduli of the terms (the floating-point scale of the sum)."""
        if self.magnitude_fn is None:
            raise ModelError(f"{self.label} has no term-wise magnitude")
        u = np.atleast_1d(np.asarray(u, dtype=complex)).ravel()
        return np.broadcast_to(self.magnitude_fn(u), u.shape)

    def catalog(self) -> Catalog:
        if self._catalog is None:
            self._catalog = frozenset(self.catalog_fn())
        return self._catalog

    def expansion(self) -> list[Monomial]:
        if self.expand_fn is None:
            raise ModelError(f"{self.label} has no term expansion (determinant route)")
        return self.expand_fn()

    def shifted(self, by: Shift) -> "EigenFunction":
        """u -> f(u + by)."""
        delta = by.value(self.c)
        expand = self.expand_fn
        return EigenFunction(
            label=f"{self.label}[{by.format()}]",
            evaluate=lambda u, f=self.evaluate: f(u + delta),
            catalog_fn=lambda: {(k, i, s + delta) for k, i, s in self.catalog()},
            expand_fn=None if expand is None else (lambda: [m.shifted(by) for m in expand()]),
            c=self.c,
            terms=self.terms,
            flags=self.flags,
            magnitude_fn=None if self.magnitude_fn is None else (lambda u, g=self.magnitude_fn: g(u + delta)),
        )


def _catalog_of(monomials: Iterable[Monomial], c: complex) -> set:
    out = set()
    for m in monomials:
        for kind, index, shift, power in m.factors:
            if kind == "psi" or power < 0:
                out.add((kind, index, shift.value(c)))
    return out


def monomial_function(mono: Monomial, ctx: EvalContext, c: complex = 0, label: str = "") -> EigenFunction:
    return EigenFunction(
        label=label or mono.format(),
        evaluate=lambda u: ctx.eval_monomial(mono, u, c),
        catalog_fn=lambda: _catalog_of([mono], c),
        expand_fn=lambda: [mono],
        c=c,
        terms=1,
        magnitude_fn=lambda u: np.abs(ctx.eval_monomial(mono, u, c)),
    )


def product(factors: Sequence[EigenFunction], label: str) -> EigenFunction:
    c = factors[0].c

    def evaluate(u):
        out = np.ones(u.shape, dtype=complex)
        for f in factors:
            out = out * f.evaluate(u)
        return out

    def expand():
        terms = [Monomial()]
        for f in factors:
            terms = [a * b for a in terms for b in f.expansion()]
        return terms

    def magnitude(u):
        out = np.ones(u.shape)
        for f in factors:
            out = out * f.magnitude_fn(u)
        return out

    terms = 1
    for f in factors:
        terms = None if terms is None or f.terms is None else terms * f.terms
    return EigenFunction(
        label=label,
        evaluate=evaluate,
        catalog_fn=lambda: set().union(*(f.catalog() for f in factors)),
        expand_fn=expand if all(f.expand_fn is not None for f in factors) else None,
        c=c,
        terms=terms,
        flags=tuple(sorted({x for f in factors for x in f.flags})),
        magnitude_fn=magnitude if all(f.magnitude_fn is not None for f in factors) else None,
    )


# -- tableau sums --------------------------------------------------------------------

def _tableau_function(
    shape: SkewShape,
    ctx: EvalContext,
    letters: Sequence[int] | None,
    label: str,
    allow_large: bool,
) -> EigenFunction:
    if shape.n_cells > CELL_CAP and not allow_large:
        raise CapExceeded(
            f"{shape} has {shape.n_cells} cells (> {CELL_CAP}); pass allow_large to build the tableau sum"
        )
    boxes = ctx.boxes
    grading = boxes.grading

    def evaluate(u, modulus=False):
        cache: dict[int, np.ndarray] = {}

        def weight(i, j):
            s = shape.content_shift(i, j)
            if s not in cache:
                z = ctx.z_all(u + s)
                cache[s] = np.abs(z) if modulus else z
            return cache[s]

        return transfer_sum(shape, grading, weight, letters)

    def cell_monomial(i, j, a):
        return boxes.box(a).shifted(Shift(shape.content_shift(i, j))).with_sign(boxes.sign(a))

    def expand():
        out = []
        for tab in enumerate_tableaux(shape, grading, letters):
            m = Monomial()
            for (i, j), a in tab.entries():
                m = m * cell_monomial(i, j, a)
            out.append(m)
        return out

    def catalog():
        monos = [
            cell_monomial(i, j, a)
            for (i, j), feasible in feasible_letters(shape, grading, letters).items()
            for a in feasible
        ]
        return _catalog_of(monos, 0)

    return EigenFunction(
        label=label,
        evaluate=evaluate,
        catalog_fn=catalog,
        expand_fn=expand,
        terms=count_tableaux(shape, grading, letters),
        magnitude_fn=lambda u: evaluate(u, modulus=True),
    )


def t_tableau_sum(shape: SkewShape, ctx: EvalContext, allow_large: bool = False) -> EigenFunction:
    """Sum over admissible tableaux of signed, shifted box products."""
    return _tableau_function(shape, ctx, None, f"T[{shape}]", allow_large)


def h_restricted(nu: Sequence[int], ctx: EvalContext, allow_large: bool = False) -> EigenFunction:
    """Tableau sum over fillings by odd letters only."""
    nu = partition(nu)
    odd = tuple(a for a in range(1, ctx.boxes.n_letters + 1) if ctx.boxes.grading[a - 1] == 1)
    return _tableau_function(SkewShape(nu), ctx, odd, f"H[{SkewShape(nu)}]", allow_large)


def t_column(a: int, ctx: EvalContext, restricted: bool = False) -> EigenFunction | None:
    """T_1^a (or H_1^a); None encodes the zero function for a < 0."""
    if a < 0:
        return None
    shape = SkewShape((1,) * a)
    return h_restricted(shape.outer, ctx) if restricted else t_tableau_sum(shape, ctx, allow_large=True)


def t_row(m: int, ctx: EvalContext) -> EigenFunction | None:
    """T_m^1; None encodes the zero function for m < 0."""
    if m < 0:
        return None
    return t_tableau_sum(SkewShape((m,) if m else ()), ctx, allow_large=True)


def diagonal_blocks(zero: Sequence[Sequence[bool]]) -> list[tuple[int, int]]:
    """Split a block-triangular pattern into diagonal blocks [lo, hi).

    A cut after row k is allowed when either off-diagonal corner is
    structurally zero; the determinant is then the product of the diagonal
    blocks, which avoids eliminating across huge cancelling minors.
    """
    n = len(zero)
    cuts = [0]
    for k in range(1, n):
        upper = all(zero[i][j] for i in range(k) for j in range(k, n))
        lower = all(zero[i][j] for i in range(k, n) for j in range(k))
        if upper or lower:
            cuts.append(k)
    cuts.append(n)
    return [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]


def _determinant(entries: list[list[tuple[int, int]]], make, label: str, ctx: EvalContext) -> EigenFunction:
    """det of [f_{index}(u + shift)] with f supplied by ``make(index)``."""
    n = len(entries)
    funcs: dict[int, EigenFunction | None] = {}
    for row in entries:
        for index, _ in row:
            if index not in funcs:
                funcs[index] = make(index)

    blocks = diagonal_blocks([[funcs[index] is None for index, _ in row] for row in entries])

    def fill(u, lo, hi, values, gross=False):
        mat = np.zeros(u.shape + (hi - lo, hi - lo), dtype=float if gross else complex)
        for i in range(lo, hi):
            for j in range(lo, hi):
                index, shift = entries[i][j]
                f = funcs[index]
                if f is None:
                    continue
                key = (index, shift, gross)
                if key not in values:
                    x = u + shift
                    values[key] = f.magnitude(x) if gross else f.evaluate(x)
                mat[..., i - lo, j - lo] = values[key]
        return mat

    def evaluate(u):
        values: dict = {}
        out = np.ones(u.shape, dtype=complex)
        for lo, hi in blocks:
            out = out * np.linalg.det(fill(u, lo, hi, values))
        return out

    def magnitude(u):
        # First-order rounding scale: sum_ij |a_ij|_gross |cofactor_ij| per block.
        values: dict = {}
        out = np.ones(u.shape)
        for lo, hi in blocks:
            mat = fill(u, lo, hi, values)
            gross = fill(u, lo, hi, values, gross=True)
            out = out * _cofactor_scale(mat, gross)
        return out

    def catalog():
        out = set()
        for row in entries:
            for index, shift in row:
                f = funcs[index]
                if f is not None:
                    out |= {(k, i, s + shift) for k, i, s in f.catalog()}
        return out

    return EigenFunction(label=label, evaluate=evaluate, catalog_fn=catalog, magnitude_fn=magnitude)


def _cofactor_scale(mat: np.ndarray, gross: np.ndarray) -> np.ndarray:
    n = mat.shape[-1]
    if n == 0:
        return np.ones(mat.shape[:-2])
    out = np.empty(mat.shape[:-2])
    for idx in np.ndindex(*mat.shape[:-2]):
        a, g = mat[idx], gross[idx]
        try:
            cof = np.linalg.det(a) * np.linalg.inv(a).T
            out[idx] = np.sum(g * np.abs(cof))
        except np.linalg.LinAlgError:
            # singular block: Hadamard bound on the gross entries
            out[idx] = np.prod(np.linalg.norm(g, axis=-1))
    return out


def row_entries(shape: SkewShape) -> list[list[tuple[int, int]]]:
    mu, lam = shape.outer, shape.inner
    mc, lc = conjugate(mu), conjugate(lam)
    m1, mc1 = part(mu, 1), part(mc, 1)
    return [
        [
            (part(mc, i) - part(lc, j) - i + j, -m1 + mc1 - part(mc, i) - part(lc, j) + i + j - 1)
            for j in range(1, m1 + 1)
        ]
        for i in range(1, m1 + 1)
    ]


def column_entries(shape: SkewShape) -> list[list[tuple[int, int]]]:
    mu, lam = shape.outer, shape.inner
    mc = conjugate(mu)
    m1, mc1 = part(mu, 1), part(mc, 1)
    return [
        [
            (part(mu, j) - part(lam, i) + i - j, -m1 + mc1 + part(mu, j) + part(lam, i) - i - j + 1)
            for j in range(1, mc1 + 1)
        ]
        for i in range(1, mc1 + 1)
    ]


def t_row_determinant(shape: SkewShape, ctx: EvalContext, restricted: bool = False) -> EigenFunction:
    """Determinant of one-column functions, indexed by the columns of mu."""
    name = "H" if restricted else "T"
    return _determinant(
        row_entries(shape), lambda a: t_column(a, ctx, restricted), f"{name}_rowdet[{shape}]", ctx
    )


def t_col_determinant(shape: SkewShape, ctx: EvalContext) -> EigenFunction:
    """Determinant of one-row functions, indexed by the rows of mu."""
    return _determinant(column_entries(shape), lambda m: t_row(m, ctx), f"T_coldet[{shape}]", ctx)


def t_rect(a: int, m: int, ctx: EvalContext) -> EigenFunction:
    """T_m^a = T_{(m^a)}; any zero index gives the empty diagram."""
    shape = SkewShape((m,) * a if a > 0 and m > 0 else ())
    return t_tableau_sum(shape, ctx, allow_large=True)


# -- deformed family -----------------------------------------------------------------

def _check_deformable(rank: Rank, mu: Sequence[int]):
    r, s = rank.r, rank.s
    if len(mu) < r + 1 or part(mu, r + 1) < s + 1:
        raise ModelError(f"deformation needs mu'_1 >= {r + 1} and mu_{r + 1} >= {s + 1}, got mu={tuple(mu)}")


def _atypical_flags(c: complex) -> tuple[str, ...]:
    c = complex(c)
    if c.imag == 0 and c.real < 0 and c.real == int(c.real):
        return ("possibly atypical",)
    return ()


def _q_ratio(ctx: EvalContext, color: int, num: Shift, den: Shift, c: complex) -> EigenFunction:
    mono = Monomial.build(1, [("Q", color, num, 1), ("Q", color, den, -1)])
    return monomial_function(mono, ctx, c)


def t_tilde(mu: Sequence[int], c: complex, ctx: EvalContext) -> EigenFunction:
    """Deformed DVF: Q-ratio times T of the top r+1 rows times H of the rest."""
    rank = ctx.rank
    mu = partition(mu)
    _check_deformable(rank, mu)
    r = rank.r
    m1, mc1 = part(mu, 1), len(mu)
    hat, nu = mu[: r + 1], mu[r + 1 :]
    base = mc1 - m1 - r - 1
    pieces = [_q_ratio(ctx, r + 1, Shift(base, -1), Shift(base, 1), c)]
    top = t_tableau_sum(SkewShape(hat), ctx)
    top.c = c
    pieces.append(top.shifted(Shift(mc1 - r - 1, 1)))
    if nu:
        low = h_restricted(nu, ctx)
        low.c = c
        pieces.append(low.shifted(Shift(-m1 + part(mu, r + 2) - r - 1, -1)))
    f = product(pieces, f"Ttilde[mu={','.join(map(str, mu))};c={c}]")
    f.flags = tuple(sorted(set(f.flags) | set(_atypical_flags(c))))
    return f


def t_tilde_rect(c: complex, ctx: EvalContext) -> EigenFunction:
    """Rectangular member: Q_{r+1}(u-c-s-1)/Q_{r+1}(u+c-s-1) T^{r+1}_{s+1}(u+c)."""
    r, s = ctx.rank.r, ctx.rank.s
    ratio = _q_ratio(ctx, r + 1, Shift(-s - 1, -1), Shift(-s - 1, 1), c)
    rect = t_rect(r + 1, s + 1, ctx)
    rect.c = c
    f = product([ratio, rect.shifted(Shift(0, 1))], f"Ttilde_rect[c={c}]")
    f.flags = _atypical_flags(c)
    return f


def widen(mu: Sequence[int], c: int, rank: Rank) -> tuple[int, ...]:
    """mu + (c^{r+1})."""
    mu = list(partition(mu)) + [0] * max(0, rank.r + 1 - len(mu))
    return partition([x + c if i <= rank.r else x for i, x in enumerate(mu)])


def top_term_monomial(mu: Sequence[int], rank: Rank, boxes) -> Monomial:
    r, s = rank.r, rank.s
    mu = partition(mu)
    _check_deformable(rank, mu)
    m1, mc1 = part(mu, 1), len(mu)
    base = mc1 - m1 - r - 1
    mono = Monomial.build(1, [("Q", r + 1, Shift(base, -1), 1), ("Q", r + 1, Shift(base, 1), -1)])
    mc = conjugate(mu)
    for i in range(1, r + 2):
        for j in range(1, part(mu, i) + 1):
            shift = Shift(-m1 + mc1 - 2 * i + 2 * j, 1)
            mono = mono * boxes.box(i).shifted(shift).with_sign(boxes.sign(i))
    for j in range(1, s + 2):
        for i in range(1, max(part(mc, j) - r - 1, 0) + 1):
            shift = Shift(-m1 + mc1 - 2 * r - 2 - 2 * i + 2 * j, -1)
            a = r + j + 1
            mono = mono * boxes.box(a).shifted(shift).with_sign(boxes.sign(a))
    return mono


def top_term(mu: Sequence[int], c: complex, ctx: EvalContext) -> EigenFunction:
    mono = top_term_monomial(mu, ctx.rank, ctx.boxes)
    return monomial_function(mono, ctx, c, label=f"top[mu={tuple(mu)};c={c}]")


def dress_exponent(mono: Monomial, counts: Sequence[int]) -> Shift:
    """Exponent of q in the dress part for |q| -> inf, as k + m*c.

    Each Q_b(u + shift) grows like q^(N_b * shift) times a u-dependent factor
    common to all shifts, so only the shifts matter.
    """
    k = m = 0
    for kind, index, shift, power in mono.factors:
        if kind == "Q":
            k += power * counts[index - 1] * shift.k
            m += power * counts[index - 1] * shift.m
    return Shift(k, m)


# -- supercharacters ------------------------------------------------------------------

def _signed_alphabet(rank: Rank, x: Sequence[complex], y: Sequence[complex]) -> np.ndarray:
    if len(x) != rank.r + 1 or len(y) != rank.s + 1:
        raise ModelError(f"need {rank.r + 1} x-values and {rank.s + 1} y-values")
    return np.array(list(x) + [-v for v in y], dtype=complex)[:, None]


def supercharacter(shape: SkewShape, rank: Rank, x: Sequence[complex], y: Sequence[complex]) -> complex:
    """Tableau sum with box a -> x_a (even) and -y_{a-r-1} (odd)."""
    w = _signed_alphabet(rank, x, y)
    return complex(transfer_sum(shape, rank.grading, lambda i, j: w)[0])


def _character_det(entries, value) -> complex:
    n = len(entries)
    if n == 0:
        return 1.0 + 0j
    mat = np.array([[value(index) for index, _ in row] for row in entries], dtype=complex)
    return complex(np.linalg.det(mat))


def supercharacter_row_determinant(shape: SkewShape, rank: Rank, x, y) -> complex:
    return _character_det(
        row_entries(shape),
        lambda a: 0 if a < 0 else supercharacter(SkewShape((1,) * a), rank, x, y),
    )


def supercharacter_col_determinant(shape: SkewShape, rank: Rank, x, y) -> complex:
    return _character_det(
        column_entries(shape),
        lambda m: 0 if m < 0 else supercharacter(SkewShape((m,) if m else ()), rank, x, y),
    )


# -- specs and dumps ---------------------------------------------------------------------

KINDS = ("plain", "restricted", "deformed", "deformed_rect")
ROUTES = ("tableau_sum", "row_determinant", "column_determinant", "reduction")


@dataclass(frozen=True)
class DvfSpec:
    kind: str
    mu: tuple[int, ...] = ()
    lam: tuple[int, ...] = ()
    c: complex = 0
    route: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown DVF kind {self.kind!r}")
        route = self.route or ("reduction" if self.kind.startswith("deformed") else "tableau_sum")
        if route not in ROUTES:
            raise ModelError(f"unknown route {route!r}")
        object.__setattr__(self, "route", route)
        object.__setattr__(self, "mu", partition(self.mu))
        object.__setattr__(self, "lam", partition(self.lam))
        object.__setattr__(self, "c", complex(self.c))

    def integer_c(self) -> int:
        c = self.c
        if c.imag != 0 or c.real != int(c.real) or c.real < 0:
            raise ModelError(f"route {self.route!r} needs a nonnegative integer c, got {c}")
        return int(c.real)


def build(spec: DvfSpec, ctx: EvalContext, allow_large: bool = False) -> EigenFunction:
    rank = ctx.rank
    if spec.kind == "plain":
        shape = SkewShape(spec.mu, spec.lam)
        return {
            "tableau_sum": lambda: t_tableau_sum(shape, ctx, allow_large),
            "row_determinant": lambda: t_row_determinant(shape, ctx),
            "column_determinant": lambda: t_col_determinant(shape, ctx),
        }.get(spec.route, lambda: _bad_route(spec))()
    if spec.kind == "restricted":
        if spec.route == "tableau_sum":
            return h_restricted(spec.mu, ctx, allow_large)
        if spec.route == "row_determinant":
            return t_row_determinant(SkewShape(spec.mu), ctx, restricted=True)
        return _bad_route(spec)
    mu = spec.mu if spec.kind == "deformed" else (rank.s + 1,) * (rank.r + 1)
    if spec.route == "reduction":
        if spec.kind == "deformed":
            return t_tilde(mu, spec.c, ctx)
        return t_tilde_rect(spec.c, ctx)
    shape = SkewShape(widen(mu, spec.integer_c(), rank))
    return build(DvfSpec("plain", shape.outer, (), 0, spec.route), ctx, allow_large)


def _bad_route(spec: DvfSpec):
    raise ModelError(f"route {spec.route!r} is not available for kind {spec.kind!r}")


def dump_formula(spec: DvfSpec, ctx: EvalContext) -> str:
    """One line per term, in tableau stream order."""
    f = build(spec, ctx)
    trivial = getattr(ctx.vacuum, "trivial", lambda a: False)
    lines = [m.drop_psi(trivial).format() for m in f.expansion()]
    if len(lines) == 1 and lines[0] == "+ 1":
        return "1"
    return "\n".join(lines)
