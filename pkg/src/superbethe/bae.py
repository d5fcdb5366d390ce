"""Bethe ansatz equations: assembly, residuals, Newton solving and pole scans."""

from __future__ import annotations

import cmath
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .analytic import (
    DISTINCT_TOL,
    BetheState,
    BoxModel,
    ContourError,
    EvalContext,
    Monomial,
    Shift,
    VacuumHook,
    bracket,
    relative_residue,
)
from .diagrams import SkewShape, conjugate, part
from .dvf import EigenFunction, t_tableau_sum
from .model import ModelConfig, ModelError, Rank, Site, check_hook, eta, gram_matrix
from .report import Check, VerificationReport

log = logging.getLogger(__name__)

RESIDUE_TOL = 1e-8
BAE_TOL = 1e-12
DEGENERATE_TOL = 1e-6


class BaeSolveError(ArithmeticError):
    """Newton failed: no convergence, singular Jacobian or collided roots."""

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


# -- the system ------------------------------------------------------------------

@dataclass(frozen=True)
class BaeSystem:
    """Per-color BAE data.

    For color a and root u = u_k^{(a)}:
    LHS = -prod_j [u - w_j + b_j/t_a] / [u - w_j - b_j/t_a] over ``sites[a-1]``,
    RHS = (-1)^deg_a prod_{b: G_ab != 0} Q_b(u + G_ab) / Q_b(u - G_ab).
    """

    q: complex
    gram: tuple[tuple[int, ...], ...]
    t: tuple[int, ...]
    deg: tuple[int, ...]
    sites: tuple[tuple[Site, ...], ...]

    def __post_init__(self):
        n = len(self.gram)
        if not (len(self.t) == len(self.deg) == len(self.sites) == n):
            raise ModelError("gram, t, deg and sites must all have one entry per color")

    @property
    def n_colors(self) -> int:
        return len(self.gram)

    @property
    def period(self) -> complex:
        return 1j * math.pi / cmath.log(self.q)

    @classmethod
    def from_config(cls, config: ModelConfig) -> "BaeSystem":
        """Restricted quantum space: b_j^{(a)} = b_j delta_{a,r+1}, w_j^{(a)} = w_j."""
        rank = config.rank
        gram = tuple(tuple(int(x) for x in row) for row in gram_matrix(rank))
        sites = tuple(config.sites if a == rank.r + 1 else () for a in range(1, rank.n_colors + 1))
        deg = tuple(rank.deg(a) for a in range(1, rank.n_colors + 1))
        return cls(config.q, gram, config.t, deg, sites)

    def _br(self, x):
        return bracket(x, self.q)

    def sides(self, a: int, u, state: BetheState):
        """(lhs_num, lhs_den, rhs_num, rhs_den) with LHS = lhs_num/lhs_den etc."""
        u = np.asarray(u, dtype=complex)
        t = self.t[a - 1]
        ln = -np.ones_like(u)
        ld = np.ones_like(u)
        for site in self.sites[a - 1]:
            ln = ln * self._br(u - site.w + site.b / t)
            ld = ld * self._br(u - site.w - site.b / t)
        rn = np.full_like(u, (-1) ** self.deg[a - 1])
        rd = np.ones_like(u)
        for b in range(1, self.n_colors + 1):
            g = self.gram[a - 1][b - 1]
            roots = np.asarray(state.color(b), dtype=complex)
            if g == 0 or not len(roots):
                continue
            rn = rn * np.prod(self._br(u[..., None] + g - roots), axis=-1)
            rd = rd * np.prod(self._br(u[..., None] - g - roots), axis=-1)
        return ln, ld, rn, rd

    def lhs(self, a: int, u):
        ln, ld, _, _ = self.sides(a, u, BetheState.empty(self.n_colors))
        return ln / ld

    def _sep(self, x):
        """Scale-free distance of [x] from zero: |e - 1/e| / (|e| + |1/e|), e = q^x."""
        e = np.exp(np.asarray(x, dtype=complex) * cmath.log(self.q))
        return np.abs(e - 1 / e) / (np.abs(e) + np.abs(1 / e))

    def degenerate(self, state: BetheState, tol: float = DEGENERATE_TOL) -> np.ndarray:
        """Equations whose two cleared products vanish through a common bracket zero.

        Such a state satisfies the cleared system as 0 = 0 without solving the
        ratio form, e.g. a string of roots spaced by the Gram entries.
        """
        out = []
        for a in range(1, self.n_colors + 1):
            u = np.asarray(state.color(a), dtype=complex)
            if not len(u):
                continue
            t = self.t[a - 1]
            ln = ld = rn = rd = np.ones(len(u))
            for site in self.sites[a - 1]:
                ln = np.minimum(ln, self._sep(u - site.w + site.b / t))
                ld = np.minimum(ld, self._sep(u - site.w - site.b / t))
            for b in range(1, self.n_colors + 1):
                g = self.gram[a - 1][b - 1]
                roots = np.asarray(state.color(b), dtype=complex)
                if g == 0 or not len(roots):
                    continue
                rn = np.minimum(rn, np.min(self._sep(u[:, None] + g - roots), axis=-1))
                rd = np.minimum(rd, np.min(self._sep(u[:, None] - g - roots), axis=-1))
            left = np.minimum(ln, rd) < tol
            right = np.minimum(rn, ld) < tol
            out.append(left & right)
        return np.concatenate(out) if out else np.zeros(0, bool)

    def cleared(self, state: BetheState) -> tuple[np.ndarray, np.ndarray]:
        """Per-equation products (LHS_num RHS_den, RHS_num LHS_den)."""
        left, right = [], []
        for a in range(1, self.n_colors + 1):
            u = np.asarray(state.color(a), dtype=complex)
            if not len(u):
                continue
            ln, ld, rn, rd = self.sides(a, u, state)
            left.append(ln * rd)
            right.append(rn * ld)
        if not left:
            return np.zeros(0, complex), np.zeros(0, complex)
        return np.concatenate(left), np.concatenate(right)


def _check_state(system: BaeSystem, state: BetheState):
    if state.n_colors != system.n_colors:
        raise ModelError(f"state has {state.n_colors} colors, system has {system.n_colors}")


def bae_residual(system: BaeSystem, state: BetheState) -> np.ndarray:
    """Cleared residuals, each divided by the larger modulus of its two products."""
    _check_state(system, state)
    BetheState(state.roots, state.tol)  # re-run the collision check
    if _collided(state, state.tol, system.period):
        raise ModelError("two roots of one color coincide modulo the period of the bracket")
    left, right = system.cleared(state)
    scale = np.maximum(np.abs(left), np.abs(right))
    scale = np.where(scale > 0, scale, 1.0)
    res = (left - right) / scale
    return np.where(system.degenerate(state), np.inf, res)


# -- Newton --------------------------------------------------------------------------

def _jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central differences; the residual is holomorphic in each root."""
    n = len(x)
    jac = np.empty((n, n), dtype=complex)
    for j in range(n):
        h = 1e-6 * max(1.0, abs(x[j]))
        e = np.zeros(n, dtype=complex)
        e[j] = h
        jac[:, j] = (func(x + e) - func(x - e)) / (2 * h)
    return jac


def _collided(state: BetheState, tol: float, period: complex | None = None) -> bool:
    """Two roots of one color coincide, modulo ``period`` when given."""
    for color in state.roots:
        for x, y in itertools.combinations(color, 2):
            d = x - y
            if period is not None:
                d -= round((d / period).real) * period
            if abs(d) < tol:
                return True
    return False


def _newton(
    system: BaeSystem,
    seed: BetheState,
    max_iter: int,
    tol: float,
    deflate: Sequence[BetheState] = (),
    collision_tol: float = DISTINCT_TOL,
) -> BetheState:
    counts = seed.counts
    x = seed.flat().astype(complex)
    if not len(x):
        return seed

    def state_of(v):
        return _from_flat(counts, v)

    def normalized(v):
        left, right = system.cleared(state_of(v))
        scale = np.maximum(np.abs(left), np.abs(right))
        return (left - right) / np.where(scale > 0, scale, 1.0)

    def deflation(v):
        factor = 1.0 + 0j
        for found in deflate:
            for perm in _color_permutations(found):
                d = np.sum((v - perm) ** 2)
                factor *= 1.0 + 1.0 / d if d != 0 else np.inf
        return factor

    for it in range(max_iter):
        res = normalized(x)
        err = float(np.max(np.abs(res)))
        if not deflate and err < tol:
            out = state_of(x)
            if _collided(out, collision_tol, system.period):
                raise BaeSolveError("converged to a state with collided roots")
            if np.any(system.degenerate(out)):
                raise BaeSolveError("converged to a degenerate state (both cleared sides vanish)")
            return BetheState(out.roots, collision_tol).canonical()
        left, right = system.cleared(state_of(x))
        scale = np.maximum(np.abs(left), np.abs(right))
        scale = np.where(scale > 0, scale, 1.0)

        def frozen(v, scale=scale):
            l, r = system.cleared(state_of(v))
            return (l - r) / scale * deflation(v)

        jac = _jacobian(frozen, x)
        cond = float(np.linalg.cond(jac))
        if not np.isfinite(cond) or cond > 1e14:
            raise BaeSolveError(f"singular Jacobian (condition {cond:.3e}) at iteration {it}", cond)
        f0 = frozen(x)
        step = np.linalg.solve(jac, -f0)
        target = float(np.max(np.abs(f0)))
        lam = 1.0
        for _ in range(30):
            trial = x + lam * step
            val = frozen(trial)
            if np.all(np.isfinite(val)) and float(np.max(np.abs(val))) < target * (1 - 1e-4 * lam):
                break
            lam /= 2
        x = x + lam * step
        if deflate and float(np.max(np.abs(frozen(x)))) < tol:
            return _from_flat(counts, x)
    raise BaeSolveError(f"no convergence after {max_iter} iterations (max residual {err:.3e})")


def _from_flat(counts: Sequence[int], v: np.ndarray) -> BetheState:
    out, pos = [], 0
    for n in counts:
        out.append(tuple(complex(z) for z in v[pos : pos + n]))
        pos += n
    return BetheState(tuple(out), tol=0.0)


def _color_permutations(state: BetheState):
    """Flat root vectors for every within-color permutation."""
    for combo in itertools.product(*(itertools.permutations(c) for c in state.roots)):
        yield np.array([z for color in combo for z in color], dtype=complex)


def solve_newton(
    system: BaeSystem,
    seed: BetheState,
    max_iter: int = 100,
    tol: float = BAE_TOL,
    collision_tol: float = DISTINCT_TOL,
) -> BetheState:
    """Damped Newton on the cleared residual; roots returned in canonical order."""
    _check_state(system, seed)
    if not sum(seed.counts):
        return seed
    return _newton(system, seed, max_iter, tol, collision_tol=collision_tol)


def same_solution(x: BetheState, y: BetheState, tol: float = 1e-8, period: complex | None = None) -> bool:
    """Equal up to within-color permutations and, if given, shifts by ``period``.

    Moving a root by i*pi/log q only flips the sign of its Q-function, so
    such states solve the same equations.
    """
    if x.counts != y.counts:
        return False
    a = x.flat()
    for p in _color_permutations(y):
        diff = a - p
        if period is not None:
            diff = diff - np.round((diff / period).real) * period
        if np.max(np.abs(diff), initial=0.0) < tol:
            return True
    return False


def multi_start(
    system: BaeSystem,
    counts: Sequence[int],
    seeds: int = 64,
    rng: np.random.Generator | None = None,
    tol: float = BAE_TOL,
    deflate: bool = True,
    box: float = 2.0,
    max_iter: int = 100,
) -> list[BetheState]:
    """Heuristic search for distinct solutions from random seeds in [-box, box]^2.

    With ``deflate`` each later run divides out the solutions found so far
    before a final undeflated polish.  Nothing here claims completeness.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    counts = tuple(counts)
    if len(counts) != system.n_colors:
        raise ModelError(f"need {system.n_colors} root counts, got {len(counts)}")
    found: list[BetheState] = []
    period = system.period
    for _ in range(seeds):
        seed = BetheState(
            tuple(
                tuple(complex(x, y) for x, y in rng.uniform(-box, box, (n, 2)))
                for n in counts
            ),
            tol=0.0,
        )
        try:
            start = seed
            if deflate and found:
                start = _newton(system, seed, max_iter, 1e-6, deflate=found)
            sol = solve_newton(system, start, max_iter=max_iter, tol=tol)
        except (BaeSolveError, ModelError, FloatingPointError, np.linalg.LinAlgError):
            continue
        if not any(same_solution(sol, f, period=period) for f in found):
            found.append(sol)
    return found


# -- Drinfeld data ---------------------------------------------------------------------

@dataclass(frozen=True)
class DrinfeldData:
    """Root multisets of P_a, color a at index a-1; ``t`` gives the step signs."""

    roots: tuple[tuple[complex, ...], ...]
    t: tuple[int, ...]

    def degree(self, a: int) -> int:
        return len(self.roots[a - 1])

    def polynomial(self, a: int, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for x in self.roots[a - 1]:
            out = out * (z - x)
        return out

    def center(self, a: int) -> complex:
        """w^{(a)}: the mean of the roots (one-site diagrams)."""
        roots = self.roots[a - 1]
        return sum(roots) / len(roots) if roots else 0


def drinfeld_data(rank: Rank, mu: Sequence[int], w: complex = 0) -> DrinfeldData:
    """Drinfeld polynomials of a one-site quantum space labeled by mu."""
    check_hook(rank, mu)
    r, s = rank.r, rank.s
    m1, mc1 = part(mu, 1), len(conjugate(mu)) and conjugate(mu)[0]
    base = -m1 + mc1
    et = eta(rank, mu) + (0,)
    roots = []
    for a in range(1, r + 1):
        n = part(mu, a) - part(mu, a + 1)
        roots.append(tuple(w - a + 2 * part(mu, a + 1) + base + 2 * i - 1 for i in range(1, n + 1)))
    n = part(mu, r + 1) + et[0]
    roots.append(tuple(w - r + 2 * part(mu, r + 1) + base - 2 * i for i in range(1, n + 1)))
    for d in range(1, s + 1):
        n = et[d - 1] - et[d]
        roots.append(tuple(w + d - 2 * et[d] - r + base - 2 * i for i in range(1, n + 1)))
    return DrinfeldData(tuple(tuple(complex(x) for x in c) for c in roots), tuple(rank.t(a) for a in range(1, rank.n_colors + 1)))


def drinfeld_ratio(a: int, u, data: DrinfeldData):
    """P_a(u + 1/t_a) / P_a(u - 1/t_a)."""
    t = data.t[a - 1]
    return data.polynomial(a, np.asarray(u) + 1 / t) / data.polynomial(a, np.asarray(u) - 1 / t)


def alternate_grading_drinfeld(b: int, w: complex = 0) -> DrinfeldData:
    """Alternate grading p = (1, 0, 0), shape (b^2): deg P_1 = b + 1, P_2 = 1."""
    roots1 = tuple(complex(w + 2 * j - b - 2) for j in range(1, b + 2))
    return DrinfeldData((roots1, ()), (-1, 1))


# -- alternate grading ---------------------------------------------------------------------

@dataclass(frozen=True)
class AlternateGrading:
    """sl(2|1) in the grading p(1)=1, p(2)=p(3)=0.

    Site 1 carries the continued label b (shape (b^2)); the others are
    single boxes.
    """

    config: ModelConfig
    b: complex
    system: BaeSystem
    boxes: BoxModel
    vacuum: VacuumHook

    def context(self, state: BetheState | None = None) -> EvalContext:
        return EvalContext(self.config, state, vacuum=self.vacuum, boxes=self.boxes)

    def t11(self, state: BetheState | None = None) -> EigenFunction:
        """-box1 + box2 + box3."""
        return t_tableau_sum(SkewShape((1,)), self.context(state))

    def bae_lhs_color1(self, u):
        """[u-w1-b-1]/[u-w1+b+1] prod_{j>=2} [u-wj-1]/[u-wj+1]."""
        return -self.system.lhs(1, u)


def alternate_grading_fixture(q: complex, ws: Sequence[complex], b: complex) -> AlternateGrading:
    if not ws:
        raise ModelError("the alternate-grading quantum space needs at least one site")
    ws = tuple(complex(w) for w in ws)
    b = complex(b)
    config = ModelConfig(Rank(1, 0), q, tuple(Site(w, 0) for w in ws))
    gram = ((0, -1), (-1, 2))
    sites1 = (Site(ws[0], b + 1),) + tuple(Site(w, 1) for w in ws[1:])
    system = BaeSystem(complex(q), gram, (-1, 1), (1, 0), (sites1, ()))

    def build(sign, items):
        return Monomial.build(sign, [(k, i, Shift(s), p) for k, i, s, p in items])

    boxes = BoxModel(
        (1, 0, 0),
        (
            build(1, [("psi", 1, 0, 1), ("Q", 1, 1, 1), ("Q", 1, -1, -1)]),
            build(1, [("psi", 2, 0, 1), ("Q", 1, 1, 1), ("Q", 2, -2, 1), ("Q", 1, -1, -1), ("Q", 2, 0, -1)]),
            build(1, [("psi", 3, 0, 1), ("Q", 2, 2, 1), ("Q", 2, 0, -1)]),
        ),
        2,
    )

    def psi(a, u):
        if a == 1:
            return np.ones_like(u)
        out = bracket(u - ws[0] + b, q) / bracket(u - 2 - ws[0] - b, q)
        for w in ws[1:]:
            out = out * bracket(u - w, q) / bracket(u - w - 2, q)
        return out

    def critical(a):
        if a == 1:
            return []
        pts = [ws[0] - b, ws[0] + 2 + b]
        for w in ws[1:]:
            pts += [w, w + 2]
        return pts

    return AlternateGrading(config, b, system, boxes, VacuumHook(psi, critical, trivial_colors=(1,)))


# -- pole scans ---------------------------------------------------------------------------

def _periodic_images(points, period: complex, reach: int = 3):
    return [p + n * period for p in points for n in range(-reach, reach + 1)]


def _radius(center, others, factor, floor):
    dists = [abs(center - o) for o in others if abs(center - o) > 1e-12]
    nearest = min(dists) if dists else 1.0
    radius = factor * nearest
    return (max(radius, floor), radius < floor)


def candidate_poles(f: EigenFunction, ctx: EvalContext) -> list[tuple[complex, str]]:
    """Locations u_k^{(b)} - shift for every Q_b(u + shift) denominator of f."""
    out: dict[tuple[float, float], tuple[complex, str]] = {}
    for kind, index, shift in sorted(f.catalog(), key=lambda e: (e[0], e[1], complex(e[2]).real, complex(e[2]).imag)):
        if kind != "Q":
            continue
        for k, root in enumerate(ctx.state.color(index), 1):
            loc = complex(root - shift)
            key = (round(loc.real, 10), round(loc.imag, 10))
            out.setdefault(key, (loc, f"Q_{index} root {k}"))
    return [out[k] for k in sorted(out)]


def vacuum_points(f: EigenFunction, ctx: EvalContext) -> list[complex]:
    pts = []
    for kind, index, shift in f.catalog():
        if kind == "psi":
            pts += [complex(p - shift) for p in ctx.vacuum.critical_points(index)]
    return pts


def _scan_points(
    report: VerificationReport,
    name: str,
    func: Callable,
    points: Sequence[tuple[complex, str]],
    avoid: Sequence[complex],
    period: complex,
    tol: float,
    factor: float,
    floor: float,
    samples: int,
):
    locs = [p for p, _ in points]
    others_all = _periodic_images(list(locs) + list(avoid), period)
    for loc, label in points:
        radius, floored = _radius(loc, others_all, factor, floor)
        note = "radius floor engaged" if floored else ""
        try:
            _, rel = relative_residue(func, loc, radius, samples)
        except ContourError as exc:
            rel, note = math.inf, str(exc)
        report.add(Check(f"{name} {label}", rel, tol, samples, "residue_rel", loc, note=note))


def pole_scan(
    f: EigenFunction,
    state: BetheState,
    ctx: EvalContext,
    system: BaeSystem | None = None,
    tol: float = RESIDUE_TOL,
    require_bae: bool = True,
    bae_tol: float = BAE_TOL,
    radius_factor: float = 1e-3,
    radius_floor: float = 1e-6,
    samples: int = 32,
) -> VerificationReport:
    """Contour residues of f at every catalog pole; pass iff all are < tol.

    ``f`` must be built from a context carrying ``state``.  When
    ``require_bae`` is set the BAE residual is reported as its own check, so
    a non-solution fails the report even where residues happen to be small.
    """
    if ctx.state != state:
        raise ModelError("f was built for a different Bethe state")
    report = VerificationReport("pole-scan", meta={"function": f.label})
    if require_bae and sum(state.counts):
        system = system if system is not None else BaeSystem.from_config(ctx.config)
        res = bae_residual(system, state)
        report.add(Check("bae_residual", float(np.max(np.abs(res))), bae_tol, len(res)))
    points = candidate_poles(f, ctx)
    _scan_points(
        report, f.label, f, points, vacuum_points(f, ctx), ctx.period,
        tol, radius_factor, radius_floor, samples,
    )
    report.meta["candidates"] = len(points)
    report.meta["floor_engaged"] = sum(1 for c in report.checks if c.note == "radius floor engaged")
    return report


def residue_pair_checks(ctx: EvalContext, tol: float = RESIDUE_TOL, samples: int = 32) -> VerificationReport:
    """Pairwise cancellation of adjacent boxes at each color pole.

    z(d)+z(d+1) at u_k^{(d)} - d for d <= r, z(r+1)-z(r+2) at
    u_k^{(r+1)} - r - 1, and z(d)+z(d+1) at u_k^{(d)} - 2r - 2 + d for
    r+2 <= d <= r+s+1 (distinguished grading).
    """
    rank = ctx.rank
    r = rank.r
    report = VerificationReport("residue-pairs")
    period = ctx.period
    for d in range(1, rank.n_colors + 1):
        if d <= r:
            sign, offset = 1, -d
        elif d == r + 1:
            sign, offset = -1, -r - 1
        else:
            sign, offset = 1, -2 * r - 2 + d

        def pair(u, d=d, sign=sign):
            return ctx.z(d, u) + sign * ctx.z(d + 1, u)

        monos = [ctx.boxes.box(d), ctx.boxes.box(d + 1)]
        avoid = []
        for m in monos:
            for kind, index, shift, power in m.factors:
                pts = ctx.singular_points(kind, index) if (kind == "psi" or power < 0) else []
                avoid += [complex(p - shift.k) for p in pts]
        points = [(complex(u + offset), f"color {d} root {k}") for k, u in enumerate(ctx.state.color(d), 1)]
        _scan_points(report, f"pair z({d}){'+' if sign > 0 else '-'}z({d + 1})", pair, points,
                     avoid, period, tol, 1e-3, 1e-6, samples)
    return report


def divisibility_checks(
    mu: Sequence[int], ctx: EvalContext, tol: float = RESIDUE_TOL, samples: int = 32
) -> VerificationReport:
    """T_mu_hat(u) / Q_{r+1}(u - mu_1) has no residue at u_k^{(r+1)} + mu_1."""
    rank = ctx.rank
    r = rank.r
    hat = tuple(mu)[: r + 1]
    if len(hat) < r + 1 or hat[r] < rank.s + 1:
        raise ModelError(f"divisibility needs mu_{r + 1} >= {rank.s + 1}, got {tuple(mu)}")
    m1 = hat[0]
    top = t_tableau_sum(SkewShape(hat), ctx)

    def func(u):
        return top(u) / ctx.Q(r + 1, np.asarray(u) - m1)

    report = VerificationReport("divisibility")
    points = [(complex(u + m1), f"color {r + 1} root {k}") for k, u in enumerate(ctx.state.color(r + 1), 1)]
    avoid = [p for p, _ in candidate_poles(top, ctx)] + vacuum_points(top, ctx)
    _scan_points(report, f"T_{SkewShape(hat)}/Q_{r + 1}(u-{m1})", func, points, avoid,
                 ctx.period, tol, 1e-3, 1e-6, samples)
    return report
