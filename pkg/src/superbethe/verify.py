"""Randomized verification suites.

Every identity is checked by evaluating both sides at random points for
random model data.  Errors are measured against the floating-point scale
of the computation: ``|x - y| / max(|x|, |y|, gross)`` where ``gross`` is the
sum of the moduli of the tableau terms.  Failing determinant checks carry a
note with the first-order rounding floor of the elimination.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import bae
from .analytic import BetheState, EvalContext
from .diagrams import SkewShape, count_admissible, partitions_upto, subdiagrams
from .dvf import (
    EigenFunction,
    t_col_determinant,
    t_column,
    t_rect,
    t_row_determinant,
    t_tableau_sum,
    t_tilde,
    t_tilde_rect,
    widen,
)
from .model import (
    ModelConfig,
    ModelError,
    Rank,
    Site,
    kac_dynkin_from_diagram,
    random_q,
    typical_dimension,
)
from .report import Check, VerificationReport, digest

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps

JT_TOL = 1e-9
RED_TOL = 1e-10
FIXTURE_TOL = 1e-10
RELATION_TOL = 1e-9


# -- sampling ----------------------------------------------------------------------------

@dataclass
class Sampler:
    """Random model data: q with modulus in [1.1, 2], sites and roots in a box."""

    rng: np.random.Generator
    n_sites: int = 2
    roots_per_color: int = 2
    spread: float = 1.0

    def cz(self, n=None, spread=None):
        spread = self.spread if spread is None else spread
        if n is None:
            return complex(*self.rng.uniform(-spread, spread, 2))
        return self.rng.uniform(-spread, spread, n) + 1j * self.rng.uniform(-spread, spread, n)

    def config(self, rank: Rank, common_b: bool = False) -> ModelConfig:
        q = random_q(self.rng)
        b = self.cz()
        sites = tuple(Site(self.cz(), b if common_b else self.cz()) for _ in range(self.n_sites))
        return ModelConfig(rank, q, sites)

    def state(self, rank: Rank, counts: Sequence[int] | None = None) -> BetheState:
        counts = counts if counts is not None else [self.roots_per_color] * rank.n_colors
        return BetheState(tuple(tuple(self.cz(n)) for n in counts))

    def context(self, rank: Rank, common_b: bool = False) -> EvalContext:
        return EvalContext(self.config(rank, common_b), self.state(rank))

    def points(self, n: int) -> np.ndarray:
        return self.cz(n, 1.0)


def rel_err(x, y, scale=0.0) -> np.ndarray:
    x, y = np.asarray(x), np.asarray(y)
    den = np.maximum(np.maximum(np.abs(x), np.abs(y)), scale)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.abs(x - y) / den
    return np.where(den > 0, out, np.where(x == y, 0.0, np.inf))


def _max(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.max(x)) if x.size else 0.0


# -- Jacobi-Trudi ---------------------------------------------------------------------------

def all_skew_shapes(max_cells: int) -> list[SkewShape]:
    return [SkewShape(mu, lam) for mu in partitions_upto(max_cells) for lam in subdiagrams(mu)]


def jt_check(shape: SkewShape, ctx: EvalContext, u: np.ndarray, tol: float = JT_TOL) -> Check:
    """tableau sum = row determinant = column determinant at the points u."""
    f = t_tableau_sum(shape, ctx, allow_large=True)
    row, col = t_row_determinant(shape, ctx), t_col_determinant(shape, ctx)
    a, b, c = f(u), row(u), col(u)

    def det_scale():
        return np.maximum(row.magnitude(u), col.magnitude(u))

    if count_admissible(shape, ctx.rank) == 0:
        # no tableaux: the sum is exactly zero, so only the determinants' own scale is left
        den = det_scale()
        err = np.maximum(np.abs(b), np.abs(c)) / np.where(den > 0, den, 1.0)
        note = "empty tableau set"
    else:
        den = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), f.magnitude(u)])
        err = np.maximum.reduce([np.abs(a - b), np.abs(a - c), np.abs(b - c)]) / den
        note = ""
    check = Check(f"jt {shape}", _max(err), tol, len(u), digest=digest(shape, ctx.config, ctx.state))
    if not check.passed:
        floor = _max(EPS * det_scale() / np.where(den > 0, den, 1.0))
        note = (note + "; " if note else "") + f"rounding floor {floor:.1e}"
    check.note = note
    return check


def verify_jt(
    rank: Rank,
    shapes: Iterable[SkewShape],
    points: int = 20,
    seed: int = 0,
    tol: float = JT_TOL,
    sampler: Sampler | None = None,
) -> VerificationReport:
    """Each shape gets fresh (q, sites, roots) and ``points`` random u."""
    rng = np.random.default_rng(seed)
    sampler = sampler or Sampler(rng)
    report = VerificationReport("verify-jt", seed=seed, meta={"rank": str(rank)})
    for shape in shapes:
        ctx = sampler.context(rank)
        report.add(jt_check(shape, ctx, sampler.points(points), tol))
    return report


# -- reductions ---------------------------------------------------------------------------

def deformable_family(rank: Rank) -> list[tuple[int, ...]]:
    """((s+1)^{r+1}) and ((s+2), (s+1)^r, 1)."""
    r, s = rank.r, rank.s
    return [(s + 1,) * (r + 1), (s + 2,) + (s + 1,) * r + (1,)]


def verify_red(
    rank: Rank,
    mus: Sequence[Sequence[int]] | None = None,
    cs: Sequence[int] = (0, 1, 2),
    points: int = 20,
    seed: int = 0,
    tol: float = RED_TOL,
) -> VerificationReport:
    """Integer-c reduction to a plain tableau sum, and rectangular consistency."""
    rng = np.random.default_rng(seed)
    sampler = Sampler(rng)
    report = VerificationReport("verify-red", seed=seed, meta={"rank": str(rank)})
    mus = [tuple(m) for m in (mus if mus is not None else deformable_family(rank))]
    for mu in mus:
        for c in cs:
            ctx = sampler.context(rank)
            u = sampler.points(points)
            lhs = t_tilde(mu, c, ctx)
            wide = t_tableau_sum(SkewShape(widen(mu, c, rank)), ctx, allow_large=True)
            err = rel_err(lhs(u), wide(u), wide.magnitude(u))
            report.add(Check(f"reduction mu={mu} c={c}", _max(err), tol, points, digest=digest(mu, c, ctx.config)))
    rect = (rank.s + 1,) * (rank.r + 1)
    for c in cs:
        ctx = sampler.context(rank)
        u = sampler.points(points)
        g = t_tilde_rect(c, ctx)
        wide = t_tableau_sum(SkewShape(widen(rect, c, rank)), ctx, allow_large=True)
        err = rel_err(g(u), wide(u), wide.magnitude(u))
        report.add(Check(f"rect reduction c={c}", _max(err), tol, points))
    errs = []
    for _ in range(points):
        ctx = sampler.context(rank)
        c = sampler.cz()
        u = sampler.points(1)
        a, b = t_tilde_rect(c, ctx), t_tilde(rect, c, ctx)
        errs.append(_max(rel_err(a(u), b(u), a.magnitude(u))))
    report.add(Check("rect reduction = reduction on the rectangle, complex c", max(errs), tol, points))
    return report


# -- functional relations ---------------------------------------------------------------------

def verify_hirota(
    rank: Rank, amax: int = 3, mmax: int = 3, points: int = 20, seed: int = 0, tol: float = RELATION_TOL
) -> VerificationReport:
    """T_m^a(u-1) T_m^a(u+1) = T_{m-1}^a T_{m+1}^a + T_m^{a-1} T_m^{a+1} with arbitrary roots."""
    rng = np.random.default_rng(seed)
    sampler = Sampler(rng)
    report = VerificationReport("verify-hirota", seed=seed, meta={"rank": str(rank)})
    ctx = sampler.context(rank)
    u = sampler.points(points)
    T = lambda a, m: t_rect(a, m, ctx)  # noqa: E731
    for a in range(1, amax + 1):
        for m in range(1, mmax + 1):
            lhs = T(a, m)(u - 1) * T(a, m)(u + 1)
            r1 = T(a, m - 1)(u) * T(a, m + 1)(u)
            r2 = T(a - 1, m)(u) * T(a + 1, m)(u)
            err = rel_err(lhs, r1 + r2, np.maximum(np.abs(r1), np.abs(r2)))
            report.add(Check(f"hirota a={a} m={m}", _max(err), tol, points, digest=digest(a, m, ctx.config)))
    return report


def verify_cshift(
    rank: Rank,
    mus: Sequence[Sequence[int]] | None = None,
    points: int = 20,
    seed: int = 0,
    tol: float = RELATION_TOL,
) -> VerificationReport:
    """T~_{mu;c}(u-d) T~_{mu;c}(u+d) = T~_{mu;c-d}(u) T~_{mu;c+d}(u) at random (u, c, d)."""
    rng = np.random.default_rng(seed)
    sampler = Sampler(rng)
    report = VerificationReport("verify-cshift", seed=seed, meta={"rank": str(rank)})
    mus = [tuple(m) for m in (mus if mus is not None else deformable_family(rank))]
    for mu in mus:
        ctx = sampler.context(rank)
        errs = []
        for _ in range(points):
            u, c, d = sampler.points(1), sampler.cz(), sampler.cz()
            f = t_tilde(mu, c, ctx)
            lhs = f(u - d) * f(u + d)
            rhs = t_tilde(mu, c - d, ctx)(u) * t_tilde(mu, c + d, ctx)(u)
            errs.append(_max(rel_err(lhs, rhs)))
        report.add(Check(f"cshift mu={mu}", max(errs), tol, points, digest=digest(mu, ctx.config)))
    return report


# -- closed-form fixtures -------------------------------------------------------------------------

def sl21_rect_formula(ctx: EvalContext, u, c):
    """Four-term sl(2|1) formula for T~^2_{1+c}, written out by hand."""
    Q, psi = ctx.Q, (lambda x: ctx.psi(3, x))
    return (
        Q(2, u - 1 - c) / Q(2, u + 1 + c)
        - psi(u - 1 + c) * Q(1, u + c) * Q(2, u - 1 - c) / (Q(1, u + 2 + c) * Q(2, u + 1 + c))
        - psi(u - 1 + c) * Q(1, u + 4 + c) * Q(2, u - 1 - c) / (Q(1, u + 2 + c) * Q(2, u + 3 + c))
        + psi(u + 1 + c) * psi(u - 1 + c) * Q(2, u - 1 - c) / Q(2, u + 3 + c)
    )


def sl12_t2_formula(ctx: EvalContext, b: complex, u):
    """Four-term sl(1|2) expansion of T_(2) with a common site label b."""
    Q, phi = ctx.Q, ctx.phi
    return (
        Q(1, u - 2) / Q(1, u + 2)
        - phi(u + 2 - b) * Q(1, u - 2) * Q(2, u + 3) / (phi(u + 2 + b) * Q(1, u + 2) * Q(2, u + 1))
        - phi(u + 2 - b) * Q(1, u - 2) * Q(2, u - 1) / (phi(u + 2 + b) * Q(1, u) * Q(2, u + 1))
        + phi(u - b) * phi(u + 2 - b) * Q(1, u - 2) / (phi(u + b) * phi(u + 2 + b) * Q(1, u))
    )


def sl12_hook_formula(ctx: EvalContext, b: complex, u, c):
    """Eight-term sl(1|2) formula for T~_{(2,1);c} with a common site label b."""
    Q, phi = ctx.Q, ctx.phi
    x = u + c
    y = u - c
    pre = phi(y - 1 - b) / phi(y - 1 + b)
    p13 = phi(x + 1 - b) * phi(x + 3 - b) / (phi(x + 1 + b) * phi(x + 3 + b))
    p3 = phi(x + 3 - b) / phi(x + 3 + b)
    terms = (
        -Q(1, y - 3) * Q(2, y) / (Q(1, x + 3) * Q(2, y - 2))
        - p13 * Q(1, y - 1) * Q(2, y - 4) / (Q(1, x + 1) * Q(2, y - 2))
        - p13 * Q(1, y - 3) * Q(2, y) / (Q(1, x + 1) * Q(2, y - 2))
        + p3 * Q(1, y - 1) * Q(2, y - 4) * Q(2, x) / (Q(1, x + 1) * Q(2, y - 2) * Q(2, x + 2))
        + p3 * Q(1, y - 3) * Q(2, y) * Q(2, x) / (Q(1, x + 1) * Q(2, y - 2) * Q(2, x + 2))
        + p3 * Q(1, y - 1) * Q(2, y - 4) * Q(2, x + 4) / (Q(1, x + 3) * Q(2, y - 2) * Q(2, x + 2))
        + p3 * Q(1, y - 3) * Q(2, y) * Q(2, x + 4) / (Q(1, x + 3) * Q(2, y - 2) * Q(2, x + 2))
        - Q(1, y - 1) * Q(2, y - 4) / (Q(1, x + 3) * Q(2, y - 2))
    )
    return pre * terms


def sl12_hook_determinant(ctx: EvalContext, c: int, u):
    """det_{c+2} of one-column functions for mu = (2 + c, 1), written out directly."""
    n = c + 2
    mc = [2] + [1] * (c + 1)
    mat = np.zeros(np.shape(u) + (n, n), dtype=complex)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            a = mc[i - 1] - i + j
            f = t_column(a, ctx)
            if f is not None:
                mat[..., i - 1, j - 1] = f(u - c - mc[i - 1] + i + j - 1)
    return np.linalg.det(mat)


def _fixture_sl21_rect(sampler: Sampler, points: int, tol: float, report: VerificationReport):
    rank = Rank(1, 0)
    errs_rect, errs_mu, terms = [], [], set()
    for _ in range(points):
        ctx = sampler.context(rank)
        u, c = sampler.points(1), sampler.cz()
        want = sl21_rect_formula(ctx, u, c)
        rect, mu = t_tilde_rect(c, ctx), t_tilde((1, 1), c, ctx)
        terms.add(len(rect.expansion()))
        errs_rect.append(_max(rel_err(rect(u), want)))
        errs_mu.append(_max(rel_err(mu(u), want)))
    report.add(Check("sl21-rect: rectangular constructor", max(errs_rect), tol, points))
    report.add(Check("sl21-rect: mu=(1,1) constructor", max(errs_mu), tol, points))
    report.add(Check("sl21-rect: four terms", 0.0 if terms == {4} else 1.0, 0.5, note=f"terms={sorted(terms)}"))


def _fixture_sl12_hook(sampler: Sampler, points: int, tol: float, report: VerificationReport):
    rank = Rank(0, 1)
    errs, errs_t2, terms = [], [], set()
    for _ in range(points):
        ctx = sampler.context(rank, common_b=True)
        b = ctx.config.sites[0].b
        u, c = sampler.points(1), sampler.cz()
        f = t_tilde((2, 1), c, ctx)
        terms.add(len(f.expansion()))
        errs.append(_max(rel_err(f(u), sl12_hook_formula(ctx, b, u, c))))
        t2 = t_tableau_sum(SkewShape((2,)), ctx)
        errs_t2.append(_max(rel_err(t2(u), sl12_t2_formula(ctx, b, u))))
    report.add(Check("appendix-b: eight-term formula", max(errs), tol, points))
    report.add(Check("appendix-b: eight terms", 0.0 if terms == {8} else 1.0, 0.5, note=f"terms={sorted(terms)}"))
    report.add(Check("appendix-b: T_(2) expansion", max(errs_t2), tol, points))
    for c in (0, 1, 2):
        ctx = sampler.context(rank, common_b=True)
        u = sampler.points(points)
        f = t_tilde((2, 1), c, ctx)
        wide = t_tableau_sum(SkewShape((2 + c, 1)), ctx)
        err = rel_err(f(u), sl12_hook_determinant(ctx, c, u), wide.magnitude(u))
        report.add(Check(f"appendix-b: determinant c={c}", _max(err), tol, points))


def _fixture_atypical(sampler: Sampler, points: int, tol: float, report: VerificationReport):
    """sl(2|2) at c = -1: T~_1^2 = T_1^2 + psi_3(u-3) psi_3(u-1) T_2^1."""
    rank = Rank(1, 1)
    ctx = sampler.context(rank)
    u = sampler.points(points)
    f = t_tilde_rect(-1, ctx)
    want = t_rect(2, 1, ctx)(u) + ctx.psi(3, u - 3) * ctx.psi(3, u - 1) * t_rect(1, 2, ctx)(u)
    report.add(Check("sl22-atypical: c=-1 decomposition", _max(rel_err(f(u), want)), tol, points))
    flagged = "possibly atypical" in f.flags
    report.add(Check("sl22-atypical: flagged", 0.0 if flagged else 1.0, 0.5, note=",".join(f.flags)))


def _fixture_alternate_grading(sampler: Sampler, points: int, tol: float, report: VerificationReport, seeds: int = 64):
    fx = bae.alternate_grading_fixture(random_q(sampler.rng), [sampler.cz(), sampler.cz()], sampler.cz())
    ctx = fx.context()
    u = sampler.points(points)
    report.add(Check("alternate-grading: psi_1 = 1", _max(np.abs(ctx.psi(1, u) - 1)), tol, points))
    report.add(Check("alternate-grading: psi_2 = psi_3", _max(rel_err(ctx.psi(2, u), ctx.psi(3, u))), tol, points))
    # psi_2(u+1) must invert the color-1 BAE factor at u for -box1 + box2 to cancel
    err = rel_err(ctx.psi(2, u + 1) * fx.bae_lhs_color1(u), np.ones_like(u))
    report.add(Check("alternate-grading: psi_2(u+1) = 1/BAE_1(u)", _max(err), tol, points))
    sols = bae.multi_start(fx.system, (1, 1), seeds, sampler.rng)
    if not sols:
        report.add(Check("alternate-grading: BAE solution found", 1.0, 0.5, note="no seed converged"))
        return
    state = sols[0]
    scan = bae.pole_scan(fx.t11(state), state, fx.context(state), fx.system)
    report.extend(scan)
    bad = state.perturbed()
    neg = bae.pole_scan(fx.t11(bad), bad, fx.context(bad), fx.system, require_bae=False)
    worst = neg.worst("residue_rel")
    value = worst.value if worst else 0.0
    report.add(Check("alternate-grading: perturbed control", value, 1e-3, metric="residue_rel",
                     passed=value >= 1e-3, note="expects a surviving residue"))


FIXTURES = {
    "sl21-rect": _fixture_sl21_rect,
    "appendix-b": _fixture_sl12_hook,
    "sl22-atypical": _fixture_atypical,
    "alternate-grading": _fixture_alternate_grading,
}


def verify_fixtures(
    names: Sequence[str] | None = None, points: int = 20, seed: int = 0, tol: float = FIXTURE_TOL
) -> VerificationReport:
    names = list(names) if names else list(FIXTURES)
    unknown = [n for n in names if n not in FIXTURES]
    if unknown:
        raise ModelError(f"unknown fixture(s) {unknown}; choose from {sorted(FIXTURES)}")
    report = VerificationReport("fixtures", seed=seed)
    for name in names:
        sampler = Sampler(np.random.default_rng([seed, sorted(FIXTURES).index(name)]))
        FIXTURES[name](sampler, points, tol, report)
    return report


# -- pole-freeness -------------------------------------------------------------------------------

POLE_C = 0.37 + 0.21j
POLE_COUNTS = ((1, 1), (2, 1), (1, 2), (2, 2))


def solved_states(
    rank: Rank, rng: np.random.Generator, sites: Sequence[int] = (1, 2),
    counts: Sequence[Sequence[int]] = POLE_COUNTS, seeds: int = 32,
) -> list[EvalContext]:
    """One Newton-solved state per (site number, root counts) that converges."""
    out = []
    for n in sites:
        for cnt in counts:
            config = ModelConfig.random(rank, rng, n_sites=n)
            system = bae.BaeSystem.from_config(config)
            sols = bae.multi_start(system, cnt, seeds, rng)
            if sols:
                out.append(EvalContext(config, sols[0]))
            else:
                log.info("no solution for %s sites=%d counts=%s", rank, n, cnt)
    return out


def pole_targets(ctx: EvalContext, max_cells: int = 6, amax: int = 3, c: complex = POLE_C):
    """T_1^a, every skew T_{lam in mu} up to max_cells, and T~_{mu;c}."""
    fs = [t_rect(a, 1, ctx) for a in range(1, amax + 1)]
    fs += [t_tableau_sum(shape, ctx) for shape in all_skew_shapes(max_cells)
           if count_admissible(shape, ctx.rank) > 0]
    fs += [t_tilde(mu, c, ctx) for mu in deformable_family(ctx.rank)]
    return fs


def verify_poles(
    rank: Rank, seed: int = 0, max_cells: int = 6, tol: float = bae.RESIDUE_TOL,
    sites: Sequence[int] = (1, 2), counts: Sequence[Sequence[int]] = POLE_COUNTS,
) -> VerificationReport:
    """Pole-freeness on solved states, with a perturbed twin of every state."""
    rng = np.random.default_rng(seed)
    report = VerificationReport("pole-freeness", seed=seed, meta={"rank": str(rank)})
    contexts = solved_states(rank, rng, sites, counts)
    report.meta["states"] = len(contexts)
    if not contexts:
        report.add(Check("solved states found", 1.0, 0.5, note="no seed converged"))
        return report
    for k, ctx in enumerate(contexts):
        system = bae.BaeSystem.from_config(ctx.config)
        res = bae.bae_residual(system, ctx.state)
        report.add(Check(f"state {k} bae_residual", float(np.max(np.abs(res))), bae.BAE_TOL, len(res)))
        for f in pole_targets(ctx, max_cells):
            scan = bae.pole_scan(f, ctx.state, ctx, system, tol, require_bae=False)
            for c in scan.checks:
                c.name = f"state {k} {c.name}"
            report.extend(scan)
        bad = ctx.with_state(ctx.state.perturbed())
        worst = 0.0
        for f in pole_targets(bad, max_cells):
            w = bae.pole_scan(f, bad.state, bad, require_bae=False).worst("residue_rel")
            worst = max(worst, w.value if w else 0.0)
        report.add(Check(f"state {k} perturbed control", worst, 1e-3, metric="residue_rel",
                         passed=worst >= 1e-3, note="expects a surviving residue"))
    return report


def verify_pairs(rank: Rank, seed: int = 0, tol: float = bae.RESIDUE_TOL) -> VerificationReport:
    """Adjacent-box residue cancellation and divisibility of the top row block."""
    rng = np.random.default_rng(seed)
    report = VerificationReport("residue-pairs", seed=seed, meta={"rank": str(rank)})
    for ctx in solved_states(rank, rng, sites=(2,), counts=[(1,) * rank.n_colors, (2,) * rank.n_colors]):
        report.extend(bae.residue_pair_checks(ctx, tol))
        for mu in deformable_family(rank):
            report.extend(bae.divisibility_checks(mu, ctx, tol))
    if not report.checks:
        report.add(Check("solved states found", 1.0, 0.5, note="no seed converged"))
    return report


def verify_dimensions(rank: Rank, max_cells: int = 8) -> VerificationReport:
    """Admissible tableau count against the typical dimension formula."""
    report = VerificationReport("dimensions", meta={"rank": str(rank)})
    for mu in partitions_upto(max_cells):
        if len(mu) < rank.r + 1 or mu[rank.r] < rank.s + 1:
            continue  # not typical covariant
        if len(mu) > rank.r + 1 and mu[rank.r + 1] > rank.s:
            continue  # outside the hook
        n = count_admissible(SkewShape(mu), rank)
        d = typical_dimension(rank, kac_dynkin_from_diagram(rank, mu))
        report.add(Check(f"dim {SkewShape(mu)}", 0.0 if n == d else 1.0, 0.5, metric="mismatch",
                         note=f"tableaux={n} formula={d}"))
    return report
