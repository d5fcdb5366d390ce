import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from superbethe.analytic import BetheState, EvalContext
from superbethe.diagrams import SkewShape, count_admissible, partitions_upto, subdiagrams
from superbethe.dvf import (
    CapExceeded,
    DvfSpec,
    build,
    diagonal_blocks,
    dress_exponent,
    dump_formula,
    h_restricted,
    supercharacter,
    supercharacter_col_determinant,
    supercharacter_row_determinant,
    t_col_determinant,
    t_rect,
    t_row_determinant,
    t_tableau_sum,
    t_tilde,
    t_tilde_rect,
    top_term,
    top_term_monomial,
    widen,
)
from superbethe.model import ModelConfig, ModelError, Rank, Site, kac_dynkin_from_diagram
from superbethe.verify import EPS, Sampler, jt_check, rel_err

FROZEN = json.loads(oracles.FROZEN.read_text())


def random_setup(rank, rng, common_b=False):
    """Library context plus the matching oracle model."""
    q = 1.2 + 0.5j
    b = complex(*rng.uniform(-1, 1, 2))
    sites = [(complex(*rng.uniform(-1, 1, 2)), b if common_b else complex(*rng.uniform(-1, 1, 2)))
             for _ in range(2)]
    roots = [list(rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)) for _ in range(rank.n_colors)]
    ctx = EvalContext(ModelConfig(rank, q, tuple(Site(w, bb) for w, bb in sites)),
                      BetheState(tuple(tuple(c) for c in roots)))
    return ctx, oracles.Model(rank.r, rank.s, q, sites, roots), b


def points(rng, n=20):
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)


# -- frozen oracle values ----------------------------------------------------------------

@pytest.mark.parametrize("case", FROZEN["cases"], ids=lambda c: f"{c['rank']}-{c['mu']}/{c['lambda']}")
def test_tableau_sum_matches_frozen_oracle(case):
    rank = Rank(*case["rank"])
    q = complex(*FROZEN["q"])
    sites = tuple(Site(complex(a, b), complex(c, d)) for a, b, c, d in FROZEN["sites"])
    state = BetheState(tuple(tuple(c) for c in oracles.frozen_roots(rank.n_colors)))
    ctx = EvalContext(ModelConfig(rank, q, sites), state)
    shape = SkewShape(tuple(case["mu"]), tuple(case["lambda"]))
    u = np.array([complex(*p) for p in FROZEN["points"]])
    want = np.array([complex(*v) for v in case["values"]])
    assert count_admissible(shape, rank) == case["count"]
    for f in (t_tableau_sum(shape, ctx), t_row_determinant(shape, ctx), t_col_determinant(shape, ctx)):
        assert np.max(np.abs(f(u) - want) / np.abs(want)) < 1e-12, f.label


def test_frozen_values_reproduce():
    assert oracles.compute_frozen() == FROZEN


@pytest.mark.parametrize("r,s", [(1, 0), (0, 1), (1, 1)])
def test_tableau_sum_matches_brute_force(r, s, rng):
    rank = Rank(r, s)
    ctx, model, _ = random_setup(rank, rng)
    u = points(rng, 3)
    for mu in partitions_upto(4):
        for lam in subdiagrams(mu):
            got = t_tableau_sum(SkewShape(mu, lam), ctx)(u)
            want = np.array([oracles.tableau_sum(model, mu, lam, x) for x in u])
            scale = t_tableau_sum(SkewShape(mu, lam), ctx).magnitude(u)
            assert np.all(np.abs(got - want) <= 1e-12 * np.maximum(scale, 1e-300)), (mu, lam)


# -- examples ---------------------------------------------------------------------------------

def test_empty_shape_is_one(rng):
    ctx, _, _ = random_setup(Rank(1, 1), rng)
    u = points(rng, 5)
    assert np.all(t_tableau_sum(SkewShape(()), ctx)(u) == 1)
    assert np.all(h_restricted((), ctx)(u) == 1)


def test_single_box_signs(rng):
    ctx, _, _ = random_setup(Rank(1, 0), rng)
    u = points(rng, 5)
    want = ctx.z(1, u) + ctx.z(2, u) - ctx.z(3, u)
    assert np.allclose(t_tableau_sum(SkewShape((1,)), ctx)(u), want, rtol=1e-14, atol=0)


def test_t2_sl12_four_terms(rng):
    ctx, model, b = random_setup(Rank(0, 1), rng, common_b=True)
    u = points(rng)
    f = t_tableau_sum(SkewShape((2,)), ctx)
    want = np.array([oracles.t2_sl12(model, b, x) for x in u])
    assert np.max(rel_err(f(u), want)) < 1e-10
    assert len(f.expansion()) == 4


def test_column_row_determinant_is_single_entry(rng):
    ctx, _, _ = random_setup(Rank(1, 1), rng)
    u = points(rng, 5)
    for a in (1, 2, 3):
        det = t_row_determinant(SkewShape((1,) * a), ctx)
        assert np.allclose(det(u), t_rect(a, 1, ctx)(u), rtol=1e-13, atol=0)


@pytest.mark.parametrize("rank,mu", [(Rank(0, 1), (2, 1)), (Rank(1, 0), (2, 2)), (Rank(1, 1), (3, 2, 1))])
def test_determinant_routes_examples(rank, mu, rng):
    sampler = Sampler(rng)
    ctx = sampler.context(rank)
    check = jt_check(SkewShape(mu), ctx, sampler.points(20), tol=1e-10)
    assert check.passed, check


@st.composite
def small_shapes(draw):
    r, s = draw(st.sampled_from([(1, 0), (0, 1), (1, 1), (2, 1)]))
    mu = draw(st.sampled_from(list(partitions_upto(5))))
    lam = draw(st.sampled_from(list(subdiagrams(mu))))
    return Rank(r, s), SkewShape(mu, lam), draw(st.integers(0, 2**32 - 1))


@given(small_shapes())
def test_route_equivalence_property(data):
    """Routes agree up to a small multiple of the determinants' rounding floor."""
    rank, shape, seed = data
    sampler = Sampler(np.random.default_rng(seed))
    ctx, u = sampler.context(rank), sampler.points(10)
    f = t_tableau_sum(shape, ctx)
    row, col = t_row_determinant(shape, ctx), t_col_determinant(shape, ctx)
    a, b, c = f(u), row(u), col(u)
    det_scale = np.maximum(row.magnitude(u), col.magnitude(u))
    den = np.maximum.reduce([np.abs(a), f.magnitude(u), det_scale * EPS])
    err = np.maximum.reduce([np.abs(a - b), np.abs(a - c)]) / den
    floor = EPS * det_scale / den
    assert np.all(err <= 1e-12 + 50 * floor), (shape, err.max(), floor.max())


def test_diagonal_blocks():
    z = [[False, True, True], [False, False, True], [True, False, False]]
    assert diagonal_blocks(z) == [(0, 1), (1, 2), (2, 3)]
    assert diagonal_blocks([[False]]) == [(0, 1)]
    assert diagonal_blocks([[False, False], [False, False]]) == [(0, 2)]


def test_h_restricted_single_box(rng):
    ctx, _, _ = random_setup(Rank(0, 1), rng)
    u = points(rng, 5)
    assert np.allclose(h_restricted((1,), ctx)(u), -ctx.z(2, u) - ctx.z(3, u), rtol=1e-14, atol=0)


def test_h_restricted_determinant(rng):
    ctx, _, _ = random_setup(Rank(0, 1), rng)
    u = points(rng)
    a = h_restricted((2, 1), ctx)(u)
    b = t_row_determinant(SkewShape((2, 1)), ctx, restricted=True)(u)
    assert np.max(rel_err(a, b)) < 1e-10


# -- deformation ------------------------------------------------------------------------------

def test_exam_formula(rng):
    ctx, model, _ = random_setup(Rank(1, 0), rng)
    for _ in range(20):
        u, c = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
        want = oracles.sl21_rect(model, u, c)
        for f in (t_tilde((1, 1), c, ctx), t_tilde_rect(c, ctx)):
            assert abs(f(np.array([u]))[0] - want) < 1e-10 * abs(want)


def test_exdvf_formula(rng):
    ctx, model, b = random_setup(Rank(0, 1), rng, common_b=True)
    for _ in range(20):
        u, c = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
        f = t_tilde((2, 1), c, ctx)
        want = oracles.sl12_hook(model, b, u, c)
        assert abs(f(np.array([u]))[0] - want) < 1e-10 * abs(want)
        assert f.terms == 8


@pytest.mark.parametrize("rank", [Rank(1, 0), Rank(0, 1), Rank(1, 1)])
@pytest.mark.parametrize("c", [0, 1, 2])
def test_integer_c_reduction(rank, c, rng):
    ctx, _, _ = random_setup(rank, rng)
    u = points(rng)
    mu = (rank.s + 2,) + (rank.s + 1,) * rank.r + (1,)
    wide = t_tableau_sum(SkewShape(widen(mu, c, rank)), ctx)
    assert np.max(rel_err(t_tilde(mu, c, ctx)(u), wide(u), wide.magnitude(u))) < 1e-10


def test_rect_c0_and_c1(rng):
    ctx, _, _ = random_setup(Rank(1, 0), rng)
    u = points(rng)
    assert np.max(rel_err(t_tilde_rect(0, ctx)(u), t_rect(2, 1, ctx)(u))) < 1e-13
    assert np.max(rel_err(t_tilde_rect(1, ctx)(u), t_tableau_sum(SkewShape((2, 2)), ctx)(u))) < 1e-10


def test_deformation_needs_deformable_shape(rng):
    ctx, _, _ = random_setup(Rank(1, 0), rng)
    with pytest.raises(ModelError):
        t_tilde((1,), 0.3, ctx)


def test_negative_integer_c_is_flagged(rng):
    ctx, _, _ = random_setup(Rank(1, 1), rng)
    assert "possibly atypical" in t_tilde_rect(-1, ctx).flags
    assert "possibly atypical" not in t_tilde_rect(0.5, ctx).flags


def test_atypical_sl22_decomposition(rng):
    ctx, _, _ = random_setup(Rank(1, 1), rng)
    u = points(rng)
    want = t_rect(2, 1, ctx)(u) + ctx.psi(3, u - 3) * ctx.psi(3, u - 1) * t_rect(1, 2, ctx)(u)
    assert np.max(rel_err(t_tilde_rect(-1, ctx)(u), want)) < 1e-10


# -- top term -----------------------------------------------------------------------------------

def test_top_term_is_first_exdvf_term(rng):
    ctx, model, b = random_setup(Rank(0, 1), rng, common_b=True)
    for _ in range(5):
        u, c = complex(*rng.uniform(-1, 1, 2)), complex(*rng.uniform(-1, 1, 2))
        want = oracles.sl12_hook_prefactor(model, b, u, c) * oracles.sl12_hook_terms(model, b, u, c)[0]
        assert abs(top_term((2, 1), c, ctx)(np.array([u]))[0] - want) < 1e-10 * abs(want)


@pytest.mark.parametrize("rank", [Rank(1, 0), Rank(0, 1), Rank(1, 1)])
def test_top_term_is_a_term(rank, rng):
    ctx, _, _ = random_setup(rank, rng)
    for mu in ((rank.s + 1,) * (rank.r + 1), (rank.s + 2,) + (rank.s + 1,) * rank.r + (1,)):
        mono = top_term_monomial(mu, rank, ctx.boxes)
        assert mono in t_tilde(mu, 0.37 + 0.21j, ctx).expansion()
    rect = top_term_monomial((rank.s + 1,) * (rank.r + 1), rank, ctx.boxes)
    assert rect in t_tilde_rect(0.3, ctx).expansion()


@pytest.mark.parametrize("rank", [Rank(1, 0), Rank(0, 1), Rank(1, 1)])
def test_top_term_leading_power(rank):
    """Dress exponent of the top term: -2 sum_a N_a t_a b_a - 2 N_{r+1} t_{r+1} c."""
    from superbethe.analytic import distinguished_boxes

    boxes = distinguished_boxes(rank)
    counts = tuple(range(1, rank.n_colors + 1))
    for mu in ((rank.s + 1,) * (rank.r + 1), (rank.s + 2,) + (rank.s + 1,) * rank.r + (1,)):
        b = kac_dynkin_from_diagram(rank, mu).b
        k = -2 * sum(n * rank.t(a) * b[a - 1] for a, n in enumerate(counts, 1))
        m = -2 * counts[rank.r] * rank.t(rank.r + 1)
        got = dress_exponent(top_term_monomial(mu, rank, boxes), counts)
        assert (got.k, got.m) == (k, m), mu


# -- supercharacters ------------------------------------------------------------------------------

def test_supercharacter_single_box():
    assert supercharacter(SkewShape((1,)), Rank(1, 0), [2, 3], [5]) == 2 + 3 - 5


@pytest.mark.parametrize("rank", [Rank(1, 0), Rank(0, 1), Rank(1, 1)])
def test_supercharacter_routes_and_count(rank, rng):
    x = list(rng.uniform(0.5, 1.5, rank.r + 1))
    y = list(rng.uniform(0.5, 1.5, rank.s + 1))
    for mu in partitions_upto(5):
        for lam in subdiagrams(mu):
            shape = SkewShape(mu, lam)
            ref = supercharacter(shape, rank, x, y)
            for route in (supercharacter_row_determinant, supercharacter_col_determinant):
                assert rel_err(route(shape, rank, x, y), ref, 1.0) < 1e-10
            ones = supercharacter(shape, rank, [1] * (rank.r + 1), [-1] * (rank.s + 1))
            assert ones == count_admissible(shape, rank)


# -- specs and dumps ------------------------------------------------------------------------------

def test_dump_t2_sl12():
    ctx = EvalContext(ModelConfig(Rank(0, 1), 1.3 + 0.4j, (Site(0.1, 0.3),)))
    assert dump_formula(DvfSpec("plain", (2,)), ctx).splitlines() == [
        "+ Q_1(u-2) / (Q_1(u+2))",
        "- Q_1(u-2) Q_2(u+3) psi_2(u+1) / (Q_1(u+2) Q_2(u+1))",
        "- Q_1(u-2) Q_2(u-1) psi_3(u+1) / (Q_1(u) Q_2(u+1))",
        "+ Q_1(u-2) psi_2(u-1) psi_3(u+1) / (Q_1(u))",
    ]


def test_dump_exam():
    ctx = EvalContext(ModelConfig(Rank(1, 0), 1.3 + 0.4j, (Site(0.1, 0.3),)))
    assert dump_formula(DvfSpec("deformed_rect", c=0.5), ctx).splitlines() == [
        "+ Q_2(u-1-c) / (Q_2(u+1+c))",
        "- Q_1(u+c) Q_2(u-1-c) psi_3(u-1+c) / (Q_1(u+2+c) Q_2(u+1+c))",
        "- Q_1(u+4+c) Q_2(u-1-c) psi_3(u-1+c) / (Q_1(u+2+c) Q_2(u+3+c))",
        "+ Q_2(u-1-c) psi_3(u-1+c) psi_3(u+1+c) / (Q_2(u+3+c))",
    ]


def test_dump_empty_shape():
    ctx = EvalContext(ModelConfig(Rank(1, 0), 1.3 + 0.4j))
    assert dump_formula(DvfSpec("plain", ()), ctx) == "1"


def test_spec_validation():
    with pytest.raises(ModelError):
        DvfSpec("weird")
    with pytest.raises(ModelError):
        DvfSpec("plain", (2, 1), route="nope")
    with pytest.raises(ModelError):
        DvfSpec("deformed", (2, 1), c=0.5, route="tableau_sum").integer_c()


@pytest.mark.parametrize("route", ["tableau_sum", "row_determinant", "column_determinant"])
def test_build_deformed_integer_routes(route, rng):
    ctx, _, _ = random_setup(Rank(0, 1), rng)
    u = points(rng)
    ref = build(DvfSpec("deformed", (2, 1), c=1), ctx)(u)
    got = build(DvfSpec("deformed", (2, 1), c=1, route=route), ctx)(u)
    assert np.max(rel_err(got, ref)) < 1e-10


def test_cap_exceeded(rng):
    ctx, _, _ = random_setup(Rank(1, 1), rng)
    with pytest.raises(CapExceeded):
        t_tableau_sum(SkewShape((5, 5, 5)), ctx)
