import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superbethe.analytic import BetheState
from superbethe.model import ModelConfig, ModelError, Rank, Site
from superbethe.report import (
    TOL_ENV,
    Check,
    VerificationReport,
    complex_from_json,
    complex_to_json,
    config_from_json,
    config_to_json,
    digest,
    env_tolerance,
    fmt_float,
    parse_counts,
    state_from_json,
    state_to_json,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite, finite)
def test_complex_round_trip(x, y):
    z = complex(x, y)
    assert complex_from_json(json.loads(json.dumps(complex_to_json(z)))) == z


def test_complex_forms():
    assert complex_from_json(2) == 2
    assert complex_from_json("0.5+1i") == 0.5 + 1j
    assert complex_from_json({"re": 1}) == 1
    for bad in ("abc", True, None, {"re": "x"}):
        with pytest.raises(ModelError):
            complex_from_json(bad)


def test_fmt_float():
    assert fmt_float(float("nan")) == "nan"
    assert fmt_float(-math.inf) == "-inf"
    assert fmt_float(0.1) == 0.1


def test_check_pass_rule():
    assert Check("a", 1e-10, 1e-9).passed
    assert not Check("a", 1e-9, 1e-9).passed
    assert not Check("a", math.nan, 1.0).passed
    assert not Check("a", math.inf, 1.0).passed


def test_report_summary_and_json():
    rep = VerificationReport("suite", seed=3, meta={"rank": "(1,0)"})
    rep.add(Check("x", 1e-12, 1e-9))
    rep.add(Check("y", 2e-3, 1e-8, metric="residue_rel", location=0.5 + 1j, note="hi"))
    s = rep.summary()
    assert (s["checks"], s["failed"], s["pass"], s["seed"]) == (2, 1, False, 3)
    assert s["first_failures"] == ["y"] and s["rank"] == "(1,0)"
    assert s["max_residue_rel"] == 2e-3
    data = json.loads(rep.dumps())
    assert data["checks"][1]["location"] == {"re": 0.5, "im": 1.0}
    assert rep.dumps() == rep.dumps()
    assert rep.text().splitlines()[-1] == "suite: 1/2 checks passed"


def test_empty_report_passes():
    assert VerificationReport("s").passed
    assert VerificationReport("s").worst() is None


def test_digest_stable():
    assert digest("a", 1) == digest("a", 1) != digest("a", 2)
    assert len(digest()) == 12


def test_config_round_trip():
    config = ModelConfig(Rank(1, 1), 1.2 + 0.3j, (Site(0.1 + 0.2j, 0.5),))
    back, seed = config_from_json(json.loads(json.dumps(config_to_json(config, 4))))
    assert back == config and seed == 4


def test_config_random_q_is_seeded():
    a, _ = config_from_json({"rank": {"r": 1, "s": 0}, "seed": 9})
    b, _ = config_from_json({"rank": {"r": 1, "s": 0}, "seed": 9})
    assert a.q == b.q and abs(a.q) != 1


@pytest.mark.parametrize("data", [
    [], {}, {"rank": {"r": 1}}, {"rank": {"r": 1, "s": 0}, "seed": "x"},
    {"rank": {"r": 1, "s": 0}, "sites": [{"w": 0}]}, {"rank": {"r": 1, "s": 0}, "q": 1},
])
def test_config_errors(data):
    with pytest.raises(ModelError):
        config_from_json(data)


def test_state_round_trip():
    st_ = BetheState(((0.1 + 0.2j,), (), (0.3, -0.4j)))
    assert state_from_json(state_to_json(st_), 3) == st_
    assert state_from_json({"roots": {"2": [1]}}, 3).counts == (0, 1, 0)
    for bad in ({"roots": {"4": []}}, {"roots": {"x": []}}, {"roots": []}):
        with pytest.raises(ModelError):
            state_from_json(bad, 3)


def test_parse_counts():
    assert parse_counts("1,2") == (1, 2)
    assert parse_counts([0, 3]) == (0, 3)
    for bad in ("a", "1,-1"):
        with pytest.raises(ModelError):
            parse_counts(bad)


def test_env_tolerance(monkeypatch):
    monkeypatch.delenv(TOL_ENV, raising=False)
    assert env_tolerance() is None
    monkeypatch.setenv(TOL_ENV, "1e-6")
    assert env_tolerance() == 1e-6
    for bad in ("x", "-1", "0"):
        monkeypatch.setenv(TOL_ENV, bad)
        with pytest.raises(ModelError):
            env_tolerance()
