"""Verification reports and JSON serialization of model inputs.

Floats are written with 17 significant digits so that a report produced
twice from the same seed is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .analytic import BetheState
from .model import ModelConfig, ModelError, Rank, Site, random_q

#: Environment variable overriding the default tolerance of a suite.
TOL_ENV = "SUPERBETHE_TOL"


def env_tolerance() -> float | None:
    """Tolerance override from the environment, or None."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ModelError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not value > 0:
        raise ModelError(f"{TOL_ENV} must be positive, got {raw}")
    return value


# -- numbers ----------------------------------------------------------------------

def fmt_float(x: float) -> Any:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.17g}")


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": fmt_float(z.real), "im": fmt_float(z.imag)}


def complex_from_json(value) -> complex:
    if isinstance(value, dict):
        try:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        except (TypeError, ValueError):
            raise ModelError(f"bad complex number {value!r}") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ModelError(f"bad complex number {value!r}") from None
    raise ModelError(f"bad complex number {value!r}")


def digest(*parts) -> str:
    """Short stable hash of the inputs of a check."""
    text = json.dumps([str(p) for p in parts], sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# -- reports ----------------------------------------------------------------------

@dataclass
class Check:
    """One verification record.

    ``value`` is a max relative error for identity checks and a relative
    residue for pole checks; ``metric`` names which.
    """

    name: str
    value: float
    tolerance: float
    samples: int = 0
    metric: str = "max_rel_err"
    location: complex | None = None
    digest: str = ""
    note: str = ""
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.value) and self.value < self.tolerance)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"name": self.name}
        if self.location is not None:
            out["location"] = complex_to_json(self.location)
        if self.digest:
            out["digest"] = self.digest
        if self.samples:
            out["samples"] = self.samples
        out[self.metric] = fmt_float(self.value)
        out["tolerance"] = fmt_float(self.tolerance)
        out["pass"] = self.passed
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)

    def worst(self, metric: str | None = None) -> Check | None:
        pool = [c for c in self.checks if metric is None or c.metric == metric]
        if not pool:
            return None
        return max(pool, key=lambda c: c.value if np.isfinite(c.value) else math.inf)

    def summary(self) -> dict:
        failed = [c.name for c in self.checks if not c.passed]
        out: dict[str, Any] = {
            "suite": self.suite,
            "checks": len(self.checks),
            "failed": len(failed),
            "pass": self.passed,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        for metric in sorted({c.metric for c in self.checks}):
            worst = self.worst(metric)
            out["max_" + metric if not metric.startswith("max_") else metric] = fmt_float(worst.value)
        if failed:
            out["first_failures"] = failed[:10]
        out.update(self.meta)
        return out

    def to_json(self) -> dict:
        return {"checks": [c.to_json() for c in self.checks], "summary": self.summary()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def text(self) -> str:
        lines = []
        for c in self.checks:
            loc = f" at {c.location:.6g}" if c.location is not None else ""
            note = f"  ({c.note})" if c.note else ""
            lines.append(
                f"{'PASS' if c.passed else 'FAIL'}  {c.name}{loc}  {c.metric}={c.value:.3e}"
                f" tol={c.tolerance:.0e}{note}"
            )
        s = self.summary()
        lines.append(f"{self.suite}: {s['checks'] - s['failed']}/{s['checks']} checks passed")
        return "\n".join(lines) + "\n"


# -- model inputs -------------------------------------------------------------------

def config_from_json(data: dict) -> tuple[ModelConfig, int]:
    """Parse a model configuration; returns (config, seed)."""
    if not isinstance(data, dict):
        raise ModelError("configuration must be a JSON object")
    try:
        rank = Rank(int(data["rank"]["r"]), int(data["rank"]["s"]))
    except (KeyError, TypeError, ValueError):
        raise ModelError('configuration needs "rank": {"r": int, "s": int}') from None
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ModelError(f"seed must be an integer, got {seed!r}")
    q = data.get("q", "random")
    if q == "random":
        q = random_q(np.random.default_rng(seed))
    else:
        q = complex_from_json(q)
    sites = []
    for s in data.get("sites", []):
        if not isinstance(s, dict) or "w" not in s or "b" not in s:
            raise ModelError(f"site entries need w and b, got {s!r}")
        sites.append(Site(complex_from_json(s["w"]), complex_from_json(s["b"])))
    allow = bool(data.get("allow_unit_q", False))
    return ModelConfig(rank, q, tuple(sites), allow_unit_q=allow), seed


def config_to_json(config: ModelConfig, seed: int = 0) -> dict:
    return {
        "rank": {"r": config.rank.r, "s": config.rank.s},
        "q": complex_to_json(config.q),
        "seed": seed,
        "sites": [{"w": complex_to_json(s.w), "b": complex_to_json(s.b)} for s in config.sites],
    }


def state_from_json(data: dict, n_colors: int) -> BetheState:
    if not isinstance(data, dict) or not isinstance(data.get("roots"), dict):
        raise ModelError('roots file must look like {"roots": {"1": [...], ...}}')
    roots: list[list[complex]] = [[] for _ in range(n_colors)]
    for key, values in data["roots"].items():
        try:
            a = int(key)
        except ValueError:
            raise ModelError(f"color key {key!r} is not an integer") from None
        if not 1 <= a <= n_colors:
            raise ModelError(f"color {a} outside 1..{n_colors}")
        roots[a - 1] = [complex_from_json(v) for v in values]
    return BetheState(tuple(tuple(c) for c in roots))


def state_to_json(state: BetheState) -> dict:
    return {
        "roots": {str(a): [complex_to_json(z) for z in color] for a, color in enumerate(state.roots, 1)}
    }


def parse_counts(text: str | Sequence[int]) -> tuple[int, ...]:
    if isinstance(text, str):
        try:
            counts = tuple(int(x) for x in text.split(",") if x.strip())
        except ValueError:
            raise ModelError(f"counts must look like '1,1', got {text!r}") from None
    else:
        counts = tuple(int(x) for x in text)
    if any(n < 0 for n in counts):
        raise ModelError("root counts must be nonnegative")
    return counts
