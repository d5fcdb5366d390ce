"""Independent reference implementations used as test oracles.

Everything here is written from the definitions with plain Python scalars
and brute force, sharing no code with the package.  Running the module
regenerates the frozen values in ``data/frozen_oracles.json``:

    python3 tests/oracles.py
"""

from __future__ import annotations

import cmath
import itertools
import json
from fractions import Fraction
from pathlib import Path

FROZEN = Path(__file__).with_name("data") / "frozen_oracles.json"


# -- algebra ------------------------------------------------------------------------------

def bracket(u, q):
    qu = cmath.exp(u * cmath.log(q))
    return (qu - 1 / qu) / (q - 1 / q)


def gram(r, s):
    """(alpha_a|alpha_b) from eps/delta with (eps|eps) = 1, (delta|delta) = -1."""
    basis = [(+1, i) for i in range(r + 1)] + [(-1, j) for j in range(s + 1)]

    def vec(k):
        v = [0] * len(basis)
        v[k], v[k + 1] = 1, -1
        return v

    metric = [sign for sign, _ in basis]
    n = r + s + 1
    return [[sum(x * y * g for x, y, g in zip(vec(a), vec(b), metric)) for b in range(n)] for a in range(n)]


def dimension(r, s, b):
    """Typical dimension from the Kac-Dynkin label b (1-based list b[1..r+s+1])."""
    value = Fraction(2) ** ((r + 1) * (s + 1))
    for lo, hi in ((1, r), (r + 2, r + s + 1)):
        for i in range(lo, hi + 1):
            for j in range(i, hi + 1):
                value *= Fraction(sum(b[i : j + 1]) + j - i + 1, j - i + 1)
    return value


def kac_dynkin(r, s, mu):
    """Label of the covariant module with diagram mu."""
    mu = list(mu)
    row = lambda i: mu[i - 1] if i <= len(mu) else 0  # noqa: E731
    col = lambda j: sum(1 for m in mu if m >= j)  # noqa: E731
    eta = [max(col(j) - r - 1, 0) for j in range(1, s + 2)] + [0]
    b = [None] + [row(j) - row(j + 1) for j in range(1, r + 1)]
    b.append(row(r + 1) + eta[0])
    b += [eta[j - 1] - eta[j] for j in range(1, s + 1)]
    return b


# -- box functions --------------------------------------------------------------------------

class Model:
    """q, sites [(w, b)], roots per color, rank (r, s)."""

    def __init__(self, r, s, q, sites, roots):
        self.r, self.s, self.q = r, s, q
        self.sites = sites
        self.roots = roots

    def Q(self, a, u):
        if a == 0 or a == self.r + self.s + 2:
            return 1
        out = 1
        for x in self.roots[a - 1]:
            out *= bracket(u - x, self.q)
        return out

    def psi(self, a, u):
        if a <= self.r + 1:
            return 1
        out = 1
        for w, b in self.sites:
            out *= bracket(u - w + self.r + 1 - b, self.q) / bracket(u - w + self.r + 1 + b, self.q)
        return out

    def phi(self, u):
        out = 1
        for w, _ in self.sites:
            out *= bracket(u - w, self.q)
        return out

    def z(self, a, u):
        Q, r = self.Q, self.r
        if a <= r + 1:
            return self.psi(a, u) * Q(a - 1, u + a + 1) * Q(a, u + a - 2) / (Q(a - 1, u + a - 1) * Q(a, u + a))
        return (
            self.psi(a, u)
            * Q(a - 1, u + 2 * r - a + 1) * Q(a, u + 2 * r - a + 4)
            / (Q(a - 1, u + 2 * r - a + 3) * Q(a, u + 2 * r - a + 2))
        )

    def bae_ratio(self, a, k):
        """LHS / RHS of the BAE for root k of color a (1 at a solution)."""
        r, s, q = self.r, self.s, self.q
        u = self.roots[a - 1][k]
        t = 1 if a <= r + 1 else -1
        lhs = -1
        for w, b in self.sites if a == r + 1 else ():
            lhs *= bracket(u - w + b / t, q) / bracket(u - w - b / t, q)
        g = gram(r, s)
        rhs = (-1) ** (1 if a == r + 1 else 0)
        for c in range(1, r + s + 2):
            if g[a - 1][c - 1]:
                rhs *= self.Q(c, u + g[a - 1][c - 1]) / self.Q(c, u - g[a - 1][c - 1])
        return lhs / rhs


# -- tableaux ---------------------------------------------------------------------------------

def cells(mu, lam=()):
    lam = list(lam) + [0] * (len(mu) - len(lam))
    return [(i + 1, j + 1) for i in range(len(mu)) for j in range(lam[i], mu[i])]


def admissible(filling, r):
    """Direct transcription of the three admissibility rules."""
    for (i, j), a in filling.items():
        right, below = filling.get((i, j + 1)), filling.get((i + 1, j))
        if right is not None and (right < a or (right == a and a > r + 1)):
            return False
        if below is not None and (below < a or (below == a and a <= r + 1)):
            return False
    return True


def brute_tableaux(r, s, mu, lam=()):
    cs = cells(mu, lam)
    out = []
    for letters in itertools.product(range(1, r + s + 3), repeat=len(cs)):
        filling = dict(zip(cs, letters))
        if admissible(filling, r):
            out.append(filling)
    return out


def tableau_sum(model, mu, lam, u):
    """Sum over brute-force tableaux of the signed product of shifted boxes."""
    mu = list(mu)
    mu1 = mu[0] if mu else 0
    mu1c = len(mu)
    total = 0
    for filling in brute_tableaux(model.r, model.s, mu, lam):
        term = 1
        for (i, j), a in filling.items():
            sign = -1 if a > model.r + 1 else 1
            term *= sign * model.z(a, u - mu1 + mu1c - 2 * i + 2 * j)
        total += term
    return total


# -- closed forms ----------------------------------------------------------------------------

def sl21_rect(m, u, c):
    """sl(2|1), four terms of the deformed rectangular DVF."""
    Q = m.Q
    psi3 = lambda x: m.psi(3, x)  # noqa: E731
    return (
        Q(2, u - 1 - c) / Q(2, u + 1 + c)
        - psi3(u - 1 + c) * Q(1, u + c) * Q(2, u - 1 - c) / (Q(1, u + 2 + c) * Q(2, u + 1 + c))
        - psi3(u - 1 + c) * Q(1, u + 4 + c) * Q(2, u - 1 - c) / (Q(1, u + 2 + c) * Q(2, u + 3 + c))
        + psi3(u + 1 + c) * psi3(u - 1 + c) * Q(2, u - 1 - c) / Q(2, u + 3 + c)
    )


def t2_sl12(m, b, u):
    """sl(1|2), four-term T_(2) with every site label equal to b."""
    Q, phi = m.Q, m.phi
    return (
        Q(1, u - 2) / Q(1, u + 2)
        - phi(2 - b + u) * Q(1, u - 2) * Q(2, u + 3) / (phi(2 + b + u) * Q(1, u + 2) * Q(2, u + 1))
        - phi(2 - b + u) * Q(1, u - 2) * Q(2, u - 1) / (phi(2 + b + u) * Q(1, u) * Q(2, u + 1))
        + phi(u - b) * phi(2 - b + u) * Q(1, u - 2) / (phi(u + b) * phi(2 + b + u) * Q(1, u))
    )


def sl12_hook_terms(m, b, u, c):
    """sl(1|2), mu = (2,1): the eight terms (without the common prefactor)."""
    Q, phi = m.Q, m.phi
    A = phi(u + 1 - b + c) * phi(u + 3 - b + c) / (phi(u + 1 + b + c) * phi(u + 3 + b + c))
    B = phi(u + 3 - b + c) / phi(u + 3 + b + c)
    return [
        -Q(1, u - 3 - c) * Q(2, u - c) / (Q(1, u + 3 + c) * Q(2, u - 2 - c)),
        -A * Q(1, u - 1 - c) * Q(2, u - 4 - c) / (Q(1, u + 1 + c) * Q(2, u - 2 - c)),
        -A * Q(1, u - 3 - c) * Q(2, u - c) / (Q(1, u + 1 + c) * Q(2, u - 2 - c)),
        B * Q(1, u - 1 - c) * Q(2, u - 4 - c) * Q(2, u + c) / (Q(1, u + 1 + c) * Q(2, u - 2 - c) * Q(2, u + 2 + c)),
        B * Q(1, u - 3 - c) * Q(2, u - c) * Q(2, u + c) / (Q(1, u + 1 + c) * Q(2, u - 2 - c) * Q(2, u + 2 + c)),
        B * Q(1, u - 1 - c) * Q(2, u - 4 - c) * Q(2, u + 4 + c) / (Q(1, u + 3 + c) * Q(2, u - 2 - c) * Q(2, u + 2 + c)),
        B * Q(1, u - 3 - c) * Q(2, u - c) * Q(2, u + 4 + c) / (Q(1, u + 3 + c) * Q(2, u - 2 - c) * Q(2, u + 2 + c)),
        -Q(1, u - 1 - c) * Q(2, u - 4 - c) / (Q(1, u + 3 + c) * Q(2, u - 2 - c)),
    ]


def sl12_hook_prefactor(m, b, u, c):
    return m.phi(u - 1 - b - c) / m.phi(u - 1 + b - c)


def sl12_hook(m, b, u, c):
    return sl12_hook_prefactor(m, b, u, c) * sum(sl12_hook_terms(m, b, u, c))


# -- frozen values ---------------------------------------------------------------------------

FROZEN_CASES = [
    # (r, s, shapes as (mu, lambda))
    (1, 0, [((1,), ()), ((1, 1), ()), ((2,), ()), ((2, 1), ()), ((2, 2), (1,)), ((3, 1), (1,))]),
    (0, 1, [((1,), ()), ((2,), ()), ((2, 1), ()), ((1, 1, 1), ()), ((3, 2), (2,))]),
    (1, 1, [((1,), ()), ((2, 1), ()), ((2, 2), ()), ((3, 1), (1,))]),
]
FROZEN_Q = complex(1.3, 0.45)
FROZEN_SITES = [(complex(0.21, -0.13), complex(0.62, 0.18)), (complex(-0.35, 0.27), complex(-0.41, 0.33))]
FROZEN_POINTS = [complex(0.17, 0.29), complex(-0.44, 0.08), complex(0.61, -0.52)]


def frozen_roots(n_colors):
    return [[complex(0.1 * a + 0.07 * k, -0.05 * a + 0.11 * k) for k in range(1, 3)] for a in range(1, n_colors + 1)]


def compute_frozen():
    out = {"q": [FROZEN_Q.real, FROZEN_Q.imag],
           "sites": [[w.real, w.imag, b.real, b.imag] for w, b in FROZEN_SITES],
           "points": [[z.real, z.imag] for z in FROZEN_POINTS],
           "cases": []}
    for r, s, shapes in FROZEN_CASES:
        model = Model(r, s, FROZEN_Q, FROZEN_SITES, frozen_roots(r + s + 1))
        for mu, lam in shapes:
            values = [tableau_sum(model, mu, lam, u) for u in FROZEN_POINTS]
            out["cases"].append({
                "rank": [r, s], "mu": list(mu), "lambda": list(lam),
                "count": len(brute_tableaux(r, s, mu, lam)),
                "values": [[v.real, v.imag] for v in values],
            })
    return out


if __name__ == "__main__":
    FROZEN.parent.mkdir(exist_ok=True)
    FROZEN.write_text(json.dumps(compute_frozen(), indent=1) + "\n")
    print(f"wrote {FROZEN}")
