"""Young superdiagrams, skew shapes and admissible tableaux.

Gradings are tuples ``p`` with ``p[a-1]`` the parity of letter ``a``; letters
are totally ordered by their integer value.  The distinguished grading of a
rank is ``Rank.grading``.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Iterator, Sequence

import numpy as np

from .model import ModelError, Rank

Partition = tuple[int, ...]

#: Shapes above this many cells need ``allow_large=True`` for tableau sums.
CELL_CAP = 14


def partition(parts: Sequence[int]) -> Partition:
    """Validate and normalize a partition (trailing zeros dropped)."""
    parts = tuple(int(p) for p in parts)
    if any(p < 0 for p in parts):
        raise ModelError(f"negative part in {parts}")
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ModelError(f"{parts} is not weakly decreasing")
    while parts and parts[-1] == 0:
        parts = parts[:-1]
    return parts


def conjugate(p: Sequence[int]) -> Partition:
    if not p:
        return ()
    return tuple(sum(1 for x in p if x >= j) for j in range(1, p[0] + 1))


def part(p: Sequence[int], i: int) -> int:
    """1-based row length, zero past the end."""
    return p[i - 1] if 0 < i <= len(p) else 0


def partitions_upto(n: int) -> Iterator[Partition]:
    """All partitions of size <= n, including the empty one."""

    def gen(remaining, largest):
        yield ()
        for first in range(min(remaining, largest), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    yield from gen(n, n)


def subdiagrams(mu: Partition) -> Iterator[Partition]:
    """Every partition lambda contained in mu."""

    def gen(i, bound):
        if i > len(mu):
            yield ()
            return
        for x in range(min(bound, mu[i - 1]), -1, -1):
            if x == 0:
                yield ()
            else:
                for rest in gen(i + 1, x):
                    yield (x,) + rest

    yield from gen(1, mu[0] if mu else 0)


@dataclass(frozen=True)
class SkewShape:
    outer: Partition
    inner: Partition = ()

    def __post_init__(self):
        outer, inner = partition(self.outer), partition(self.inner)
        if len(inner) > len(outer) or any(l > m for l, m in zip(inner, outer)):
            raise ModelError(f"lambda={inner} is not contained in mu={outer}")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "inner", inner)

    @property
    def n_rows(self) -> int:
        return len(self.outer)

    def row_span(self, i: int) -> tuple[int, int]:
        """Columns (lo, hi] occupied in row i."""
        return part(self.inner, i), part(self.outer, i)

    def cells(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i in range(1, self.n_rows + 1)
            for j in range(part(self.inner, i) + 1, part(self.outer, i) + 1)
        ]

    @property
    def n_cells(self) -> int:
        return sum(self.outer) - sum(self.inner)

    def content_shift(self, i: int, j: int) -> int:
        """Spectral shift -mu_1 + mu'_1 - 2i + 2j of cell (i, j)."""
        mu = self.outer
        return -part(mu, 1) + len(mu) - 2 * i + 2 * j

    def __str__(self):
        text = "mu=" + ",".join(map(str, self.outer))
        if self.inner:
            text += "/lambda=" + ",".join(map(str, self.inner))
        return text

    @classmethod
    def parse(cls, text: str) -> "SkewShape":
        """Accept ``mu=2,1/lambda=1`` or a JSON object ``{"mu": [...], "lambda": [...]}``."""
        text = text.strip()
        if text.startswith("{"):
            data = json.loads(text)
            return cls(tuple(data.get("mu", ())), tuple(data.get("lambda", ())))
        m = re.fullmatch(r"mu=([\d,]*)(?:/lambda=([\d,]*))?", text)
        if m is None:
            raise ModelError(f"cannot parse shape {text!r}")
        as_parts = lambda g: tuple(int(x) for x in g.split(",") if x) if g else ()  # noqa: E731
        return cls(as_parts(m.group(1)), as_parts(m.group(2)))

    def to_json(self) -> dict:
        return {"mu": list(self.outer), "lambda": list(self.inner)}


@dataclass(frozen=True)
class SuperTableau:
    shape: SkewShape
    rows: tuple[tuple[int, ...], ...]  # skew-cell entries per row

    def __getitem__(self, cell: tuple[int, int]) -> int:
        i, j = cell
        lo, _ = self.shape.row_span(i)
        return self.rows[i - 1][j - lo - 1]

    def entries(self) -> Iterator[tuple[tuple[int, int], int]]:
        for cell in self.shape.cells():
            yield cell, self[cell]

    def grid(self) -> list[list[int]]:
        """Row-major grid over mu with 0 in the inner cells."""
        return [[0] * part(self.shape.inner, i + 1) + list(row) for i, row in enumerate(self.rows)]

    def __str__(self):
        return "/".join("".join(str(x) if x else "." for x in row) for row in self.grid())


def is_admissible(tableau: SuperTableau, grading: Sequence[int]) -> bool:
    """Independent check of the three admissibility rules."""
    entries = dict(tableau.entries())
    for (i, j), a in entries.items():
        if not 1 <= a <= len(grading):
            return False
        for nb, strict_parity in (((i, j + 1), 1), ((i + 1, j), 0)):
            b = entries.get(nb)
            if b is None:
                continue
            if b < a or (b == a and grading[a - 1] == strict_parity):
                return False
    return True


def _letters(grading: Sequence[int], restrict_odd: bool) -> tuple[int, ...]:
    return tuple(a for a in range(1, len(grading) + 1) if not restrict_odd or grading[a - 1] == 1)


def enumerate_tableaux(
    shape: SkewShape, grading: Sequence[int], letters: Sequence[int] | None = None
) -> Iterator[SuperTableau]:
    """Backtracking over cells in row-major order; lexicographic output."""
    grading = tuple(grading)
    letters = tuple(letters) if letters is not None else _letters(grading, False)
    cells = shape.cells()
    filling: dict[tuple[int, int], int] = {}

    def ok(cell, a):
        i, j = cell
        left, up = filling.get((i, j - 1)), filling.get((i - 1, j))
        if left is not None and (a < left or (a == left and grading[a - 1] == 1)):
            return False
        if up is not None and (a < up or (a == up and grading[a - 1] == 0)):
            return False
        return True

    def rec(k):
        if k == len(cells):
            rows = tuple(
                tuple(filling[(i, j)] for j in range(shape.row_span(i)[0] + 1, shape.row_span(i)[1] + 1))
                for i in range(1, shape.n_rows + 1)
            )
            yield SuperTableau(shape, rows)
            return
        cell = cells[k]
        for a in letters:
            if ok(cell, a):
                filling[cell] = a
                yield from rec(k + 1)
                del filling[cell]

    yield from rec(0)


def enumerate_admissible(shape: SkewShape, rank: Rank) -> Iterator[SuperTableau]:
    return enumerate_tableaux(shape, rank.grading)


def enumerate_restricted(shape: SkewShape, rank: Rank) -> Iterator[SuperTableau]:
    """Admissible tableaux whose entries all lie in J_-."""
    return enumerate_tableaux(shape, rank.grading, rank.odd_letters)


# -- row transfer ------------------------------------------------------------

@lru_cache(maxsize=None)
def row_fillings(length: int, letters: tuple[int, ...], grading: tuple[int, ...]) -> np.ndarray:
    """All admissible single-row fillings, lexicographic, shape (count, length)."""
    rows = [
        combo
        for combo in combinations_with_replacement(letters, length)
        if all(not (x == y and grading[x - 1] == 1) for x, y in zip(combo, combo[1:]))
    ]
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), length)
    arr.setflags(write=False)
    return arr


def _compatibility(upper: np.ndarray, lower: np.ndarray, grading: np.ndarray) -> np.ndarray:
    """Boolean (n_upper, n_lower): column rule between vertically adjacent cells."""
    a = upper[:, None, :]
    b = lower[None, :, :]
    odd_a = grading[a - 1] == 1
    ok = (b > a) | ((b == a) & odd_a)
    return ok.all(axis=2)


def transfer_sum(
    shape: SkewShape,
    grading: Sequence[int],
    weight: Callable[[int, int], np.ndarray],
    letters: Sequence[int] | None = None,
) -> np.ndarray:
    """Sum over admissible tableaux of the product of cell weights.

    ``weight(i, j)`` returns an array of shape ``(len(grading), P)`` whose row
    ``a-1`` is the weight of letter ``a`` in cell ``(i, j)``.  Rows of the
    diagram are summed out one at a time, so cost is governed by the number of
    single-row fillings rather than the number of tableaux.
    """
    grading = tuple(grading)
    letters = tuple(letters) if letters is not None else _letters(grading, False)
    g = np.asarray(grading)
    state = None
    prev_fill = None
    prev_lo = 0
    for i in range(1, shape.n_rows + 1):
        lo, hi = shape.row_span(i)
        fill = row_fillings(hi - lo, letters, grading)
        if len(fill) == 0:
            return np.zeros_like(np.asarray(weight(i, lo + 1))[0])
        row_w = None
        for k, j in enumerate(range(lo + 1, hi + 1)):
            wj = np.asarray(weight(i, j))[fill[:, k] - 1]
            row_w = wj if row_w is None else row_w * wj
        if row_w is None:
            row_w = np.ones((1, 1))
        if state is None:
            state = row_w
        else:
            overlap_lo = max(prev_lo, lo)
            if hi > overlap_lo:
                up = prev_fill[:, overlap_lo - prev_lo : hi - prev_lo]
                down = fill[:, overlap_lo - lo : hi - lo]
                comp = _compatibility(up, down, g).astype(state.dtype)
                state = (comp.T @ state) * row_w
            else:
                state = state.sum(axis=0, keepdims=True) * row_w
        prev_fill, prev_lo = fill, lo
    if state is None:
        return np.ones(1)
    return state.sum(axis=0)


_count_lock = threading.Lock()
_count_memo: dict = {}


def count_tableaux(shape: SkewShape, grading: Sequence[int], letters: Sequence[int] | None = None) -> int:
    key = (shape, tuple(grading), None if letters is None else tuple(letters))
    with _count_lock:
        if key in _count_memo:
            return _count_memo[key]
    ones = np.ones((len(grading), 1), dtype=np.int64)
    total = int(transfer_sum(shape, grading, lambda i, j: ones, letters)[0])
    with _count_lock:
        _count_memo[key] = total
    return total


def count_admissible(shape: SkewShape, rank: Rank) -> int:
    return count_tableaux(shape, rank.grading)


def count_restricted(shape: SkewShape, rank: Rank) -> int:
    return count_tableaux(shape, rank.grading, rank.odd_letters)


def feasible_letters(
    shape: SkewShape, grading: Sequence[int], letters: Sequence[int] | None = None
) -> dict[tuple[int, int], tuple[int, ...]]:
    """Letters that occur at each cell in at least one admissible tableau."""
    n = len(grading)
    out = {}
    for cell in shape.cells():
        found = []
        for a in letters if letters is not None else range(1, n + 1):
            mask = np.zeros((n, 1), dtype=np.int64)
            mask[a - 1] = 1
            ones = np.ones((n, 1), dtype=np.int64)
            if transfer_sum(shape, grading, lambda i, j: mask if (i, j) == cell else ones, letters)[0]:
                found.append(a)
        out[cell] = tuple(found)
    return out
