"""Functions on the gasket: vertex grids, harmonic extension, test corpus.

A GridFunction stores real values on every vertex of a fixed level.  Harmonic
extension fills the three new midpoints of each cell with the unique minimizer
of the within-cell pair-sum energy; solving d(energy)/d(midpoints) = 0 for one
cell with corner values (A, B, C) gives the midpoint opposite C the value
(2A + 2B + C) / 5, which is hard-coded below and cross-checked against a
generic quadratic minimizer in the test suite.
"""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .gasket import (
    DyadicPoint,
    GasketGrid,
    Word,
    cell_vertices,
    grid,
    vertex_count,
)


class GridFunction:
    """Real values on the full vertex set of one level.

    Values are indexed by vertex id.  Because vertex ids are stable across
    levels, evaluation at any coarser-level vertex is an exact table lookup
    and the restriction to level n is simply the first vertex_count(n) values.
    Immutable by convention; operations return new instances.
    """

    __slots__ = ("grid", "values")

    def __init__(self, g: GasketGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(g.points),):
            raise ValueError(
                f"expected {len(g.points)} values for level {g.level}, got {values.shape}")
        self.grid = g
        self.values = values
        self.values.setflags(write=False)

    @property
    def level(self) -> int:
        return self.grid.level

    def value_at(self, point: DyadicPoint) -> float:
        return float(self.values[self.grid.id_of(point)])

    def restrict_values(self, n: int) -> np.ndarray:
        if n > self.level:
            raise ValueError(f"level {n} exceeds grid level {self.level}")
        return self.values[: vertex_count(n)]

    def cell_corner_values(self, n: int) -> np.ndarray:
        """(3**n, 3) array of corner values for every level-n cell."""
        if n > self.level:
            raise ValueError(f"level {n} exceeds grid level {self.level}")
        return self.values[self.grid.cells[n]]

    def cell_means(self, n: int) -> np.ndarray:
        return self.cell_corner_values(n).mean(axis=1)

    def exact_values(self, n: int | None = None) -> list[Fraction]:
        """The stored float values as exact rationals (floats are dyadic)."""
        vals = self.values if n is None else self.restrict_values(n)
        return [Fraction(v) for v in vals]


def sample_at(g: GridFunction, word: Word) -> float:
    """Cell representative value: the mean of the three corner values."""
    if len(word) > g.level:
        raise ValueError(f"word depth {len(word)} exceeds grid level {g.level}")
    row = g.grid.cells[len(word)][word.index]
    return float(g.values[row].mean())


# ---------------------------------------------------------------------------
# harmonic extension
# ---------------------------------------------------------------------------

def _child_corner_values(vals: Sequence, d: int):
    """Corner values of child cell d given parent corner values."""
    out = []
    for j in range(3):
        if j == d:
            out.append(vals[d])
        else:
            k = 3 - d - j
            out.append((2 * vals[d] + 2 * vals[j] + vals[k]) / 5)
    return tuple(out)


def harmonic_extend(g: GridFunction) -> GridFunction:
    """Extend one level down, keeping existing values fixed.

    Each new midpoint receives (2A + 2B + C)/5 where A, B are the values at
    the edge ends and C the value at the opposite corner.
    """
    fine = grid(g.level + 1)
    values = np.empty(len(fine.points))
    values[: len(g.values)] = g.values

    corners = g.cell_corner_values(g.level)
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    children = fine.cells[g.level + 1].reshape(-1, 3, 3)
    # child d keeps corner d; entry (d, j) is the midpoint of corners d and j
    values[children[:, 0, 1]] = (2 * a + 2 * b + c) / 5
    values[children[:, 0, 2]] = (2 * a + 2 * c + b) / 5
    values[children[:, 1, 2]] = (2 * b + 2 * c + a) / 5
    return GridFunction(fine, values)


def harmonic_extend_exact(values: list[Fraction], level: int) -> list[Fraction]:
    """Rational-arithmetic twin of harmonic_extend, for exact verdicts."""
    g = grid(level)
    fine = grid(level + 1)
    out: list[Fraction] = list(values) + [Fraction(0)] * (len(fine.points) - len(values))
    children = fine.cells[level + 1].reshape(-1, 3, 3)
    for w, row in enumerate(g.cells[level]):
        a, b, c = (values[i] for i in row)
        out[children[w, 0, 1]] = Fraction(2 * a + 2 * b + c, 5)
        out[children[w, 0, 2]] = Fraction(2 * a + 2 * c + b, 5)
        out[children[w, 1, 2]] = Fraction(2 * b + 2 * c + a, 5)
    return out


def energy_minimizing_interpolation(boundary: Sequence[float], level: int) -> GridFunction:
    """level-fold harmonic extension of three corner values."""
    if len(boundary) != 3:
        raise ValueError("boundary must be a value triple")
    g = GridFunction(grid(0), np.asarray(boundary, dtype=np.float64))
    for _ in range(level):
        g = harmonic_extend(g)
    return g


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

class TestFunction:
    """A member of the probe corpus, evaluable at any depth.

    Kinds:
      constant            fixed value everywhere
      harmonic            harmonic extension of a boundary triple
      coordinate_x / _y   the planar coordinates restricted to the gasket
      hoelder_probe       indicator of one cell's corner triple on its level,
                          extended harmonically (a localized bump)
      custom_table        arbitrary values on one level, extended harmonically

    All kinds except the coordinates are harmonic below `base_level`, which
    makes their renormalized energies constant from that level on; that exact
    tail is what the kernel experiments rely on.
    """

    def __init__(self, kind: str, *, label: str | None = None,
                 value: float = 0.0,
                 boundary: tuple[float, float, float] | None = None,
                 word: Word | None = None,
                 table_level: int | None = None,
                 table_values: np.ndarray | None = None):
        self.kind = kind
        self.value = value
        self.boundary = boundary
        self.word = word
        self.table_level = table_level
        self.table_values = table_values
        self.label = label or self._default_label()
        self._base_cache: np.ndarray | None = None
        self._materialized: dict[int, GridFunction] = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value: float, label: str | None = None) -> "TestFunction":
        return cls("constant", value=float(value), label=label)

    @classmethod
    def harmonic(cls, b0: float, b1: float, b2: float,
                 label: str | None = None) -> "TestFunction":
        return cls("harmonic", boundary=(float(b0), float(b1), float(b2)), label=label)

    @classmethod
    def coordinate_x(cls, label: str | None = None) -> "TestFunction":
        return cls("coordinate_x", label=label)

    @classmethod
    def coordinate_y(cls, label: str | None = None) -> "TestFunction":
        return cls("coordinate_y", label=label)

    @classmethod
    def hoelder_probe(cls, word: Word | str, label: str | None = None) -> "TestFunction":
        if isinstance(word, str):
            word = Word.from_string(word)
        if len(word) == 0:
            raise ValueError("hoelder_probe needs a nonempty cell address")
        return cls("hoelder_probe", word=word, label=label)

    @classmethod
    def custom_table(cls, table_level: int, table_values: Iterable[float],
                     label: str | None = None) -> "TestFunction":
        vals = np.asarray(list(table_values), dtype=np.float64)
        if vals.shape != (vertex_count(table_level),):
            raise ValueError(
                f"need {vertex_count(table_level)} values for level {table_level}")
        return cls("custom_table", table_level=table_level, table_values=vals, label=label)

    def _default_label(self) -> str:
        if self.kind == "harmonic":
            return "harmonic_" + "".join(f"{v:g}" for v in self.boundary)
        if self.kind == "hoelder_probe":
            return f"probe_{self.word}"
        if self.kind == "constant":
            return f"constant_{self.value:g}"
        return self.kind

    def __repr__(self) -> str:
        return f"TestFunction({self.label})"

    # -- structure ----------------------------------------------------------

    @property
    def base_level(self) -> int | None:
        """Level from which the function is a pure harmonic extension."""
        if self.kind in ("constant", "harmonic"):
            return 0
        if self.kind == "hoelder_probe":
            return len(self.word)
        if self.kind == "custom_table":
            return self.table_level
        return None  # coordinates are nowhere harmonic

    @property
    def eventually_harmonic(self) -> bool:
        return self.base_level is not None

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def _base_values(self) -> np.ndarray:
        """Float values on the base-level vertex set."""
        if self._base_cache is None:
            if self.kind == "constant":
                vals = np.full(3, self.value)
            elif self.kind == "harmonic":
                vals = np.asarray(self.boundary, dtype=np.float64)
            elif self.kind == "hoelder_probe":
                lvl = len(self.word)
                g = grid(lvl)
                vals = np.zeros(len(g.points))
                vals[list(g.cells[lvl][self.word.index])] = 1.0
            elif self.kind == "custom_table":
                vals = self.table_values.astype(np.float64)
            else:
                raise ValueError(f"{self.kind} has no harmonic base table")
            self._base_cache = vals
        return self._base_cache

    def base_values_exact(self) -> list[Fraction]:
        return [Fraction(v) for v in self._base_values()]

    # -- evaluation ---------------------------------------------------------

    def materialize(self, level: int) -> GridFunction:
        """Values on the full level-`level` vertex set."""
        if level in self._materialized:
            return self._materialized[level]
        g = grid(level)
        if self.kind in ("coordinate_x", "coordinate_y"):
            xs, ys = g.xy_float()
            out = GridFunction(g, xs if self.kind == "coordinate_x" else ys)
        else:
            base = self.base_level
            if level <= base:
                vals = self._base_values()[: vertex_count(level)]
                out = GridFunction(g, vals)
            else:
                f = GridFunction(grid(base), self._base_values())
                for _ in range(level - base):
                    f = harmonic_extend(f)
                out = f
        self._materialized[level] = out
        return out

    def corner_values(self, word: Word) -> tuple[float, float, float]:
        """Exact corner values of an arbitrarily deep cell.

        For harmonic-backed kinds this walks the extension rule down the
        address, so the depth is not limited by any materialized grid.
        """
        if self.kind == "constant":
            return (self.value,) * 3
        if self.kind in ("coordinate_x", "coordinate_y"):
            k = 0 if self.kind == "coordinate_x" else 1
            return tuple(p.to_xy()[k] for p in cell_vertices(word))
        base = self.base_level
        if len(word) <= base:
            g = grid(base)
            row = g.cells[len(word)][word.index]
            vals = self._base_values()[row]
            return (float(vals[0]), float(vals[1]), float(vals[2]))
        head, tail = word[:base], word.digits[base:]
        g = grid(base)
        row = g.cells[base][head.index]
        vals = tuple(float(v) for v in self._base_values()[row])
        for d in tail:
            vals = _child_corner_values(vals, d)
        return vals

    def describe(self) -> dict:
        d: dict = {"kind": self.kind, "label": self.label}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "harmonic":
            d["boundary"] = list(self.boundary)
        elif self.kind == "hoelder_probe":
            d["word"] = str(self.word)
        elif self.kind == "custom_table":
            d["table_level"] = self.table_level
            d["table_values"] = [float(v) for v in self.table_values]
        return d

    @classmethod
    def from_descriptor(cls, d: dict) -> "TestFunction":
        kind = d.get("kind")
        label = d.get("label")
        if kind == "constant":
            return cls.constant(d["value"], label)
        if kind == "harmonic":
            b = d["boundary"]
            return cls.harmonic(b[0], b[1], b[2], label)
        if kind == "coordinate_x":
            return cls.coordinate_x(label)
        if kind == "coordinate_y":
            return cls.coordinate_y(label)
        if kind == "hoelder_probe":
            return cls.hoelder_probe(d["word"], label)
        if kind == "custom_table":
            return cls.custom_table(d["table_level"], d["table_values"], label)
        raise ValueError(f"unknown test function kind {kind!r}")


def default_corpus() -> list[TestFunction]:
    """The pinned five-function probe corpus used by the experiment suites."""
    return [
        TestFunction.harmonic(1, 0, 0, label="harmonic_100"),
        TestFunction.harmonic(0, 1, 0, label="harmonic_010"),
        TestFunction.coordinate_x(label="coordinate_x"),
        TestFunction.coordinate_y(label="coordinate_y"),
        TestFunction.hoelder_probe("00", label="probe_00"),
    ]


# ---------------------------------------------------------------------------
# import / export
# ---------------------------------------------------------------------------

def grid_function_to_csv(g: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "s", "a", "b", "value"])
        for i, p in enumerate(g.grid.points):
            writer.writerow([i, p.s, p.a, p.b, repr(float(g.values[i]))])


def grid_function_from_csv(path) -> GridFunction:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((int(row["id"]), int(row["s"]), int(row["a"]),
                         int(row["b"]), float(row["value"])))
    return _grid_function_from_rows(rows)


def grid_function_to_json(g: GridFunction, path) -> None:
    payload = {
        "level": g.level,
        "vertices": [
            {"id": i, "s": p.s, "a": p.a, "b": p.b, "value": float(g.values[i])}
            for i, p in enumerate(g.grid.points)
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def grid_function_from_json(path) -> GridFunction:
    with open(path) as fh:
        payload = json.load(fh)
    rows = [(v["id"], v["s"], v["a"], v["b"], v["value"]) for v in payload["vertices"]]
    return _grid_function_from_rows(rows)


def _grid_function_from_rows(rows) -> GridFunction:
    n = len(rows)
    level = 0
    while vertex_count(level) < n:
        level += 1
    if vertex_count(level) != n:
        raise ValueError(f"{n} rows is not a full vertex set of any level")
    from .gasket import dyadic

    g = grid(level)
    values = np.empty(n)
    for vid, s, a, b, value in rows:
        if g.id_of(dyadic(a, b, s)) != vid:
            raise ValueError(f"row id {vid} does not match the canonical vertex order")
        values[vid] = value
    return GridFunction(g, values)
