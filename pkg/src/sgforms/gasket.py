"""Exact geometry, addressing and measure for the Sierpinski gasket.

The gasket is generated by three half-scale contractions toward the corners
of an equilateral triangle with unit side.  Every point reachable by finitely
many contractions has coordinates (a / 2**s, b * sqrt(3) / 2**s) with integer
a, b, so all gluing decisions (which cell corners coincide), distances and
membership tests are made in exact integer arithmetic.  Floats appear only in
exported coordinates.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

import numpy as np

SQRT3 = math.sqrt(3.0)

# Hausdorff dimension log3/log2 and walk dimension log5/log2 of the gasket.
# Exponent identities such as 2**(HAUSDORFF_DIM * n) == 3**n are always
# evaluated through the integer powers, never through these floats.
HAUSDORFF_DIM = math.log2(3.0)
WALK_DIM = math.log2(5.0)

#: depth guard for point coordinates (scale s); deep-cell addressing in the
#: kernel experiments grows like n * (1 + gamma * i) and must fail loudly.
MAX_POINT_DEPTH = 40

#: largest level for which vertex/cell tables are materialized (3**level cells)
MAX_GRID_LEVEL = 12


class NotOnGasketError(ValueError):
    """Raised when a point is provably not on the gasket."""


class DepthLimitError(ValueError):
    """Raised when an operation would exceed a configured depth guard."""


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class DyadicPoint:
    """The planar point (a / 2**s, b * sqrt(3) / 2**s) in canonical form.

    Canonical: s == 0, or at least one of a, b is odd.  Equal points then have
    equal field triples, so dictionary dedup of glued vertices is exact.
    Construct through :func:`dyadic`.
    """

    s: int
    a: int
    b: int

    def to_xy(self) -> tuple[float, float]:
        sc = float(1 << self.s)
        return self.a / sc, self.b * SQRT3 / sc

    def rescaled(self, s: int) -> tuple[int, int]:
        """Integer coordinates at scale 2**-s; requires s >= self.s."""
        f = 1 << (s - self.s)
        return self.a * f, self.b * f

    def dist2(self, other: "DyadicPoint") -> Fraction:
        """Exact squared Euclidean distance."""
        s = max(self.s, other.s)
        ax, ab = self.rescaled(s)
        bx, bb = other.rescaled(s)
        return Fraction((ax - bx) ** 2 + 3 * (ab - bb) ** 2, 1 << (2 * s))


def dyadic(a: int, b: int, s: int = 0) -> DyadicPoint:
    """Canonicalize and build a dyadic point (a / 2**s, b * sqrt(3) / 2**s)."""
    if s < 0:
        raise ValueError("scale must be nonnegative")
    while s > 0 and a % 2 == 0 and b % 2 == 0:
        a //= 2
        b //= 2
        s -= 1
    return DyadicPoint(s, a, b)


P0 = dyadic(0, 0)
P1 = dyadic(1, 0)
P2 = dyadic(1, 1, 1)
CORNERS = (P0, P1, P2)


def _combine(p: DyadicPoint, q: DyadicPoint, halve: bool) -> DyadicPoint:
    s = max(p.s, q.s)
    px, pb = p.rescaled(s)
    qx, qb = q.rescaled(s)
    return dyadic(px + qx, pb + qb, s + 1 if halve else s)


def midpoint(p: DyadicPoint, q: DyadicPoint) -> DyadicPoint:
    return _combine(p, q, halve=True)


def contract(point: DyadicPoint, digit: int) -> DyadicPoint:
    """Apply the contraction toward corner `digit`: x -> (x + p_digit) / 2."""
    if digit not in (0, 1, 2):
        raise ValueError(f"digit must be 0, 1 or 2, got {digit}")
    return midpoint(point, CORNERS[digit])


def _expand(point: DyadicPoint, digit: int) -> DyadicPoint:
    """Inverse contraction 2x - p_digit (not necessarily on the gasket)."""
    c = CORNERS[digit]
    if point.s >= 1:
        doubled = dyadic(point.a, point.b, point.s - 1)
    else:
        doubled = dyadic(2 * point.a, 2 * point.b, 0)
    s = max(doubled.s, c.s)
    dx, db = doubled.rescaled(s)
    cx, cb = c.rescaled(s)
    return dyadic(dx - cx, db - cb, s)


def _in_hull(p: DyadicPoint) -> bool:
    # closed triangle P0 P1 P2: y >= 0, y <= sqrt(3) x, y <= sqrt(3)(1 - x)
    return 0 <= p.b <= p.a and p.b <= (1 << p.s) - p.a


# ---------------------------------------------------------------------------
# words and cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Word:
    """An address over {0,1,2}; the empty word denotes the whole gasket."""

    digits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(d not in (0, 1, 2) for d in self.digits):
            raise ValueError(f"invalid digits in word {self.digits!r}")

    @classmethod
    def from_string(cls, text: str) -> "Word":
        return cls(tuple(int(ch) for ch in text))

    def __str__(self) -> str:
        return "".join(str(d) for d in self.digits)

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, k):
        got = self.digits[k]
        return Word(got) if isinstance(k, slice) else got

    def child(self, digit: int) -> "Word":
        return Word(self.digits + (digit,))

    def extend(self, digits: Iterable[int]) -> "Word":
        return Word(self.digits + tuple(digits))

    def repeat_append(self, digit: int, count: int) -> "Word":
        return Word(self.digits + (digit,) * count)

    def is_prefix_of(self, other: "Word") -> bool:
        return other.digits[: len(self.digits)] == self.digits

    @property
    def index(self) -> int:
        """Rank among same-length words, most significant digit first."""
        k = 0
        for d in self.digits:
            k = 3 * k + d
        return k


def word_from_index(n: int, index: int) -> Word:
    digits = []
    for _ in range(n):
        index, d = divmod(index, 3)
        digits.append(d)
    return Word(tuple(reversed(digits)))


def iter_words(n: int) -> Iterator[Word]:
    for digits in product((0, 1, 2), repeat=n):
        yield Word(digits)


def word_apply(word: Word, point: DyadicPoint) -> DyadicPoint:
    """Image of `point` under f_{w_1} o ... o f_{w_n}."""
    for d in reversed(word.digits):
        point = contract(point, d)
    return point


def cell_vertices(word: Word) -> tuple[DyadicPoint, DyadicPoint, DyadicPoint]:
    """Corner triple of the cell addressed by `word`.

    Entry j is the image of corner p_j, so the attachment digit of a corner
    is its position in the tuple.
    """
    return tuple(word_apply(word, c) for c in CORNERS)  # type: ignore[return-value]


def cell_point(word: Word) -> DyadicPoint:
    """The distinguished vertex obtained by contracting all but the last digit
    onto the corner named by the last digit."""
    if len(word) == 0:
        raise ValueError("the empty word has no distinguished vertex")
    return word_apply(word[:-1], CORNERS[word.digits[-1]])


def cell_measure(word: Word) -> Fraction:
    return Fraction(1, 3 ** len(word))


@dataclass(frozen=True, slots=True)
class Cell:
    """A level-n cell; diameter 2**-n, normalized measure 3**-n."""

    word: Word

    @property
    def level(self) -> int:
        return len(self.word)

    @property
    def measure(self) -> Fraction:
        return cell_measure(self.word)

    def vertices(self) -> tuple[DyadicPoint, DyadicPoint, DyadicPoint]:
        return cell_vertices(self.word)


def vertex_count(level: int) -> int:
    """Number of distinct vertices at a given level: (3**(m+1) + 3) / 2."""
    return (3 ** (level + 1) + 3) // 2


# ---------------------------------------------------------------------------
# vertex tables
# ---------------------------------------------------------------------------

class GasketGrid:
    """Deduplicated vertex set and cell tables up to a fixed level.

    Vertex ids are stable across levels: the first vertex_count(n) ids of any
    deeper grid are exactly the level-n vertices, in the same order.  cells[n]
    is an int array of shape (3**n, 3); row w.index holds the vertex ids of
    cell w's corners, column j being the image of corner p_j.  Instances are
    immutable after construction and safe to share.
    """

    def __init__(self, level: int, points: list[DyadicPoint],
                 index: dict[DyadicPoint, int], cells: list[np.ndarray]):
        self.level = level
        self.points = points
        self.index = index
        self.cells = cells
        self._scaled: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __repr__(self) -> str:
        return f"GasketGrid(level={self.level}, vertices={len(self.points)})"

    def id_of(self, point: DyadicPoint) -> int:
        try:
            return self.index[point]
        except KeyError:
            raise KeyError(f"{point} is not a vertex of level <= {self.level}") from None

    def scaled_vertex_ints(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Integer vertex coordinates of V_n at common scale 2**-n."""
        if n not in self._scaled:
            pts = self.points[: vertex_count(n)]
            ax = np.fromiter((p.a << (n - p.s) for p in pts), dtype=np.int64, count=len(pts))
            bx = np.fromiter((p.b << (n - p.s) for p in pts), dtype=np.int64, count=len(pts))
            self._scaled[n] = (ax, bx)
        return self._scaled[n]

    def cell_centroid_ints(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Cell centroids at level n as integer pairs over denominator 3 * 2**n."""
        ax, bx = self.scaled_vertex_ints(n)
        cells = self.cells[n]
        return ax[cells].sum(axis=1), bx[cells].sum(axis=1)

    def xy_float(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        pts = self.points if n is None else self.points[: vertex_count(n)]
        xs = np.empty(len(pts))
        ys = np.empty(len(pts))
        for i, p in enumerate(pts):
            xs[i], ys[i] = p.to_xy()
        return xs, ys

    def bottom_edge_ids(self, m: int | None = None) -> np.ndarray:
        """Vertex ids of (i / 2**m, 0) for i = 0 .. 2**m (the [p0, p1] edge)."""
        m = self.level if m is None else m
        return np.array([self.index[dyadic(i, 0, m)] for i in range(2 ** m + 1)],
                        dtype=np.int64)


@lru_cache(maxsize=None)
def grid(level: int, *, max_level: int = MAX_GRID_LEVEL) -> GasketGrid:
    """Build (and cache) the vertex/cell tables for `level`."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    if level > max_level:
        raise DepthLimitError(
            f"grid level {level} exceeds the configured maximum {max_level}")
    if level == 0:
        points = list(CORNERS)
        index = {p: i for i, p in enumerate(points)}
        cells = [np.array([[0, 1, 2]], dtype=np.int64)]
        return GasketGrid(0, points, index, cells)

    prev = grid(level - 1, max_level=max_level)
    points = list(prev.points)
    index = dict(prev.index)
    cells = list(prev.cells)

    parent = cells[-1]
    child = np.empty((3 * parent.shape[0], 3), dtype=np.int64)
    for w, row in enumerate(parent):
        corner_pts = [points[i] for i in row]
        mids = {}
        for a in range(3):
            for b in range(a + 1, 3):
                p = midpoint(corner_pts[a], corner_pts[b])
                mid_id = index.get(p)
                if mid_id is None:
                    mid_id = len(points)
                    points.append(p)
                    index[p] = mid_id
                mids[(a, b)] = mids[(b, a)] = mid_id
        for d in range(3):
            child[3 * w + d] = [row[j] if j == d else mids[(d, j)] for j in range(3)]
    cells.append(child)
    return GasketGrid(level, points, index, cells)


# ---------------------------------------------------------------------------
# location
# ---------------------------------------------------------------------------

def locate(point: DyadicPoint, depth: int, *, max_depth: int = MAX_POINT_DEPTH) -> set[Word]:
    """All length-`depth` words whose cell contains `point`.

    Junction points belong to two cells and both words are returned.  Raises
    NotOnGasketError for dyadic points of the convex hull that miss the
    gasket.  The membership test is exact: candidates are pulled back through
    inverse contractions and checked against the hull in integer arithmetic,
    descending far enough that every surviving preimage is a known vertex.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > max_depth:
        raise DepthLimitError(f"locate depth {depth} exceeds {max_depth}")
    if not _in_hull(point):
        raise NotOnGasketError(f"{point} lies outside the gasket hull")

    verify_to = max(depth, point.s)
    cands: list[tuple[tuple[int, ...], DyadicPoint]] = [((), point)]
    for _ in range(verify_to):
        nxt = []
        for digits, z in cands:
            for d in (0, 1, 2):
                z2 = _expand(z, d)
                if _in_hull(z2):
                    nxt.append((digits + (d,), z2))
        cands = nxt
        if not cands:
            raise NotOnGasketError(f"{point} is not on the gasket")
    return {Word(digits[:depth]) for digits, _ in cands}


# ---------------------------------------------------------------------------
# debug export
# ---------------------------------------------------------------------------

def dump_vertices_csv(level: int, path) -> None:
    """Write the level-`level` vertex table as CSV (id, s, a, b, x, y)."""
    g = grid(level)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "s", "a", "b", "x_float", "y_float"])
        for i, p in enumerate(g.points):
            x, y = p.to_xy()
            writer.writerow([i, p.s, p.a, p.b, repr(x), repr(y)])
