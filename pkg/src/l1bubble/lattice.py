"""Two-phase configurations on the square lattice and their slice statistics.

A configuration is a pair of disjoint finite sets of unit cells ``(col, row)``
scaled by a cell size ``h``.  Row 0 is the top line of the text format, so
ordinates decrease with the row index.

The ``axis`` argument used throughout selects a pair of directions that
belong together in the slicing estimates:

* ``"horizontal"``: slices are rows (horizontal lines) and projections are
  taken onto the horizontal coordinate, i.e. occupied columns are counted.
* ``"vertical"``: the same with rows and columns exchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal

from .errors import EmptyConfiguration, EmptyGrid, InvalidCharacter, InvalidRatio

Axis = Literal["horizontal", "vertical"]
AXES: tuple[Axis, Axis] = ("horizontal", "vertical")

Cell = tuple[int, int]


@dataclass(frozen=True)
class LatticeConfig:
    """Disjoint cell sets ``cells_a`` and ``cells_b`` with cell size ``cell_size``."""

    cells_a: frozenset[Cell]
    cells_b: frozenset[Cell]
    cell_size: float | Fraction | int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells_a", frozenset(map(tuple, self.cells_a)))
        object.__setattr__(self, "cells_b", frozenset(map(tuple, self.cells_b)))
        if self.cell_size <= 0:
            raise ValueError(f"cell size must be positive, got {self.cell_size}")
        if self.cells_a & self.cells_b:
            raise ValueError("phases overlap: A and B must be disjoint")

    @property
    def n_a(self) -> int:
        return len(self.cells_a)

    @property
    def n_b(self) -> int:
        return len(self.cells_b)

    @property
    def vol_a(self):
        return self.n_a * self.cell_size**2

    @property
    def vol_b(self):
        return self.n_b * self.cell_size**2

    def is_empty(self) -> bool:
        return not (self.cells_a or self.cells_b)

    def with_cell_size(self, h) -> "LatticeConfig":
        return LatticeConfig(self.cells_a, self.cells_b, h)

    def transposed(self) -> "LatticeConfig":
        """Swap columns and rows (reflection in the main diagonal)."""
        return LatticeConfig(
            frozenset((r, c) for c, r in self.cells_a),
            frozenset((r, c) for c, r in self.cells_b),
            self.cell_size,
        )

    def bounding_box(self) -> tuple[int, int, int, int]:
        cells = self.cells_a | self.cells_b
        if not cells:
            raise EmptyConfiguration("configuration has no cells")
        cols = [c for c, _ in cells]
        rows = [r for _, r in cells]
        return min(cols), min(rows), max(cols), max(rows)

    def to_text(self) -> str:
        """Render in the grid text format (inverse of :func:`parse_grid`)."""
        if self.is_empty():
            return ""
        c0, r0, c1, r1 = self.bounding_box()
        lines = []
        for row in range(r0, r1 + 1):
            line = []
            for col in range(c0, c1 + 1):
                if (col, row) in self.cells_a:
                    line.append("A")
                elif (col, row) in self.cells_b:
                    line.append("B")
                else:
                    line.append(".")
            lines.append("".join(line).rstrip("."))
        return "\n".join(lines) + "\n"


def parse_grid(text: str, cell_size=1) -> LatticeConfig:
    """Parse a character grid of ``A``, ``B`` and ``.`` into a configuration.

    Lines starting with ``#`` are comments; short lines are padded with
    ``.``.  Blank lines count as empty rows.
    """
    cells_a, cells_b = set(), set()
    row = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#"):
            continue
        line = line.rstrip()
        for col, ch in enumerate(line):
            if ch == "A":
                cells_a.add((col, row))
            elif ch == "B":
                cells_b.add((col, row))
            elif ch != ".":
                raise InvalidCharacter(
                    f"line {lineno}, column {col + 1}: unexpected character {ch!r}"
                )
        row += 1
    if not cells_a and not cells_b:
        raise EmptyGrid("grid contains no 'A' or 'B' cells")
    return LatticeConfig(frozenset(cells_a), frozenset(cells_b), cell_size)


def _scaled(x, h):
    if isinstance(x, (int, Fraction)) and isinstance(h, (int, Fraction)):
        return Fraction(x) / h
    return x / h


def _index_range(lo, hi, h) -> range:
    # cells whose centre (k + 1/2) h lies in [lo, hi)
    half = Fraction(1, 2)
    return range(math.ceil(_scaled(lo, h) - half), math.ceil(_scaled(hi, h) - half))


def _rect_cells(rect, h) -> set[Cell]:
    x0, y0, x1, y1 = rect
    return {(i, -j) for i in _index_range(x0, x1, h) for j in _index_range(y0, y1, h)}


def rasterize_rects(rects_a, rects_b, h) -> LatticeConfig:
    """Cells whose centres fall inside the rectangles ``(x0, y0, x1, y1)``.

    Rectangles are read as half-open, so phases sharing a side never claim
    the same cell.  Larger ordinates map to smaller row indices and the
    result is translated so that its bounding box starts at ``(0, 0)``.
    """
    cells_a = set().union(*(_rect_cells(q, h) for q in rects_a)) if rects_a else set()
    cells_b = set().union(*(_rect_cells(q, h) for q in rects_b)) if rects_b else set()
    cells_b -= cells_a
    allc = cells_a | cells_b
    if not allc:
        return LatticeConfig(frozenset(), frozenset(), h)
    c0 = min(c for c, _ in allc)
    r0 = min(r for _, r in allc)
    return LatticeConfig(
        frozenset((c - c0, r - r0) for c, r in cells_a),
        frozenset((c - c0, r - r0) for c, r in cells_b),
        h,
    )


def random_config(rng, max_side: int = 6, both: bool = True, cell_size=1) -> LatticeConfig:
    """Random configuration for fuzzing.

    Half of the draws scatter cells independently in a random box, the
    other half grow a random blob and paint part of it ``B``, which gives
    the compact shapes that matter for tightness checks.
    """
    while True:
        w = int(rng.integers(1, max_side + 1))
        ht = int(rng.integers(1, max_side + 1))
        cells_a, cells_b = set(), set()
        if rng.random() < 0.5:
            pa, pb = rng.uniform(0.1, 0.6), rng.uniform(0.1, 0.5)
            for c in range(w):
                for r in range(ht):
                    u = rng.random()
                    if u < pa:
                        cells_a.add((c, r))
                    elif u < pa + pb:
                        cells_b.add((c, r))
        else:
            size = int(rng.integers(2, w * ht + 2))
            blob = [(0, 0)]
            seen = {(0, 0)}
            while len(blob) < size:
                c, r = blob[int(rng.integers(len(blob)))]
                dc, dr = ((1, 0), (-1, 0), (0, 1), (0, -1))[int(rng.integers(4))]
                nxt = (c + dc, r + dr)
                if nxt not in seen:
                    seen.add(nxt)
                    blob.append(nxt)
            split = int(rng.integers(1, len(blob)))
            if rng.random() < 0.5:
                order = sorted(blob)
            else:
                order = sorted(blob, key=lambda x: (x[1], x[0]))
            cells_b = set(order[:split])
            cells_a = set(order[split:])
        if both and (not cells_a or not cells_b):
            continue
        if cells_a or cells_b:
            return LatticeConfig(frozenset(cells_a), frozenset(cells_b), cell_size)


def _oriented(config: LatticeConfig, axis: Axis) -> LatticeConfig:
    if axis == "horizontal":
        return config
    if axis == "vertical":
        return config.transposed()
    raise ValueError(f"unknown axis {axis!r}")


@dataclass(frozen=True)
class ProjectionStats:
    """Projection lengths, stored as line counts ``n*`` times ``cell_size``."""

    axis: Axis
    n: int
    n_a: int
    n_b: int
    cell_size: object = 1

    @property
    def m(self):
        return self.n * self.cell_size

    @property
    def m_a(self):
        return self.n_a * self.cell_size

    @property
    def m_b(self):
        return self.n_b * self.cell_size

    @property
    def p(self) -> Fraction:
        return Fraction(self.n_a + self.n_b, self.n) - 1


def projections(config: LatticeConfig, axis: Axis = "horizontal") -> ProjectionStats:
    """Lengths of the projections of ``A u B``, ``A`` and ``B`` and the overlap ``p``.

    For lattice sets the projection measure is the number of occupied lines
    times ``h``, whether or not the occupied lines are contiguous.
    """
    cfg = _oriented(config, axis)
    cols_a = {c for c, _ in cfg.cells_a}
    cols_b = {c for c, _ in cfg.cells_b}
    n = len(cols_a | cols_b)
    if n == 0:
        raise EmptyConfiguration("cannot project an empty configuration")
    return ProjectionStats(axis, n, len(cols_a), len(cols_b), config.cell_size)


@dataclass(frozen=True)
class SliceRow:
    t: int
    a_count: int
    b_count: int

    def lengths(self, h) -> tuple:
        return self.a_count * h, self.b_count * h


@dataclass(frozen=True)
class SliceProfile:
    """Per-slice lengths ``a(t)``, ``b(t)`` for the occupied slices of one axis."""

    axis: Axis
    rows: tuple[SliceRow, ...]
    cell_size: object = 1

    def a(self, i: int):
        return self.rows[i].a_count * self.cell_size

    def b(self, i: int):
        return self.rows[i].b_count * self.cell_size

    def volumes(self) -> tuple:
        """Return the Fubini integrals of ``a`` and ``b``."""
        h = self.cell_size
        return (
            sum(r.a_count for r in self.rows) * h * h,
            sum(r.b_count for r in self.rows) * h * h,
        )


def slice_profile(config: LatticeConfig, axis: Axis = "horizontal") -> SliceProfile:
    cfg = _oriented(config, axis)
    a_counts: dict[int, int] = {}
    b_counts: dict[int, int] = {}
    for _, r in cfg.cells_a:
        a_counts[r] = a_counts.get(r, 0) + 1
    for _, r in cfg.cells_b:
        b_counts[r] = b_counts.get(r, 0) + 1
    rows = tuple(
        SliceRow(t, a_counts.get(t, 0), b_counts.get(t, 0))
        for t in sorted(set(a_counts) | set(b_counts))
    )
    return SliceProfile(axis, rows, config.cell_size)


@dataclass(frozen=True)
class SliceDecomposition:
    """Pure/mixed and ratio-weighted partitions of the occupied slices.

    Index sets hold the ``t`` labels of :class:`SliceRow`.  Areas are in
    length units squared; ``alpha``/``beta`` map slice labels to the
    ratios ``b/a`` on ``T_A`` and ``a/b`` on ``T_B``.
    """

    r: Fraction
    T_pure_A: frozenset[int]
    T_pure_B: frozenset[int]
    T_mix: frozenset[int]
    T_0: frozenset[int]
    T_A: frozenset[int]
    T_B: frozenset[int]
    U_pure_A: object
    U_pure_B: object
    U_mix: object
    U_A: object
    U_B: object
    U_0: object
    U_star_A: object
    U_star_B: object
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)

    @property
    def U_star(self):
        return self.U_star_A


def _as_fraction(r) -> Fraction:
    if isinstance(r, Fraction):
        return r
    return Fraction(r)


def decompose_slices(profile: SliceProfile, r=None) -> SliceDecomposition:
    """Split occupied slices into pure/mixed and into ``T_0``/``T_A``/``T_B``.

    ``r`` defaults to the exact ratio ``|B|/|A|`` of the profile.  Floats are
    converted with :class:`fractions.Fraction` exactly (binary value), so
    pass a ``Fraction`` when an exact rational like 1/3 is intended.
    """
    n_a = sum(row.a_count for row in profile.rows)
    n_b = sum(row.b_count for row in profile.rows)
    if r is None:
        if n_a == 0:
            raise InvalidRatio("ratio undefined for a configuration without A cells")
        r = Fraction(n_b, n_a)
    r = _as_fraction(r)
    if not (0 < r <= 1):
        raise InvalidRatio(f"ratio must lie in (0, 1], got {r}")

    h = profile.cell_size
    pure_a, pure_b, mix = set(), set(), set()
    t0, ta, tb = set(), set(), set()
    u_pa = u_pb = u_mix = u_a = u_b = u_0 = 0
    star_a = star_b = Fraction(0)
    alpha, beta = {}, {}
    for row in profile.rows:
        a, b, t = row.a_count, row.b_count, row.t
        if a + b == 0:
            continue
        if b == 0:
            pure_a.add(t)
            u_pa += a
        elif a == 0:
            pure_b.add(t)
            u_pb += b
        else:
            mix.add(t)
            u_mix += a + b
        ra = r * a
        if ra == b:
            t0.add(t)
            u_0 += a + b
        elif ra > b:
            ta.add(t)
            u_a += a + b
            alpha[t] = Fraction(b, a)
            star_a += ra - b
        else:
            tb.add(t)
            u_b += a + b
            beta[t] = Fraction(a, b)
            star_b += b - ra
    h2 = h * h
    return SliceDecomposition(
        r=r,
        T_pure_A=frozenset(pure_a),
        T_pure_B=frozenset(pure_b),
        T_mix=frozenset(mix),
        T_0=frozenset(t0),
        T_A=frozenset(ta),
        T_B=frozenset(tb),
        U_pure_A=u_pa * h2,
        U_pure_B=u_pb * h2,
        U_mix=u_mix * h2,
        U_A=u_a * h2,
        U_B=u_b * h2,
        U_0=u_0 * h2,
        U_star_A=star_a * h2,
        U_star_B=star_b * h2,
        alpha=alpha,
        beta=beta,
    )


# (x, y) -> image under the 8 symmetries of the square
_SYMMETRIES = (
    lambda x, y: (x, y),
    lambda x, y: (-x, y),
    lambda x, y: (x, -y),
    lambda x, y: (-x, -y),
    lambda x, y: (y, x),
    lambda x, y: (-y, x),
    lambda x, y: (y, -x),
    lambda x, y: (-y, -x),
)


def _normalized(cells_a: Iterable[Cell], cells_b: Iterable[Cell]):
    cells_a, cells_b = list(cells_a), list(cells_b)
    allc = cells_a + cells_b
    c0 = min(c for c, _ in allc)
    r0 = min(r for _, r in allc)
    return (
        tuple(sorted((c - c0, r - r0) for c, r in cells_a)),
        tuple(sorted((c - c0, r - r0) for c, r in cells_b)),
    )


def canonical_key(config: LatticeConfig) -> tuple:
    """Lexicographically least normalized image over the 8 square symmetries."""
    if config.is_empty():
        return ((), ())
    return min(
        _normalized(
            (g(c, r) for c, r in config.cells_a),
            (g(c, r) for c, r in config.cells_b),
        )
        for g in _SYMMETRIES
    )


def symmetric_images(config: LatticeConfig) -> list[LatticeConfig]:
    """The configuration under each of the 8 square symmetries, normalized to start at (0, 0)."""
    if config.is_empty():
        return [config] * len(_SYMMETRIES)
    out = []
    for g in _SYMMETRIES:
        key_a, key_b = _normalized(
            (g(c, r) for c, r in config.cells_a),
            (g(c, r) for c, r in config.cells_b),
        )
        out.append(LatticeConfig(frozenset(key_a), frozenset(key_b), config.cell_size))
    return out


def canonicalize(config: LatticeConfig) -> LatticeConfig:
    """Canonical representative up to axis-preserving isometries and translations."""
    key_a, key_b = canonical_key(config)
    return LatticeConfig(frozenset(key_a), frozenset(key_b), config.cell_size)
