from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import OutOfBounds, UnknownCell
from .model import CellId


class Position(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class CellGrid:
    """Square-cell partition of a rectangular area.

    Cells are half-open, ``[lo, hi)`` on both axes, so a point on a shared edge
    belongs to the cell with the larger row/column index. Rows grow with y,
    columns with x.
    """

    width: float
    height: float
    cell_size: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.width < self.cell_size or self.height < self.cell_size:
            raise ValueError("grid must be at least one cell wide and high")

    @property
    def n_cols(self):
        return math.ceil(self.width / self.cell_size)

    @property
    def n_rows(self):
        return math.ceil(self.height / self.cell_size)

    @property
    def n_cells(self):
        return self.n_rows * self.n_cols

    def cells(self):
        return [CellId(r, c) for r in range(self.n_rows) for c in range(self.n_cols)]

    def contains(self, p):
        x0, y0 = self.origin
        return x0 <= p[0] < x0 + self.width and y0 <= p[1] < y0 + self.height

    def is_valid(self, c):
        return 0 <= c.row < self.n_rows and 0 <= c.col < self.n_cols

    def check(self, c):
        if not isinstance(c, CellId) or not self.is_valid(c):
            raise UnknownCell(f"{c!r} is not a cell of this grid")
        return c

    def index(self, c):
        return c.row * self.n_cols + c.col

    def cell_at(self, index):
        return CellId(*divmod(index, self.n_cols))

    def clamp(self, p):
        x0, y0 = self.origin
        x = min(max(p[0], x0), math.nextafter(x0 + self.width, -math.inf))
        y = min(max(p[1], y0), math.nextafter(y0 + self.height, -math.inf))
        return Position(x, y)


def cell_of(g: CellGrid, p) -> CellId:
    if not g.contains(p):
        raise OutOfBounds(f"position {tuple(p)} lies outside the grid")
    x0, y0 = g.origin
    col = int((p[0] - x0) // g.cell_size)
    row = int((p[1] - y0) // g.cell_size)
    # float floor-division can land one past the last cell for widths that are not multiples
    return CellId(min(row, g.n_rows - 1), min(col, g.n_cols - 1))


def adjacent(g: CellGrid, a: CellId, b: CellId) -> bool:
    """Moore (8-neighbour) adjacency; a cell is not adjacent to itself."""
    if a == b:
        return False
    return abs(a.row - b.row) <= 1 and abs(a.col - b.col) <= 1


def neighbours(g: CellGrid, c: CellId):
    out = []
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            n = CellId(c.row + dr, c.col + dc)
            if g.is_valid(n):
                out.append(n)
    return out


def broker_anchor(g: CellGrid, c: CellId) -> Position:
    x0, y0 = g.origin
    half = g.cell_size / 2
    return Position(x0 + c.col * g.cell_size + half, y0 + c.row * g.cell_size + half)
