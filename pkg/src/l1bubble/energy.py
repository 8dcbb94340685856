"""Exact l1 double-bubble energy of lattice configurations.

On axis-aligned boundaries the l1 length is the ordinary length, so every
quantity here is ``h`` times an integer edge count.  Passing a
``Fraction`` for ``h`` and ``eta`` keeps the arithmetic exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EtaOutOfRange
from .lattice import LatticeConfig

EMPTY, PHASE_A, PHASE_B = 0, 1, 2

_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def check_eta(eta, allow_limit: bool = False) -> None:
    if allow_limit:
        if not (0 <= eta <= 2):
            raise EtaOutOfRange(f"eta must lie in [0, 2], got {eta}")
    elif not (0 < eta < 2):
        raise EtaOutOfRange(f"eta must lie in (0, 2), got {eta} (see --allow-limit)")


def label_array(config: LatticeConfig, pad: int = 1) -> np.ndarray:
    """Dense ``int8`` label image indexed ``[row, col]`` with ``pad`` empty cells around."""
    if config.is_empty():
        return np.zeros((2 * pad, 2 * pad), dtype=np.int8)
    c0, r0, c1, r1 = config.bounding_box()
    lab = np.zeros((r1 - r0 + 1 + 2 * pad, c1 - c0 + 1 + 2 * pad), dtype=np.int8)
    if config.cells_a:
        a = np.array(list(config.cells_a), dtype=np.int64)
        lab[a[:, 1] - r0 + pad, a[:, 0] - c0 + pad] = PHASE_A
    if config.cells_b:
        b = np.array(list(config.cells_b), dtype=np.int64)
        lab[b[:, 1] - r0 + pad, b[:, 0] - c0 + pad] = PHASE_B
    return lab


@dataclass(frozen=True)
class EdgeCounts:
    """Unit-edge counts of a label image.

    ``*_horiz`` count horizontal edges (between vertically adjacent cells),
    ``*_vert`` count vertical edges.
    """

    perim_a: int
    perim_b: int
    interface_horiz: int
    interface_vert: int
    union_horiz: int
    union_vert: int

    @property
    def interface(self) -> int:
        return self.interface_horiz + self.interface_vert

    @property
    def union(self) -> int:
        return self.union_horiz + self.union_vert


def _pairs(lab: np.ndarray):
    # vertically adjacent pairs share a horizontal edge
    yield "horiz", lab[:-1, :], lab[1:, :]
    yield "vert", lab[:, :-1], lab[:, 1:]


def edge_counts(lab: np.ndarray) -> EdgeCounts:
    """Count boundary edges of a label image whose border row/column is empty."""
    lab = np.asarray(lab)
    perim_a = perim_b = 0
    iface = {}
    union = {}
    for direction, x, y in _pairs(lab):
        xa, ya = x == PHASE_A, y == PHASE_A
        xb, yb = x == PHASE_B, y == PHASE_B
        perim_a += int(np.count_nonzero(xa != ya))
        perim_b += int(np.count_nonzero(xb != yb))
        iface[direction] = int(np.count_nonzero((xa & yb) | (xb & ya)))
        union[direction] = int(np.count_nonzero((x != EMPTY) != (y != EMPTY)))
    return EdgeCounts(
        perim_a, perim_b, iface["horiz"], iface["vert"], union["horiz"], union["vert"]
    )


def l1_perimeter(cells, h=1):
    """``h`` times the number of unit edges with exactly one side in ``cells``."""
    cells = set(map(tuple, cells))
    exposed = sum(
        1
        for c, r in cells
        for dc, dr in _NEIGHBOURS
        if (c + dc, r + dr) not in cells
    )
    return exposed * h


def interface_length(config: LatticeConfig):
    """Length of the shared boundary; corner contacts contribute nothing."""
    b = config.cells_b
    shared = sum(
        1
        for c, r in config.cells_a
        for dc, dr in _NEIGHBOURS
        if (c + dc, r + dr) in b
    )
    return shared * config.cell_size


@dataclass(frozen=True)
class EnergyBreakdown:
    perim_a: object
    perim_b: object
    interface: object
    perim_union: object
    eta: object
    total: object
    counts: EdgeCounts | None = None

    @property
    def total_union_form(self):
        return self.perim_union + self.eta * self.interface


def energy_from_counts(counts: EdgeCounts, eta, h=1) -> EnergyBreakdown:
    if counts.union != counts.perim_a + counts.perim_b - 2 * counts.interface:
        raise AssertionError(f"inconsistent edge counts {counts}")
    perim_a = counts.perim_a * h
    perim_b = counts.perim_b * h
    iface = counts.interface * h
    total = perim_a + perim_b + (eta - 2) * iface
    return EnergyBreakdown(perim_a, perim_b, iface, counts.union * h, eta, total, counts)


def energy(config: LatticeConfig, eta, allow_limit: bool = False) -> EnergyBreakdown:
    """Energy ``P(A) + P(B) + (eta - 2) * interface`` with all its parts.

    The union perimeter is counted separately from the phase perimeters, so
    the identity ``total == perim_union + eta * interface`` is a real check.
    """
    check_eta(eta, allow_limit)
    return energy_from_counts(edge_counts(label_array(config)), eta, config.cell_size)


def energy_value(config: LatticeConfig, eta) -> float:
    """Plain float energy, without domain checks; used in inner loops."""
    c = edge_counts(label_array(config))
    return float(config.cell_size) * (c.union + float(eta) * c.interface)
