"""Single table of default tolerances, grid resolutions and annealing schedule.

Every sweep, acceptance check and CLI flag falls back to the values here,
so a run can always be traced back to one place.

Grid resolutions count intervals: an open interval ``(lo, hi)`` with
resolution ``n`` is sampled at ``lo + (hi - lo) k / n`` for ``k = 1..n-1``,
a closed one at ``k = 0..n``.  A coarse resolution that divides the default
therefore samples a subset of the default points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# relative tolerance used by classify() to widen curves and energy ties
CLASSIFY_TOL = 1e-9
# energies closer than this (relative) count as equal on a separation curve
ON_CURVE_REL_TOL = 1e-9
# strict inequalities need margin > STRICT_MARGIN * scale, ">=" allows -that
STRICT_MARGIN = 1e-9
# a quantity whose positivity switches a claim from ">=" to ">" must exceed this
STRICT_SWITCH = 1e-6
# cap for samples approaching a pole: alpha <= r (1 - POLE_GAP)
POLE_GAP = 1e-6

PHASE_DIAGRAM_RES = 200
EQUIVALENCE_RES = 200


@dataclass(frozen=True)
class AppendixGrid:
    """Resolution of the g_A / g_B minimum sweep."""

    eta: int = 50
    p: int = 20
    r: int = 50
    ratio: int = 10
    samples: int = 2000


@dataclass(frozen=True)
class ExtraGrid:
    """Resolution of the g_A(0) + g_B(...) positivity sweep and polynomial checks."""

    eta: int = 50
    p: int = 20
    r: int = 50
    ratio: int = 10
    identity_samples: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class HGrid:
    """Resolution of the H-function positivity and monotonicity sweeps."""

    eta: int = 200
    r: int = 200


@dataclass(frozen=True)
class PSumGrid:
    """Number and size of random configurations for the projection-sum check."""

    configs: int = 500
    max_side: int = 7
    seed: int = 0


@dataclass(frozen=True)
class SweepGrids:
    appendix: AppendixGrid = field(default_factory=AppendixGrid)
    extra: ExtraGrid = field(default_factory=ExtraGrid)
    hfun: HGrid = field(default_factory=HGrid)
    psum: PSumGrid = field(default_factory=PSumGrid)


# annealing: temperatures are multiples of the cell size h
ANNEAL_T0_PER_H = 2.0
ANNEAL_COOLING = 0.97
ANNEAL_STEPS_PER_CELL = 2000
ANNEAL_FLOOR_PER_H = 1e-3
ANNEAL_CHAINS = 8
ANNEAL_SEED = 0

# largest box the exhaustive oracle will enumerate
EXHAUSTIVE_MAX_CELLS = 18
