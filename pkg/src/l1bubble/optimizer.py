"""Lattice minimizers at fixed cell counts: discretized candidates, a
Metropolis annealer and a brute-force oracle for small boxes.

Energies inside the search are tracked as integer edge counts ``(U, I)``
(union boundary and interface) with ``E = h (U + eta I)``, so accepting
or rejecting a move never accumulates rounding error.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from . import defaults as D
from .bounds import slicing_lower_bound
from .closed_forms import Params, build, classify, continuum_minimum, type2_admissible
from .energy import EMPTY, PHASE_A, PHASE_B, check_eta, edge_counts, energy, label_array
from .errors import ParamOutOfRange, TooLarge, Type2Inadmissible
from .lattice import (
    AXES,
    LatticeConfig,
    canonical_key,
    canonicalize,
    rasterize_rects,
    symmetric_images,
)

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class AnnealSchedule:
    initial_temperature: float
    cooling_factor: float
    steps_per_temperature: int
    temperature_floor: float
    chains: int = D.ANNEAL_CHAINS
    master_seed: int = D.ANNEAL_SEED

    def __post_init__(self) -> None:
        if not (0 < self.cooling_factor < 1):
            raise ParamOutOfRange("cooling factor must lie in (0, 1)")
        if min(self.initial_temperature, self.temperature_floor) <= 0:
            raise ParamOutOfRange("temperatures must be positive")
        if self.steps_per_temperature < 1 or self.chains < 1:
            raise ParamOutOfRange("steps and chains must be positive")

    @classmethod
    def default(cls, n_a: int, n_b: int, h=1, **overrides) -> "AnnealSchedule":
        h = float(h)
        kw = dict(
            initial_temperature=D.ANNEAL_T0_PER_H * h,
            cooling_factor=D.ANNEAL_COOLING,
            steps_per_temperature=D.ANNEAL_STEPS_PER_CELL * (n_a + n_b),
            temperature_floor=D.ANNEAL_FLOOR_PER_H * h,
        )
        kw.update(overrides)
        return cls(**kw)

    @property
    def stages(self) -> int:
        ratio = self.temperature_floor / self.initial_temperature
        if ratio >= 1:
            return 1
        return int(math.ceil(math.log(ratio) / math.log(self.cooling_factor)))


@dataclass(frozen=True)
class OptimizeResult:
    n_a: int
    n_b: int
    eta: float
    cell_size: object
    best_config: LatticeConfig
    best_energy: float
    candidate_energies: dict
    continuum_min: float
    lower_bound: float
    history: tuple = ()
    predicted_types: tuple = ()
    minimizers: tuple = ()

    @property
    def sandwich_ok(self) -> bool:
        tol = 1e-9 * max(1.0, abs(self.best_energy))
        upper = min(self.candidate_energies.values(), default=math.inf)
        return (
            self.continuum_min <= self.best_energy + tol
            and self.lower_bound <= self.best_energy + tol
            and self.best_energy <= upper + tol
        )

    def to_dict(self) -> dict:
        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "eta": float(self.eta),
            "cell_size": str(self.cell_size),
            "best_energy": float(self.best_energy),
            "candidate_energies": {k: float(v) for k, v in sorted(self.candidate_energies.items())},
            "continuum_min": float(self.continuum_min),
            "lower_bound": float(self.lower_bound),
            "predicted_types": list(self.predicted_types),
            "grid": self.best_config.to_text(),
            "minimizers": [c.to_text() for c in self.minimizers],
            "history": [[[int(s), float(e)] for s, e in chain] for chain in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


# -- discretized candidates ---------------------------------------------------------


def _relabel_delta(cells: dict, cell, new: int, eta) -> object:
    old = cells.get(cell, EMPTY)
    c, r = cell
    d = 0
    for dc, dr in _STEPS:
        y = cells.get((c + dc, r + dr), EMPTY)
        d += _pair(new, y, eta) - _pair(old, y, eta)
    return d


def _pair(x: int, y: int, eta):
    if x == y:
        return 0
    if x == EMPTY or y == EMPTY:
        return 1
    return eta


def _neighbours(cell):
    c, r = cell
    return [(c + dc, r + dr) for dc, dr in _STEPS]


def _fix_counts(config: LatticeConfig, n_a: int, n_b: int, eta) -> LatticeConfig:
    """Greedy single-cell relabels until the counts are exact.

    Each round takes the admissible relabel with the smallest energy change;
    ties go to the first cell in reading order (top row first, then left).
    """
    cells = {c: PHASE_A for c in config.cells_a}
    cells.update({c: PHASE_B for c in config.cells_b})
    target = {PHASE_A: n_a, PHASE_B: n_b}
    while True:
        count = {PHASE_A: 0, PHASE_B: 0}
        for lab in cells.values():
            count[lab] += 1
        excess = {k: count[k] - target[k] for k in count}
        if not any(excess.values()):
            break
        moves = []
        for x in (PHASE_A, PHASE_B):
            y = PHASE_B if x == PHASE_A else PHASE_A
            if excess[x] > 0:
                new = y if excess[y] < 0 else EMPTY
                for cell, lab in cells.items():
                    if lab == x and any(cells.get(n, EMPTY) != x for n in _neighbours(cell)):
                        moves.append((cell, new))
            elif excess[x] < 0:
                seen = set()
                for cell, lab in cells.items():
                    if lab != x:
                        continue
                    for n in _neighbours(cell):
                        other = cells.get(n, EMPTY)
                        if n in seen:
                            continue
                        if other == EMPTY or (other == y and excess[y] > 0):
                            seen.add(n)
                            moves.append((n, x))
        if not moves:
            # a phase vanished entirely: seed it next to the other one
            x = PHASE_A if excess[PHASE_A] < 0 else PHASE_B
            base = min(cells, key=lambda c: (c[1], c[0])) if cells else (0, 0)
            moves = [(n, x) for n in _neighbours(base) if n not in cells] or [(base, x)]
        scored = [
            (float(_relabel_delta(cells, cell, new, eta)), cell[1], cell[0], new, cell)
            for cell, new in moves
        ]
        delta, _, _, new, cell = min(scored)
        if new == EMPTY:
            del cells[cell]
        else:
            cells[cell] = new
    out = LatticeConfig(
        frozenset(c for c, lab in cells.items() if lab == PHASE_A),
        frozenset(c for c, lab in cells.items() if lab == PHASE_B),
        config.cell_size,
    )
    return out


def discretize_candidate(type_tag: str, n_a: int, n_b: int, eta, h=1) -> LatticeConfig:
    """Lowest-energy lattice version of a Type I/II/III construction.

    Each snapped layout (see :func:`_snapped_layouts`) is repaired to the exact
    cell counts; ties go to the smallest canonical key.
    """
    if not (n_a >= n_b >= 1):
        raise ParamOutOfRange(f"need n_a >= n_b >= 1, got {n_a}, {n_b}")
    check_eta(eta)
    params = Params(eta, n_a * h * h, n_b * h * h)
    if type_tag == "II" and not type2_admissible(params):
        raise Type2Inadmissible(f"Type II needs n_b/n_a <= eta/2, got {n_b}/{n_a} with eta={eta}")
    desc = build(type_tag, params)
    best = None
    for rects_a, rects_b in _snapped_layouts(desc, h):
        raster = rasterize_rects(rects_a, rects_b, 1)
        if raster.is_empty():
            continue
        # the greedy repair breaks ties in reading order, so try every orientation
        for image in symmetric_images(raster):
            config = _fix_counts(image, n_a, n_b, eta)
            counts = edge_counts(label_array(config))
            key = (counts.union + float(eta) * counts.interface, canonical_key(config))
            if best is None or key < best[0]:
                best = (key, config)
    return best[1].with_cell_size(h)


def _snapped_layouts(desc, h):
    """Integer-cell versions of a construction.

    Every distinct edge coordinate is rounded down or up to a whole number
    of cells, independently per axis; rounding to nearest (the cell-centre
    rule) is one of the combinations.
    """
    rects = desc.rects_a + desc.rects_b
    options = []
    for axis in (0, 1):
        coords = sorted({float(_in_cells(q[k], h)) for q in rects for k in (axis, axis + 2)})
        options.append({x: sorted({math.floor(x), math.ceil(x)}) for x in coords})
    keys = [(axis, x) for axis in (0, 1) for x in options[axis]]
    seen = set()
    for choice in itertools.product(*(options[axis][x] for axis, x in keys)):
        snap = dict(zip(keys, choice))

        def conv(q):
            x0, y0, x1, y1 = (float(_in_cells(v, h)) for v in q)
            return (snap[0, x0], snap[1, y0], snap[0, x1], snap[1, y1])

        layout = (tuple(map(conv, desc.rects_a)), tuple(map(conv, desc.rects_b)))
        if layout not in seen:
            seen.add(layout)
            yield layout


def _in_cells(v, h):
    if isinstance(v, (int, Fraction)) and isinstance(h, (int, Fraction)):
        return Fraction(v) / h
    return v / h


def candidate_types(n_a: int, n_b: int, eta) -> tuple[str, ...]:
    if type2_admissible(Params(eta, n_a, n_b)):
        return ("I", "II", "III")
    return ("I", "III")


def candidate_configs(n_a: int, n_b: int, eta, h=1) -> dict[str, LatticeConfig]:
    return {t: discretize_candidate(t, n_a, n_b, eta, h) for t in candidate_types(n_a, n_b, eta)}


# -- annealing kernel ---------------------------------------------------------------


@njit(cache=True)
def _pair_counts(x, y):
    # (union edge, interface edge) contributed by a neighbouring pair
    if x == y:
        return 0, 0
    if x == 0 or y == 0:
        return 1, 0
    return 0, 1


@njit(cache=True)
def _relabel(lab, i, j, new):
    old = lab[i, j]
    du = 0
    di = 0
    for k in range(4):
        if k == 0:
            y = lab[i + 1, j]
        elif k == 1:
            y = lab[i - 1, j]
        elif k == 2:
            y = lab[i, j + 1]
        else:
            y = lab[i, j - 1]
        u1, i1 = _pair_counts(new, y)
        u0, i0 = _pair_counts(old, y)
        du += u1 - u0
        di += i1 - i0
    lab[i, j] = new
    return du, di


@njit(cache=True)
def _full_counts(lab):
    u = 0
    it = 0
    n, m = lab.shape
    for i in range(n):
        for j in range(m):
            if i + 1 < n:
                a, b = _pair_counts(lab[i, j], lab[i + 1, j])
                u += a
                it += b
            if j + 1 < m:
                a, b = _pair_counts(lab[i, j], lab[i, j + 1])
                u += a
                it += b
    return u, it


@njit(cache=True)
def _is_boundary(lab, i, j):
    x = lab[i, j]
    return lab[i + 1, j] != x or lab[i - 1, j] != x or lab[i, j + 1] != x or lab[i, j - 1] != x


@njit(cache=True)
def _index(lab, pos):
    """Fill the per-phase position lists from a label image."""
    counts = np.zeros(3, dtype=np.int64)
    n, m = lab.shape
    for i in range(n):
        for j in range(m):
            x = lab[i, j]
            if x != 0:
                k = counts[x]
                pos[x, k, 0] = i
                pos[x, k, 1] = j
                counts[x] += 1
    return counts


@njit(cache=True)
def _anneal_chain(start, candidates, eta, h, t0, cooling, steps, floor, seed, max_hist):
    np.random.seed(seed)
    lab = start.copy()
    n, m = lab.shape
    cap = n * m
    pos = np.zeros((3, cap, 2), dtype=np.int64)
    counts = _index(lab, pos)
    u, it = _full_counts(lab)
    energy = h * (u + eta * it)

    best = lab.copy()
    best_u, best_i = u, it
    best_e = energy
    for k in range(candidates.shape[0]):
        cu, ci = _full_counts(candidates[k])
        ce = h * (cu + eta * ci)
        if ce < best_e - 1e-12 * h:
            best = candidates[k].copy()
            best_u, best_i, best_e = cu, ci, ce

    hist_step = np.zeros(max_hist, dtype=np.int64)
    hist_e = np.zeros(max_hist)
    n_hist = 1
    hist_e[0] = best_e

    total = counts[1] + counts[2]
    step = 0
    temp = t0
    stage = 0
    while True:
        # restart proposal at the start of every stage after the first
        if stage > 0 and candidates.shape[0] > 0:
            k = np.random.randint(0, candidates.shape[0])
            cu, ci = _full_counts(candidates[k])
            de = h * ((cu - u) + eta * (ci - it))
            if de <= 0 or np.random.random() < np.exp(-de / temp):
                lab[:, :] = candidates[k]
                counts = _index(lab, pos)
                u, it = cu, ci
        for _ in range(steps):
            step += 1
            if np.random.random() < 0.5 or counts[1] == 0 or counts[2] == 0:
                # relocate a boundary cell of one phase next to that phase
                x = 1 if np.random.randint(0, total) < counts[1] else 2
                if counts[x] == 0:
                    continue
                kc = np.random.randint(0, counts[x])
                ci_, cj_ = pos[x, kc, 0], pos[x, kc, 1]
                if not _is_boundary(lab, ci_, cj_):
                    continue
                kd = np.random.randint(0, counts[x])
                d = np.random.randint(0, 4)
                ti, tj = pos[x, kd, 0], pos[x, kd, 1]
                if d == 0:
                    ti += 1
                elif d == 1:
                    ti -= 1
                elif d == 2:
                    tj += 1
                else:
                    tj -= 1
                if ti < 1 or tj < 1 or ti > n - 2 or tj > m - 2 or lab[ti, tj] != 0:
                    continue
                du1, di1 = _relabel(lab, ci_, cj_, 0)
                du2, di2 = _relabel(lab, ti, tj, x)
                de = h * ((du1 + du2) + eta * (di1 + di2))
                if de <= 0 or np.random.random() < np.exp(-de / temp):
                    u += du1 + du2
                    it += di1 + di2
                    pos[x, kc, 0] = ti
                    pos[x, kc, 1] = tj
                else:
                    _relabel(lab, ti, tj, 0)
                    _relabel(lab, ci_, cj_, x)
                    continue
            else:
                # swap an A boundary cell with a B boundary cell
                ka = np.random.randint(0, counts[1])
                kb = np.random.randint(0, counts[2])
                ai, aj = pos[1, ka, 0], pos[1, ka, 1]
                bi, bj = pos[2, kb, 0], pos[2, kb, 1]
                if not (_is_boundary(lab, ai, aj) and _is_boundary(lab, bi, bj)):
                    continue
                du1, di1 = _relabel(lab, ai, aj, 2)
                du2, di2 = _relabel(lab, bi, bj, 1)
                de = h * ((du1 + du2) + eta * (di1 + di2))
                if de <= 0 or np.random.random() < np.exp(-de / temp):
                    u += du1 + du2
                    it += di1 + di2
                    pos[1, ka, 0] = bi
                    pos[1, ka, 1] = bj
                    pos[2, kb, 0] = ai
                    pos[2, kb, 1] = aj
                else:
                    _relabel(lab, bi, bj, 2)
                    _relabel(lab, ai, aj, 1)
                    continue
            energy = h * (u + eta * it)
            if energy < best_e - 1e-12 * h:
                best[:, :] = lab
                best_u, best_i, best_e = u, it, energy
                if n_hist < max_hist:
                    hist_step[n_hist] = step
                    hist_e[n_hist] = best_e
                    n_hist += 1
        stage += 1
        temp *= cooling
        if temp < floor:
            break
    return best, best_u, best_i, hist_step[:n_hist], hist_e[:n_hist]


def _place(config: LatticeConfig, size: int) -> np.ndarray:
    """Centre a configuration in a ``size`` x ``size`` label image."""
    lab = label_array(config, pad=0)
    out = np.zeros((size, size), dtype=np.int8)
    r0 = (size - lab.shape[0]) // 2
    c0 = (size - lab.shape[1]) // 2
    out[r0:r0 + lab.shape[0], c0:c0 + lab.shape[1]] = lab
    return out


def _from_labels(lab: np.ndarray, h) -> LatticeConfig:
    rows_a, cols_a = np.nonzero(lab == PHASE_A)
    rows_b, cols_b = np.nonzero(lab == PHASE_B)
    return LatticeConfig(
        frozenset(zip(cols_a.tolist(), rows_a.tolist())),
        frozenset(zip(cols_b.tolist(), rows_b.tolist())),
        h,
    )


def _summary(n_a, n_b, eta, h):
    params = Params(eta, n_a * h * h, n_b * h * h)
    r = n_b / n_a if n_a >= n_b else n_a / n_b
    predicted = classify(float(r), float(eta)).optimal_types if 0 < eta < 2 else frozenset()
    return float(continuum_minimum(params)), tuple(t for t in ("I", "II", "III") if t in predicted)


def _best_lower_bound(config: LatticeConfig, eta) -> float:
    return max(float(slicing_lower_bound(config, eta, ax).bound) for ax in AXES)


def anneal(n_a: int, n_b: int, eta, h=1, schedule: AnnealSchedule | None = None,
           max_history: int = 4096) -> OptimizeResult:
    """Metropolis search over volume-preserving moves, several chains.

    Chain ``k`` starts from candidate ``k mod K`` and uses seed
    ``master_seed + k``.  The result is the lowest energy over chains, ties
    broken by the canonical form.  Every chain's best is seeded with the
    best discretized candidate, so the result never exceeds it.
    """
    if not (n_a >= n_b >= 1):
        raise ParamOutOfRange(f"need n_a >= n_b >= 1, got {n_a}, {n_b}")
    check_eta(eta)
    schedule = schedule or AnnealSchedule.default(n_a, n_b, h)
    cands = candidate_configs(n_a, n_b, eta, h)
    cand_energy = {t: energy(c, eta).total for t, c in cands.items()}
    extent = 0
    for c in cands.values():
        c0, r0, c1, r1 = c.bounding_box()
        extent = max(extent, c1 - c0 + 1, r1 - r0 + 1)
    size = max(n_a + n_b, extent) + 4
    stack = np.stack([_place(c, size) for c in cands.values()])
    order = list(cands)

    runs = []
    for k in range(schedule.chains):
        start = stack[k % len(order)]
        best, bu, bi, steps, energies = _anneal_chain(
            start, stack, float(eta), float(h), float(schedule.initial_temperature),
            float(schedule.cooling_factor), int(schedule.steps_per_temperature),
            float(schedule.temperature_floor), int(schedule.master_seed + k), max_history,
        )
        config = canonicalize(_from_labels(best, h))
        runs.append((float(h) * (bu + float(eta) * bi), canonical_key(config), config,
                     tuple(zip(steps.tolist(), energies.tolist()))))
    best_e = min(r[0] for r in runs)
    tied = [r for r in runs if r[0] <= best_e + 1e-12 * float(h)]
    _, _, best_config, _ = min(tied, key=lambda r: r[1])
    exact = energy(best_config, eta).total
    continuum, predicted = _summary(n_a, n_b, eta, h)
    return OptimizeResult(
        n_a, n_b, eta, h, best_config, exact, cand_energy, continuum,
        _best_lower_bound(best_config, eta), tuple(r[3] for r in runs), predicted,
    )


# -- exhaustive oracle --------------------------------------------------------------


def _batch_counts(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union and interface edge counts for a stack of padded label images."""
    u = np.zeros(labels.shape[0], dtype=np.int64)
    it = np.zeros(labels.shape[0], dtype=np.int64)
    for x, y in ((labels[:, :-1, :], labels[:, 1:, :]), (labels[:, :, :-1], labels[:, :, 1:])):
        ex, ey = x == EMPTY, y == EMPTY
        u += np.count_nonzero(ex != ey, axis=(1, 2))
        it += np.count_nonzero(~ex & ~ey & (x != y), axis=(1, 2))
    return u, it


def exhaustive(width: int, height: int, n_a: int, n_b: int, eta) -> OptimizeResult:
    """Every labelling of a ``width`` x ``height`` box with exact counts."""
    cells = width * height
    if cells > D.EXHAUSTIVE_MAX_CELLS:
        raise TooLarge(f"box has {cells} cells, limit is {D.EXHAUSTIVE_MAX_CELLS}")
    if n_a < 1 or n_b < 1 or n_a + n_b > cells:
        raise ParamOutOfRange("counts must be positive and fit in the box")
    check_eta(eta)
    coords = [(i, j) for i in range(height) for j in range(width)]
    best = None
    winners: list[np.ndarray] = []
    eta_f = float(eta)
    for a_idx in itertools.combinations(range(cells), n_a):
        rest = [k for k in range(cells) if k not in a_idx]
        b_sets = np.array(list(itertools.combinations(rest, n_b)), dtype=np.int64)
        labels = np.zeros((len(b_sets), height + 2, width + 2), dtype=np.int8)
        for k in a_idx:
            i, j = coords[k]
            labels[:, i + 1, j + 1] = PHASE_A
        bi = np.array([coords[k][0] for k in range(cells)]) + 1
        bj = np.array([coords[k][1] for k in range(cells)]) + 1
        rows = np.repeat(np.arange(len(b_sets)), n_b)
        labels[rows, bi[b_sets.ravel()], bj[b_sets.ravel()]] = PHASE_B
        u, it = _batch_counts(labels)
        e = u + eta_f * it
        low = float(e.min())
        if best is None or low < best - 1e-9:
            best = low
            winners = []
        if low <= best + 1e-9:
            winners.extend(labels[e <= best + 1e-9])
    configs = {canonical_key(c): c for c in (canonicalize(_from_labels(w, 1)) for w in winners)}
    minimizers = tuple(configs[k] for k in sorted(configs))
    first = minimizers[0]
    exact = energy(first, eta).total
    big, small = max(n_a, n_b), min(n_a, n_b)
    continuum, predicted = _summary(big, small, eta, 1)
    return OptimizeResult(
        n_a, n_b, eta, 1, first, exact, {}, continuum, _best_lower_bound(first, eta),
        (), predicted, minimizers,
    )
