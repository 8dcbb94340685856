import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1bubble import defaults as D
from l1bubble.closed_forms import Params, type2_admissible
from l1bubble.energy import energy
from l1bubble.errors import ParamOutOfRange, TooLarge, Type2Inadmissible
from l1bubble.lattice import LatticeConfig, canonical_key, parse_grid
from l1bubble.optimizer import (
    AnnealSchedule,
    anneal,
    candidate_configs,
    candidate_types,
    discretize_candidate,
    exhaustive,
)
from test_energy import oracle_energy


def brute_force(width, height, n_a, n_b, eta):
    """Oracle: plain loops over every labelling, energies from the edge-set count."""
    cells = [(c, r) for r in range(height) for c in range(width)]
    best, keys = math.inf, set()
    for a in itertools.combinations(cells, n_a):
        rest = [c for c in cells if c not in a]
        for b in itertools.combinations(rest, n_b):
            config = LatticeConfig(frozenset(a), frozenset(b), 1)
            e = oracle_energy(config, eta)
            if e < best - 1e-9:
                best, keys = e, set()
            if e <= best + 1e-9:
                keys.add(canonical_key(config))
    return best, keys


# -- schedule ---------------------------------------------------------------------


def test_default_schedule_scales_with_cells_and_h():
    s = AnnealSchedule.default(3, 2)
    assert s.steps_per_temperature == D.ANNEAL_STEPS_PER_CELL * 5
    assert s.initial_temperature == D.ANNEAL_T0_PER_H
    half = AnnealSchedule.default(3, 2, h=0.5)
    assert half.initial_temperature == pytest.approx(D.ANNEAL_T0_PER_H / 2)
    assert half.temperature_floor == pytest.approx(D.ANNEAL_FLOOR_PER_H / 2)
    assert half.stages == s.stages


def test_schedule_stage_count():
    s = AnnealSchedule(1.0, 0.5, 10, 0.1)
    # 1, 0.5, 0.25, 0.125 -> four stages reach 0.0625 < 0.1
    assert s.stages == 4
    assert AnnealSchedule(1.0, 0.5, 10, 2.0).stages == 1


@pytest.mark.parametrize(
    "kw",
    [
        dict(cooling_factor=1.0),
        dict(cooling_factor=0.0),
        dict(initial_temperature=0.0),
        dict(temperature_floor=-1.0),
        dict(steps_per_temperature=0),
        dict(chains=0),
    ],
)
def test_schedule_rejects_bad_values(kw):
    with pytest.raises(ParamOutOfRange):
        AnnealSchedule.default(2, 2, **kw)


# -- discretized candidates ----------------------------------------------------------


def test_type3_candidate_is_square_in_corner_of_square():
    c = discretize_candidate("III", 12, 4, 1)
    assert energy(c, 1).total == 20
    assert canonical_key(c) == canonical_key(parse_grid("AAAA\nAAAA\nBBAA\nBBAA"))


def test_type1_candidate_for_two_and_two():
    c = discretize_candidate("I", 2, 2, 1)
    assert energy(c, 1).total == 10
    assert canonical_key(c) == canonical_key(parse_grid("AB\nAB"))


def test_type2_inadmissible_raises():
    with pytest.raises(Type2Inadmissible):
        discretize_candidate("II", 4, 4, 1)


def test_candidate_types_follow_admissibility():
    assert candidate_types(12, 4, 1) == ("I", "II", "III")
    assert candidate_types(12, 4, 0.3) == ("I", "III")


def test_candidate_rejects_bad_counts():
    with pytest.raises(ParamOutOfRange):
        discretize_candidate("I", 2, 3, 1)
    with pytest.raises(ParamOutOfRange):
        discretize_candidate("I", 2, 0, 1)


@settings(max_examples=100)
@given(
    st.integers(1, 40),
    st.integers(1, 40),
    st.floats(0.05, 1.95),
    st.sampled_from(["I", "II", "III"]),
    st.sampled_from([1, 0.5]),
)
def test_candidates_have_exact_cell_counts(x, y, eta, tag, h):
    n_a, n_b = max(x, y), min(x, y)
    if tag == "II" and not type2_admissible(Params(eta, n_a, n_b)):
        with pytest.raises(Type2Inadmissible):
            discretize_candidate(tag, n_a, n_b, eta, h)
        return
    c = discretize_candidate(tag, n_a, n_b, eta, h)
    assert (len(c.cells_a), len(c.cells_b)) == (n_a, n_b)
    assert c.cell_size == h


def test_candidate_energy_scales_with_h():
    full = energy(discretize_candidate("III", 12, 4, 1), 1).total
    half = energy(discretize_candidate("III", 12, 4, 1, h=0.5), 1).total
    assert half == pytest.approx(full / 2)


# -- exhaustive oracle --------------------------------------------------------------


def test_exhaustive_two_and_two():
    res = exhaustive(4, 4, 2, 2, 1)
    assert res.best_energy == 10
    assert len(res.minimizers) == 1
    assert canonical_key(res.minimizers[0]) == canonical_key(parse_grid("AB\nAB"))


def test_exhaustive_one_and_one():
    res = exhaustive(3, 3, 1, 1, 1)
    assert res.best_energy == 7
    assert canonical_key(res.best_config) == canonical_key(parse_grid("AB"))


def test_exhaustive_rejects_large_boxes():
    with pytest.raises(TooLarge):
        exhaustive(5, 4, 2, 2, 1)
    with pytest.raises(ParamOutOfRange):
        exhaustive(2, 2, 3, 2, 1)


@pytest.mark.parametrize("box", [(2, 3), (3, 3), (2, 4)])
@pytest.mark.parametrize("counts", [(1, 1), (2, 1), (2, 2), (3, 2)])
@pytest.mark.parametrize("eta", [0.3, 1.0, 1.7])
def test_exhaustive_matches_brute_force(box, counts, eta):
    w, ht = box
    if sum(counts) > w * ht:
        pytest.skip("counts do not fit")
    expect, keys = brute_force(w, ht, *counts, eta)
    res = exhaustive(w, ht, *counts, eta)
    assert res.best_energy == pytest.approx(expect, abs=1e-9)
    assert {canonical_key(c) for c in res.minimizers} == keys


# -- annealer -----------------------------------------------------------------------


def _light(n_a, n_b, **kw):
    return AnnealSchedule.default(n_a, n_b, steps_per_temperature=200 * (n_a + n_b), chains=4, **kw)


def test_anneal_finds_two_and_two():
    res = anneal(2, 2, 1, schedule=_light(2, 2))
    assert res.best_energy == 10
    assert (len(res.best_config.cells_a), len(res.best_config.cells_b)) == (2, 2)


def test_anneal_twelve_and_four():
    res = anneal(12, 4, 1, schedule=_light(12, 4))
    assert res.best_energy <= 20
    assert res.predicted_types == ("II",)
    assert res.sandwich_ok
    assert res.continuum_min <= res.best_energy


def test_anneal_is_deterministic():
    a = anneal(5, 3, 0.7, schedule=_light(5, 3, master_seed=11))
    b = anneal(5, 3, 0.7, schedule=_light(5, 3, master_seed=11))
    assert a.to_json() == b.to_json()
    data = json.loads(a.to_json())
    assert data["best_energy"] == pytest.approx(float(a.best_energy))
    assert len(data["history"]) == 4


def test_anneal_never_exceeds_candidates():
    res = anneal(20, 6, 1.3, schedule=_light(20, 6))
    assert res.best_energy <= min(res.candidate_energies.values()) + 1e-9
    assert set(res.candidate_energies) == set(candidate_configs(20, 6, 1.3))


def test_anneal_history_is_bounded():
    res = anneal(3, 2, 1, schedule=_light(3, 2), max_history=16)
    assert all(len(chain) <= 16 for chain in res.history)


def test_anneal_rejects_bad_counts():
    with pytest.raises(ParamOutOfRange):
        anneal(1, 2, 1)


def test_anneal_with_half_cells_scales_energy():
    full = anneal(2, 2, 1, schedule=_light(2, 2))
    half = anneal(2, 2, 1, h=0.5, schedule=_light(2, 2, h=0.5))
    assert half.best_energy == pytest.approx(full.best_energy / 2)


@pytest.mark.slow
@pytest.mark.parametrize("counts", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)])
@pytest.mark.parametrize("eta", [0.3, 1.0, 1.7])
def test_anneal_agrees_with_exhaustive(counts, eta):
    # boxes of at most 16 cells; each contains every compact shape of <= 6 cells
    oracle = min(exhaustive(w, ht, *counts, eta).best_energy for w, ht in [(4, 4), (3, 5), (2, 8)])
    res = anneal(*counts, eta)
    assert res.best_energy == pytest.approx(oracle, abs=1e-9)
    assert res.best_energy <= min(res.candidate_energies.values()) + 1e-9
    assert res.sandwich_ok
