from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l1bubble.closed_forms import Params, build_type3
from l1bubble.energy import edge_counts, energy, energy_value, interface_length, l1_perimeter, label_array
from l1bubble.errors import EtaOutOfRange
from l1bubble.lattice import LatticeConfig, canonicalize, parse_grid, random_config, rasterize_rects
from strategies import configs, etas


def _edges(cells):
    """Oracle: the four unit edges of every cell, as endpoint pairs."""
    out = []
    for x, y in cells:
        corners = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
        out += [frozenset((corners[k], corners[(k + 1) % 4])) for k in range(4)]
    return out


def oracle_energy(config, eta):
    ea, eb = _edges(config.cells_a), _edges(config.cells_b)
    # a boundary edge of a set appears exactly once in its edge list
    ba = {e for e in ea if ea.count(e) == 1}
    bb = {e for e in eb if eb.count(e) == 1}
    iface = len(ba & bb)
    return len(ba) + len(bb) + (eta - 2) * iface


@pytest.mark.parametrize("text, perim", [("A", 4), ("AA\nAA", 8), ("AA\nA.", 8), ("A.A", 8)])
def test_l1_perimeter(text, perim):
    assert l1_perimeter(parse_grid(text).cells_a) == perim


@pytest.mark.parametrize("text, iface", [("AB", 1), ("A.\n.B", 0), ("AA\nBB", 2), ("ABA", 2)])
def test_interface_length(text, iface):
    assert interface_length(parse_grid(text)) == iface


def test_ab_breakdown():
    br = energy(parse_grid("AB"), 1)
    assert (br.perim_a, br.perim_b, br.interface, br.perim_union, br.total) == (4, 4, 1, 6, 7)


def test_no_interaction_limit():
    assert energy(parse_grid("AB"), 2, allow_limit=True).total == 8
    assert energy(parse_grid("AB"), 0, allow_limit=True).total == 6


@pytest.mark.parametrize("eta", [0, 2, -0.1, 2.5])
def test_eta_domain(eta):
    with pytest.raises(EtaOutOfRange):
        energy(parse_grid("AB"), eta)


def test_nested_squares_energy():
    desc = build_type3(Params(1, 12, 4))
    br = energy(rasterize_rects(desc.rects_a, desc.rects_b, 1), 1)
    assert (br.perim_union, br.interface, br.total) == (16, 4, 20)


@given(configs(), etas)
def test_matches_edge_set_oracle(c, eta):
    assert energy(c, eta).total == pytest.approx(oracle_energy(c, eta), rel=1e-12, abs=1e-12)


def test_two_forms_on_random_configs():
    rng = np.random.default_rng(0)
    eta = Fraction(7, 10)
    for _ in range(1000):
        br = energy(random_config(rng), eta)
        # exact in rationals; perim_union comes from its own edge count
        assert br.total == br.total_union_form
        assert br.perim_union == br.perim_a + br.perim_b - 2 * br.interface


@given(configs(), st.sampled_from([Fraction(1, 2), Fraction(1, 7), 3]))
def test_scaling_in_h(c, h):
    eta = Fraction(1, 3)
    assert energy(c.with_cell_size(h), eta).total == h * energy(c, eta).total


@given(configs(), etas, etas)
def test_affine_in_eta(c, e1, e2):
    b1, b2 = energy(c, e1), energy(c, e2)
    assert b2.total - b1.total == pytest.approx((e2 - e1) * b1.interface, abs=1e-9)


@given(configs())
def test_canonical_form_preserves_energy(c):
    assert energy(canonicalize(c), Fraction(1, 2)).total == energy(c, Fraction(1, 2)).total


@given(configs(), etas)
def test_energy_value_agrees(c, eta):
    assert energy_value(c, eta) == pytest.approx(float(energy(c, eta).total))


def test_label_array_orientation():
    lab = label_array(parse_grid("AB\n.B"), pad=0)
    assert lab.tolist() == [[1, 2], [0, 2]]
    c = edge_counts(label_array(parse_grid("A\nB")))
    assert (c.interface_horiz, c.interface_vert) == (1, 0)


def test_empty_config_has_zero_energy():
    assert energy(LatticeConfig(frozenset(), frozenset()), 1).total == 0
