"""Interval-generated figure shapes: simplices, the inner horn (both
routes), the walking equivalence, and displays with their fibres."""

import numpy as np
import pytest

from toposcheck import shapes as sh
from toposcheck import topos_ops as ops
from toposcheck.modelzoo import builtin_model, model_from_data
from toposcheck.presheaf import (validate_presheaf, validate_nat, is_mono,
                                 is_iso, find_iso, compose_nats,
                                 enumerate_nats)
from toposcheck.report import PreconditionError
from toposcheck.fincat import MAX_SIMPLEX_DIM

import oracles

SET = builtin_model("set")
SSET2 = builtin_model("sset2")
SSET3 = builtin_model("sset3")


# ---------------------------------------------------------------------------
# simplices


def test_simplex_dimension_bounds():
    with pytest.raises(PreconditionError):
        sh.simplex(SET.interval, -1)
    with pytest.raises(PreconditionError):
        sh.simplex(SET.interval, MAX_SIMPLEX_DIM + 1)


def test_set_simplex_sizes_count_descending_tuples():
    istr = SET.interval
    for n in range(4):
        simp = sh.simplex(istr, n)
        assert simp.domain.sizes == \
            (oracles.descending_tuple_count(2, n),)
        assert validate_presheaf(simp.domain).ok
    # over the two-chain that count is n+1
    assert [sh.simplex(istr, n).domain.sizes[0] for n in range(4)] \
        == [1, 2, 3, 4]


def test_sset3_simplex_levels_match_oracles():
    istr = SSET3.interval
    assert tuple(sh.simplex(istr, 2).domain.sizes) == \
        oracles.EXPECTED_S2_LEVELS_SSET3
    assert tuple(sh.simplex(istr, 3).domain.sizes) == \
        oracles.EXPECTED_I_EXP_S2_SSET3
    # the 1-simplex is the carrier itself
    assert find_iso(sh.simplex(istr, 1).domain, istr.presheaf) is not None


def test_simplex_is_cached():
    istr = SSET2.interval
    assert sh.simplex(istr, 2) is sh.simplex(istr, 2)


def test_simplex_points_are_corners():
    istr = SSET2.interval
    for n in (1, 2):
        for k in range(n + 1):
            pt = sh.simplex_point(istr, n, k)
            assert validate_nat(pt).ok
            assert pt.source.sizes == ops.terminal(istr.base).sizes


def test_triangle_corners_display_to_endpoints():
    # displaying the triangle onto the interval by its upper coordinate
    # sends corner 0 to the bottom point and corners 1, 2 to the top
    istr = SSET2.interval
    disp = sh.display(istr)
    for k in range(3):
        pt = sh.simplex_point(istr, 2, k)
        composite = compose_nats(disp.triangle, pt)
        target = istr.zero if k == 0 else istr.one
        assert composite == target, k


# ---------------------------------------------------------------------------
# the inner horn


@pytest.mark.parametrize("model,sizes", [
    (SET, (3,)),
    (SSET2, (3, 5, 7)),
    (SSET3, oracles.EXPECTED_HORN_LEVELS_SSET3),
], ids=["set", "sset2", "sset3"])
def test_horn_sizes(model, sizes):
    hd = sh.horn(model.interval)
    assert tuple(hd.presheaf.sizes) == tuple(sizes)
    assert validate_presheaf(hd.presheaf).ok


def test_horn_set_equals_triangle():
    # over the two-chain the horn fills: both have the 3 descending pairs
    hd = sh.horn(SET.interval)
    tri = sh.simplex(SET.interval, 2)
    assert hd.presheaf.sizes == tri.domain.sizes
    assert find_iso(hd.presheaf, tri.domain) is not None


def test_horn_routes_reconcile():
    for m in (SET, SSET2, SSET3):
        hd = sh.horn(m.interval)
        assert is_mono(hd.inclusion)
        assert is_iso(hd.iso)
        # the pushout route's map into the triangle factors as
        # inclusion . iso
        assert compose_nats(hd.inclusion, hd.iso) == hd.induced
        # glueing legs agree on the shared endpoint
        left = compose_nats(hd.first_leg, m.interval.one)
        right = compose_nats(hd.second_leg, m.interval.zero)
        assert left == right


def test_horn_is_proper_in_sset():
    tri = sh.simplex(SSET2.interval, 2).domain
    hd = sh.horn(SSET2.interval)
    assert any(h < t for h, t in zip(hd.presheaf.sizes, tri.sizes))


# ---------------------------------------------------------------------------
# the walking equivalence


@pytest.mark.parametrize("model,sizes", [
    (SET, (2,)),
    (SSET2, (2, 5, 10)),
    (SSET3, (2, 5, 10, 17)),
], ids=["set", "sset2", "sset3"])
def test_walking_equivalence_sizes(model, sizes):
    # hand derivation for the trivial model: the colimit of the zigzag
    # keeps the two collapsed vertex clusters apart, giving exactly two
    # classes; the level-zero count is 2 in every model here
    eq = sh.walking_equivalence(model.interval)
    assert tuple(eq.presheaf.sizes) == tuple(sizes)
    assert validate_presheaf(eq.presheaf).ok


def test_walking_equivalence_legs():
    eq = sh.walking_equivalence(SSET2.interval)
    term = ops.terminal(SSET2.interval.base)
    # x and y are distinct global points
    assert eq.x.source.sizes == term.sizes
    assert eq.y.source.sizes == term.sizes
    assert eq.x != eq.y
    # the middle path connects them: f(0) = x, f(1) = y as points of E
    f0 = compose_nats(eq.f, SSET2.interval.zero)
    f1 = compose_nats(eq.f, SSET2.interval.one)
    assert f0 == eq.x
    assert f1 == eq.y
    assert len(eq.legs) == 7


def test_equivalence_collapse_is_not_iso_at_level_zero():
    # E -> 1 is never injective at level zero: both vertices survive
    for m in (SET, SSET2, SSET3):
        eq = sh.walking_equivalence(m.interval)
        assert eq.presheaf.sizes[0] == 2


# ---------------------------------------------------------------------------
# displays and fibres


def test_display_requires_join():
    doc = builtin_model("chain2").data()
    doc["interval"]["join"] = None
    m = model_from_data(doc)
    with pytest.raises(PreconditionError):
        sh.display(m.interval)


@pytest.mark.parametrize("model", [SET, SSET2, SSET3],
                         ids=["set", "sset2", "sset3"])
def test_horn_fibres(model):
    # the horn displayed over the interval: the fibre over the top point
    # is the interval (the incoming path), over the bottom the point
    istr = model.interval
    disp = sh.display(istr)
    fib1 = sh.fibre_over(disp.horn, istr.one)
    fib0 = sh.fibre_over(disp.horn, istr.zero)
    assert find_iso(fib1, istr.presheaf) is not None
    assert tuple(fib0.sizes) == ops.terminal(istr.base).sizes


@pytest.mark.parametrize("model", [SET, SSET2, SSET3],
                         ids=["set", "sset2", "sset3"])
def test_triangle_fibres(model):
    # the triangle displayed over the interval: the fibre over the top is
    # the whole interval (everything lies below the top), over the bottom
    # the point
    istr = model.interval
    disp = sh.display(istr)
    fib1 = sh.fibre_over(disp.triangle, istr.one)
    fib0 = sh.fibre_over(disp.triangle, istr.zero)
    assert find_iso(fib1, istr.presheaf) is not None
    assert tuple(fib0.sizes) == ops.terminal(istr.base).sizes


def test_display_of_horn_restricts_display_of_triangle():
    istr = SSET2.interval
    disp = sh.display(istr)
    assert disp.horn == compose_nats(disp.triangle,
                                     disp.horn_data.inclusion)
