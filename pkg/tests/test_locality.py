"""Locality checkers (Segal, Rezk, based Segal, Sierpinski-cone), the
open-restriction lifting lemma, the extension retraction, and the theorem
suite over the builtin zoo."""

import functools

import numpy as np
import pytest

from toposcheck import backend
from toposcheck import constructions as cons
from toposcheck import interval as iv
from toposcheck import locality as loc
from toposcheck import shapes as sh
from toposcheck import topos_ops as ops
from toposcheck import presheaf
from toposcheck.fincat import terminal_category
from toposcheck.interval import IntervalStructure
from toposcheck.modelzoo import builtin_model, DEFAULT_ZOO
from toposcheck.presheaf import (Presheaf, NatTrans, compose_nats,
                                 enumerate_nats, identity_nat, is_mono)
from toposcheck.report import (BudgetExceededError, PreconditionError,
                               reports_to_json)

SET = builtin_model("set")
CHAIN2 = builtin_model("chain2")
SSET2 = builtin_model("sset2")
SSET3 = builtin_model("sset3")
MODELS = {"set": SET, "chain2": CHAIN2, "sset2": SSET2, "sset3": SSET3}

_BUDGET_REASON = "enumeration budget exceeded for this instance"


@functools.lru_cache(maxsize=None)
def suite(name):
    # a cold-process suite: the enumeration memo is keyed on structural
    # digests, so results computed by other tests (possibly at a larger
    # budget) would otherwise leak in and decide instances the default
    # budget cannot
    presheaf._NAT_MEMO.clear()
    return {r.name: r for r in loc.theorem_suite(builtin_model(name))}


# ---------------------------------------------------------------------------
# the core locality predicate


def test_local_for_identity():
    X = SSET2.resolve_sample("@interval")
    rep = loc.is_local(X, identity_nat(X))
    assert rep.status == "pass"
    assert rep.witness["exponent_sizes"] == rep.witness["restricted_sizes"]


def test_terminal_is_local_for_everything():
    u = sh.horn(SSET2.interval).inclusion
    rep = loc.is_local(ops.terminal(SSET2.category), u)
    assert rep.status == "pass"


def test_set_rezk_fails_beyond_one_point():
    # the walking equivalence has two points here, so X^E has |X|^2
    # elements against |X| constants: never surjective once |X| >= 2
    istr = SET.interval
    assert loc.is_rezk(istr, SET.resolve_sample("s1")).status == "pass"
    rep = loc.is_rezk(istr, SET.resolve_sample("s2"))
    assert rep.status == "fail"
    assert rep.witness == {"kind": "non-surjective", "stage": "*",
                           "element": 1, "sizes": [2, 4]}


def test_set_segal_and_based_segal_pass():
    istr = SET.interval
    assert loc.is_segal(istr, istr.presheaf).status == "pass"
    assert loc.is_based_segal(istr, istr.presheaf).status == "pass"
    assert loc.is_based_segal(istr, SET.resolve_sample("s2")).status \
        == "pass"


@pytest.mark.parametrize("name", ["sset2", "sset3"])
def test_sset_interval_is_segal_rezk_based_segal(name):
    m = MODELS[name]
    istr = m.interval
    for checker in (loc.is_segal, loc.is_rezk, loc.is_based_segal):
        rep = checker(istr, istr.presheaf)
        assert rep.status == "pass", (checker.__name__, rep.witness)
    # non-vacuous: the exponent stages are genuinely populated
    seg = loc.is_segal(istr, istr.presheaf)
    assert all(n >= 1 for n in seg.witness["exponent_sizes"])


def test_checker_reports_carry_labels():
    rep = loc.is_segal(SSET2.interval, SSET2.interval.presheaf, label="I")
    assert rep.name == "locality/segal[I]"


def test_sierpinski_instance_list():
    rep = loc.is_sierpinski(SSET2.interval, ops.terminal(SSET2.category),
                            [("interval", SSET2.interval.presheaf)])
    assert rep.status == "pass"
    assert rep.witness == {
        "sample": ["interval", "IsT(point0)", "IsT(point1)",
                   "IsT(generic)"],
        "approximation": True,
    }


def test_sierpinski_skips_on_inconsistent_interval():
    TERM = terminal_category()
    I = Presheaf(TERM, [1], [np.zeros(1, dtype=np.int64)])
    point = NatTrans(ops.terminal(TERM), I, [np.zeros(1, dtype=np.int64)])
    op = NatTrans(ops.product(I, I).presheaf, I,
                  [np.zeros(1, dtype=np.int64)])
    degenerate = IntervalStructure(I, point, point, op, op)
    rep = loc.is_sierpinski(degenerate, I, [("pt", ops.terminal(TERM))])
    assert rep.status == "skip"
    assert "inconsistent" in rep.reason


def test_well_complete_validates_kind():
    istr = SSET2.interval
    with pytest.raises(PreconditionError):
        loc.is_well_complete(istr, istr.presheaf, "nonsense")
    with pytest.raises(PreconditionError):
        loc.is_well_complete(istr, istr.presheaf, "sierpinski")


def test_well_complete_runs_on_the_lift():
    rep = loc.is_well_complete(SSET2.interval, SSET2.interval.presheaf,
                               "rezk")
    assert rep.name == "locality/well-complete-rezk"
    assert rep.status == "pass"


def test_budget_propagates_from_direct_checker_calls():
    LS = cons.lift(SSET2.interval,
                   SSET2.resolve_sample("@simplex2")).presheaf
    with pytest.raises(BudgetExceededError):
        loc.is_segal(SSET2.interval, LS)


def test_sset3_lift_of_interval_is_segal_at_large_budget():
    # undecidable at the default budget (the suite records it as a
    # skipped instance); decided positively when the enumeration cap
    # is raised
    istr = SSET3.interval
    LI = cons.lift(istr, istr.presheaf).presheaf
    with backend.budget(max_nodes=20_000_000):
        rep = loc.is_segal(istr, LI)
    assert rep.status == "pass", rep.witness


def test_sset_lift_of_interval_rezk_and_based_segal_default_budget():
    for m in (SSET2, SSET3):
        LI = cons.lift(m.interval, m.interval.presheaf).presheaf
        assert loc.is_rezk(m.interval, LI).status == "pass"
        assert loc.is_based_segal(m.interval, LI).status == "pass"


def test_sset2_lift_of_interval_is_segal_default_budget():
    LI = cons.lift(SSET2.interval, SSET2.interval.presheaf).presheaf
    assert loc.is_segal(SSET2.interval, LI).status == "pass"


# ---------------------------------------------------------------------------
# open restrictions and the lifting lemma


def test_restrict_along_constant_one_keeps_the_map():
    istr = SSET2.interval
    u = sh.horn(istr).inclusion
    alpha = compose_nats(istr.one, ops.unique_to_terminal(u.target))
    ru = loc.restrict_along_open(istr, u, alpha)
    assert tuple(ru.source.sizes) == tuple(u.source.sizes)
    assert tuple(ru.target.sizes) == tuple(u.target.sizes)
    assert is_mono(ru)


def test_restrict_along_constant_zero_is_empty():
    istr = SSET2.interval
    u = sh.horn(istr).inclusion
    alpha = compose_nats(istr.zero, ops.unique_to_terminal(u.target))
    ru = loc.restrict_along_open(istr, u, alpha)
    assert set(ru.source.sizes) == {0}
    assert set(ru.target.sizes) == {0}


def test_fiore_instance_horn_sset2():
    istr = SSET2.interval
    rep = loc.check_fiore_instance(istr, sh.horn(istr).inclusion,
                                   istr.presheaf)
    assert rep.status == "pass"
    assert rep.witness == {"interval_local": True, "open_restrictions": 4,
                           "subject_local_for_all_restrictions": True,
                           "lift_local": True}


def test_fiore_instance_equivalence_sset2():
    istr = SSET2.interval
    E = sh.walking_equivalence(istr).presheaf
    rep = loc.check_fiore_instance(istr, ops.unique_to_terminal(E),
                                   istr.presheaf)
    assert rep.status == "pass"
    assert rep.witness["lift_local"] is True
    assert rep.witness["open_restrictions"] == 2


def test_fiore_instance_set():
    istr = SET.interval
    A = SET.resolve_sample("s3")
    horn_rep = loc.check_fiore_instance(istr, sh.horn(istr).inclusion, A)
    assert horn_rep.status == "pass"
    assert horn_rep.witness["lift_local"] is True
    # the walking equivalence is not seen as a point here, so the
    # instance holds vacuously
    E = sh.walking_equivalence(istr).presheaf
    eq_rep = loc.check_fiore_instance(istr, ops.unique_to_terminal(E), A)
    assert eq_rep.status == "pass"
    assert eq_rep.witness["vacuous"] is True
    assert eq_rep.witness["interval_local"] is False


# ---------------------------------------------------------------------------
# the extension retraction


def test_tilde_extension_retraction_sset2():
    istr = SSET2.interval
    for token in ("@terminal", "@interval"):
        X = SSET2.resolve_sample(token)
        cone = cons.scone(istr, X)
        for f in enumerate_nats(cone.carrier, istr.presheaf):
            tilde, rep = loc.tilde_extension(istr, X, f)
            assert rep.status == "pass", rep.witness
            sigma = cons.comparison(istr, X)
            assert compose_nats(tilde, sigma) == f


def test_tilde_extension_section_law_sset2():
    # restricting a map off the lift and extending it back is the
    # identity: the two hom-sets are in precomposition bijection
    istr = SSET2.interval
    X = SSET2.resolve_sample("@terminal")
    LX = cons.lift(istr, X).presheaf
    sigma = cons.comparison(istr, X)
    gs = enumerate_nats(LX, istr.presheaf)
    cone = cons.scone(istr, X)
    fs = enumerate_nats(cone.carrier, istr.presheaf)
    assert len(gs) == len(fs)
    for g in gs:
        tilde, rep = loc.tilde_extension(istr, X, compose_nats(g, sigma))
        assert rep.status == "pass"
        assert tilde == g


def test_tilde_extension_set_one_truncated():
    istr = SET.interval
    X = SET.resolve_sample("s2")
    Cp = SET.resolve_sample("s2")
    cone = cons.scone(istr, X)
    fs = enumerate_nats(cone.carrier, Cp)
    LX = cons.lift(istr, X).presheaf
    assert len(fs) == len(enumerate_nats(LX, Cp))
    for f in fs:
        tilde, rep = loc.tilde_extension(istr, X, f)
        assert rep.status == "pass", rep.witness


def test_tilde_extension_requires_cone_domain():
    # the domain guard is structural, so the subject must be one whose
    # cone genuinely differs from the interval (over the terminal the
    # cone IS the interval up to structure)
    istr = SSET2.interval
    X = SSET2.resolve_sample("@interval")
    wrong = identity_nat(istr.presheaf)
    with pytest.raises(PreconditionError):
        loc.tilde_extension(istr, X, wrong)


def test_tilde_extension_requires_complete_codomain():
    # chain2's interval is not based-Segal complete, so it is rejected
    # as a codomain
    istr = CHAIN2.interval
    X = ops.terminal(CHAIN2.category)
    cone = cons.scone(istr, X)
    f = enumerate_nats(cone.carrier, istr.presheaf)[0]
    with pytest.raises(PreconditionError):
        loc.tilde_extension(istr, X, f)


# ---------------------------------------------------------------------------
# implication semantics


def test_implication_vacuous_on_failed_hypothesis():
    rep = loc._implication("theorems/t", {"a": False, "b": True},
                           lambda: pytest.fail("must not evaluate"))
    assert rep.status == "pass"
    assert rep.witness["vacuous"] is True


def test_implication_skips_on_undetermined_hypothesis():
    rep = loc._implication("theorems/t", {"a": None, "b": True},
                           lambda: pytest.fail("must not evaluate"))
    assert rep.status == "skip"
    assert "a" in rep.reason


def test_implication_fails_with_inner_witness():
    items = [("x", True, None), ("y", False, {"kind": "bad"})]
    rep = loc._implication("theorems/t", {"a": True}, lambda: items)
    assert rep.status == "fail"
    assert rep.witness["object"] == "y"
    assert rep.witness["inner"] == {"kind": "bad"}


def test_implication_counterexample_beats_undecided():
    items = [("x", None, {"reason": "budget"}),
             ("y", False, {"kind": "bad"})]
    rep = loc._implication("theorems/t", {"a": True}, lambda: items)
    assert rep.status == "fail"


def test_implication_all_undecided_skips():
    items = [("x", None, {"reason": "budget"}), ("y", None, None)]
    rep = loc._implication("theorems/t", {"a": True}, lambda: items)
    assert rep.status == "skip"
    assert rep.witness["skipped"] == {"x": "budget",
                                      "y": "could not be established"}


def test_implication_mixed_records_skips():
    items = [("x", True, None), ("y", None, {"reason": "budget"})]
    rep = loc._implication("theorems/t", {"a": True}, lambda: items)
    assert rep.status == "pass"
    assert rep.witness["objects"] == ["x"]
    assert rep.witness["skipped"] == {"y": "budget"}


# ---------------------------------------------------------------------------
# the theorem suite over the zoo


@pytest.mark.parametrize("name", DEFAULT_ZOO)
def test_suite_theorems_and_invariants_green(name):
    for rep in suite(name).values():
        if rep.name.startswith(("theorems/", "invariants/")):
            assert rep.status in ("pass", "skip"), (rep.name, rep.witness)


def test_suite_report_names_are_stable():
    names = sorted(suite("set"))
    assert names == sorted(suite("sset3"))
    assert "theorems/sigma-precompose-bijection" in names
    assert "invariants/witness-replay" in names
    assert sum(n.startswith("theorems/") for n in names) == 10


def test_set_suite_interval_profile():
    by = suite("set")
    assert by["interval/phoa-1"].status == "fail"
    assert by["interval/conservative"].status == "pass"
    assert by["theorems/interval-segal"].witness["vacuous"] is True
    assert by["theorems/sierpinski-implies-based-segal"].witness[
        "objects"] == ["s0", "s1", "s2", "s3", "s4"]
    assert by["invariants/witness-replay"].witness[
        "failures_replayed"] == ["interval/phoa-1", "interval/phoa-2",
                                 "interval/phoa-interpolation"]


def test_chain2_suite_negative_control():
    by = suite("chain2")
    assert by["interval/conservative"].status == "fail"
    assert by["interval/factors-meets"].status == "fail"
    assert by["theorems/sierpinski-implies-based-segal"].witness[
        "vacuous"] is True
    assert by["invariants/left-class-product-stability"].status == "skip"
    # conservativity failures replay with identical witnesses
    assert by["invariants/witness-replay"].status == "pass"


def test_sset2_suite_non_vacuous():
    by = suite("sset2")
    for ax in ("interval/phoa-1", "interval/phoa-2",
               "interval/conservative", "interval/relative-phoa"):
        assert by[ax].status == "pass"
    for th in ("theorems/interval-segal", "theorems/interval-rezk",
               "theorems/interval-based-segal"):
        assert by[th].witness["objects"] == ["interval"]
    assert by["invariants/witness-replay"].witness[
        "failures_replayed"] == []


def test_sset2_suite_budget_skips_are_exactly_the_big_lifts():
    by = suite("sset2")
    seg = by["theorems/segal-well-complete-iff"]
    assert seg.status == "pass"
    assert set(seg.witness["skipped"]) == \
        {"simplex2", "horn", "representable:[2]"}
    assert set(seg.witness["skipped"].values()) == {_BUDGET_REASON}
    assert "interval" in seg.witness["objects"]
    bseg = by["theorems/based-segal-well-complete-iff"]
    assert "skipped" not in bseg.witness
    assert bseg.witness["objects"] == [l for l, _ in SSET2.samples()]


def test_sset3_suite_non_vacuous_with_skips():
    by = suite("sset3")
    for th in ("theorems/interval-segal", "theorems/interval-rezk",
               "theorems/interval-based-segal"):
        assert by[th].witness["objects"] == ["interval"]
    seg = by["theorems/segal-well-complete-iff"]
    assert "interval" in seg.witness["skipped"]
    assert "terminal" in seg.witness["objects"]
    bij = by["theorems/sigma-precompose-bijection"]
    assert "bijection:interval->interval" in bij.witness["objects"]


def test_suite_respects_budget_override():
    # a lowered cap leaves the axiom profile decidable but starves
    # lift instances the default budget can decide; the suite still
    # finishes, recording them as undecided (cold memo, as above)
    presheaf._NAT_MEMO.clear()
    reps = {r.name: r for r in
            loc.theorem_suite(builtin_model("sset2"), max_nodes=20000)}
    assert reps["interval/phoa-2"].status == "pass"
    assert reps["theorems/interval-segal"].status == "pass"
    seg = reps["theorems/segal-well-complete-iff"]
    assert seg.status == "pass"
    assert seg.witness["skipped"]["interval"] == _BUDGET_REASON
    # ... whereas the default budget decides that instance
    assert "interval" in suite("sset2")[
        "theorems/segal-well-complete-iff"].witness["objects"]
    # and the global budget is restored afterwards
    assert backend.MAX_NODES == backend.DEFAULT_MAX_NODES


def test_suite_json_is_deterministic():
    a = reports_to_json(loc.theorem_suite(builtin_model("set")))
    b = reports_to_json(loc.theorem_suite(builtin_model("set")))
    assert a == b
