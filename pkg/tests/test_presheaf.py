"""Presheaves, natural transformations, and the enumeration kernel,
cross-checked against brute force."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toposcheck.fincat import (terminal_category, walking_arrow,
                               truncated_simplex_category, poset_as_category)
from toposcheck.presheaf import (
    Presheaf, NatTrans, validate_presheaf, validate_nat, yoneda,
    enumerate_nats, count_nats, identity_nat, compose_nats,
    is_iso, is_mono, is_epi, inverse_nat, find_iso, nat_from_vector)
from toposcheck.report import StructureError, BudgetExceededError
from toposcheck import backend

import oracles


TERM = terminal_category()
ARROW = walking_arrow()


def set_presheaf(n):
    """n-element set as a presheaf over the terminal category."""
    return Presheaf(TERM, [n], [np.arange(n)])


def arrow_presheaf(n_src, n_tgt, f_map):
    """Presheaf over the walking arrow: the action of the arrow maps the
    target stage into the source stage (contravariant)."""
    return Presheaf(ARROW, [n_src, n_tgt],
                    [np.arange(n_src), np.arange(n_tgt),
                     np.asarray(f_map, dtype=np.int64)])


def brute_nat_count(F, G):
    """Independent brute-force count of Nat(F, G)."""
    C = F.base
    morphisms = [(m, int(C.mor_src[m]), int(C.mor_tgt[m]))
                 for m in range(C.n_mor)]
    return len(oracles.nat_transes_brute(
        list(F.sizes), list(G.sizes),
        [a.tolist() for a in F.action], [a.tolist() for a in G.action],
        morphisms))


def test_validate_presheaf_passes_on_constant_singleton():
    F = Presheaf(ARROW, [1, 1], [[0], [0], [0]])
    assert validate_presheaf(F).status == "pass"


def test_validate_presheaf_catches_functoriality_violation():
    # over a poset with a 3-chain a<=b<=c the composite action must agree
    C = poset_as_category(["a", "b", "c"],
                          [[1, 1, 1], [0, 1, 1], [0, 0, 1]])
    # stages all {0,1}; action of a<=c disagrees with composite
    action = []
    for m in range(C.n_mor):
        action.append(np.arange(2))
    F = Presheaf(C, [2, 2, 2], action)
    assert validate_presheaf(F).status == "pass"
    # break the long edge a<=c: swap
    bad_action = [np.array(a) for a in action]
    long_edge = C.hom(0, 2)[0]
    bad_action[long_edge] = np.array([1, 0])
    Fbad = Presheaf(C, [2, 2, 2], bad_action)
    rep = validate_presheaf(Fbad)
    assert rep.status == "fail"
    assert rep.witness["law"] == "functoriality"


def test_structural_error_on_out_of_range_action():
    with pytest.raises(StructureError):
        Presheaf(TERM, [2], [np.array([0, 5])])


def test_identity_nat_valid_and_iso():
    F = arrow_presheaf(2, 3, [0, 1, 1])
    t = identity_nat(F)
    assert validate_nat(t).status == "pass"
    assert is_iso(t)


def test_constructed_naturality_violation_detected():
    F = arrow_presheaf(2, 2, [0, 1])
    G = arrow_presheaf(2, 2, [1, 0])
    # identity components are NOT natural here since actions differ
    t = NatTrans(F, G, [np.array([0, 1]), np.array([0, 1])])
    rep = validate_nat(t)
    assert rep.status == "fail"
    assert rep.witness["law"] == "naturality"


# --- enumeration ----------------------------------------------------------

def test_set_model_counts_are_function_counts():
    for nf in range(4):
        for ng in range(4):
            F, G = set_presheaf(nf), set_presheaf(ng)
            want = ng ** nf if nf else 1
            assert count_nats(F, G) == want


def test_empty_source_has_exactly_one_nat():
    F = set_presheaf(0)
    G = set_presheaf(3)
    assert count_nats(F, G) == 1
    # and into the empty presheaf from a nonempty one: none
    assert count_nats(G, F) == 0


def test_enumeration_is_lexicographic_and_duplicate_free():
    F = arrow_presheaf(2, 2, [0, 1])
    G = arrow_presheaf(2, 3, [0, 1, 1])
    nats = enumerate_nats(F, G)
    vecs = [t.vector().tolist() for t in nats]
    assert vecs == sorted(vecs)
    assert len(set(map(tuple, vecs))) == len(vecs)
    for t in nats:
        assert validate_nat(t).status == "pass"


def test_enumeration_matches_brute_force_on_walking_arrow():
    cases = [
        (arrow_presheaf(2, 2, [0, 1]), arrow_presheaf(2, 2, [1, 0])),
        (arrow_presheaf(1, 2, [0, 0]), arrow_presheaf(2, 2, [0, 1])),
        (arrow_presheaf(2, 3, [0, 0, 1]), arrow_presheaf(2, 2, [1, 1])),
        (arrow_presheaf(2, 0, []), arrow_presheaf(3, 1, [2])),
    ]
    for F, G in cases:
        assert count_nats(F, G) == brute_nat_count(F, G)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_enumeration_matches_brute_force_randomized(data):
    # random small presheaves over the walking arrow
    nf_s = data.draw(st.integers(0, 2), label="F src size")
    nf_t = data.draw(st.integers(0, 2), label="F tgt size")
    ng_s = data.draw(st.integers(0, 2), label="G src size")
    ng_t = data.draw(st.integers(0, 2), label="G tgt size")
    f_map = [data.draw(st.integers(0, nf_s - 1)) for _ in range(nf_t)] \
        if nf_s else []
    g_map = [data.draw(st.integers(0, ng_s - 1)) for _ in range(ng_t)] \
        if ng_s else []
    if nf_t and not nf_s:
        nf_t = 0  # no action possible into an empty stage
    if ng_t and not ng_s:
        ng_t = 0
    F = arrow_presheaf(nf_s, nf_t, f_map[:nf_t])
    G = arrow_presheaf(ng_s, ng_t, g_map[:ng_t])
    assert count_nats(F, G) == brute_nat_count(F, G)


def test_enumeration_over_square_poset_matches_brute_force():
    C = poset_as_category(["00", "01", "10", "11"],
                          [[1, 1, 1, 1], [0, 1, 0, 1],
                           [0, 0, 1, 1], [0, 0, 0, 1]])
    # F = representable at the bottom corner; G = two-element constant-ish
    F = yoneda(C, 0)
    action = [np.arange(2)[:2] for _ in range(C.n_mor)]
    G = Presheaf(C, [2, 2, 2, 2], action)
    assert count_nats(F, G) == brute_nat_count(F, G)


# --- Yoneda ---------------------------------------------------------------

def test_yoneda_terminal_category():
    y = yoneda(TERM, 0)
    assert y.sizes == (1,)


def test_yoneda_walking_arrow_counts():
    y_tgt = yoneda(ARROW, 1)
    assert y_tgt.sizes == (1, 1)
    y_src = yoneda(ARROW, 0)
    assert y_src.sizes == (1, 0)


def test_yoneda_simplex_stage_sizes_match_hom_oracle():
    C = truncated_simplex_category(2)
    for c in range(3):
        y = yoneda(C, c)
        assert validate_presheaf(y).status == "pass"
        for d in range(3):
            assert y.sizes[d] == oracles.hom_count_chain(d, c)


def test_yoneda_lemma_by_brute_force():
    # |Nat(y(c), G)| = |G(c)| for every object of a small base
    C = truncated_simplex_category(2)
    sizes = [2, 3, 1]
    action = []
    rng = np.random.RandomState(7)
    # build a valid presheaf: use the nerve-style threshold structure to
    # guarantee functoriality (monotone-map counting on a 2-chain)
    from toposcheck.fincat import truncated_simplex_maps
    maps = truncated_simplex_maps(2)
    # G = nerve of the poset {0 < 1} truncated: G([k]) = monotone [k]->[1]
    stages = [oracles.monotone_maps_brute(k, 1) for k in range(3)]
    g_sizes = [len(s) for s in stages]
    g_action = []
    for m, (a, b, vals) in enumerate(maps):
        arr = np.empty(g_sizes[b], dtype=np.int64)
        for j, chi in enumerate(stages[b]):
            composed = tuple(chi[v] for v in vals)
            arr[j] = stages[a].index(composed)
        g_action.append(arr)
    G = Presheaf(C, g_sizes, g_action)
    assert validate_presheaf(G).status == "pass"
    for c in range(3):
        assert count_nats(yoneda(C, c), G) == G.sizes[c]


# --- mono/iso/epi ---------------------------------------------------------

def test_mono_iso_epi_basics():
    F = set_presheaf(2)
    G = set_presheaf(4)
    incl = NatTrans(F, G, [np.array([1, 3])])
    assert is_mono(incl) and not is_iso(incl) and not is_epi(incl)
    swap = NatTrans(F, F, [np.array([1, 0])])
    assert is_iso(swap)
    inv = inverse_nat(swap)
    assert compose_nats(inv, swap) == identity_nat(F)


def test_iso_has_enumerable_inverse():
    F = arrow_presheaf(2, 2, [0, 1])
    t = find_iso(F, F)
    assert t is not None and is_iso(t)


def test_diagonal_is_mono_not_iso():
    F = set_presheaf(2)
    G = set_presheaf(4)  # stands in for F x F with pair indexing x*2+y
    diag = NatTrans(F, G, [np.array([0, 3])])
    assert is_mono(diag) and not is_iso(diag)


# --- composition laws on a corpus ----------------------------------------

def test_nat_composition_associative_and_unital():
    F = arrow_presheaf(2, 2, [0, 1])
    G = arrow_presheaf(2, 3, [0, 1, 1])
    nats_fg = enumerate_nats(F, G)
    nats_gf = enumerate_nats(G, F)
    for t in nats_fg[:5]:
        assert compose_nats(t, identity_nat(F)) == t
        assert compose_nats(identity_nat(G), t) == t
        for s in nats_gf[:5]:
            for u in nats_fg[:3]:
                lhs = compose_nats(u, compose_nats(s, t))
                rhs = compose_nats(compose_nats(u, s), t)
                assert lhs == rhs


# --- pre-assignment and budget --------------------------------------------

def test_pre_assignment_restricts_enumeration():
    F = set_presheaf(2)
    G = set_presheaf(3)
    pinned = enumerate_nats(F, G, pre_assign=[np.array([1, -1])])
    assert len(pinned) == 3
    assert all(t(0, 0) == 1 for t in pinned)


def test_budget_exceeded_raises():
    F = set_presheaf(6)
    G = set_presheaf(6)
    with pytest.raises(BudgetExceededError):
        enumerate_nats(F, G, max_nodes=10)


def test_backends_agree_and_are_both_exercised():
    if not backend.HAS_NUMBA:
        pytest.skip("numba unavailable")
    F = arrow_presheaf(2, 3, [0, 0, 1])
    G = arrow_presheaf(3, 2, [2, 0])
    prob = backend.build_problem(F, G)
    py = backend.solve(prob, backend="python")
    nb = backend.solve(prob, backend="numba")
    assert np.array_equal(py, nb)
