"""Geometric figure shapes generated by an interval: simplices, the inner
horn, the walking equivalence, and their displays over the interval.

All shapes are canonical subobjects or colimits of powers of the carrier,
with deterministic element orders inherited from the power indexing.
"""

import numpy as np

from .fincat import MAX_SIMPLEX_DIM
from .presheaf import NatTrans, compose_nats, is_mono, find_iso
from . import topos_ops as ops
from .report import PreconditionError, EngineError


def simplex(istr, n):
    """The n-simplex: the subobject of I^n of descending tuples, i.e.
    those with each coordinate meeting the next to the next itself.
    simplex(0) is the whole terminal power; simplex(1) is all of I^1."""
    if n < 0 or n > MAX_SIMPLEX_DIM:
        raise PreconditionError(
            "simplex dimension must lie in 0..%d, got %d"
            % (MAX_SIMPLEX_DIM, n))
    key = ("simplex", n)
    if key in istr._cache:
        return istr._cache[key]
    I = istr.presheaf
    C = istr.base
    pw = ops.power(I, n)
    sets = []
    for c in range(C.n_obj):
        stage = []
        for k in range(pw.presheaf.sizes[c]):
            tup = pw.untuple(c, k)
            if all(istr.meet_val(c, tup[t], tup[t + 1]) == tup[t + 1]
                   for t in range(n - 1)):
                stage.append(k)
        sets.append(stage)
    sub = ops.subobject_from_stage_sets(pw.presheaf, sets, validate=True)
    istr._cache[key] = sub
    return sub


def simplex_point(istr, n, k):
    """The global point of the n-simplex whose tuple has k top coordinates
    followed by n-k bottom ones (the k-th corner)."""
    simp = simplex(istr, n)
    pw = ops.power(istr.presheaf, n)
    comps = []
    for c in range(istr.base.n_obj):
        digits = (istr.one_at(c),) * k + (istr.zero_at(c),) * (n - k)
        amb = pw.tuple_index(c, digits)
        comps.append(np.asarray([simp.stage_sets[c].index(amb)],
                                dtype=np.int64))
    return NatTrans(ops.terminal(istr.base), simp.domain, comps)


class HornData:
    """The inner horn, built two ways and reconciled.

    presheaf:  the stagewise-formula subobject's domain (canonical)
    inclusion: its mono into the triangle simplex(2).domain
    subobject: the same data as a Subobject of the triangle
    pushout_presheaf: the glueing construction (two intervals joined at
        an endpoint), with legs first_leg/second_leg from the interval
    induced:   the map from the pushout into the triangle
    iso:       pushout_presheaf -> presheaf over the triangle
    """

    __slots__ = ("presheaf", "inclusion", "subobject", "pushout_presheaf",
                 "first_leg", "second_leg", "induced", "iso")

    def __init__(self, presheaf, inclusion, subobject, pushout_presheaf,
                 first_leg, second_leg, induced, iso):
        self.presheaf = presheaf
        self.inclusion = inclusion
        self.subobject = subobject
        self.pushout_presheaf = pushout_presheaf
        self.first_leg = first_leg
        self.second_leg = second_leg
        self.induced = induced
        self.iso = iso


def horn(istr):
    """The walking inner horn: two composable paths with no filler.

    Route one glues the top endpoint of one interval copy to the bottom
    endpoint of another; route two carves the subobject of the triangle
    whose lower coordinate is bottom or whose upper coordinate is top
    (the stagewise reading of "IsF(j) or IsT(i)": the sieve union is full
    exactly when it contains the identity).  The two routes must agree
    over the triangle; disagreement is an engine bug."""
    key = ("horn",)
    if key in istr._cache:
        return istr._cache[key]
    I = istr.presheaf
    C = istr.base
    simp2 = simplex(istr, 2)
    pw2 = ops.power(I, 2)

    # route two: stagewise formula
    sets = []
    for c in range(C.n_obj):
        zc, oc = istr.zero_at(c), istr.one_at(c)
        keep = []
        for pos, amb in enumerate(simp2.stage_sets[c]):
            i, j = pw2.untuple(c, amb)
            if j == zc or i == oc:
                keep.append(pos)
        sets.append(keep)
    sub = ops.subobject_from_stage_sets(simp2.domain, sets, validate=True)

    # route one: pushout of 1 -> I (top) against 1 -> I (bottom)
    po = ops.pushout(istr.one, istr.zero)

    # induced map to the triangle: the first copy becomes the path from
    # the middle vertex down (i, 0); the second the path into it (1, i)
    simp_pos = [
        {amb: pos for pos, amb in enumerate(simp2.stage_sets[c])}
        for c in range(C.n_obj)]
    comps = []
    for c in range(C.n_obj):
        zc, oc = istr.zero_at(c), istr.one_at(c)
        arr = -np.ones(po.presheaf.sizes[c], dtype=np.int64)
        for x in range(I.sizes[c]):
            tgt1 = simp_pos[c][pw2.tuple_index(c, (x, zc))]
            tgt2 = simp_pos[c][pw2.tuple_index(c, (oc, x))]
            for leg, tgt in ((po.from_F, tgt1), (po.from_G, tgt2)):
                k = leg(c, x)
                if arr[k] != -1 and arr[k] != tgt:
                    raise EngineError("horn glueing map is ill-defined")
                arr[k] = tgt
        if (arr == -1).any():
            raise EngineError("horn glueing did not cover the pushout")
        comps.append(arr)
    induced = NatTrans(po.presheaf, simp2.domain, comps)

    # reconcile: both are monos into the triangle with the same image
    if not is_mono(induced):
        raise EngineError("horn pushout does not embed into the triangle")
    if ops.image_subobject(induced).stage_sets != sub.stage_sets:
        raise EngineError("horn pushout and horn formula disagree")
    sub_pos = [{amb: pos for pos, amb in enumerate(sub.stage_sets[c])}
               for c in range(C.n_obj)]
    iso = NatTrans(po.presheaf, sub.domain, [
        np.asarray([sub_pos[c][int(induced(c, k))]
                    for k in range(po.presheaf.sizes[c])], dtype=np.int64)
        for c in range(C.n_obj)])

    data = HornData(sub.domain, sub.inclusion, sub, po.presheaf,
                    po.from_F, po.from_G, induced, iso)
    istr._cache[key] = data
    return data


class EquivalenceData:
    """The walking equivalence: the colimit of a zigzag of two triangles
    sharing a middle path, with its outer paths collapsed.

    presheaf: the colimit
    x, y:     the two collapsed-endpoint legs 1 -> E
    f:        the shared middle path leg, interval -> E
    rho, sigma: the two triangle legs, simplex(2).domain -> E
    legs:     all seven cocone legs in diagram order
    """

    __slots__ = ("presheaf", "x", "y", "f", "rho", "sigma", "legs")

    def __init__(self, presheaf, legs):
        self.presheaf = presheaf
        self.legs = legs
        self.x = legs[0]
        self.rho = legs[2]
        self.f = legs[3]
        self.sigma = legs[4]
        self.y = legs[6]


def _interval_into_triangle(istr, formula):
    """A path into the triangle: formula(c, x) gives the coordinate pair."""
    I = istr.presheaf
    simp1 = simplex(istr, 1)
    simp2 = simplex(istr, 2)
    pw2 = ops.power(I, 2)
    comps = []
    for c in range(istr.base.n_obj):
        pos = {amb: p for p, amb in enumerate(simp2.stage_sets[c])}
        arr = np.empty(len(simp1.stage_sets[c]), dtype=np.int64)
        for p, amb in enumerate(simp1.stage_sets[c]):
            x = amb  # power(I,1) index equals the element of I(c)
            arr[p] = pos[pw2.tuple_index(c, formula(c, x))]
        comps.append(arr)
    return NatTrans(simp1.domain, simp2.domain, comps)


def walking_equivalence(istr):
    """Colimit of the seven-node zigzag
    point <- path -> triangle <- path -> triangle <- path -> point:
    the middle path is shared by both triangles (as the first edge of one
    and the second edge of the other), while the outer paths land on the
    triangles' long edges and are collapsed to points, exhibiting the
    middle path as having both a retraction and a section."""
    key = ("equivalence",)
    if key in istr._cache:
        return istr._cache[key]
    pt = simplex(istr, 0).domain
    seg = simplex(istr, 1).domain
    tri = simplex(istr, 2).domain

    to_point = NatTrans(seg, pt, [
        np.zeros(seg.sizes[c], dtype=np.int64)
        for c in range(istr.base.n_obj)])
    # the long edge of a triangle (the composite side), as a path
    diag = _interval_into_triangle(istr, lambda c, x: (x, x))
    # the first edge: from the initial vertex to the middle one
    first_edge = _interval_into_triangle(
        istr, lambda c, x: (x, istr.zero_at(c)))
    # the second edge: from the middle vertex to the final one
    second_edge = _interval_into_triangle(
        istr, lambda c, x: (istr.one_at(c), x))

    nodes = [pt, seg, tri, seg, tri, seg, pt]
    edges = [
        (1, 0, to_point),
        (1, 2, diag),
        (3, 2, first_edge),
        (3, 4, second_edge),
        (5, 4, diag),
        (5, 6, to_point),
    ]
    E, legs = ops.colimit(nodes, edges)
    data = EquivalenceData(E, tuple(legs))
    istr._cache[key] = data
    return data


class DisplayData:
    """The triangle and the horn displayed over the interval by their
    upper endpoint (the join of the two coordinates, which for descending
    pairs is the first coordinate)."""

    __slots__ = ("triangle", "horn", "horn_data")

    def __init__(self, triangle, horn_nat, horn_data):
        self.triangle = triangle
        self.horn = horn_nat
        self.horn_data = horn_data


def display(istr):
    """Project the triangle (and hence the horn) onto the interval by the
    join of the coordinates; verified against the first-coordinate
    projection, which must agree on descending pairs."""
    if istr.join is None:
        raise PreconditionError("display requires a lattice (join absent)")
    key = ("display",)
    if key in istr._cache:
        return istr._cache[key]
    I = istr.presheaf
    C = istr.base
    simp2 = simplex(istr, 2)
    pw2 = ops.power(I, 2)
    comps = []
    for c in range(C.n_obj):
        arr = np.empty(len(simp2.stage_sets[c]), dtype=np.int64)
        for p, amb in enumerate(simp2.stage_sets[c]):
            i, j = pw2.untuple(c, amb)
            v = istr.join_val(c, i, j)
            if v != i:
                raise EngineError(
                    "join of a descending pair differs from its upper "
                    "coordinate; lattice laws are broken")
            arr[p] = v
        comps.append(arr)
    triangle = NatTrans(simp2.domain, I, comps)
    hd = horn(istr)
    horn_nat = compose_nats(triangle, hd.inclusion)
    data = DisplayData(triangle, horn_nat, hd)
    istr._cache[key] = data
    return data


def fibre_over(p, point):
    """The fibre of a displayed object p: E -> I over a global point of I,
    computed as a pullback."""
    return ops.pullback(p, point).presheaf
