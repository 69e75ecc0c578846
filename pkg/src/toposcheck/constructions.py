"""Partial map classifiers, Sierpinski cones, joins of types, and the
comparison map between them.

The lift L(X) is computed by the explicit matching-family formula: an
element over a stage is a support element i of the interval together with
a compatible family of X-elements indexed by the sieve of maps along
which i restricts to the top.  The Sierpinski cone is computed fibrewise
over the category of elements of the interval and reassembled; the
glueing description is built independently and the two are reconciled.
"""

import numpy as np

from .presheaf import (Presheaf, NatTrans, yoneda, enumerate_nats,
                       compose_nats, identity_nat, is_mono, is_iso)
from . import topos_ops as ops
from .interval import sieve_T
from .report import (CheckReport, passed, failed, skipped,
                     StructureError, PreconditionError, EngineError)


# ---------------------------------------------------------------------------
# the partial map classifier


class LiftedObject:
    """The lift L(X): elements are (support, matching family) pairs.

    presheaf: L(X)
    unit:     the mono X -> L(X) with full support
    support:  the projection L(X) -> I
    """

    __slots__ = ("presheaf", "unit", "support", "istr", "subject",
                 "_elems", "_index", "_sieves")

    def __init__(self, presheaf, unit, support, istr, subject,
                 elems, index, sieves):
        self.presheaf = presheaf
        self.unit = unit
        self.support = support
        self.istr = istr
        self.subject = subject
        self._elems = elems
        self._index = index
        self._sieves = sieves

    def sieve_at(self, c, i):
        """The support sieve of i at stage c, a sorted morphism tuple."""
        return self._sieves[c][i]

    def element(self, c, k):
        """The k-th element at stage c as (support index, family tuple);
        the family is indexed by sieve_at(c, support) in order."""
        return self._elems[c][k]

    def element_index(self, c, i, family):
        return self._index[c][(i, tuple(int(v) for v in family))]


def _sieve_subpresheaf(istr, c, sieve):
    """The sieve as a subpresheaf of the representable at c."""
    C = istr.base
    sieve_set = set(sieve)
    yc = yoneda(C, c)
    sets = []
    for d in range(C.n_obj):
        hom = C.hom(d, c)
        sets.append([p for p, f in enumerate(hom) if f in sieve_set])
    return ops.subobject_from_stage_sets(yc, sets, validate=True)


def _families(istr, X, c, sieve):
    """All matching families on the sieve, each a value tuple aligned with
    the sorted sieve, in ascending lexicographic order."""
    C = istr.base
    sub = _sieve_subpresheaf(istr, c, sieve)
    S = sub.domain
    pos_of = []
    for f in sieve:
        d = int(C.mor_src[f])
        j = C.hom(d, c).index(f)
        pos_of.append((d, sub.stage_sets[d].index(j)))
    fams = []
    for t in enumerate_nats(S, X):
        fams.append(tuple(int(t(d, p)) for (d, p) in pos_of))
    return sorted(fams)


def lift(istr, X):
    """The partial map classifier applied to X."""
    key = ("lift", X.key())
    if key in istr._cache:
        return istr._cache[key]
    C = istr.base
    I = istr.presheaf
    sieves = []
    elems = []
    index = []
    total = 0
    for c in range(C.n_obj):
        sieves.append(tuple(sieve_T(istr, c, i) for i in range(I.sizes[c])))
        stage = []
        for i in range(I.sizes[c]):
            for fam in _families(istr, X, c, sieves[c][i]):
                stage.append((i, fam))
        elems.append(tuple(stage))
        index.append({e: k for k, e in enumerate(stage)})
        total += len(stage)
        if total > ops.backend.MAX_ELEMENTS:
            from .report import BudgetExceededError
            raise BudgetExceededError(
                "lift would exceed the element budget (%d)"
                % ops.backend.MAX_ELEMENTS)
    sizes = [len(e) for e in elems]

    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for k, (i, fam) in enumerate(elems[d]):
            im = int(I.action[m][i])
            fam_pos = {f: p for p, f in enumerate(sieves[d][i])}
            new_fam = tuple(fam[fam_pos[C.compose(m, g)]]
                            for g in sieves[c][im])
            a[k] = index[c][(im, new_fam)]
        action.append(a)

    labels = []
    for c in range(C.n_obj):
        lab = []
        for (i, fam) in elems[c]:
            lab.append("(%s|%s)" % (istr.label(c, i),
                                    ",".join(str(v) for v in fam)))
        labels.append(tuple(lab))
    L = Presheaf(C, sizes, action, labels=labels)

    unit_comps = []
    for c in range(C.n_obj):
        oc = istr.one_at(c)
        arr = np.empty(X.sizes[c], dtype=np.int64)
        for x in range(X.sizes[c]):
            fam = tuple(int(X.act(f, x)) for f in sieves[c][oc])
            arr[x] = index[c][(oc, fam)]
        unit_comps.append(arr)
    unit = NatTrans(X, L, unit_comps)
    support = NatTrans(L, I, [
        np.asarray([i for (i, _fam) in elems[c]], dtype=np.int64)
        for c in range(C.n_obj)])
    if not is_mono(unit):
        raise EngineError("the lift unit failed to be mono")
    data = LiftedObject(L, unit, support, istr, X, elems, index, sieves)
    istr._cache[key] = data
    return data


def check_partial_map_bijection(istr, Y, X):
    """|hom(Y, L(X))| must equal the number of partial maps Y -> X: pairs
    of a support map s: Y -> I and a total map on the open part of Y
    where s hits the top point."""
    name = "constructions/partial-map-bijection"
    L = lift(istr, X).presheaf
    lhs = len(enumerate_nats(Y, L))
    rhs = 0
    for s in enumerate_nats(Y, istr.presheaf):
        open_part = ops.pullback(s, istr.one).presheaf
        rhs += len(enumerate_nats(open_part, X))
    if lhs == rhs:
        return passed(name, info={"maps": lhs})
    return failed(name, {"hom_into_lift": lhs, "partial_maps": rhs})


# ---------------------------------------------------------------------------
# joins of types


def join_types(P, X):
    """The join of a subterminal P with X: the pushout of P <- P x X -> X.
    Joining with an inhabited subterminal crushes X into it; joining with
    the empty one returns X."""
    if not ops.is_subterminal(P):
        raise StructureError("join_types needs a subterminal first factor")
    pd = ops.product(P, X)
    po = ops.pushout(pd.p1, pd.p2)
    return po.presheaf


# ---------------------------------------------------------------------------
# the Sierpinski cone


class SierpinskiCone:
    """The cone X_bot: X with a bottom point freely attached by a cylinder.

    carrier:   the fibrewise presheaf (sum over the interval of joins of
               the bottom-detecting subterminal with X), reassembled
    bottom:    1 -> X_bot
    inclusion: X -> X_bot (the top end of the cylinder)
    cylinder:  I x X -> X_bot
    support:   X_bot -> I
    pushout_presheaf / iso: the glueing route and its isomorphism onto
               the carrier
    """

    __slots__ = ("carrier", "bottom", "inclusion", "cylinder", "support",
                 "pushout_presheaf", "iso", "istr", "subject")

    def __init__(self, carrier, bottom, inclusion, cylinder, support,
                 pushout_presheaf, iso, istr, subject):
        self.carrier = carrier
        self.bottom = bottom
        self.inclusion = inclusion
        self.cylinder = cylinder
        self.support = support
        self.pushout_presheaf = pushout_presheaf
        self.iso = iso
        self.istr = istr
        self.subject = subject


def _bottom_subterminal(eldata, istr):
    """The subterminal over the elements category of I that holds exactly
    where the generic element is the bottom point."""
    C = istr.base
    sizes = []
    for (c, i) in eldata.pairs:
        sizes.append(1 if i == istr.zero_at(c) else 0)
    action = []
    for (m, i) in eldata.mor_pairs:
        d = int(C.mor_tgt[m])
        tgt_obj = eldata.obj_index[(d, i)]
        action.append(np.zeros(sizes[tgt_obj], dtype=np.int64))
    return Presheaf(eldata.cat, sizes, action)


def scone(istr, X):
    """Build the Sierpinski cone both ways and reconcile them.

    The fibrewise route works over the category of elements of I: at the
    generic element i it joins the bottom-detecting subterminal with the
    pullback of X, then reassembles the total presheaf, whose projection
    is the support.  The glueing route pushes out
    1 <- X -> I x X (bottom section); the canonical comparison between
    the two must be a bijection."""
    key = ("scone", X.key())
    if key in istr._cache:
        return istr._cache[key]
    C = istr.base
    I = istr.presheaf

    # fibrewise route
    eldata = ops.elements_category(I)
    S = _bottom_subterminal(eldata, istr)
    Xbar = ops.pullback_to_elements(X, eldata)
    pd = ops.product(S, Xbar)
    po_fib = ops.pushout(pd.p1, pd.p2)
    J = po_fib.presheaf
    carrier, support, offsets = ops.from_elements(J, eldata)

    # glueing route
    pdIX = ops.product(I, X)
    zero_sec = ops.pair_nat(
        pdIX, compose_nats(istr.zero, ops.unique_to_terminal(X)),
        identity_nat(X))
    po = ops.pushout(ops.unique_to_terminal(X), zero_sec)

    # canonical comparison glueing -> fibrewise: a cylinder point (i, x)
    # lands in the fibre over i as the class of x; the bottom lands in the
    # fibre over the bottom point as the class of the subterminal's point
    comp = []
    for c in range(C.n_obj):
        zc = istr.zero_at(c)
        arr = -np.ones(po.presheaf.sizes[c], dtype=np.int64)

        def put(k, v):
            if arr[k] != -1 and arr[k] != v:
                raise EngineError("scone comparison is ill-defined")
            arr[k] = v

        bot_obj = eldata.obj_index[(c, zc)]
        bot_leg = po_fib.from_F(bot_obj, 0)
        put(po.from_F(c, 0), offsets[c][zc] + bot_leg)
        for i in range(I.sizes[c]):
            obj = eldata.obj_index[(c, i)]
            for x in range(X.sizes[c]):
                v = offsets[c][i] + po_fib.from_G(obj, x)
                put(po.from_G(c, pdIX.pair_index(c, i, x)), v)
        if (arr == -1).any():
            raise EngineError("scone comparison did not cover the glueing")
        comp.append(arr)
    iso = NatTrans(po.presheaf, carrier, comp)
    if not is_iso(iso):
        raise EngineError("scone glueing and fibrewise routes disagree")

    bottom = compose_nats(iso, po.from_F)
    cylinder = compose_nats(iso, po.from_G)
    one_sec = ops.pair_nat(
        pdIX, compose_nats(istr.one, ops.unique_to_terminal(X)),
        identity_nat(X))
    inclusion = compose_nats(cylinder, one_sec)
    data = SierpinskiCone(carrier, bottom, inclusion, cylinder, support,
                          po.presheaf, iso, istr, X)
    istr._cache[key] = data
    return data


# ---------------------------------------------------------------------------
# the comparison map


def comparison(istr, X):
    """The canonical map from the Sierpinski cone to the lift, over the
    interval: a cylinder point (i, x) goes to i with the family of
    restrictions of x, and the bottom goes to the bottom-supported
    element.  The bottom family is empty when the interval is consistent;
    otherwise each required value must be forced, or no canonical map
    exists."""
    key = ("comparison", X.key())
    if key in istr._cache:
        return istr._cache[key]
    C = istr.base
    I = istr.presheaf
    lifted = lift(istr, X)
    cone = scone(istr, X)

    comps = []
    for c in range(C.n_obj):
        zc = istr.zero_at(c)
        arr = -np.ones(cone.carrier.sizes[c], dtype=np.int64)

        def put(k, v):
            if arr[k] != -1 and arr[k] != v:
                raise EngineError(
                    "comparison map disagrees on a glued class")
            arr[k] = v

        # bottom: the family over the bottom sieve must be forced
        bot_sieve = lifted.sieve_at(c, zc)
        fam = []
        for f in bot_sieve:
            d = int(C.mor_src[f])
            if X.sizes[d] != 1:
                raise PreconditionError(
                    "comparison map needs a consistent interval (or a "
                    "subject with forced values on the bottom sieve); "
                    "stage %s has %d choices"
                    % (C.objects[d], X.sizes[d]))
            fam.append(0)
        put(cone.bottom(c, 0), lifted.element_index(c, zc, tuple(fam)))

        # cylinder: restrict the subject element along the support sieve
        pdIX = ops.product(I, X)
        for i in range(I.sizes[c]):
            sieve = lifted.sieve_at(c, i)
            for x in range(X.sizes[c]):
                fam = tuple(int(X.act(f, x)) for f in sieve)
                put(cone.cylinder(c, pdIX.pair_index(c, i, x)),
                    lifted.element_index(c, i, fam))
        if (arr == -1).any():
            raise EngineError("comparison map left a cone element unset")
        comps.append(arr)
    sigma = NatTrans(cone.carrier, lifted.presheaf, comps)

    if compose_nats(sigma, cone.inclusion) != lifted.unit:
        raise EngineError("comparison does not restrict to the lift unit")
    if compose_nats(lifted.support, sigma) != cone.support:
        raise EngineError("comparison does not commute with the supports")
    istr._cache[key] = sigma
    return sigma


def is_T_subobject(istr, j_point):
    """The subterminal IsT(j) for a global point j: 1 -> I: the stages
    where the point's support sieve is full."""
    C = istr.base
    sets = []
    for c in range(C.n_obj):
        full = len(C.into(c))
        s = sieve_T(istr, c, j_point(c, 0))
        sets.append([0] if len(s) == full else [])
    return ops.subobject_from_stage_sets(ops.terminal(C), sets,
                                         validate=True)


# ---------------------------------------------------------------------------
# the Sierpinski-data pullback square


def sierp_data_square(istr, C_ps, X):
    """Mapping out of the cone is glueing-determined: the exponential
    C^{X_bot} must be the pullback of C^1 -> C^X <- C^{I x X}, where both
    legs restrict along the glueing span."""
    name = "constructions/sierp-data-square"
    cone = scone(istr, X)
    lhs = ops.exponential(C_ps, cone.carrier).presheaf

    pdIX = ops.product(istr.presheaf, X)
    zero_sec = ops.pair_nat(
        pdIX, compose_nats(istr.zero, ops.unique_to_terminal(X)),
        identity_nat(X))
    _, _, res_pt = ops.exponential_restriction(
        C_ps, ops.unique_to_terminal(X))
    _, _, res_cyl = ops.exponential_restriction(C_ps, zero_sec)
    rhs = ops.pullback(res_pt, res_cyl).presheaf

    if tuple(lhs.sizes) != tuple(rhs.sizes):
        return failed(name, {
            "exponential_sizes": list(lhs.sizes),
            "pullback_sizes": list(rhs.sizes),
        })
    from .presheaf import find_iso
    if find_iso(lhs, rhs) is None:
        return failed(name, {
            "reason": "equal sizes but no isomorphism",
            "exponential_sizes": list(lhs.sizes),
        })
    return passed(name, info={"sizes": list(lhs.sizes)})
