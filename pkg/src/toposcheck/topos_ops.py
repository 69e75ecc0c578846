"""Finite limits, colimits, exponentials, the subobject classifier, and the
category-of-elements equivalence.

Everything is computed pointwise with deterministic element orders:
products index pairs as x * |G(c)| + y, colimit quotients pick the
minimum-index representative of each class, exponentials list their stage
elements in the kernel's lexicographic enumeration order.
"""

import numpy as np

from . import backend
from .fincat import FiniteCategory
from .presheaf import (Presheaf, NatTrans, yoneda, enumerate_nats,
                       identity_nat, is_mono)
from .report import (StructureError, EngineError, BudgetExceededError)


def _check_budget(total, what):
    if total > backend.MAX_ELEMENTS:
        raise BudgetExceededError(
            "%s would have %d elements (budget %d)"
            % (what, total, backend.MAX_ELEMENTS))


# ---------------------------------------------------------------------------
# terminal / initial

def terminal(C):
    if "terminal" not in C.cache:
        C.cache["terminal"] = Presheaf(
            C, [1] * C.n_obj, [np.zeros(1, dtype=np.int64)] * C.n_mor,
            labels=[("*",)] * C.n_obj)
    return C.cache["terminal"]


def initial(C):
    if "initial" not in C.cache:
        C.cache["initial"] = Presheaf(
            C, [0] * C.n_obj, [np.empty(0, dtype=np.int64)] * C.n_mor)
    return C.cache["initial"]


def unique_to_terminal(F):
    T = terminal(F.base)
    return NatTrans(F, T, [np.zeros(F.sizes[c], dtype=np.int64)
                           for c in range(F.base.n_obj)])


def global_elements(F):
    """All points 1 -> F, in lexicographic order."""
    return enumerate_nats(terminal(F.base), F)


def is_subterminal(F):
    return all(s <= 1 for s in F.sizes)


# ---------------------------------------------------------------------------
# products

class ProductData:
    """Binary product with projections; pair (x, y) at stage c has index
    x * |G(c)| + y."""

    __slots__ = ("presheaf", "p1", "p2", "F", "G")

    def __init__(self, presheaf, p1, p2, F, G):
        self.presheaf = presheaf
        self.p1 = p1
        self.p2 = p2
        self.F = F
        self.G = G

    def pair_index(self, c, x, y):
        return x * self.G.sizes[c] + y

    def unpair(self, c, k):
        g = self.G.sizes[c]
        return k // g, k % g


def product(F, G):
    key = ("product", F.key(), G.key())
    C = F.base
    if key in C.cache:
        return C.cache[key]
    sizes = [F.sizes[c] * G.sizes[c] for c in range(C.n_obj)]
    _check_budget(sum(sizes), "product")
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        fa, ga = F.action[m], G.action[m]
        gd, gc = G.sizes[d], G.sizes[c]
        for x in range(F.sizes[d]):
            base_in = x * gd
            for y in range(gd):
                a[base_in + y] = fa[x] * gc + ga[y]
        action.append(a)
    labels = []
    for c in range(C.n_obj):
        lf, lg = F.stage_labels(c), G.stage_labels(c)
        labels.append(tuple("(%s,%s)" % (a, b) for a in lf for b in lg))
    P = Presheaf(C, sizes, action, labels=labels)
    comps1, comps2 = [], []
    for c in range(C.n_obj):
        k = np.arange(sizes[c], dtype=np.int64)
        g = max(G.sizes[c], 1)
        comps1.append(k // g)
        comps2.append(k % g)
    data = ProductData(P, NatTrans(P, F, comps1), NatTrans(P, G, comps2), F, G)
    C.cache[key] = data
    return data


def pair_nat(prod_data, f, g):
    """⟨f, g⟩: E -> F x G for f: E -> F, g: E -> G."""
    E = f.source
    comps = []
    for c in range(E.base.n_obj):
        arr = np.empty(E.sizes[c], dtype=np.int64)
        for e in range(E.sizes[c]):
            arr[e] = prod_data.pair_index(c, f(c, e), g(c, e))
        comps.append(arr)
    return NatTrans(E, prod_data.presheaf, comps)


def product_map(prodFG, prodFG2, u, v):
    """u x v: F x G -> F' x G' on canonical products."""
    comps = []
    P = prodFG.presheaf
    for c in range(P.base.n_obj):
        arr = np.empty(P.sizes[c], dtype=np.int64)
        for k in range(P.sizes[c]):
            x, y = prodFG.unpair(c, k)
            arr[k] = prodFG2.pair_index(c, u(c, x), v(c, y))
        comps.append(arr)
    return NatTrans(P, prodFG2.presheaf, comps)


class PowerData:
    """Finite power F^n with tuple elements in ascending lexicographic
    order (mixed-radix index, first coordinate most significant)."""

    __slots__ = ("presheaf", "F", "n", "projections")

    def __init__(self, presheaf, F, n, projections):
        self.presheaf = presheaf
        self.F = F
        self.n = n
        self.projections = projections

    def tuple_index(self, c, tup):
        s = self.F.sizes[c]
        k = 0
        for v in tup:
            k = k * s + v
        return k

    def untuple(self, c, k):
        s = self.F.sizes[c]
        out = []
        for _ in range(self.n):
            out.append(k % s)
            k //= s
        return tuple(reversed(out))


def power(F, n):
    key = ("power", F.key(), n)
    C = F.base
    if key in C.cache:
        return C.cache[key]
    sizes = [F.sizes[c] ** n for c in range(C.n_obj)]
    _check_budget(sum(sizes), "power")
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        fa = F.action[m]
        sd, sc = F.sizes[d], F.sizes[c]
        for k in range(sizes[d]):
            kk, out = k, 0
            digits = []
            for _ in range(n):
                digits.append(kk % sd)
                kk //= sd
            for v in reversed(digits):
                out = out * sc + int(fa[v])
            a[k] = out
        action.append(a)
    P = Presheaf(C, sizes, action)
    data = PowerData(P, F, n, None)
    projections = []
    for i in range(n):
        comps = []
        for c in range(C.n_obj):
            arr = np.empty(sizes[c], dtype=np.int64)
            for k in range(sizes[c]):
                arr[k] = data.untuple(c, k)[i]
            comps.append(arr)
        projections.append(NatTrans(P, F, comps))
    data.projections = tuple(projections)
    C.cache[key] = data
    return data


# ---------------------------------------------------------------------------
# subobjects

class Subobject:
    """A subpresheaf presented by its stage subsets of an ambient presheaf.

    domain:    the subpresheaf with reindexed (ascending) elements
    ambient:   the containing presheaf
    inclusion: the mono domain -> ambient
    stage_sets: per-object ascending tuple of ambient element indices
    """

    __slots__ = ("domain", "ambient", "inclusion", "stage_sets")

    def __init__(self, domain, ambient, inclusion, stage_sets):
        self.domain = domain
        self.ambient = ambient
        self.inclusion = inclusion
        self.stage_sets = stage_sets

    def contains(self, c, x):
        return x in self.stage_sets[c]


def subobject_from_stage_sets(F, stage_sets, validate=True):
    """Build the subpresheaf on the given stage subsets (ambient element
    indices).  Raises StructureError if the subsets are not closed under
    the actions."""
    C = F.base
    sets = [tuple(sorted(set(int(x) for x in s))) for s in stage_sets]
    pos = [{x: i for i, x in enumerate(s)} for s in sets]
    if validate:
        for m in range(C.n_mor):
            c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
            for x in sets[d]:
                if int(F.action[m][x]) not in pos[c]:
                    raise StructureError(
                        "stage sets not action-closed: morphism %d sends "
                        "element %d of %s outside" % (m, x, C.objects[d]))
    sizes = [len(s) for s in sets]
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for i, x in enumerate(sets[d]):
            a[i] = pos[c][int(F.action[m][x])]
        action.append(a)
    labels = [tuple(F.stage_labels(c)[x] for x in sets[c])
              for c in range(C.n_obj)]
    D = Presheaf(C, sizes, action, labels=labels)
    incl = NatTrans(D, F, [np.asarray(sets[c], dtype=np.int64)
                           for c in range(C.n_obj)])
    return Subobject(D, F, incl, tuple(sets))


def image_subobject(t):
    """Image of a natural transformation as a subobject of its target."""
    sets = [sorted(set(t.components[c].tolist()))
            for c in range(t.source.base.n_obj)]
    return subobject_from_stage_sets(t.target, sets, validate=False)


def intersect_subobjects(a, b):
    sets = [sorted(set(a.stage_sets[c]) & set(b.stage_sets[c]))
            for c in range(a.ambient.base.n_obj)]
    return subobject_from_stage_sets(a.ambient, sets, validate=False)


def union_subobjects(a, b):
    sets = [sorted(set(a.stage_sets[c]) | set(b.stage_sets[c]))
            for c in range(a.ambient.base.n_obj)]
    return subobject_from_stage_sets(a.ambient, sets, validate=False)


def subobject_equal(a, b):
    return a.stage_sets == b.stage_sets


# ---------------------------------------------------------------------------
# pullbacks and equalizers

class PullbackData:
    __slots__ = ("presheaf", "to_F", "to_G", "pairs")

    def __init__(self, presheaf, to_F, to_G, pairs):
        self.presheaf = presheaf
        self.to_F = to_F
        self.to_G = to_G
        self.pairs = pairs  # per-object tuple of (x, y) ambient pairs


def pullback(f, g):
    """Pullback of the cospan F --f--> H <--g-- G, as the subobject of
    F x G where the legs agree; element order follows the product index."""
    if f.target.key() != g.target.key():
        raise StructureError("pullback needs a shared codomain")
    F, G = f.source, g.source
    prod = product(F, G)
    C = F.base
    sets = []
    pairs = []
    for c in range(C.n_obj):
        stage = []
        ppairs = []
        for x in range(F.sizes[c]):
            for y in range(G.sizes[c]):
                if f(c, x) == g(c, y):
                    stage.append(prod.pair_index(c, x, y))
                    ppairs.append((x, y))
        sets.append(stage)
        pairs.append(tuple(ppairs))
    sub = subobject_from_stage_sets(prod.presheaf, sets, validate=False)
    from .presheaf import compose_nats
    return PullbackData(sub.domain,
                        compose_nats(prod.p1, sub.inclusion),
                        compose_nats(prod.p2, sub.inclusion),
                        tuple(pairs))


def equalizer(f, g):
    """Equalizer of f, g: F -> G as a subobject of F."""
    if f.source.key() != g.source.key() or f.target.key() != g.target.key():
        raise StructureError("equalizer needs parallel maps")
    F = f.source
    sets = [[x for x in range(F.sizes[c]) if f(c, x) == g(c, x)]
            for c in range(F.base.n_obj)]
    return subobject_from_stage_sets(F, sets, validate=False)


# ---------------------------------------------------------------------------
# colimits

class _UF:
    """Union-find with minimum-index representatives (deterministic)."""

    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class CoproductData:
    __slots__ = ("presheaf", "i1", "i2")

    def __init__(self, presheaf, i1, i2):
        self.presheaf = presheaf
        self.i1 = i1
        self.i2 = i2


def coproduct(F, G):
    C = F.base
    sizes = [F.sizes[c] + G.sizes[c] for c in range(C.n_obj)]
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        a[:F.sizes[d]] = F.action[m]
        a[F.sizes[d]:] = G.action[m] + F.sizes[c]
        action.append(a)
    labels = [tuple(["L:%s" % s for s in F.stage_labels(c)]
                    + ["R:%s" % s for s in G.stage_labels(c)])
              for c in range(C.n_obj)]
    P = Presheaf(C, sizes, action, labels=labels)
    i1 = NatTrans(F, P, [np.arange(F.sizes[c], dtype=np.int64)
                         for c in range(C.n_obj)])
    i2 = NatTrans(G, P, [np.arange(G.sizes[c], dtype=np.int64) + F.sizes[c]
                         for c in range(C.n_obj)])
    return CoproductData(P, i1, i2)


def _quotient(G, gen_pairs):
    """Quotient of G by the congruence generated by per-object element
    pairs; returns (Q, proj: G -> Q).  The generated relation is closed
    under all actions so the quotient is a presheaf; representatives are
    minimum-index, and quotient elements keep ascending order."""
    C = G.base
    uf = [_UF(G.sizes[c]) for c in range(C.n_obj)]
    work = []
    for c in range(C.n_obj):
        for (a, b) in gen_pairs[c]:
            if uf[c].union(a, b):
                work.append((c, a, b))
    while work:
        d, a, b = work.pop()
        for m in range(C.n_mor):
            if int(C.mor_tgt[m]) != d:
                continue
            c = int(C.mor_src[m])
            xa, xb = int(G.action[m][a]), int(G.action[m][b])
            if uf[c].union(xa, xb):
                work.append((c, xa, xb))
    reps = []
    rep_pos = []
    for c in range(C.n_obj):
        rs = sorted(set(uf[c].find(x) for x in range(G.sizes[c])))
        reps.append(rs)
        rep_pos.append({r: i for i, r in enumerate(rs)})
    sizes = [len(r) for r in reps]
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for i, r in enumerate(reps[d]):
            a[i] = rep_pos[c][uf[c].find(int(G.action[m][r]))]
        action.append(a)
    labels = [tuple(G.stage_labels(c)[r] for r in reps[c])
              for c in range(C.n_obj)]
    Q = Presheaf(C, sizes, action, labels=labels)
    proj = NatTrans(G, Q, [
        np.asarray([rep_pos[c][uf[c].find(x)] for x in range(G.sizes[c])],
                   dtype=np.int64)
        for c in range(C.n_obj)])
    return Q, proj


def coequalizer(f, g):
    """Coequalizer of f, g: F -> G; returns (Q, proj: G -> Q)."""
    if f.source.key() != g.source.key() or f.target.key() != g.target.key():
        raise StructureError("coequalizer needs parallel maps")
    F, G = f.source, f.target
    gen = [[(f(c, x), g(c, x)) for x in range(F.sizes[c])]
           for c in range(F.base.n_obj)]
    return _quotient(G, gen)


class PushoutData:
    __slots__ = ("presheaf", "from_F", "from_G")

    def __init__(self, presheaf, from_F, from_G):
        self.presheaf = presheaf
        self.from_F = from_F
        self.from_G = from_G


def pushout(f, g):
    """Pushout of the span F <--f-- H --g--> G; legs from F and G."""
    if f.source.key() != g.source.key():
        raise StructureError("pushout needs a shared domain")
    H = f.source
    from .presheaf import compose_nats
    cop = coproduct(f.target, g.target)
    gen = [[(cop.i1(c, f(c, x)), cop.i2(c, g(c, x)))
            for x in range(H.sizes[c])]
           for c in range(H.base.n_obj)]
    Q, proj = _quotient(cop.presheaf, gen)
    return PushoutData(Q, compose_nats(proj, cop.i1),
                       compose_nats(proj, cop.i2))


def colimit(nodes, edges):
    """Colimit of a finite diagram: nodes are presheaves, edges are
    (src_node, tgt_node, NatTrans).  Returns (P, legs) where legs[k] maps
    nodes[k] into the colimit.  Computed as a quotient of the coproduct:
    every element is identified with its images along the edges."""
    C = nodes[0].base
    offs = []
    sizes = [0] * C.n_obj
    for F in nodes:
        offs.append(tuple(sizes))
        for c in range(C.n_obj):
            sizes[c] += F.sizes[c]
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for k, F in enumerate(nodes):
            src_off, tgt_off = offs[k][c], offs[k][d]
            a[tgt_off:tgt_off + F.sizes[d]] = F.action[m] + src_off
        action.append(a)
    labels = []
    for c in range(C.n_obj):
        lab = []
        for k, F in enumerate(nodes):
            lab.extend("%d:%s" % (k, s) for s in F.stage_labels(c))
        labels.append(tuple(lab))
    total = Presheaf(C, sizes, action, labels=labels)
    gen = [[] for _ in range(C.n_obj)]
    for (j, k, t) in edges:
        for c in range(C.n_obj):
            for x in range(nodes[j].sizes[c]):
                gen[c].append((offs[j][c] + x, offs[k][c] + t(c, x)))
    Q, proj = _quotient(total, gen)
    legs = []
    for k, F in enumerate(nodes):
        comps = [proj.components[c][offs[k][c]:offs[k][c] + F.sizes[c]]
                 for c in range(C.n_obj)]
        legs.append(NatTrans(F, Q, [np.array(a) for a in comps]))
    return Q, legs


# ---------------------------------------------------------------------------
# exponentials

class ExpData:
    """Exponential G^F.  Stage c lists all natural maps y(c) x F -> G in
    kernel order; the per-stage layout of y(c) x F is kept for evaluation,
    currying and restriction maps."""

    __slots__ = ("presheaf", "G", "F", "stage_vectors", "stage_lookup",
                 "stage_products", "_ev")

    def __init__(self, presheaf, G, F, stage_vectors, stage_lookup,
                 stage_products):
        self.presheaf = presheaf
        self.G = G
        self.F = F
        self.stage_vectors = stage_vectors
        self.stage_lookup = stage_lookup
        self.stage_products = stage_products
        self._ev = None

    def element_nat(self, c, k):
        """The k-th stage-c element as an actual NatTrans y(c) x F -> G."""
        from .presheaf import nat_from_vector
        return nat_from_vector(self.stage_products[c].presheaf, self.G,
                               self.stage_vectors[c][k])

    def ev(self):
        """Evaluation map G^F x F -> G (built on demand)."""
        if self._ev is None:
            C = self.presheaf.base
            prod = product(self.presheaf, self.F)
            comps = []
            for c in range(C.n_obj):
                arr = np.empty(prod.presheaf.sizes[c], dtype=np.int64)
                yc = yoneda(C, c)
                id_pos = C.hom(c, c).index(int(C.identity[c]))
                pd = self.stage_products[c]
                # position of (id_c, x) inside the y(c) x F layout
                off = sum(yc.sizes[e] * self.F.sizes[e] for e in range(c))
                for t in range(self.presheaf.sizes[c]):
                    vec = self.stage_vectors[c][t]
                    for x in range(self.F.sizes[c]):
                        pos = off + id_pos * self.F.sizes[c] + x
                        arr[prod.pair_index(c, t, x)] = vec[pos]
                comps.append(arr)
            self._ev = NatTrans(prod.presheaf, self.G, comps)
        return self._ev


def _layout_offsets(yc, F):
    """Global offsets of each object's block in the y(c) x F element
    vector (objects ascending, pair index h_pos * |F(e)| + x inside)."""
    C = yc.base
    offs = np.zeros(C.n_obj + 1, dtype=np.int64)
    for e in range(C.n_obj):
        offs[e + 1] = offs[e] + yc.sizes[e] * F.sizes[e]
    return offs


def exponential(G, F):
    """G^F with stage c = all natural maps y(c) x F -> G."""
    C = G.base
    key = ("exp", G.key(), F.key())
    if key in C.cache:
        return C.cache[key]
    stage_vectors = []
    stage_lookup = []
    stage_products = []
    sizes = []
    for c in range(C.n_obj):
        yc = yoneda(C, c)
        pd = product(yc, F)
        nats = enumerate_nats(pd.presheaf, G)
        if nats:
            mat = np.stack([t.vector() for t in nats])
        else:
            mat = np.empty((0, pd.presheaf.total()), dtype=np.int64)
        stage_vectors.append(mat)
        stage_lookup.append({mat[i].tobytes(): i for i in range(len(nats))})
        stage_products.append(pd)
        sizes.append(len(nats))
    _check_budget(sum(sizes), "exponential")

    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        # precomposition remap: position in y(c) x F -> position in y(d) x F
        yc, yd = yoneda(C, c), yoneda(C, d)
        offs_c = _layout_offsets(yc, F)
        offs_d = _layout_offsets(yd, F)
        remap = np.empty(int(offs_c[C.n_obj]), dtype=np.int64)
        for e in range(C.n_obj):
            hom_ec = C.hom(e, c)
            pos_d = {h: j for j, h in enumerate(C.hom(e, d))}
            fs = F.sizes[e]
            for j, h in enumerate(hom_ec):
                mh = pos_d[C.compose(m, h)]
                src = offs_c[e] + j * fs
                dst = offs_d[e] + mh * fs
                remap[src:src + fs] = np.arange(dst, dst + fs)
        a = np.empty(sizes[d], dtype=np.int64)
        if sizes[d]:
            moved = stage_vectors[d][:, remap] if remap.size else \
                np.empty((sizes[d], 0), dtype=np.int64)
            look = stage_lookup[c]
            for t in range(sizes[d]):
                bkey = moved[t].tobytes()
                if bkey not in look:
                    raise EngineError("exponential action left the stage")
                a[t] = look[bkey]
        action.append(a)
    P = Presheaf(C, sizes, action)
    data = ExpData(P, G, F, stage_vectors, stage_lookup, stage_products)
    C.cache[key] = data
    return data


def curry(h, E, exp_data):
    """Transpose E x F -> G to E -> G^F (canonical product indexing)."""
    C = E.base
    F = exp_data.F
    pdEF = product(E, F)
    comps = []
    for c in range(C.n_obj):
        yc = yoneda(C, c)
        offs = _layout_offsets(yc, F)
        arr = np.empty(E.sizes[c], dtype=np.int64)
        for e0 in range(E.sizes[c]):
            vec = np.empty(int(offs[C.n_obj]), dtype=np.int64)
            for e in range(C.n_obj):
                fs = F.sizes[e]
                for j, hmor in enumerate(C.hom(e, c)):
                    ee = E.act(hmor, e0)
                    for x in range(fs):
                        vec[offs[e] + j * fs + x] = h(e, pdEF.pair_index(e, ee, x))
            bkey = vec.tobytes()
            if bkey not in exp_data.stage_lookup[c]:
                raise EngineError("curried element is not natural")
            arr[e0] = exp_data.stage_lookup[c][bkey]
        comps.append(arr)
    return NatTrans(E, exp_data.presheaf, comps)


def uncurry(k, exp_data):
    """Transpose E -> G^F to E x F -> G."""
    from .presheaf import compose_nats
    E = k.source
    F = exp_data.F
    pdEF = product(E, F)
    pdXF = product(exp_data.presheaf, F)
    kxid = product_map(pdEF, pdXF, k, identity_nat(F))
    return compose_nats(exp_data.ev(), kxid)


def exponential_restriction(X, u):
    """For u: A -> B, the restriction map X^B -> X^A given by
    precomposition; returns (exp_B, exp_A, res)."""
    A, B = u.source, u.target
    C = X.base
    expB = exponential(X, B)
    expA = exponential(X, A)
    comps = []
    for c in range(C.n_obj):
        yc = yoneda(C, c)
        offsA = _layout_offsets(yc, A)
        offsB = _layout_offsets(yc, B)
        remap = np.empty(int(offsA[C.n_obj]), dtype=np.int64)
        for e in range(C.n_obj):
            asz, bsz = A.sizes[e], B.sizes[e]
            for j in range(yc.sizes[e]):
                for x in range(asz):
                    remap[offsA[e] + j * asz + x] = \
                        offsB[e] + j * bsz + u(e, x)
        arr = np.empty(expB.presheaf.sizes[c], dtype=np.int64)
        if arr.size:
            moved = expB.stage_vectors[c][:, remap] if remap.size else \
                np.empty((arr.size, 0), dtype=np.int64)
            look = expA.stage_lookup[c]
            for t in range(arr.size):
                bkey = moved[t].tobytes()
                if bkey not in look:
                    raise EngineError("restriction left the exponential")
                arr[t] = look[bkey]
        comps.append(arr)
    res = NatTrans(expB.presheaf, expA.presheaf, comps)
    return expB, expA, res


# ---------------------------------------------------------------------------
# subobject classifier

class OmegaData:
    """Subobject classifier: stage c lists every sieve on c as a sorted
    tuple of morphism indices, ordered by (size, tuple)."""

    __slots__ = ("presheaf", "sieves", "index", "top", "bottom")

    def __init__(self, presheaf, sieves, index, top, bottom):
        self.presheaf = presheaf
        self.sieves = sieves
        self.index = index
        self.top = top
        self.bottom = bottom


def _principal_sieve(C, f):
    """All precompositions f∘g of f (a sieve since sieves are
    precomposition-closed sets)."""
    d = int(C.mor_src[f])
    return frozenset(int(C.comp[f, g]) for g in C.into(d))


def omega(C):
    """All sieves per object by breadth-first union closure: every sieve is
    a union of principal sieves of its members, so closing {∅} under
    "union one more principal sieve" reaches all of them."""
    if "omega" in C.cache:
        return C.cache["omega"]
    sieves = []
    index = []
    top = []
    bottom = []
    for c in range(C.n_obj):
        principals = [_principal_sieve(C, f) for f in C.into(c)]
        seen = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for s in frontier:
                for p in principals:
                    u = s | p
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        ordered = sorted((tuple(sorted(s)) for s in seen),
                         key=lambda t: (len(t), t))
        sieves.append(tuple(ordered))
        index.append({s: i for i, s in enumerate(ordered)})
        full = tuple(sorted(C.into(c)))
        top.append(index[c][full])
        bottom.append(index[c][()])
    sizes = [len(s) for s in sieves]
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for i, s in enumerate(sieves[d]):
            sset = set(s)
            pulled = tuple(sorted(h for h in C.into(c)
                                  if int(C.comp[m, h]) in sset))
            a[i] = index[c][pulled]
        action.append(a)
    labels = [tuple("{%s}" % ",".join(str(m) for m in s) for s in sieves[c])
              for c in range(C.n_obj)]
    P = Presheaf(C, sizes, action, labels=labels)
    data = OmegaData(P, tuple(sieves), tuple(index),
                     tuple(top), tuple(bottom))
    C.cache["omega"] = data
    return data


def true_nat(C):
    om = omega(C)
    return NatTrans(terminal(C), om.presheaf,
                    [np.asarray([om.top[c]], dtype=np.int64)
                     for c in range(C.n_obj)])


def char(sub):
    """Characteristic map of a subobject: ambient -> Omega."""
    if not is_mono(sub.inclusion):
        raise StructureError("char needs a mono")
    B = sub.ambient
    C = B.base
    om = omega(C)
    comps = []
    for c in range(C.n_obj):
        arr = np.empty(B.sizes[c], dtype=np.int64)
        for b in range(B.sizes[c]):
            s = tuple(sorted(
                f for f in C.into(c)
                if int(B.action[f][b]) in sub.stage_sets[int(C.mor_src[f])]))
            arr[b] = om.index[c][s]
        comps.append(arr)
    return NatTrans(B, om.presheaf, comps)


def subobject_of(chi):
    """The subobject classified by chi: B -> Omega (preimage of the
    maximal sieve at each stage)."""
    B = chi.source
    C = B.base
    om = omega(C)
    sets = [[b for b in range(B.sizes[c]) if chi(c, b) == om.top[c]]
            for c in range(C.n_obj)]
    return subobject_from_stage_sets(B, sets, validate=False)


# ---------------------------------------------------------------------------
# category of elements and the slice equivalence

class ElementsData:
    """Category of elements of B: objects are (object, element) pairs in
    ascending order; a base morphism m: c -> d and element x' of B(d) give
    one morphism (c, B(m)(x')) -> (d, x')."""

    __slots__ = ("cat", "B", "pairs", "obj_index", "mor_pairs", "mor_index")

    def __init__(self, cat, B, pairs, obj_index, mor_pairs, mor_index):
        self.cat = cat
        self.B = B
        self.pairs = pairs
        self.obj_index = obj_index
        self.mor_pairs = mor_pairs
        self.mor_index = mor_index


def elements_category(B):
    key = ("elements",)
    if key in B.cache:
        return B.cache[key]
    C = B.base
    pairs = [(c, x) for c in range(C.n_obj) for x in range(B.sizes[c])]
    obj_index = {p: i for i, p in enumerate(pairs)}
    objects = ["%s.%s" % (C.objects[c], B.stage_labels(c)[x])
               for (c, x) in pairs]
    mor_pairs = []
    for m in range(C.n_mor):
        d = int(C.mor_tgt[m])
        for x in range(B.sizes[d]):
            mor_pairs.append((m, x))
    mor_index = {p: i for i, p in enumerate(mor_pairs)}
    morphisms = []
    for (m, x) in mor_pairs:
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        src = obj_index[(c, int(B.action[m][x]))]
        tgt = obj_index[(d, x)]
        morphisms.append(("%s@%d" % (C.mor_label[m], x), src, tgt))
    identity = [mor_index[(int(C.identity[c]), x)] for (c, x) in pairs]
    n_mor = len(mor_pairs)
    comp = -np.ones((n_mor, n_mor), dtype=np.int64)
    for gi, (g, xg) in enumerate(mor_pairs):
        for fi, (f, xf) in enumerate(mor_pairs):
            # (g, xg): (c', B(g)xg) -> (e', xg);  (f, xf): (c, B(f)xf) -> (d, xf)
            # composable iff tgt(f,xf) == src(g,xg)
            if (int(B.base.mor_tgt[f]) == int(B.base.mor_src[g])
                    and xf == int(B.action[g][xg])):
                comp[gi, fi] = mor_index[(B.base.compose(g, f), xg)]
    cat = FiniteCategory(objects, morphisms, identity, comp)
    data = ElementsData(cat, B, tuple(pairs), obj_index,
                        tuple(mor_pairs), mor_index)
    B.cache[key] = data
    return data


class SlicePresheaf:
    """A presheaf over the elements category of B, remembering how its
    stages sit inside the original total presheaf (for transport)."""

    __slots__ = ("presheaf", "eldata", "elems", "pos")

    def __init__(self, presheaf, eldata, elems, pos):
        self.presheaf = presheaf
        self.eldata = eldata
        self.elems = elems
        self.pos = pos


def to_elements(p):
    """Send an object p: E -> B of the slice over B to a presheaf over the
    elements category of B: the stage at (c, x) is the fibre of p over x."""
    E, B = p.source, p.target
    eldata = elements_category(B)
    C = B.base
    elems = []
    pos = []
    for (c, x) in eldata.pairs:
        fib = [e for e in range(E.sizes[c]) if p(c, e) == x]
        elems.append(tuple(fib))
        pos.append({e: i for i, e in enumerate(fib)})
    sizes = [len(f) for f in elems]
    action = []
    for (m, x) in eldata.mor_pairs:
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        src_obj = eldata.obj_index[(c, int(B.action[m][x]))]
        tgt_obj = eldata.obj_index[(d, x)]
        a = np.empty(sizes[tgt_obj], dtype=np.int64)
        for i, e in enumerate(elems[tgt_obj]):
            a[i] = pos[src_obj][E.act(m, e)]
        action.append(a)
    labels = []
    for i, (c, x) in enumerate(eldata.pairs):
        stage = E.stage_labels(c)
        labels.append(tuple(stage[e] for e in elems[i]))
    P = Presheaf(eldata.cat, sizes, action, labels=labels)
    return SlicePresheaf(P, eldata, tuple(elems), tuple(pos))


def to_elements_map(sp, sq, u):
    """Transport a map u: E -> E' over B (p' ∘ u = p) to a map between the
    corresponding presheaves over the elements category."""
    comps = []
    for i, fib in enumerate(sp.elems):
        c, x = sp.eldata.pairs[i]
        arr = np.empty(len(fib), dtype=np.int64)
        for j, e in enumerate(fib):
            arr[j] = sq.pos[i][u(c, e)]
        comps.append(arr)
    return NatTrans(sp.presheaf, sq.presheaf, comps)


def from_elements(X, eldata):
    """Inverse direction: reassemble a presheaf over elements(B) into a
    total presheaf with its projection to B.  Stage at c concatenates the
    fibres X(c, x) for x ascending.  Returns (E, proj, offsets)."""
    B = eldata.B
    C = B.base
    offsets = []
    sizes = []
    for c in range(C.n_obj):
        offs = []
        tot = 0
        for x in range(B.sizes[c]):
            offs.append(tot)
            tot += X.sizes[eldata.obj_index[(c, x)]]
        offsets.append(tuple(offs))
        sizes.append(tot)
    action = []
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[d], dtype=np.int64)
        for x in range(B.sizes[d]):
            i_tgt = eldata.obj_index[(d, x)]
            xm = int(B.action[m][x])
            em = eldata.mor_index[(m, x)]
            for xi in range(X.sizes[i_tgt]):
                a[offsets[d][x] + xi] = offsets[c][xm] + X.act(em, xi)
        action.append(a)
    labels = []
    for c in range(C.n_obj):
        lab = []
        for x in range(B.sizes[c]):
            i_obj = eldata.obj_index[(c, x)]
            lab.extend("%s|%s" % (B.stage_labels(c)[x], s)
                       for s in X.stage_labels(i_obj))
        labels.append(tuple(lab))
    E = Presheaf(C, sizes, action, labels=labels)
    proj_comps = []
    for c in range(C.n_obj):
        arr = np.empty(sizes[c], dtype=np.int64)
        for x in range(B.sizes[c]):
            i_obj = eldata.obj_index[(c, x)]
            arr[offsets[c][x]:offsets[c][x] + X.sizes[i_obj]] = x
        proj_comps.append(arr)
    proj = NatTrans(E, B, proj_comps)
    return E, proj, offsets


def pullback_to_elements(X, eldata):
    """Pull a presheaf on the base category back to the elements category
    of B: the stage at (c, b) is X(c), with the action of (m, b') acting
    as X(m).  This is the inverse-image of X along elements(B) -> base."""
    B = eldata.B
    C = B.base
    sizes = [X.sizes[c] for (c, _b) in eldata.pairs]
    action = [np.array(X.action[m]) for (m, _x) in eldata.mor_pairs]
    labels = [X.stage_labels(c) for (c, _b) in eldata.pairs]
    return Presheaf(eldata.cat, sizes, action, labels=labels)


def from_elements_map(X, Y, t, eldata, offX, offY):
    """Transport t: X -> Y over elements(B) back to a map over the base
    between the reassembled totals (commuting with the projections)."""
    B = eldata.B
    C = B.base
    EX_sizes = [offX[c][-1] + X.sizes[eldata.obj_index[(c, B.sizes[c] - 1)]]
                if B.sizes[c] else 0 for c in range(C.n_obj)]
    comps = []
    for c in range(C.n_obj):
        arr = np.empty(EX_sizes[c], dtype=np.int64)
        for x in range(B.sizes[c]):
            i_obj = eldata.obj_index[(c, x)]
            for xi in range(X.sizes[i_obj]):
                arr[offX[c][x] + xi] = offY[c][x] + t(i_obj, xi)
        comps.append(arr)
    return comps
