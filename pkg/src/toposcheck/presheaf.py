"""Finite presheaves, natural transformations, and their enumeration.

A Presheaf stores one finite set per object of a FiniteCategory and one
action table per morphism, contravariantly: a base morphism m: c -> d acts
by F.action[m]: F(d) -> F(c).  Natural transformations store one component
array per object.  Enumeration of all transformations delegates to the
flat-array backend and is memoized by structural digests.
"""

import hashlib

import numpy as np

from . import backend
from .report import (StructureError, passed, failed)


class Presheaf:
    """Immutable finite presheaf over a FiniteCategory.

    sizes:  per-object set size (elements are 0..size-1).
    action: per-morphism int array; for m: c -> d it has length sizes[d]
            and values below sizes[c].
    labels: optional per-object list of display strings for elements.
    """

    __slots__ = ("base", "sizes", "action", "labels", "_key", "cache")

    def __init__(self, base, sizes, action, labels=None):
        self.base = base
        self.cache = {}
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) != base.n_obj:
            raise StructureError("got %d stage sizes for %d objects"
                                 % (len(self.sizes), base.n_obj))
        if any(s < 0 for s in self.sizes):
            raise StructureError("negative stage size")
        if len(action) != base.n_mor:
            raise StructureError("got %d action tables for %d morphisms"
                                 % (len(action), base.n_mor))
        acts = []
        for m in range(base.n_mor):
            c, d = int(base.mor_src[m]), int(base.mor_tgt[m])
            a = np.asarray(action[m], dtype=np.int64)
            if a.shape != (self.sizes[d],):
                raise StructureError(
                    "action of morphism %d has length %d, expected |F(%s)| = %d"
                    % (m, a.shape[0] if a.ndim == 1 else -1,
                       base.objects[d], self.sizes[d]))
            if a.size and (a.min() < 0 or a.max() >= self.sizes[c]):
                raise StructureError(
                    "action of morphism %d maps outside F(%s)"
                    % (m, base.objects[c]))
            a.setflags(write=False)
            acts.append(a)
        self.action = tuple(acts)
        if labels is not None:
            labels = tuple(tuple(str(x) for x in stage) for stage in labels)
            for c in range(base.n_obj):
                if len(labels[c]) != self.sizes[c]:
                    raise StructureError("labels at object %d do not match size"
                                         % c)
        self.labels = labels
        self._key = None

    def size(self, c):
        return self.sizes[c]

    def total(self):
        return sum(self.sizes)

    def act(self, m, x):
        """Apply the (contravariant) action of morphism m to element x of
        the stage at m's target object."""
        return int(self.action[m][x])

    def stage_labels(self, c):
        if self.labels is not None:
            return list(self.labels[c])
        return [str(x) for x in range(self.sizes[c])]

    def key(self):
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(self.base.key())
            h.update(np.asarray(self.sizes, dtype=np.int64).tobytes())
            for a in self.action:
                h.update(a.tobytes())
            self._key = h.digest()
        return self._key

    def __repr__(self):
        return "<Presheaf sizes=%r>" % (list(self.sizes),)


class NatTrans:
    """Natural transformation between presheaves over the same base."""

    __slots__ = ("source", "target", "components", "_key")

    def __init__(self, source, target, components, check_shape=True):
        if source.base is not target.base:
            raise StructureError("source and target live over different bases")
        self.source = source
        self.target = target
        comps = []
        for c in range(source.base.n_obj):
            a = np.asarray(components[c], dtype=np.int64)
            if check_shape:
                if a.shape != (source.sizes[c],):
                    raise StructureError(
                        "component at object %d has length %d, expected %d"
                        % (c, a.shape[0] if a.ndim == 1 else -1,
                           source.sizes[c]))
                if a.size and (a.min() < 0 or a.max() >= target.sizes[c]):
                    raise StructureError(
                        "component at object %d maps outside the target stage"
                        % c)
            a.setflags(write=False)
            comps.append(a)
        self.components = tuple(comps)
        self._key = None

    def __call__(self, c, x):
        return int(self.components[c][x])

    def key(self):
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(self.source.key())
            h.update(self.target.key())
            for a in self.components:
                h.update(a.tobytes())
            self._key = h.digest()
        return self._key

    def vector(self):
        """Concatenated assignment vector (objects ascending)."""
        if not self.components:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([np.asarray(c) for c in self.components])

    def __eq__(self, other):
        if not isinstance(other, NatTrans):
            return NotImplemented
        return (self.source.key() == other.source.key()
                and self.target.key() == other.target.key()
                and all(np.array_equal(a, b) for a, b in
                        zip(self.components, other.components)))

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "<NatTrans %r -> %r>" % (list(self.source.sizes),
                                        list(self.target.sizes))


def validate_presheaf(F, name="presheaf/laws"):
    """Identity and functoriality laws; witness names the failing morphism
    pair and element."""
    C = F.base
    for c in range(C.n_obj):
        i = int(C.identity[c])
        a = F.action[i]
        for x in range(F.sizes[c]):
            if a[x] != x:
                return failed(name, {
                    "law": "identity action", "object": C.objects[c],
                    "element": x, "got": int(a[x])})
    for f in range(C.n_mor):
        tf = int(C.mor_tgt[f])
        for g in C.outof(tf):
            gf = C.compose(g, f)
            # action of g∘f must equal action[f] ∘ action[g]
            tg = int(C.mor_tgt[g])
            for x in range(F.sizes[tg]):
                lhs = F.act(gf, x)
                rhs = F.act(f, F.act(g, x))
                if lhs != rhs:
                    return failed(name, {
                        "law": "functoriality", "g": g, "f": f,
                        "element": x, "action(g∘f)": lhs,
                        "action(f)∘action(g)": rhs})
    return passed(name, {"total_elements": F.total()})


def validate_nat(t, name="nat/laws"):
    """Naturality squares; witness names the failing morphism and element."""
    F, G = t.source, t.target
    C = F.base
    for m in range(C.n_mor):
        c, d = int(C.mor_src[m]), int(C.mor_tgt[m])
        for x in range(F.sizes[d]):
            lhs = t(c, F.act(m, x))
            rhs = G.act(m, t(d, x))
            if lhs != rhs:
                return failed(name, {
                    "law": "naturality", "morphism": C.mor_label[m],
                    "morphism_index": m, "element": x,
                    "τ∘F(m)": lhs, "G(m)∘τ": rhs})
    return passed(name)


def identity_nat(F):
    return NatTrans(F, F, [np.arange(F.sizes[c], dtype=np.int64)
                           for c in range(F.base.n_obj)])


def compose_nats(t2, t1):
    """t2 ∘ t1 (apply t1 first)."""
    if t1.target.key() != t2.source.key():
        raise StructureError("composition endpoints do not match")
    comps = []
    for c in range(t1.source.base.n_obj):
        a1, a2 = t1.components[c], t2.components[c]
        comps.append(a2[a1] if a1.size else
                     np.empty(0, dtype=np.int64))
    return NatTrans(t1.source, t2.target, comps)


def is_mono(t):
    """Componentwise injective (valid criterion in presheaf categories)."""
    return all(len(set(t.components[c].tolist())) == t.source.sizes[c]
               for c in range(t.source.base.n_obj))


def is_epi(t):
    """Componentwise surjective."""
    return all(len(set(t.components[c].tolist())) == t.target.sizes[c]
               for c in range(t.source.base.n_obj))


def is_iso(t):
    return (all(t.source.sizes[c] == t.target.sizes[c]
                for c in range(t.source.base.n_obj))
            and is_mono(t))


def inverse_nat(t):
    if not is_iso(t):
        raise StructureError("not an isomorphism")
    comps = []
    for c in range(t.source.base.n_obj):
        inv = np.empty(t.source.sizes[c], dtype=np.int64)
        for x in range(t.source.sizes[c]):
            inv[t(c, x)] = x
        comps.append(inv)
    return NatTrans(t.target, t.source, comps)


def yoneda(C, c):
    """Representable presheaf y(c): stage at d is hom(d, c); a base
    morphism m: d -> e acts by precomposition hom(e, c) -> hom(d, c).
    Element j of the stage at d is C.hom(d, c)[j].  Cached per category
    so repeated calls share one object."""
    ckey = ("yoneda", c)
    if ckey in C.cache:
        return C.cache[ckey]
    sizes = [len(C.hom(d, c)) for d in range(C.n_obj)]
    action = []
    pos = {d: {h: j for j, h in enumerate(C.hom(d, c))}
           for d in range(C.n_obj)}
    for m in range(C.n_mor):
        d, e = int(C.mor_src[m]), int(C.mor_tgt[m])
        a = np.empty(sizes[e], dtype=np.int64)
        for j, h in enumerate(C.hom(e, c)):
            a[j] = pos[d][C.compose(h, m)]
        action.append(a)
    labels = [tuple(C.mor_label[h] for h in C.hom(d, c))
              for d in range(C.n_obj)]
    P = Presheaf(C, sizes, action, labels=labels)
    C.cache[ckey] = P
    return P


def nat_from_vector(F, G, vec):
    """Rebuild a NatTrans from a concatenated assignment vector."""
    comps = []
    off = 0
    for c in range(F.base.n_obj):
        s = F.sizes[c]
        comps.append(np.array(vec[off:off + s], dtype=np.int64))
        off += s
    return NatTrans(F, G, comps)


_NAT_MEMO = {}


def clear_memo():
    _NAT_MEMO.clear()


def enumerate_nats(F, G, pre_assign=None, max_nodes=None):
    """Complete duplicate-free list of natural transformations F -> G in
    ascending lexicographic order of the concatenated component vector.

    pre_assign pins chosen components: a per-object list of arrays with -1
    for free entries.  Results are memoized by structural digest; the two
    kernels produce identical lists, so the memo is backend-agnostic.
    """
    if pre_assign is None:
        memo_key = (F.key(), G.key())
    else:
        h = hashlib.blake2b(digest_size=16)
        for c in range(F.base.n_obj):
            arr = pre_assign[c]
            h.update(b"#" if arr is None else
                     np.asarray(arr, dtype=np.int64).tobytes())
        memo_key = (F.key(), G.key(), h.digest())
    # The memo holds raw solution vectors, never NatTrans objects: keys
    # are structural digests, so a hit may come from a structurally equal
    # presheaf over a *different* category instance, and the components
    # must be rebound to the caller's presheaves.
    vectors = _NAT_MEMO.get(memo_key)
    if vectors is None:
        problem = backend.build_problem(F, G, pre_assign=pre_assign)
        vectors = backend.solve(problem, max_nodes=max_nodes)
        _NAT_MEMO[memo_key] = vectors
    return tuple(nat_from_vector(F, G, v) for v in vectors)


def count_nats(F, G):
    return len(enumerate_nats(F, G))


def find_iso(F, G):
    """Search for an isomorphism F -> G; None when none exists."""
    if F.sizes != G.sizes:
        return None
    for t in enumerate_nats(F, G):
        if is_iso(t):
            return t
    return None


def hom_table(nats):
    """Index natural transformations by assignment-vector bytes; used to
    locate a computed transformation inside an enumeration."""
    return {t.vector().tobytes(): i for i, t in enumerate(nats)}


def _dot_escape(s):
    return str(s).replace("\\", "\\\\").replace('"', '\\"')


def to_dot(P, name="presheaf"):
    """GraphViz source for the element graph: one node per element,
    stage-qualified, and one edge per non-identity morphism action,
    pointing from an element to its restriction.  Output is deterministic
    (stages, elements, and morphisms in index order)."""
    C = P.base
    lines = ['digraph "%s" {' % _dot_escape(name), "  rankdir=LR;"]
    for c in range(C.n_obj):
        labels = P.stage_labels(c)
        for x in range(P.sizes[c]):
            lines.append('  n_%d_%d [label="%s @ %s"];' % (
                c, x, _dot_escape(labels[x]), _dot_escape(C.objects[c])))
    identities = {int(i) for i in C.identity}
    for m in range(C.n_mor):
        if m in identities:
            continue
        src, tgt = int(C.mor_src[m]), int(C.mor_tgt[m])
        for x in range(P.sizes[tgt]):
            lines.append('  n_%d_%d -> n_%d_%d [label="%s"];' % (
                tgt, x, src, int(P.action[m][x]),
                _dot_escape(C.mor_label[m])))
    lines.append("}")
    return "\n".join(lines) + "\n"
