"""Finite categories with total composition tables.

A FiniteCategory stores its objects and morphisms as indexed lists and its
composition as a dense table, so every downstream enumeration is a table
lookup.  Object and morphism identity is by index; labels are display-only.
All iteration is in ascending index order, which makes every construction in
the package deterministic.
"""

import hashlib
import itertools

import numpy as np

from .report import (StructureError, PreconditionError,
                     passed, failed)

MAX_SIMPLEX_DIM = 4


class FiniteCategory:
    """Immutable finite category.

    objects:   list of display labels; the object index is the identity.
    morphisms: list of (label, src, tgt) triples.
    identity:  per-object morphism index.
    comp:      dense (n_mor, n_mor) int table; comp[g, f] = g∘f, -1 where
               the pair is not composable (tgt(f) != src(g)).
    """

    __slots__ = ("objects", "mor_label", "mor_src", "mor_tgt", "identity",
                 "comp", "_hom", "_into", "_outof", "_key", "cache")

    def __init__(self, objects, morphisms, identity, comp):
        self.objects = tuple(str(o) for o in objects)
        n_obj = len(self.objects)
        labels, srcs, tgts = [], [], []
        for k, (label, s, t) in enumerate(morphisms):
            if not (0 <= int(s) < n_obj and 0 <= int(t) < n_obj):
                raise StructureError(
                    "morphism %d (%r) has out-of-range endpoints (%r, %r)"
                    % (k, label, s, t))
            labels.append(str(label))
            srcs.append(int(s))
            tgts.append(int(t))
        self.mor_label = tuple(labels)
        self.mor_src = np.asarray(srcs, dtype=np.int64)
        self.mor_tgt = np.asarray(tgts, dtype=np.int64)
        n_mor = len(labels)

        identity = list(identity)
        if len(identity) != n_obj:
            raise StructureError("identity table has %d entries for %d objects"
                                 % (len(identity), n_obj))
        for o, m in enumerate(identity):
            if not 0 <= int(m) < n_mor:
                raise StructureError("identity[%d] = %r out of range" % (o, m))
            if self.mor_src[m] != o or self.mor_tgt[m] != o:
                raise StructureError(
                    "identity[%d] = morphism %d is not an endomorphism of "
                    "object %d" % (o, int(m), o))
        self.identity = np.asarray(identity, dtype=np.int64)

        comp = np.asarray(comp, dtype=np.int64)
        if comp.shape != (n_mor, n_mor):
            raise StructureError("composition table has shape %r, expected %r"
                                 % (comp.shape, (n_mor, n_mor)))
        for g in range(n_mor):
            for f in range(n_mor):
                gf = comp[g, f]
                composable = self.mor_tgt[f] == self.mor_src[g]
                if composable and not 0 <= gf < n_mor:
                    raise StructureError(
                        "compose(%d, %d) undefined though tgt=src" % (g, f))
                if not composable and gf != -1:
                    raise StructureError(
                        "compose(%d, %d) defined though tgt(%d)=%d != src(%d)=%d"
                        % (g, f, f, int(self.mor_tgt[f]), g, int(self.mor_src[g])))
        self.comp = comp

        for arr in (self.mor_src, self.mor_tgt, self.identity, self.comp):
            arr.setflags(write=False)

        self._hom = {}
        self._into = {}
        self._outof = {}
        self._key = None
        # construction cache: lets terminal/yoneda/omega/elements return the
        # same object for the same category, which keeps base identity shared
        self.cache = {}

    @property
    def n_obj(self):
        return len(self.objects)

    @property
    def n_mor(self):
        return len(self.mor_label)

    def compose(self, g, f):
        """g∘f (apply f first).  Raises on non-composable pairs."""
        gf = self.comp[g, f]
        if gf < 0:
            raise StructureError("morphisms %d, %d are not composable" % (g, f))
        return int(gf)

    def hom(self, a, b):
        """Ascending tuple of morphism indices a -> b."""
        key = (a, b)
        if key not in self._hom:
            self._hom[key] = tuple(
                int(m) for m in range(self.n_mor)
                if self.mor_src[m] == a and self.mor_tgt[m] == b)
        return self._hom[key]

    def into(self, c):
        """Ascending tuple of all morphism indices with target c."""
        if c not in self._into:
            self._into[c] = tuple(int(m) for m in range(self.n_mor)
                                  if self.mor_tgt[m] == c)
        return self._into[c]

    def outof(self, c):
        """Ascending tuple of all morphism indices with source c."""
        if c not in self._outof:
            self._outof[c] = tuple(int(m) for m in range(self.n_mor)
                                   if self.mor_src[m] == c)
        return self._outof[c]

    def key(self):
        """Structural digest used for memoization."""
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(np.int64(self.n_obj).tobytes())
            h.update(self.mor_src.tobytes())
            h.update(self.mor_tgt.tobytes())
            h.update(self.identity.tobytes())
            h.update(self.comp.tobytes())
            h.update("\x00".join(self.objects).encode())
            h.update("\x00".join(self.mor_label).encode())
            self._key = h.digest()
        return self._key

    def __repr__(self):
        return "<FiniteCategory %d objects, %d morphisms>" % (
            self.n_obj, self.n_mor)


def validate_category(C):
    """Check the category laws; the witness names the offending pair/triple.

    Structural problems (bad indices, composition defined off the composable
    domain) raise StructureError at construction time; this function checks
    the equational laws on a structurally well-formed table.
    """
    # identity laws
    for f in range(C.n_mor):
        s, t = int(C.mor_src[f]), int(C.mor_tgt[f])
        if C.comp[f, C.identity[s]] != f:
            return failed("category/laws", {
                "law": "f∘id = f", "f": f, "object": s,
                "got": int(C.comp[f, C.identity[s]])})
        if C.comp[C.identity[t], f] != f:
            return failed("category/laws", {
                "law": "id∘f = f", "f": f, "object": t,
                "got": int(C.comp[C.identity[t], f])})
        # endpoints of composites
        for g in C.outof(t):
            gf = int(C.comp[g, f])
            if C.mor_src[gf] != s or C.mor_tgt[gf] != C.mor_tgt[g]:
                return failed("category/laws", {
                    "law": "src/tgt of composite", "g": g, "f": f,
                    "composite": gf})
    # associativity
    for f in range(C.n_mor):
        for g in C.outof(int(C.mor_tgt[f])):
            gf = int(C.comp[g, f])
            for h in C.outof(int(C.mor_tgt[g])):
                if C.comp[h, gf] != C.comp[int(C.comp[h, g]), f]:
                    return failed("category/laws", {
                        "law": "associativity", "h": h, "g": g, "f": f,
                        "h∘(g∘f)": int(C.comp[h, gf]),
                        "(h∘g)∘f": int(C.comp[int(C.comp[h, g]), f])})
    return passed("category/laws", {"objects": C.n_obj, "morphisms": C.n_mor})


def terminal_category():
    """One object, one (identity) morphism."""
    return FiniteCategory(["*"], [("id", 0, 0)], [0], [[0]])


def walking_arrow():
    """Two objects and a single non-identity arrow src -> tgt."""
    comp = -np.ones((3, 3), dtype=np.int64)
    # 0 = id_src, 1 = id_tgt, 2 = arrow
    comp[0, 0] = 0
    comp[1, 1] = 1
    comp[2, 0] = 2
    comp[1, 2] = 2
    return FiniteCategory(
        ["src", "tgt"], [("id_src", 0, 0), ("id_tgt", 1, 1), ("f", 0, 1)],
        [0, 1], comp)


def _monotone_maps(a, b):
    """All monotone maps [a] -> [b] as value tuples, ascending lex order."""
    out = []
    for vals in itertools.product(range(b + 1), repeat=a + 1):
        if all(vals[i] <= vals[i + 1] for i in range(a)):
            out.append(vals)
    return out


def truncated_simplex_category(n):
    """Full subcategory of finite nonempty ordinals on [0], ..., [n].

    Morphisms are all monotone maps, composition is function composition.
    """
    if not 0 <= n <= MAX_SIMPLEX_DIM:
        raise PreconditionError(
            "truncated_simplex_category needs 0 <= n <= %d, got %r"
            % (MAX_SIMPLEX_DIM, n))
    objects = ["[%d]" % k for k in range(n + 1)]
    morphisms = []
    index = {}
    for a in range(n + 1):
        for b in range(n + 1):
            for vals in _monotone_maps(a, b):
                index[(a, b, vals)] = len(morphisms)
                label = "[%d]->[%d]%s" % (a, b, "".join(str(v) for v in vals))
                morphisms.append((label, a, b, vals))
    identity = [index[(a, a, tuple(range(a + 1)))] for a in range(n + 1)]
    n_mor = len(morphisms)
    comp = -np.ones((n_mor, n_mor), dtype=np.int64)
    for g, (_, gs, gt, gv) in enumerate(morphisms):
        for f, (_, fs, ft, fv) in enumerate(morphisms):
            if ft == gs:
                gf = tuple(gv[v] for v in fv)
                comp[g, f] = index[(fs, gt, gf)]
    return FiniteCategory(objects, [(l, s, t) for (l, s, t, _) in morphisms],
                          identity, comp)


def truncated_simplex_maps(n):
    """The (src, tgt, value-tuple) triple for each morphism index of
    truncated_simplex_category(n), in the same deterministic order."""
    out = []
    for a in range(n + 1):
        for b in range(n + 1):
            for vals in _monotone_maps(a, b):
                out.append((a, b, vals))
    return out


def poset_as_category(labels, leq):
    """Category of a finite poset: one morphism x -> y iff leq[x][y].

    `leq` is an (n, n) boolean table; it must be reflexive, antisymmetric
    and transitive, otherwise a StructureError names the failing pair.
    """
    n = len(labels)
    leq = np.asarray(leq, dtype=bool)
    if leq.shape != (n, n):
        raise StructureError("leq table shape %r does not match %d labels"
                             % (leq.shape, n))
    for x in range(n):
        if not leq[x, x]:
            raise StructureError("relation not reflexive at %d" % x)
    for x in range(n):
        for y in range(n):
            if x != y and leq[x, y] and leq[y, x]:
                raise StructureError(
                    "relation not antisymmetric at pair (%d, %d)" % (x, y))
            if leq[x, y]:
                for z in range(n):
                    if leq[y, z] and not leq[x, z]:
                        raise StructureError(
                            "relation not transitive at (%d, %d, %d)" % (x, y, z))
    morphisms = []
    index = {}
    for x in range(n):
        for y in range(n):
            if leq[x, y]:
                index[(x, y)] = len(morphisms)
                morphisms.append(("%s<=%s" % (labels[x], labels[y]), x, y))
    identity = [index[(x, x)] for x in range(n)]
    n_mor = len(morphisms)
    comp = -np.ones((n_mor, n_mor), dtype=np.int64)
    for g, (_, gs, gt) in enumerate(morphisms):
        for f, (_, fs, ft) in enumerate(morphisms):
            if ft == gs:
                comp[g, f] = index[(fs, gt)]
    return FiniteCategory(labels, morphisms, identity, comp)
