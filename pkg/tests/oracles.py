"""Independent oracles for the test suite.

Everything in this module is computed by brute force or closed formula,
without touching the engine's own machinery, so that engine outputs can be
checked against genuinely independent values.  Expected constants derived
here are frozen into the tests next to a pointer at the oracle that
produced them.
"""

import itertools
import math


# ---------------------------------------------------------------------------
# counting monotone maps between finite chains

def monotone_maps_brute(a, b):
    """All monotone maps [a] -> [b] (chains with a+1 and b+1 elements),
    enumerated by filtering all functions."""
    out = []
    for vals in itertools.product(range(b + 1), repeat=a + 1):
        if all(vals[i] <= vals[i + 1] for i in range(a)):
            out.append(vals)
    return out


def hom_count_chain(a, b):
    """|monotone maps [a] -> [b]| by the stars-and-bars closed formula:
    a weakly increasing (a+1)-tuple with values in {0..b} is a multiset,
    so the count is C(a+b+1, a+1)."""
    return math.comb(a + b + 1, a + 1)


# ---------------------------------------------------------------------------
# descending tuples (simplex stage sizes over chain fibres)

def descending_tuples(size, n):
    """All weakly descending n-tuples over a chain with `size` elements."""
    return [t for t in itertools.product(range(size), repeat=n)
            if all(t[i] >= t[i + 1] for i in range(n - 1))]


def descending_tuple_count(size, n):
    """Count of weakly descending n-tuples over a `size`-chain: multisets of
    size n from `size` values, C(size+n-1, n)."""
    return math.comb(size + n - 1, n)


# ---------------------------------------------------------------------------
# upsets / downsets of small posets (exponential stage sizes)

def upsets_brute(elems, leq):
    """All up-closed subsets of a finite poset, by filtering all subsets.
    `leq(x, y)` is the order.  Only usable for <= ~20 elements."""
    elems = list(elems)
    out = []
    for bits in itertools.product((0, 1), repeat=len(elems)):
        chosen = {e for e, b in zip(elems, bits) if b}
        if all((y in chosen) for x in chosen for y in elems if leq(x, y)):
            out.append(frozenset(chosen))
    return out


def grid_upset_count(p, q):
    """Upsets of the product order [p-1] x [q-1] (a p-by-q grid), counted two
    independent ways: brute force, and the lattice-path formula C(p+q, p).
    Monotone maps grid -> [1] correspond to upsets (the preimage of 1)."""
    elems = [(i, j) for i in range(p) for j in range(q)]
    brute = len(upsets_brute(
        elems, lambda x, y: x[0] <= y[0] and x[1] <= y[1]))
    formula = math.comb(p + q, p)
    assert brute == formula, (p, q, brute, formula)
    return brute


def chain_upset_count(p):
    """Upsets of a p-chain: p+1 (thresholds)."""
    return p + 1


# Stage sizes of the interval-exponential presheaves in the truncated
# simplicial models, derived without the engine:
#
#   A map y[k] x I -> I over a truncated simplex base is, because the nerve
#   of [1] is 2-coskeletal and truncation keeps dimension >= 2, the same
#   thing as a monotone map [k] x [1] -> [1], i.e. an upset of the
#   (k+1) x 2 grid.  Similarly maps y[k] x S2 -> I (S2 = descending pairs)
#   are monotone maps [k] x [2] -> [1], i.e. upsets of the (k+1) x 3 grid.

def interval_exp_interval_levels(n):
    """Expected stage sizes of (I^I) over the simplex base truncated at n."""
    return tuple(grid_upset_count(k + 1, 2) for k in range(n + 1))


def interval_exp_simplex2_levels(n):
    """Expected stage sizes of (I^{S2}) over the base truncated at n."""
    return tuple(grid_upset_count(k + 1, 3) for k in range(n + 1))


def simplex2_levels(n):
    """Stage sizes of the descending-pair subobject over the truncated
    simplex base: descending pairs in a (k+2)-chain."""
    return tuple(descending_tuple_count(k + 2, 2) for k in range(n + 1))


def horn_levels(n):
    """Stage sizes of the union {(i,j) descending | j = bottom or i = top}
    over the truncated simplex base: at level k the interval has s = k+2
    elements; pairs with j=0 (s of them) plus pairs with i=top (s) minus
    the shared (top, 0): 2s - 1."""
    return tuple(2 * (k + 2) - 1 for k in range(n + 1))


def lift_of_interval_levels(n):
    """Expected stage sizes of the partiality construction applied to the
    interval itself, over the truncated simplex base.

    An element over [k] is a pair (i, matching family on the support sieve
    of i).  A threshold element i with t >= 1 ones generates the sieve of
    maps landing in the top-t face, which is a representable on [t-1], so a
    matching family is exactly an element of the interval at stage [t-1]:
    a monotone map [t-1] -> [1], t+1 choices.  With t = 0 the sieve is
    empty and there is exactly one (empty) family.
    Total over [k]: 1 + sum_{t=1..k+1} (t+1).
    """
    out = []
    for k in range(n + 1):
        total = 1  # bottom threshold: empty sieve, one (empty) family
        for t in range(1, k + 2):
            total += chain_upset_count(t)  # monotone maps [t-1] -> [1]
        out.append(total)
    return tuple(out)


# ---------------------------------------------------------------------------
# sieve counts (subobject classifier stage sizes)

def subcomplex_count_simplex(k):
    """Sieves on [k] over a simplex base = subcomplexes of the k-simplex
    = downsets of the poset of nonempty subsets of {0..k}, counted by brute
    force over all subset families (independent of any sieve machinery)."""
    faces = []
    for r in range(1, k + 2):
        faces.extend(frozenset(c) for c in
                     itertools.combinations(range(k + 1), r))
    count = 0
    for bits in itertools.product((0, 1), repeat=len(faces)):
        chosen = [f for f, b in zip(faces, bits) if b]
        chosen_set = set(chosen)
        if all(frozenset(s) in chosen_set
               for f in chosen for r in range(1, len(f))
               for s in itertools.combinations(sorted(f), r)):
            count += 1
    return count


def omega_levels_simplex(n):
    """Stage sizes of the subobject classifier over the truncated simplex
    base.  Note truncation does not change these for k <= n because every
    face of the k-simplex already has dimension <= k."""
    return tuple(subcomplex_count_simplex(k) for k in range(n + 1))


def sieve_count_poset(leq, c):
    """Sieves on object c of a poset category = downsets of the principal
    downset of c; brute force."""
    below = [x for x in range(len(leq)) if leq[x][c]]
    count = 0
    for bits in itertools.product((0, 1), repeat=len(below)):
        chosen = {x for x, b in zip(below, bits) if b}
        if all((y in chosen) for x in chosen
               for y in below if leq[y][x]):
            count += 1
    return count


# ---------------------------------------------------------------------------
# natural transformations by brute force (tiny instances only)

def nat_transes_brute(sizes_F, sizes_G, actions_F, actions_G, morphisms):
    """All natural transformations F -> G over an arbitrary base, by
    filtering every family of component functions.

    sizes_F/sizes_G: per-object set sizes.
    actions_F/actions_G: per-morphism arrays mapping the target-object set
        to the source-object set (contravariant actions).
    morphisms: list of (mor_index, src_object, tgt_object).
    Only usable when prod |G(c)|^|F(c)| is tiny.
    """
    n_obj = len(sizes_F)
    component_choices = []
    for c in range(n_obj):
        component_choices.append(
            list(itertools.product(range(sizes_G[c]), repeat=sizes_F[c])))
    out = []
    for combo in itertools.product(*component_choices):
        ok = True
        for m, s, t in morphisms:
            aF, aG = actions_F[m], actions_G[m]
            for x in range(sizes_F[t]):
                if combo[s][aF[x]] != aG[combo[t][x]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(tuple(combo))
    return out


# ---------------------------------------------------------------------------
# connected components (colimit cross-check) via plain union-find

class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def n_classes(self):
        return sum(1 for x in range(len(self.parent))
                   if self.find(x) == x)


# ---------------------------------------------------------------------------
# partial-map counting (oracle for the partiality construction)

def count_partial_maps(nat_count_fn, supports, restrict_fn):
    """|PMap(Y, X)| = sum over support maps sigma: Y -> I of the number of
    maps from the sigma-restriction of Y into X.  The caller supplies the
    engine-independent pieces; see tests for usage."""
    total = 0
    for sigma in supports:
        total += nat_count_fn(restrict_fn(sigma))
    return total


# Frozen constants used across tests (each row names its derivation):
# - hom sizes in the truncated simplex category: hom_count_chain
# - I^I levels over truncation 3:            (3, 6, 10, 15)  grid upsets (k+1)x2
# - I^{S2} levels over truncation 3:         (4, 10, 20, 35) grid upsets (k+1)x3
# - descending-pair levels over truncation 3: (3, 6, 10, 15) multiset counts
# - horn levels over truncation 3:            (3, 5, 7, 9)   2s-1 rule
# - partiality-of-interval levels:            (3, 6, 10, 15) lift_of_interval_levels
# - sieve counts over truncation 3:           (2, 5, 19, 167) subcomplex brute force
EXPECTED_I_EXP_I_SSET3 = (3, 6, 10, 15)
EXPECTED_I_EXP_S2_SSET3 = (4, 10, 20, 35)
EXPECTED_S2_LEVELS_SSET3 = (3, 6, 10, 15)
EXPECTED_HORN_LEVELS_SSET3 = (3, 5, 7, 9)
EXPECTED_LIFT_I_LEVELS_SSET3 = (3, 6, 10, 15)
EXPECTED_OMEGA_LEVELS_SSET3 = (2, 5, 19, 167)
