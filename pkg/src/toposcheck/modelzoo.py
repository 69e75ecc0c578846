"""Built-in models, the on-disk model format, and loaders.

A model bundles a finite base category, a dictionary of named presheaves,
an interval structure on one of them, and a list of sample-object names the
check suites run over.  Built-in constructors cover classical sets, finite
chains, and truncated simplicial sets; `save_model`/`load_model` round-trip
any model through a versioned JSON format with full validation on load.

Sample names starting with "@" are tokens resolved against the interval
structure when the samples are materialized (e.g. "@horn" builds the inner
horn), so model files stay small and constructed objects are never
serialized.  Exponentials and all other derived objects live in the honest
presheaf topos over the model's base category; for truncated simplicial
sets they may differ from their untruncated counterparts above the
truncation boundary.
"""

import json
import re

import numpy as np

from .report import SchemaError, DanglingRefError, LawError
from . import fincat
from .fincat import FiniteCategory, truncated_simplex_category, \
    truncated_simplex_maps, validate_category
from .presheaf import Presheaf, NatTrans, yoneda, validate_presheaf, \
    validate_nat
from . import topos_ops as ops
from .interval import IntervalStructure, check_semilattice
from . import shapes

FORMAT_VERSION = 1

_SIMPLE_TOKENS = ("@initial", "@terminal", "@interval", "@simplex2", "@horn")
_REPR_PREFIX = "@representable:"


class ModelDescription:
    """Immutable bundle: base category, named presheaves, interval, sample.

    `presheaves` maps names to Presheaf objects over `category`;
    `interval.presheaf` is always `presheaves[carrier_name]`.
    `sample_names` lists presheaf names and/or "@" tokens; `samples()`
    materializes them in order as (display_name, Presheaf) pairs.
    """

    __slots__ = ("name", "category", "presheaves", "interval",
                 "carrier_name", "sample_names")

    def __init__(self, name, category, presheaves, interval, carrier_name,
                 sample_names):
        self.name = str(name)
        self.category = category
        self.presheaves = dict(presheaves)
        self.interval = interval
        self.carrier_name = str(carrier_name)
        self.sample_names = tuple(str(s) for s in sample_names)
        if self.carrier_name not in self.presheaves:
            raise DanglingRefError("interval carrier %r is not a named "
                                   "presheaf" % self.carrier_name)

    def resolve_sample(self, name):
        """The presheaf a sample name denotes (token or dictionary key)."""
        if not name.startswith("@"):
            try:
                return self.presheaves[name]
            except KeyError:
                raise DanglingRefError("sample %r is not a named presheaf"
                                       % name) from None
        C = self.category
        if name == "@initial":
            return ops.initial(C)
        if name == "@terminal":
            return ops.terminal(C)
        if name == "@interval":
            return self.interval.presheaf
        if name == "@simplex2":
            return shapes.simplex(self.interval, 2).domain
        if name == "@horn":
            return shapes.horn(self.interval).presheaf
        if name.startswith(_REPR_PREFIX):
            label = name[len(_REPR_PREFIX):]
            try:
                c = C.objects.index(label)
            except ValueError:
                raise DanglingRefError(
                    "sample token %r names no object of the base category "
                    "(objects: %s)" % (name, ", ".join(C.objects))) from None
            return yoneda(C, c)
        raise DanglingRefError("unknown sample token %r" % name)

    def samples(self):
        """[(display_name, presheaf)] for the sample list, in order."""
        return [(n.lstrip("@"), self.resolve_sample(n))
                for n in self.sample_names]

    def data(self):
        """JSON-able dictionary capturing the model exactly (schema v1)."""
        C = self.category
        cat = {
            "objects": list(C.objects),
            "morphisms": [[C.mor_label[m], int(C.mor_src[m]),
                           int(C.mor_tgt[m])] for m in range(C.n_mor)],
            "identity": [int(i) for i in C.identity],
            "comp": [[int(x) for x in row] for row in C.comp],
        }
        sheaves = {}
        for pname, P in sorted(self.presheaves.items()):
            entry = {"sizes": list(P.sizes),
                     "action": [[int(x) for x in a] for a in P.action]}
            if P.labels is not None:
                entry["labels"] = [list(stage) for stage in P.labels]
            sheaves[pname] = entry
        istr = self.interval
        itv = {
            "carrier": self.carrier_name,
            "zero": [int(istr.zero.components[c][0])
                     for c in range(C.n_obj)],
            "one": [int(istr.one.components[c][0])
                    for c in range(C.n_obj)],
            "meet": [[int(x) for x in istr.meet.components[c]]
                     for c in range(C.n_obj)],
            "join": (None if istr.join is None else
                     [[int(x) for x in istr.join.components[c]]
                      for c in range(C.n_obj)]),
        }
        return {
            "format_version": FORMAT_VERSION,
            "name": self.name,
            "category": cat,
            "presheaves": sheaves,
            "interval": itv,
            "sample": list(self.sample_names),
        }


def models_equal(a, b):
    """Data-level equality (labels included); used for round-trip checks."""
    return a.data() == b.data()


# ---------------------------------------------------------------------------
# built-in models


def _point_nat(I, idx_per_obj):
    """Global point 1 -> I hitting the given element index at each stage."""
    term = ops.terminal(I.base)
    comps = [np.array([idx_per_obj[c]], dtype=np.int64)
             for c in range(I.base.n_obj)]
    return NatTrans(term, I, comps)


def _binary_op_nat(I, tables):
    """Binary operation I x I -> I from per-stage flat tables.

    tables[c] has length |I(c)|^2, indexed by a * |I(c)| + b — the canonical
    product pairing order.
    """
    prod = ops.product(I, I)
    comps = [np.asarray(tables[c], dtype=np.int64)
             for c in range(I.base.n_obj)]
    return NatTrans(prod.presheaf, I, comps)


def _sample_sets(T, max_size=4):
    """Constant presheaves of size 0..max_size over the terminal category."""
    out = {}
    for k in range(max_size + 1):
        out["s%d" % k] = Presheaf(
            T, [k], [np.arange(k, dtype=np.int64)],
            labels=[tuple(str(j) for j in range(k))])
    return out


def model_set_chain(k):
    """Classical sets with the (k+1)-element chain 0 < 1 < ... < k as
    interval: base is the terminal category, meet/join are min/max, the
    endpoints are 0 and k.  Sample objects are the sets of size 0..4."""
    if k < 1:
        raise fincat.PreconditionError(
            "model_set_chain needs k >= 1, got %r" % k)
    T = fincat.terminal_category()
    n = k + 1
    I = Presheaf(T, [n], [np.arange(n, dtype=np.int64)],
                 labels=[tuple(str(j) for j in range(n))])
    zero = _point_nat(I, [0])
    one = _point_nat(I, [k])
    meet = _binary_op_nat(
        I, [[min(a, b) for a in range(n) for b in range(n)]])
    join = _binary_op_nat(
        I, [[max(a, b) for a in range(n) for b in range(n)]])
    istr = IntervalStructure(I, zero, one, meet, join, name="I")
    presheaves = {"interval": I}
    presheaves.update(_sample_sets(T))
    return ModelDescription(
        "chain%d" % k, T, presheaves, istr, "interval",
        ("s0", "s1", "s2", "s3", "s4"))


def model_set():
    """Classical two-valued sets: the k=1 chain, under its standard name."""
    m = model_set_chain(1)
    return ModelDescription("set", m.category, m.presheaves, m.interval,
                            m.carrier_name, m.sample_names)


def model_truncated_sset(n):
    """Truncated simplicial sets: presheaves over the full subcategory of
    ordinals [0], ..., [n], with the representable at [1] as interval.

    Stage [k] of the interval is the monotone maps [k] -> [1]; meet and
    join are pointwise min and max of value vectors, the endpoints are the
    constant maps.  Sample objects: empty, terminal, the interval, the
    2-simplex, the inner horn, and all representables.
    """
    if n not in (2, 3):
        raise fincat.PreconditionError(
            "model_truncated_sset needs n in {2, 3}, got %r" % n)
    S = truncated_simplex_category(n)
    maps = truncated_simplex_maps(n)
    I = yoneda(S, 1)
    zero_idx, one_idx, meets, joins = [], [], [], []
    for ko in range(S.n_obj):
        homs = S.hom(ko, 1)
        vals = [maps[m][2] for m in homs]
        pos = {v: j for j, v in enumerate(vals)}
        zero_idx.append(pos[(0,) * (ko + 1)])
        one_idx.append(pos[(1,) * (ko + 1)])
        sz = len(vals)
        meets.append([pos[tuple(map(min, va, vb))]
                      for va in vals for vb in vals])
        joins.append([pos[tuple(map(max, va, vb))]
                      for va in vals for vb in vals])
    zero = _point_nat(I, zero_idx)
    one = _point_nat(I, one_idx)
    meet = _binary_op_nat(I, meets)
    join = _binary_op_nat(I, joins)
    istr = IntervalStructure(I, zero, one, meet, join, name="I")
    sample = ["@initial", "@terminal", "@interval", "@simplex2", "@horn"]
    sample += [_REPR_PREFIX + S.objects[c] for c in range(S.n_obj)]
    return ModelDescription("sset%d" % n, S, {"interval": I}, istr,
                            "interval", sample)


_BUILTINS = {
    "set": model_set,
    "sset2": lambda: model_truncated_sset(2),
    "sset3": lambda: model_truncated_sset(3),
}

# The default zoo: the trivial model, the three-element chain (the standard
# negative control: conservativity and the Phoa conditions fail there, with
# witnesses), and the two truncated simplicial models.  Larger chains are
# available by name but stay out of the default zoo — already at four
# interval elements the dimension-2 Phoa boundary exponential exceeds the
# default enumeration budget.
DEFAULT_ZOO = ("set", "chain2", "sset2", "sset3")


def builtin_model(name):
    """Look a built-in model up by name ("set", "chainK", "sset2", "sset3").

    Returns None when the name matches no built-in (the CLI then treats the
    argument as a file path).
    """
    if name in _BUILTINS:
        return _BUILTINS[name]()
    m = re.fullmatch(r"chain(\d+)", name)
    if m:
        return model_set_chain(int(m.group(1)))
    return None


# ---------------------------------------------------------------------------
# serialization


def save_model(model, path):
    """Write the model's schema-v1 JSON to `path` (deterministic bytes)."""
    with open(path, "w") as fh:
        json.dump(model.data(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Read and fully validate a model file.

    Raises SchemaError for malformed JSON or wrong shapes/types,
    DanglingRefError for names that resolve to nothing, and LawError
    (carrying the failing CheckReport) when a component is well-formed but
    violates its defining equations.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("%s is not valid JSON: %s" % (path, exc)) \
                from None
    return model_from_data(doc)


def _need(doc, key, types, where):
    if key not in doc:
        raise SchemaError("%s is missing the %r field" % (where, key))
    v = doc[key]
    if not isinstance(v, types):
        raise SchemaError("%s.%s has type %s, expected %s"
                          % (where, key, type(v).__name__,
                             "/".join(t.__name__ for t in types)))
    return v


def _int_list(v, where):
    if not isinstance(v, list) or not all(isinstance(x, int) for x in v):
        raise SchemaError("%s must be a list of integers" % where)
    return v


def model_from_data(doc):
    """Build a ModelDescription from a schema-v1 dictionary (see
    load_model for the error contract)."""
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object, got %s"
                          % type(doc).__name__)
    version = _need(doc, "format_version", (int,), "model")
    if version != FORMAT_VERSION:
        raise SchemaError("unsupported format_version %r (supported: %d)"
                          % (version, FORMAT_VERSION))
    name = _need(doc, "name", (str,), "model")

    # --- category: shape checks here, law checks after construction
    cat = _need(doc, "category", (dict,), "model")
    objects = _need(cat, "objects", (list,), "category")
    if not objects or not all(isinstance(o, str) for o in objects):
        raise SchemaError("category.objects must be a nonempty list of "
                          "strings")
    raw_mors = _need(cat, "morphisms", (list,), "category")
    morphisms = []
    for i, mor in enumerate(raw_mors):
        if (not isinstance(mor, list) or len(mor) != 3
                or not isinstance(mor[0], str)
                or not all(isinstance(x, int) for x in mor[1:])):
            raise SchemaError("category.morphisms[%d] must be "
                              "[label, src, tgt]" % i)
        morphisms.append((mor[0], mor[1], mor[2]))
    identity = _int_list(_need(cat, "identity", (list,), "category"),
                         "category.identity")
    comp = _need(cat, "comp", (list,), "category")
    for g, row in enumerate(comp):
        _int_list(row, "category.comp[%d]" % g)
    try:
        C = FiniteCategory(objects, morphisms, identity, comp)
    except fincat.StructureError as exc:
        raise SchemaError("category tables are malformed: %s" % exc) \
            from None
    rep = validate_category(C)
    if not rep.ok:
        raise LawError("category laws fail: %r" % rep, rep)

    # --- presheaves
    sheaves_doc = _need(doc, "presheaves", (dict,), "model")
    presheaves = {}
    for pname in sorted(sheaves_doc):
        entry = sheaves_doc[pname]
        if not isinstance(entry, dict):
            raise SchemaError("presheaves.%s must be an object" % pname)
        where = "presheaves.%s" % pname
        sizes = _int_list(_need(entry, "sizes", (list,), where),
                          where + ".sizes")
        action = _need(entry, "action", (list,), where)
        for m, a in enumerate(action):
            _int_list(a, "%s.action[%d]" % (where, m))
        labels = entry.get("labels")
        if labels is not None:
            if (not isinstance(labels, list) or len(labels) != len(sizes)
                    or not all(isinstance(st, list) for st in labels)):
                raise SchemaError("%s.labels must be one list of strings "
                                  "per object" % where)
        try:
            P = Presheaf(C, sizes, action, labels=labels)
        except fincat.StructureError as exc:
            raise SchemaError("%s is malformed: %s" % (where, exc)) \
                from None
        prep = validate_presheaf(P, name="presheaf/%s" % pname)
        if not prep.ok:
            raise LawError("presheaf %r violates functoriality: %r"
                           % (pname, prep), prep)
        presheaves[pname] = P

    # --- interval
    itv = _need(doc, "interval", (dict,), "model")
    carrier = _need(itv, "carrier", (str,), "interval")
    if carrier not in presheaves:
        raise DanglingRefError("interval.carrier %r is not a named presheaf"
                               % carrier)
    I = presheaves[carrier]
    zero_t = _int_list(_need(itv, "zero", (list,), "interval"),
                       "interval.zero")
    one_t = _int_list(_need(itv, "one", (list,), "interval"), "interval.one")
    for tname, tab in (("zero", zero_t), ("one", one_t)):
        if len(tab) != C.n_obj:
            raise SchemaError("interval.%s needs one entry per object"
                              % tname)
    meet_t = _need(itv, "meet", (list,), "interval")
    join_t = itv.get("join")
    for tname, tab in (("meet", meet_t), ("join", join_t)):
        if tab is None:
            continue
        if not isinstance(tab, list) or len(tab) != C.n_obj:
            raise SchemaError("interval.%s needs one table per object"
                              % tname)
        for c, row in enumerate(tab):
            _int_list(row, "interval.%s[%d]" % (tname, c))
    try:
        zero = _point_nat(I, zero_t)
        one = _point_nat(I, one_t)
        meet = _binary_op_nat(I, meet_t)
        join = None if join_t is None else _binary_op_nat(I, join_t)
    except fincat.StructureError as exc:
        raise SchemaError("interval tables are malformed: %s" % exc) \
            from None
    for tname, t in (("zero", zero), ("one", one), ("meet", meet),
                     ("join", join)):
        if t is None:
            continue
        nrep = validate_nat(t, name="interval/%s-natural" % tname)
        if not nrep.ok:
            raise LawError("interval %s is not natural: %r"
                           % (tname, nrep), nrep)
    istr = IntervalStructure(I, zero, one, meet, join, name=carrier)
    srep = check_semilattice(istr)
    if not srep.ok:
        raise LawError("interval meet is not a bounded semilattice: "
                       "%r" % srep, srep)

    # --- sample names (resolution is checked, construction stays lazy)
    sample = _need(doc, "sample", (list,), "model")
    if not all(isinstance(s, str) for s in sample):
        raise SchemaError("sample must be a list of strings")
    model = ModelDescription(name, C, presheaves, istr, carrier, sample)
    for s in sample:
        if s.startswith("@"):
            if s in _SIMPLE_TOKENS:
                continue
            if s.startswith(_REPR_PREFIX):
                if s[len(_REPR_PREFIX):] not in C.objects:
                    raise DanglingRefError(
                        "sample token %r names no object of the base "
                        "category" % s)
                continue
            raise DanglingRefError("unknown sample token %r" % s)
        if s not in presheaves:
            raise DanglingRefError("sample %r is not a named presheaf" % s)
    return model
