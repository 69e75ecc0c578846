"""Check reports, witnesses, canonical JSON serialization, and error classes.

Every checker in the package returns a CheckReport: a named pass/fail/skip
verdict.  A "fail" always carries a witness (element coordinates that can be
replayed), a "skip" always carries a reason.  Reports serialize to a stable
JSON shape so repeated runs are byte-identical.
"""

import json
import time

PASS = "pass"
FAIL = "fail"
SKIP = "skip"

REPORT_FORMAT_VERSION = 1


class ToposCheckError(Exception):
    """Base class for all package errors."""


class StructureError(ToposCheckError):
    """Malformed indices, table shapes, or non-poset relations.

    Distinct from law failures: a structure error means the data cannot even
    be interpreted as a candidate category/presheaf.
    """


class SchemaError(ToposCheckError):
    """A model file does not match the expected JSON schema."""


class DanglingRefError(ToposCheckError):
    """A model file references a name or index that does not exist."""


class LawError(ToposCheckError):
    """A loaded component violates its defining equations.

    Carries the offending CheckReport so the witness (e.g. the failing
    composition triple) is available programmatically.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PreconditionError(ToposCheckError):
    """An operation was invoked outside its stated precondition."""


class BudgetExceededError(ToposCheckError):
    """An enumeration exceeded the configured element/node budget."""


class EngineError(ToposCheckError):
    """An internal cross-check failed: two independent constructions of the
    same object disagree.  This always indicates a bug in the engine, never
    a property of the model."""


def jsonify(value):
    """Recursively convert a witness value into plain JSON-able data.

    numpy scalars/arrays become ints/lists, tuples become lists, dict keys
    become strings.  Deterministic: never reorders lists, and dicts are
    emitted with sorted keys by the serializer.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, float)):
        return value
    if hasattr(value, "item") and not hasattr(value, "__len__"):
        # numpy scalar
        return value.item()
    if isinstance(value, dict):
        return {str(k): jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)) or hasattr(value, "tolist"):
        if hasattr(value, "tolist"):
            value = value.tolist()
        return [jsonify(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [jsonify(v) for v in sorted(value)]
    return str(value)


class CheckReport:
    """Named verdict of a single check.

    Fields: name, status ("pass"/"fail"/"skip"), witness (dict or None),
    millis (float or None).  For skip the witness holds {"reason": ...};
    for pass it may hold informational details (e.g. the sample used).
    """

    __slots__ = ("name", "status", "witness", "millis")

    def __init__(self, name, status, witness=None, millis=None):
        if status not in (PASS, FAIL, SKIP):
            raise ValueError("bad status %r" % (status,))
        if status == FAIL and witness is None:
            raise ValueError("fail report %r needs a witness" % (name,))
        if status == SKIP and (witness is None or "reason" not in witness):
            raise ValueError("skip report %r needs a reason" % (name,))
        self.name = name
        self.status = status
        self.witness = jsonify(witness) if witness is not None else None
        self.millis = millis

    @property
    def ok(self):
        return self.status != FAIL

    @property
    def reason(self):
        if self.status == SKIP:
            return self.witness["reason"]
        return None

    def to_dict(self, timings=False):
        return {
            "name": self.name,
            "status": self.status,
            "witness": self.witness,
            "millis": (self.millis if timings else None),
        }

    def __repr__(self):
        extra = ""
        if self.status == FAIL:
            extra = " witness=%r" % (self.witness,)
        elif self.status == SKIP:
            extra = " reason=%r" % (self.reason,)
        return "<CheckReport %s: %s%s>" % (self.name, self.status, extra)


def passed(name, info=None, millis=None):
    return CheckReport(name, PASS, witness=info, millis=millis)


def failed(name, witness, millis=None):
    return CheckReport(name, FAIL, witness=witness, millis=millis)


def skipped(name, reason, info=None, millis=None):
    w = dict(info) if info else {}
    w["reason"] = reason
    return CheckReport(name, SKIP, witness=w, millis=millis)


def timed(thunk):
    """Run a report-producing thunk, stamping wall-clock milliseconds on
    the result.  Timings are display-only: canonical JSON nulls them
    unless explicitly requested."""
    t0 = time.perf_counter()
    rep = thunk()
    rep.millis = round((time.perf_counter() - t0) * 1000.0, 3)
    return rep


def reports_to_json(reports, model_name=None, timings=False):
    """Canonical JSON for a list of reports: sorted by check name,
    stable key order, trailing newline.  Byte-identical across runs
    unless timings are requested."""
    body = {
        "format_version": REPORT_FORMAT_VERSION,
        "model": model_name,
        "checks": [r.to_dict(timings=timings) for r in
                   sorted(reports, key=lambda r: r.name)],
    }
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def summarize(reports):
    """(n_pass, n_fail, n_skip) triple."""
    n = {PASS: 0, FAIL: 0, SKIP: 0}
    for r in reports:
        n[r.status] += 1
    return n[PASS], n[FAIL], n[SKIP]
