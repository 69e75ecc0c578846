"""Command-line entry point: validate models, profile interval axioms,
run completeness checkers, emit constructions, export element graphs, and
run the theorem suite.

Exit codes: 0 = every requested check passed or skipped, 1 = some check
failed, 2 = input error (unreadable/invalid model, unknown object), 3 =
an enumeration budget was exceeded.  The `suite` exit code gates on the
theorem and invariant reports only — the axiom profile is informational
there, since a model failing an axiom is a legitimate negative control.

With --json, output is the canonical report document: checks sorted by
name, stable key order, byte-identical across runs (timings are nulled
unless --timings is given).
"""

import argparse
import json
import sys

from . import backend
from . import constructions as cons
from . import interval as iv
from . import locality as loc
from . import shapes
from .fincat import validate_category
from .modelzoo import ModelDescription, builtin_model, load_model
from .presheaf import (is_iso, is_mono, to_dot, validate_nat,
                       validate_presheaf)
from .report import (BudgetExceededError, DanglingRefError, LawError,
                     PreconditionError, SchemaError, failed, jsonify,
                     passed, reports_to_json, summarize, timed)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

CHECK_PROPERTIES = (
    "segal", "rezk", "based-segal", "sierpinski",
    "well-complete-segal", "well-complete-rezk",
    "well-complete-based-segal", "well-complete-sierpinski",
)

EXPORT_SHAPES = ("interval", "simplex", "horn", "equivalence",
                 "lift", "scone")


def _load(name_or_path):
    """A builtin model by name, else a validated model file."""
    model = builtin_model(name_or_path)
    if model is not None:
        return model
    return load_model(name_or_path)


def _resolve_model(args):
    """The model named positionally or via --model, with the sample list
    optionally narrowed by --sample."""
    if args.model is not None and args.model_path is not None \
            and args.model != args.model_path:
        raise SchemaError("both a positional model and --model were given; "
                          "pass one")
    name = args.model if args.model is not None else args.model_path
    if name is None:
        raise SchemaError("a model is required: pass a builtin name, a "
                          "file path, or --model PATH")
    model = _load(name)
    if args.sample:
        names = tuple(s.strip() for s in args.sample.split(",")
                      if s.strip())
        if not names:
            raise SchemaError("--sample needs at least one name")
        for s in names:
            model.resolve_sample(s)
        model = ModelDescription(model.name, model.category,
                                 model.presheaves, model.interval,
                                 model.carrier_name, names)
    return model


def _emit(args, reports, model_name):
    if args.json:
        sys.stdout.write(reports_to_json(reports, model_name=model_name,
                                         timings=args.timings))
        return
    for r in sorted(reports, key=lambda r: r.name):
        line = "%-52s %s" % (r.name, r.status.upper())
        if r.status == "fail":
            line += "  witness=%s" % json.dumps(jsonify(r.witness),
                                                sort_keys=True)
        elif r.status == "skip":
            line += "  (%s)" % r.reason
        if args.timings and r.millis is not None:
            line += "  [%.1f ms]" % r.millis
        print(line)
    n_pass, n_fail, n_skip = summarize(reports)
    print("summary: %d pass, %d fail, %d skip" % (n_pass, n_fail, n_skip))


def _exit_for(reports, gate=None):
    relevant = reports if gate is None else \
        [r for r in reports if r.name.startswith(gate)]
    return EXIT_FAIL if any(r.status == "fail" for r in relevant) \
        else EXIT_PASS


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args):
    try:
        model = _resolve_model(args)
    except LawError as exc:
        reports = [exc.report if exc.report is not None else
                   failed("validate/load", {"error": "LawError",
                                            "message": str(exc)})]
        _emit(args, reports, None)
        return EXIT_FAIL
    except (SchemaError, DanglingRefError) as exc:
        reports = [failed("validate/load", {"error": type(exc).__name__,
                                            "message": str(exc)})]
        _emit(args, reports, None)
        return EXIT_FAIL
    reports = [timed(lambda: validate_category(model.category))]
    for pname in sorted(model.presheaves):
        reports.append(timed(lambda pname=pname: validate_presheaf(
            model.presheaves[pname],
            name="validate/presheaf[%s]" % pname)))
    istr = model.interval
    structure = [("zero", istr.zero), ("one", istr.one),
                 ("meet", istr.meet)]
    if istr.join is not None:
        structure.append(("join", istr.join))
    for nname, t in structure:
        reports.append(timed(lambda nname=nname, t=t: validate_nat(
            t, name="validate/interval-%s" % nname)))
    _emit(args, reports, model.name)
    return _exit_for(reports)


def cmd_axioms(args):
    model = _resolve_model(args)
    reports = iv.axiom_reports(model.interval)
    _emit(args, reports, model.name)
    return _exit_for(reports)


_CHECKERS = {
    "segal": lambda istr, X, lbl, zs: loc.is_segal(istr, X, label=lbl),
    "rezk": lambda istr, X, lbl, zs: loc.is_rezk(istr, X, label=lbl),
    "based-segal": lambda istr, X, lbl, zs:
        loc.is_based_segal(istr, X, label=lbl),
    "sierpinski": lambda istr, X, lbl, zs:
        loc.is_sierpinski(istr, X, zs, label=lbl),
}


def _run_check(model, obj_name, prop):
    istr = model.interval
    X = model.resolve_sample(obj_name)
    label = obj_name.lstrip("@")
    zsample = model.samples()
    if prop in _CHECKERS:
        return _CHECKERS[prop](istr, X, label, zsample)
    kind = prop[len("well-complete-"):]
    return loc.is_well_complete(istr, X, kind, zsample=zsample,
                                label=label)


def _parse_witness(value):
    """Inline JSON (starts with '{') or a path to a JSON file."""
    text = value
    if not value.lstrip().startswith("{"):
        with open(value) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("witness is not valid JSON: %s" % exc) from None


def cmd_check(args):
    model = _resolve_model(args)
    rep = timed(lambda: _run_check(model, args.object, args.property))
    if args.witness is not None:
        expected = _parse_witness(args.witness)
        actual = json.loads(json.dumps(jsonify(rep.witness)))
        if rep.status == "fail" and actual == expected:
            rep = passed("replay/%s" % rep.name,
                         info={"reproduced": True})
        else:
            rep = failed("replay/%s" % rep.name,
                         {"expected": expected, "actual": actual,
                          "status": rep.status})
    _emit(args, [rep], model.name)
    return _exit_for([rep])


def _elements_payload(P):
    C = P.base
    return {
        "levels": [int(n) for n in P.sizes],
        "stages": [{"object": C.objects[c],
                    "elements": list(P.stage_labels(c))}
                   for c in range(C.n_obj)],
    }


def cmd_construct(args):
    model = _resolve_model(args)
    istr = model.interval
    X = model.resolve_sample(args.object)
    body = {"model": model.name, "construction": args.construction,
            "object": args.object}
    if args.construction == "lift":
        body["carrier"] = _elements_payload(cons.lift(istr, X).presheaf)
    elif args.construction == "scone":
        body["carrier"] = _elements_payload(cons.scone(istr, X).carrier)
    else:
        sigma = cons.comparison(istr, X)
        body["source"] = _elements_payload(sigma.source)
        body["target"] = _elements_payload(sigma.target)
        body["matrix"] = [[int(v) for v in comp]
                          for comp in sigma.components]
        body["mono"] = is_mono(sigma)
        body["iso"] = is_iso(sigma)
    sys.stdout.write(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return EXIT_PASS


def cmd_suite(args):
    model = _resolve_model(args)
    reports = loc.theorem_suite(model)
    _emit(args, reports, model.name)
    return _exit_for(reports, gate=("theorems/", "invariants/"))


def _export_presheaf(model, args):
    istr = model.interval
    if args.shape == "interval":
        return istr.presheaf, "interval"
    if args.shape == "simplex":
        return (shapes.simplex(istr, args.dim).domain,
                "simplex%d" % args.dim)
    if args.shape == "horn":
        return shapes.horn(istr).presheaf, "horn"
    if args.shape == "equivalence":
        return (shapes.walking_equivalence(istr).presheaf,
                "walking-equivalence")
    if args.object is None:
        raise PreconditionError("--object is required for shape %r"
                                % args.shape)
    X = model.resolve_sample(args.object)
    if args.shape == "lift":
        return cons.lift(istr, X).presheaf, "lift(%s)" % args.object
    return cons.scone(istr, X).carrier, "scone(%s)" % args.object


def cmd_export(args):
    model = _resolve_model(args)
    P, shape_name = _export_presheaf(model, args)
    title = "%s/%s" % (model.name, shape_name)
    if args.format == "dot":
        text = to_dot(P, name=title)
    else:
        text = json.dumps({"model": model.name, "shape": shape_name,
                           "table": _elements_payload(P)},
                          indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# argument parsing


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "model", nargs="?", default=None,
        help="builtin model name (set, chainK, sset2, sset3) or a path "
             "to a model JSON file")
    common.add_argument("--model", dest="model_path", metavar="PATH",
                        default=None,
                        help="model name or file path (alternative to the "
                             "positional argument)")
    common.add_argument("--sample", metavar="NAMES", default=None,
                        help="comma-separated sample names replacing the "
                             "model's default object sample")
    common.add_argument("--json", action="store_true",
                        help="emit the canonical JSON report document")
    common.add_argument("--timings", action="store_true",
                        help="include per-check wall-clock milliseconds")
    common.add_argument("--max-elements", type=int,
                        default=backend.DEFAULT_MAX_ELEMENTS, metavar="N",
                        help="element budget for constructed presheaves "
                             "(default %d)" % backend.DEFAULT_MAX_ELEMENTS)
    common.add_argument("--max-nat-enum", type=int,
                        default=backend.DEFAULT_MAX_NODES, metavar="N",
                        help="node budget per transformation enumeration "
                             "(default %d)" % backend.DEFAULT_MAX_NODES)
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="accepted for interface stability; checks "
                             "run serially and output order is canonical "
                             "either way")

    p = argparse.ArgumentParser(
        prog="toposcheck",
        description="Exhaustive checker for interval-based synthetic "
                    "structure in finite presheaf toposes.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", parents=[common],
                        help="validate a model's category, presheaves, "
                             "and interval structure")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("axioms", parents=[common],
                        help="run the interval axiom battery")
    sp.set_defaults(func=cmd_axioms)

    sp = sub.add_parser("check", parents=[common],
                        help="run one completeness checker on one object")
    sp.add_argument("--object", required=True,
                    help="a named presheaf or @token (@interval, "
                         "@terminal, @initial, @simplex2, @horn, "
                         "@representable:LABEL)")
    sp.add_argument("--property", required=True, choices=CHECK_PROPERTIES)
    sp.add_argument("--witness", metavar="JSON_OR_PATH",
                    help="replay: re-run the check and confirm it fails "
                         "with exactly this witness")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("construct", parents=[common],
                        help="emit element tables of a construction "
                             "as JSON")
    sp.add_argument("--object", required=True)
    sp.add_argument("--construction", required=True,
                    choices=("lift", "scone", "comparison"))
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("suite", parents=[common],
                        help="axiom profile, tracked implications, and "
                             "structural invariants")
    sp.set_defaults(func=cmd_suite)

    sp = sub.add_parser("export", parents=[common],
                        help="emit an element graph as DOT or JSON")
    sp.add_argument("--shape", required=True, choices=EXPORT_SHAPES)
    sp.add_argument("--dim", type=int, default=2,
                    help="simplex dimension (shape=simplex only)")
    sp.add_argument("--object",
                    help="subject for lift/scone shapes")
    sp.add_argument("--format", default="dot", choices=("dot", "json"))
    sp.add_argument("--out", metavar="PATH",
                    help="write to a file instead of stdout")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        with backend.budget(max_nodes=int(args.max_nat_enum),
                            max_elements=int(args.max_elements)):
            return args.func(args)
    except BudgetExceededError as exc:
        print("budget exceeded: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except (SchemaError, DanglingRefError, PreconditionError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except LawError as exc:
        print("invalid model: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print("cannot read model: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
