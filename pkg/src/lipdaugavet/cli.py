"""Command-line front end.

Exit codes: 0 when the checked property holds (or a computation-only command
finished), 1 when it fails (the report carries the witness), 2 on input
errors, reported as a JSON object on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from fractions import Fraction
from pathlib import Path

from . import _num, lp
from . import io as jio
from . import sampling
from ._num import EXACT, FLOAT
from .daugavet import SAT, daugavet_check, extract_local_pair, hull_construction, slice_test
from .errors import DaugavetError, InvalidMetric
from .lipschitz import (adversarial_z_function, glue_flat, locality_profile, mcshane_envelopes,
                        nonlocality_witness)
from .metric import INFEASIBLE, validate_metric, z_deficiency

FLOAT_TOL = 1e-9

SWEEP_COLUMNS = ["seed", "index", "op_norm", "id_plus_norm", "defect"]
SUMMARY_COLUMNS = ["source", "kind", "count", "max_defect", "mean_defect", "worst_index",
                   "worst_pair", "nonincreasing"]


class InputError(DaugavetError):
    code = "BAD_ARGUMENT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(None, message)


# ------------------------------------------------------------------ helpers

def _space(args, obj=None, base=None):
    if getattr(args, "gen", None):
        spec = jio.parse_json_arg(args.gen)
        return jio.space_from_obj(spec, args.mode)
    if getattr(args, "space", None):
        return jio.space_from_obj(args.space, args.mode)
    if obj is not None and isinstance(obj, dict) and "space" in obj:
        return jio.space_from_obj(obj["space"], args.mode, base)
    raise InputError(None, "no space given: use --space FILE or --gen SPEC")


def _load(arg):
    """JSON object from a file path, ``@file`` or inline text, plus its directory."""
    if arg.startswith("@") or arg.lstrip().startswith(("{", "[")):
        return jio.parse_json_arg(arg), None
    return jio.read_json(arg), Path(arg).parent


def _num_arg(value, mode):
    if value is None:
        return None
    try:
        return _num.to_number(value, mode)
    except (ValueError, ZeroDivisionError):
        raise InputError(None, f"not a number: {value!r}") from None


def _enc(v, mode):
    if v is None:
        return None
    if v is INFEASIBLE:
        return "INFEASIBLE"
    return _num.encode(v, mode)


def _fmt_csv(v, mode):
    if isinstance(v, Fraction) or mode == EXACT:
        return str(_num.encode(v, EXACT))
    return repr(float(v))


def _write(args, report: dict) -> None:
    jio.write_text(args.out, jio.dumps(report))


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    K = _space(args)
    _write(args, K.to_dict())
    return 0


def cmd_validate(args):
    if args.gen:
        K = _space(args)
        _write(args, {"kind": "validate", "valid": True, "n": K.n, "mode": K.mode})
        return 0
    if not args.space:
        raise InputError(None, "validate needs --space FILE or --gen SPEC")
    obj, _ = _load(args.space)
    if isinstance(obj, dict) and "kind" in obj:
        K = jio.space_from_obj(obj, args.mode)
        _write(args, {"kind": "validate", "valid": True, "n": K.n, "mode": K.mode})
        return 0
    if not isinstance(obj, dict) or "dist" not in obj:
        raise InputError(None, "space file must contain 'dist' or a generator 'kind'")
    mode = args.mode or obj.get("mode", FLOAT)
    try:
        K = validate_metric(obj.get("labels"), obj["dist"], mode)
    except InvalidMetric as exc:
        _write(args, {"kind": "validate", "valid": False, "mode": mode,
                      "violations": [list(v) for v in exc.violations]})
        return 1
    _write(args, {"kind": "validate", "valid": True, "n": K.n, "mode": K.mode})
    return 0


def cmd_zcheck(args):
    K = _space(args)
    eps = _num_arg(args.eps, K.mode)
    if eps is None:
        raise InputError(None, "z-check needs --eps")
    rep = z_deficiency(K, args.variant)
    holds = rep.holds(eps)
    out = rep.to_dict()
    out.update({"eps": _enc(eps, K.mode), "holds": holds,
                "worst_labels": None if rep.worst_pair is None else [str(K.labels[i]) for i in rep.worst_pair]})
    _write(args, out)
    return 0 if holds else 1


def _function(args, attr="function"):
    obj, base = _load(getattr(args, attr))
    K = _space(args, obj, base)
    return jio.function_from_obj(obj, K)


def cmd_locality(args):
    f = _function(args)
    scale = _num_arg(args.scale, f.space.mode)
    if scale is None:
        raise InputError(None, "locality needs --scale")
    rep = locality_profile(f, scale, _num_arg(args.margin, f.space.mode))
    _write(args, rep.to_dict() | {"kind": "locality"})
    return 0 if rep.is_local else 1


def cmd_witness(args):
    K = _space(args)
    scale = _num_arg(args.scale, K.mode)
    if scale is None:
        raise InputError(None, "witness needs --scale")
    tol = _num_arg(args.eps or 0, K.mode)
    rep = nonlocality_witness(K, scale)
    _write(args, rep.to_dict() | {"kind": "witness", "threshold": _enc(tol, K.mode)})
    return 0 if rep.deficiency <= tol else 1


def cmd_mcshane(args):
    obj, base = _load(args.partial)
    K = _space(args, obj, base)
    P = jio.partial_from_obj(obj, K)
    up, lo = mcshane_envelopes(P)
    m = K.mode
    _write(args, {"kind": "mcshane", "mode": m, "L": _enc(P.L, m), "subset": P.subset,
                  "upper": _num.encode_array(up.values, m), "lower": _num.encode_array(lo.values, m)})
    return 0


def cmd_adversarial(args):
    K = _space(args)
    if args.t0 is None or args.tau0 is None or args.eps is None:
        raise InputError(None, "adversarial needs --t0, --tau0 and --eps")
    f = adversarial_z_function(K, K.index(args.t0), K.index(args.tau0), _num_arg(args.eps, K.mode))
    _write(args, {"kind": "adversarial", "mode": K.mode, "values": _num.encode_array(f.values, K.mode)})
    return 0


def cmd_glue(args):
    if args.setup:
        obj, base = _load(args.setup)
        K = _space(args, obj, base)
        setup = jio.glue_from_obj(obj, K)
    else:
        setup = sampling.random_glue_setup(sampling.stream(args.seed, 0), violate=args.violate)
    res = glue_flat(setup)
    m = setup.space.mode
    _write(args, {"kind": "glue", "mode": m, "verified": res.verified,
                  "worst_pair": None if res.worst_pair is None else list(res.worst_pair),
                  "worst_quotient": _enc(res.worst_quotient, m), "bound": _enc(res.bound, m),
                  "setup": jio.glue_to_obj(setup)})
    return 0 if res.verified else 1


def _operator(args, K):
    if args.operator:
        obj, _ = _load(args.operator)
        return jio.operator_from_obj(obj, K)
    return _sample_operator(K, args.family, args.seed, 0, args.anchor_step)


def _sample_operator(K, family, seed, index, anchor_step):
    rng = sampling.stream(seed, index)
    if family == "anchors":
        anchors = sampling.lattice_indices(K, anchor_step)
        if len(anchors) < 2:
            raise InputError(None, f"fewer than two lattice points at step {anchor_step}")
        return sampling.rank1_on_anchors(K, anchors, rng)
    if family == "interpolated":
        return sampling.rank1_interpolated(K, rng)
    if family == "matrix":
        return sampling.random_matrix_operator(K, rng)
    raise InputError(None, f"unknown operator family {family!r}")


def cmd_daugavet(args):
    K = _space(args)
    T = _operator(args, K)
    rep = daugavet_check(T)
    out = rep.to_dict()
    out["operator"] = T.to_dict()
    _write(args, out)
    tol = 0 if K.mode == EXACT else 1e-9
    return 0 if rep.defect <= tol else 1


def cmd_slice(args):
    if args.function:
        y = _function(args)
        K = y.space
    else:
        K = _space(args)
        y = sampling.normalized_anchor_function(K, range(K.n), sampling.stream(args.seed, 0))
    if args.functional:
        obj, _ = _load(args.functional)
        xs = jio.functional_from_obj(obj, K)
    else:
        xs = sampling.random_functional(K, sampling.stream(args.seed, 1))
    if args.eps is None:
        raise InputError(None, "slice needs --eps")
    res = slice_test(y, xs, _num_arg(args.eps, K.mode))
    _write(args, res.to_dict())
    return 0 if res.status == SAT else 1


def cmd_hull(args):
    f = _function(args, "f")
    obj, base = _load(args.g)
    g = jio.function_from_obj(obj, f.space)
    if args.eps is None or args.n is None:
        raise InputError(None, "hull needs --eps and --n")
    centers = None if not args.centers else [f.space.index(_label_or_int(c)) for c in args.centers.split(";")]
    m = f.space.mode
    res = hull_construction(f, g, _num_arg(args.eps, m), args.n, _num_arg(args.radius, m),
                            _num_arg(args.pair_radius, m), centers)
    _write(args, res.to_dict())
    return 0 if res.passed else 1


def _label_or_int(text: str):
    text = text.strip()
    return int(text) if text.lstrip("-").isdigit() else text


def cmd_localpair(args):
    f = _function(args)
    if args.eps is None:
        raise InputError(None, "localpair needs --eps")
    K = f.space
    t1 = None if args.t1 is None else K.index(_label_or_int(args.t1))
    t2 = None if args.t2 is None else K.index(_label_or_int(args.t2))
    res = extract_local_pair(f, _num_arg(args.eps, K.mode), t1, t2)
    _write(args, res.to_dict())
    return 0 if res.success and res.holds else 1


def sweep_rows(K, family: str, seed: int, count: int, anchor_step="1/4") -> list[dict]:
    rows = []
    for i in range(count):
        rep = daugavet_check(_sample_operator(K, family, seed, i, anchor_step))
        rows.append({"seed": seed, "index": i, "op_norm": rep.op_norm,
                     "id_plus_norm": rep.id_plus_norm, "defect": rep.defect, "pair": rep.pair})
    return rows


def sweep_csv(rows, mode: str) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([r["seed"], r["index"]] + [_fmt_csv(r[c], mode) for c in SWEEP_COLUMNS[2:]])
    return buf.getvalue()


def cmd_sweep(args):
    K = _space(args)
    count = 100 if args.n is None else args.n
    rows = sweep_rows(K, args.family, args.seed, count, args.anchor_step)
    if args.out and args.out.endswith(".csv"):
        jio.write_text(args.out, sweep_csv(rows, K.mode))
    else:
        m = K.mode
        _write(args, {"kind": "sweep", "mode": m, "seed": args.seed, "family": args.family,
                      "rows": [{"seed": r["seed"], "index": r["index"], "op_norm": _enc(r["op_norm"], m),
                                "id_plus_norm": _enc(r["id_plus_norm"], m), "defect": _enc(r["defect"], m),
                                "pair": list(r["pair"])} for r in rows]})
    return 0


# ---------------------------------------------------------------- summarize

def _read_report(path: str) -> tuple[str, list[dict]]:
    """(kind, rows) with rows carrying defect/index/pair as numbers."""
    if path.endswith(".csv"):
        try:
            with open(path, encoding="utf-8") as fh:
                rows = list(csv.DictReader(fh))
        except FileNotFoundError:
            raise DaugavetError("FILE_NOT_FOUND", f"no such file: {path}", path=path) from None
        if rows and set(SWEEP_COLUMNS) - set(rows[0]):
            raise InputError(None, f"{path}: not a sweep CSV")
        return "sweep", [{"defect": _parse_defect(r["defect"]), "index": int(r["index"]), "pair": None} for r in rows]
    obj = jio.read_json(path)
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind == "sweep":
        return "sweep", [{"defect": _parse_defect(r["defect"]), "index": r["index"], "pair": r.get("pair")}
                         for r in obj["rows"]]
    if kind == "daugavet":
        return "daugavet", [{"defect": _parse_defect(obj["defect"]), "index": 0, "pair": obj.get("pair")}]
    raise DaugavetError("UNSUPPORTED_REPORT", f"{path}: cannot summarise report kind {kind!r}", kind=kind)


def summarize(paths) -> str:
    reports = [(p, *_read_report(p)) for p in paths]
    kinds = sorted({k for _, k, _ in reports})
    if len(kinds) > 1:
        raise DaugavetError("MIXED_KINDS", f"reports of different kinds: {kinds}", kinds=kinds)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    prev = None
    for path, kind, rows in reports:
        if rows:
            defects = [r["defect"] for r in rows]
            k = max(range(len(rows)), key=lambda i: (defects[i], -i))
            mx = defects[k]
            mean = sum(defects) / len(defects)
            pair = rows[k]["pair"]
            cells = [_fmt_defect(mx), _fmt_defect(mean), rows[k]["index"],
                     "" if pair is None else f"{pair[0]}-{pair[1]}"]
        else:
            mx = None
            cells = ["", "", "", ""]
        mono = "" if prev is None or mx is None else ("yes" if _not_above(mx, prev) else "no")
        w.writerow([path, kind, len(rows)] + cells + [mono])
        prev = mx if mx is not None else prev
    return buf.getvalue()


def _not_above(a, b) -> bool:
    """a <= b, exactly for rationals and within the float tolerance otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return float(a) <= float(b) + FLOAT_TOL


def _parse_defect(v):
    """Rational strings stay exact; decimal text and JSON numbers are floats."""
    if isinstance(v, str) and not any(ch in v for ch in ".eEn"):
        return Fraction(v)
    return float(v)


def _fmt_defect(x) -> str:
    return _fmt_csv(x, EXACT if isinstance(x, Fraction) else FLOAT)


def cmd_summarize(args):
    jio.write_text(args.out, summarize(args.reports))
    return 0


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--space", help="space JSON file")
    src.add_argument("--gen", help="generator spec as JSON (or @file)")
    common.add_argument("--mode", choices=[EXACT, FLOAT], help="arithmetic mode (overrides the input)")
    common.add_argument("--eps")
    common.add_argument("--scale")
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--lp-dump", help="append every LP solved to this text file")

    p = _Parser(prog="lipdaugavet", description="Lipschitz spaces, locality and the Daugavet equation.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("gen", cmd_gen, "generate a space")
    add("validate", cmd_validate, "check the metric axioms")
    sp = add("z-check", cmd_zcheck, "property (Z) levels of every pair")
    sp.add_argument("--variant", choices=["Z", "Z'"], default="Z")
    sp = add("locality", cmd_locality, "best close-pair quotient of a function")
    sp.add_argument("--function", required=True)
    sp.add_argument("--margin")
    add("witness", cmd_witness, "search for a function that is non-local at a scale")
    sp = add("mcshane", cmd_mcshane, "McShane envelopes of a partial function")
    sp.add_argument("--partial", required=True)
    sp = add("adversarial", cmd_adversarial, "peaked function for a pair")
    sp.add_argument("--t0")
    sp.add_argument("--tau0")
    sp = add("glue", cmd_glue, "flat gluing check")
    sp.add_argument("--setup")
    sp.add_argument("--violate", choices=sampling.GLUE_HYPOTHESES)
    for name, fn, help_ in (("daugavet", cmd_daugavet, "norms of T and Id+T"),
                            ("sweep", cmd_sweep, "defects of seeded rank-1 operators")):
        sp = add(name, fn, help_)
        sp.add_argument("--family", choices=["anchors", "interpolated", "matrix"], default="anchors")
        sp.add_argument("--anchor-step", default="1/4")
        if name == "daugavet":
            sp.add_argument("--operator", help="operator JSON file, @file or inline JSON")
    sp = add("slice", cmd_slice, "slice form of the Daugavet property")
    sp.add_argument("--function")
    sp.add_argument("--functional")
    sp = add("hull", cmd_hull, "convex-combination construction near g")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--radius")
    sp.add_argument("--pair-radius")
    sp.add_argument("--centers", help="semicolon-separated point indices or labels")
    sp = add("localpair", cmd_localpair, "extract a close pair from a norm-attaining function")
    sp.add_argument("--function", required=True)
    sp.add_argument("--t1")
    sp.add_argument("--t2")
    sp = sub.add_parser("summarize", help="aggregate reports into CSV")
    sp.add_argument("reports", nargs="*")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_summarize, lp_dump=None)
    return p


def main(argv=None) -> int:
    dump = None
    try:
        args = build_parser().parse_args(argv)
        if args.lp_dump:
            dump = open(args.lp_dump, "a", encoding="utf-8")
            lp.set_dump(dump)
        return args.func(args)
    except DaugavetError as exc:
        print(jio.dumps(exc.to_dict()), end="")
        return 2
    except (ValueError, ZeroDivisionError) as exc:
        print(jio.dumps({"error": "BAD_ARGUMENT", "message": str(exc)}), end="")
        return 2
    finally:
        if dump is not None:
            lp.set_dump(None)
            dump.close()


if __name__ == "__main__":
    sys.exit(main())
