"""Command-line front end: reduce / verify / hemi / mobius / atlas.

Outputs are deterministic JSON lines (or a rendered table / CSV for the
atlas).  Exit codes: 0 ok, 2 parse error, 3 budget exhausted, 4 a
certification check came out negative.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .cgroup import (
    hemi_quotient_pipeline,
    reduce_and_report,
    ring_for,
    verify_string_cgroup,
)
from .coxeter import cartan_data, parse_symbol, reduce_generators, \
    reduce_matrix, reflection_generators
from .errors import BudgetExceeded, ParseError, PolymodError
from .groupkit import DEFAULT_BUDGET
from .mobius import build_mobius_polytope
from .ortho import (
    DISC_353,
    analyze_form,
    epsilon_353,
    order_formula,
)
from .rings import (
    QuadInt,
    is_prime,
    legendre_tau,
    parse_ideal,
    parse_quadint,
    primes_below,
    tau_associates,
    tau_classify_prime,
    tau_primes_over,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4


def _parse_modulus(diagram, text: str):
    text = text.strip()
    if diagram.domain == "Z":
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"crystallographic modulus must be an integer, "
                             f"got {text!r}") from None
    return parse_quadint(text)


def _emit(reports: list[dict], fmt: str, out):
    if fmt == "table":
        for rpt in reports:
            keys = ["group", "modulus", "ring", "order", "is_cgroup",
                    "schlafli", "f_vector", "self_dual", "kind", "facet"]
            cells = []
            for k in keys:
                v = rpt.get(k)
                if v in (None, [], ()):
                    continue
                cells.append(f"{k}={_fmt_cell(v)}")
            label = rpt.get("label")
            if label:
                cells.append(f"label={label['name']}")
            out.write("  ".join(cells) + "\n")
    else:
        for rpt in reports:
            out.write(json.dumps(rpt, sort_keys=True) + "\n")


def _fmt_cell(v):
    if isinstance(v, (list, tuple)):
        return "(" + ",".join(str(x) for x in v) + ")"
    return str(v)


def _report_exit(reports: list[dict]) -> int:
    code = EXIT_OK
    for rpt in reports:
        if rpt.get("budget", {}).get("exceeded"):
            code = max(code, EXIT_BUDGET)
        verdicts = [rpt.get("is_cgroup"),
                    rpt.get("notes", {}).get("intersection_ok")]
        if any(v is False for v in verdicts):
            code = max(code, EXIT_VERIFY)
    return code


def cmd_reduce(args) -> int:
    diagram = parse_symbol(args.group)
    reports = []
    for tok in args.mod.split(","):
        rpt = reduce_and_report(diagram, _parse_modulus(diagram, tok),
                                budget=args.budget,
                                want_enumeration=not args.no_enumerate)
        reports.append(rpt.to_json())
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        _emit(reports, args.format, out)
    finally:
        if args.out:
            out.close()
    if args.plot:
        from .plotting import fvector_figure
        fvector_figure(reports, args.plot)
    return _report_exit(reports)


def cmd_verify(args) -> int:
    args.no_enumerate = True
    return cmd_reduce(args)


def cmd_hemi(args) -> int:
    diagram = parse_symbol(args.group)
    rpt = hemi_quotient_pipeline(diagram, _parse_modulus(diagram, args.mod),
                                 budget=args.budget).to_json()
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        _emit([rpt], args.format, out)
    finally:
        if args.out:
            out.close()
    # a budget hit on the full closure is expected here; the image decides
    return EXIT_VERIFY if rpt.get("is_cgroup") is False else EXIT_OK


def cmd_mobius(args) -> int:
    J = parse_ideal(args.ideal)
    rpt = build_mobius_polytope(J, budget=args.budget).to_json()
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        _emit([rpt], args.format, out)
    finally:
        if args.out:
            out.close()
    return EXIT_VERIFY if rpt["notes"].get("intersection_ok") is False else EXIT_OK


# ---------------------------------------------------------------------------
# atlas


def _atlas_moduli(diagram, spec_text: str):
    """Expand "inert<N", "split<N", "all<N" or a comma list of moduli."""
    out = []
    for tok in spec_text.split(","):
        tok = tok.strip()
        kind = None
        for k in ("inert", "split", "all"):
            if tok.startswith(k + "<"):
                kind = k
                bound = int(tok[len(k) + 1:])
                break
        if kind is None:
            out.append(_parse_modulus(diagram, tok))
            continue
        if diagram.domain == "Z":
            out.extend(p for p in primes_below(bound) if p > 2)
            continue
        for p in primes_below(bound):
            if p == 2:
                continue
            if p % 5 in (2, 3) and kind in ("inert", "all"):
                out.append(QuadInt(p))
            elif p % 5 in (1, 4) and kind in ("split", "all"):
                pi, pic = tau_primes_over(p)
                out.extend([pi, pic])
            elif p == 5 and kind == "all":
                out.append(parse_quadint("sqrt5"))
    return out


def _atlas_row(diagram, modulus, certify: bool, budget: int) -> dict:
    from .coxeter import discriminant

    row = {"modulus": str(modulus), "class": None, "residue_order": None,
           "epsilon_closed": None, "epsilon_euler": None,
           "epsilon_match": None, "formula_order": None, "is_cgroup": None,
           "budget": None, "error": None}
    try:
        ring = ring_for(diagram, modulus)
        row["residue_order"] = ring.order
        if diagram.domain == "Ztau":
            cls = tau_classify_prime(modulus if isinstance(modulus, QuadInt)
                                     else QuadInt(modulus))
            row["class"] = cls.kind
        disc = discriminant(diagram)
        eps = None
        if ring.is_field and ring.char != 2:
            if diagram.domain == "Ztau":
                pi = modulus if isinstance(modulus, QuadInt) else QuadInt(modulus)
                if tau_associates(pi, disc):
                    row["error"] = ("DiscriminantPrime: singular form; "
                                    "use the hemi pipeline")
                    return row
                row["epsilon_euler"] = eps = legendre_tau(disc, pi)
                if tau_associates(disc, DISC_353):
                    row["epsilon_closed"] = epsilon_353(pi)
                    row["epsilon_match"] = (row["epsilon_closed"] == eps)
            else:
                fa = analyze_form(
                    reduce_matrix(cartan_data(diagram).B2, ring), ring)
                row["epsilon_euler"] = eps = fa.epsilon or None
        if eps in (1, -1) and diagram.n == 4 and diagram.domain == "Ztau":
            row["formula_order"] = order_formula("O1", 4, ring.order, eps)
        if certify:
            gens, collapsed = reduce_generators(
                reflection_generators(diagram), ring)
            if collapsed:
                row["is_cgroup"] = False
            else:
                ok, _ = verify_string_cgroup(gens, ring, cap=budget)
                row["is_cgroup"] = ok
        row["budget"] = "ok"
    except BudgetExceeded as e:
        row["budget"] = f"exceeded at {e.partial_count}"
    except PolymodError as e:
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def cmd_atlas(args) -> int:
    diagram = parse_symbol(args.group)
    moduli = _atlas_moduli(diagram, args.mods)
    rows = [_atlas_row(diagram, m, certify=not args.no_certify,
                       budget=args.budget) for m in moduli]
    rows.sort(key=lambda r: (r["residue_order"] or 0, r["modulus"]))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "csv":
            fields = ["modulus", "class", "residue_order", "epsilon_closed",
                      "epsilon_euler", "epsilon_match", "formula_order",
                      "is_cgroup", "budget", "error"]
            w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        else:
            for row in rows:
                out.write(json.dumps(row, sort_keys=True) + "\n")
    finally:
        if args.out:
            out.close()
    if args.plot:
        from .plotting import atlas_figure
        atlas_figure(rows, args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polymod",
        description="Modular reduction of string Coxeter groups and "
                    "certification of the resulting polytopes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, group=True):
        if group:
            p.add_argument("--group", required=True,
                           help='symbol, e.g. "[3,5,3]" or "[3,oo]"')
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="element budget for closures")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=["jsonl", "table"],
                       default="jsonl")

    p = sub.add_parser("reduce", help="reduce, certify and label")
    common(p)
    p.add_argument("--mod", required=True,
                   help='modulus or comma list, e.g. "2,sqrt5,-7+5*t"')
    p.add_argument("--no-enumerate", action="store_true",
                   help="skip the full closure (no order / f-vector)")
    p.add_argument("--plot", metavar="FILE",
                   help="render an f-vector figure to FILE")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("verify", help="C-group verdict only (no closure)")
    common(p)
    p.add_argument("--mod", required=True)
    p.add_argument("--plot", metavar="FILE", help=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_verify, no_enumerate=True, plot=None)

    p = sub.add_parser("hemi", help="singular-prime hemi quotient")
    common(p)
    p.add_argument("--mod", required=True,
                   help='discriminant prime, e.g. "-2-5*t"')
    p.set_defaults(fn=cmd_hemi)

    p = sub.add_parser("mobius", help="[4,4,3]+ over an ideal of Z[i]")
    common(p, group=False)
    p.add_argument("--ideal", required=True,
                   help='"full:m" or "principal:b,c"')
    p.set_defaults(fn=cmd_mobius)

    p = sub.add_parser("atlas", help="sweep moduli into a summary table")
    common(p)
    p.add_argument("--mods", required=True,
                   help='"inert<200", "split<200", "all<55" or a comma list')
    p.add_argument("--no-certify", action="store_true",
                   help="skip the per-row C-group verdict")
    p.add_argument("--plot", metavar="FILE",
                   help="render the epsilon/order sweep to FILE")
    p.set_defaults(fn=cmd_atlas)
    # atlas emits csv instead of table
    p.set_defaults(format="csv")
    for a in p._actions:
        if a.dest == "format":
            a.choices = ["csv", "jsonl"]
            a.default = "csv"
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except PolymodError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
