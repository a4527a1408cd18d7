"""collatzpoly command line.

Exit codes: 0 success, 1 domain error (even input, bad range, corrupt
checkpoint), 2 usage error, 3 a ``check`` identity does not hold.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import analysis, core, treegraph, verify
from .bitpoly import (
    BitPoly,
    DomainError,
    PolySyntaxError,
    degree,
    format_poly,
    from_decimal_string,
    parse_poly,
)

WORKERS_ENV = "COLLATZPOLY_WORKERS"
EXIT_DOMAIN, EXIT_USAGE, EXIT_CHECK_FAILED = 1, 2, 3


class UsageError(Exception):
    pass


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _big(text: str) -> BitPoly:
    """Decimal digits, or polynomial text when it mentions x."""
    return parse_poly(text) if "x" in text else from_decimal_string(text.strip())


# ---------------------------------------------------------------------------
# emitters
# ---------------------------------------------------------------------------

def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in fields})
    return buf.getvalue()


def _table_text(rows: list) -> list:
    if not rows:
        return []
    fields = list(rows[0])
    cells = [[_cell(r.get(f)) for f in fields] for r in rows]
    widths = [max(len(f), *(len(c[i]) for c in cells)) for i, f in enumerate(fields)]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fields, widths)).rstrip()]
    for c in cells:
        lines.append("  ".join(x.ljust(w) for x, w in zip(c, widths)).rstrip())
    return lines


def render_text(data) -> str:
    if isinstance(data, list):
        return "\n".join(_table_text(data)) + "\n"
    lines = []
    tables = []
    for k, v in _flatten_keep_tables(data).items():
        if isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            tables.append((k, v))
        elif isinstance(v, list):
            lines.append(f"{k}: {' '.join(_cell(x) for x in v)}")
        else:
            lines.append(f"{k}: {_cell(v)}")
    for k, v in tables:
        lines.append(f"{k}:")
        lines.extend("  " + ln for ln in _table_text(v))
    return "\n".join(lines) + "\n"


def _flatten_keep_tables(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten_keep_tables(v, key + "."))
        else:
            out[key] = v
    return out


def emit(data, fmt: str, csv_rows=None) -> str:
    if fmt == "json":
        return json.dumps(data) + "\n"
    if fmt == "text":
        return render_text(data)
    if fmt == "csv":
        if csv_rows is not None:
            return render_csv(csv_rows)
        return render_csv(data if isinstance(data, list) else [_flatten(data)])
    raise UsageError(f"format {fmt!r} is not available for this command")


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------

def _add_input(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--n", help="odd value in decimal")
    g.add_argument("--poly", help='binary polynomial, e.g. "x^4+x^3+x+1"')
    g.add_argument("--family", choices=core.FAMILY_KINDS, help="closed-form family")
    p.add_argument("--p", type=int, help="family parameter (p for F/G/Mersenne, k for U, index for H)")
    p.add_argument("--exps", default="", help="inner exponents for family F, comma separated")


def _family(args) -> core.FamilySpec:
    if args.p is None:
        raise UsageError("--family needs --p")
    try:
        inner = frozenset(int(x) for x in args.exps.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad --exps {args.exps!r}") from None
    return core.FamilySpec(args.family, args.p, inner)


def _input(args) -> BitPoly:
    if args.n is not None:
        return from_decimal_string(args.n.strip())
    if args.poly is not None:
        return parse_poly(args.poly)
    if args.family is not None:
        return _family(args).build()
    raise UsageError("one of --n, --poly, --family is required")


def _add_output(p: argparse.ArgumentParser, formats, default: str) -> None:
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", help="write the document here instead of stdout")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_step(args):
    value, q = core.collatz_step(_input(args))
    return {"value": str(value), "q": q}, None, 0


def cmd_traj(args):
    t = core.trajectory(_input(args), max_steps=args.max_steps, max_degree=args.max_degree)
    rows = [{"l": i + 1, **s.to_dict()} for i, s in enumerate(t.steps)]
    return t.to_dict(), rows, 0


def cmd_family(args):
    if args.family is None:
        raise UsageError("family needs --family")
    spec = _family(args)
    v = spec.build()
    return {
        "kind": spec.kind,
        "param": spec.param,
        "value": str(v),
        "poly": format_poly(v),
        "degree": degree(v) if v else None,
    }, None, 0


def cmd_check(args):
    which = args.which
    if which == "corollary1":
        n = _input(args)
        holds = core.check_corollary1(n, args.j)
        data = {"check": which, "n": str(n), "j": args.j, "holds": holds}
    elif which == "fixed-point":
        n = _input(args)
        holds = core.fixed_point_check(n)
        data = {"check": which, "n": str(n), "holds": holds}
    elif which == "mersenne-prefix":
        holds = core.mersenne_prefix_check(_need(args.p, "--p"))
        data = {"check": which, "p": args.p, "holds": holds}
    elif which == "g-relations":
        rel = core.g_relations_check(_need(args.p, "--p"))
        holds = rel.ok
        data = {"check": which, "p": rel.p, "r": rel.r, "holds": holds}
    else:
        holds = core.h_chain_check(_need(args.k, "--k"))
        data = {"check": which, "k": args.k, "holds": holds}
    return data, None, 0 if holds else EXIT_CHECK_FAILED


def _need(v, flag):
    if v is None:
        raise UsageError(f"this check needs {flag}")
    return v


def cmd_census(args):
    rep = analysis.census(_big(args.lo), _big(args.hi), workers=args.workers)
    d = rep.to_dict()
    rows = [{"class": c, **v} for c, v in d["classes"].items()]
    return d, rows, 0


def cmd_drift(args):
    rep = analysis.drift_report(core.trajectory(_input(args)), args.mersenne)
    d = rep.to_dict()
    rows = [{"l": l, "degree": dg, "bound": b} for l, (dg, b) in enumerate(zip(rep.degrees, rep.bounds))]
    return d, rows, 0


_TABLE_DEFAULT_MAX = {1: 10, 2: 32, 3: 32}


def cmd_table(args):
    top = _TABLE_DEFAULT_MAX[args.which] if args.max is None else args.max
    rows = {1: analysis.table1, 2: analysis.table2, 3: analysis.table3}[args.which](top)
    return rows, None, 0


def cmd_tree(args):
    g = treegraph.build_tree(args.max_degree, max_steps=args.max_steps)
    if args.format == "dot":
        return treegraph.to_dot(g, args.label, args.max_label_degree, args.elide), None, 0
    d = g.to_dict()
    if args.format == "text":
        inv = treegraph.graph_invariants(g)
        return {
            "max_degree": g.max_degree,
            "nodes": len(g.nodes),
            "edges": len(g.edges),
            "closed": g.closed,
            "single_sink": inv.single_sink,
            "out_degree_one": inv.out_degree_one,
            "acyclic_except_sink": inv.acyclic_except_sink,
            "starting_nodes": [str(n) for n in inv.starting_nodes],
        }, None, 0
    return d, d["edges"], 0


def cmd_verify(args):
    policy = verify.VerifyPolicy(
        workers=args.workers,
        step_limit=args.step_limit,
        floor=int(_big(args.floor)),
        early_exit=not args.no_early_exit,
    )
    if args.resume:
        rep = verify.checkpoint_resume(args.resume, policy, append=True)
    else:
        if args.lo is None or args.hi is None:
            raise UsageError("verify needs --lo and --hi (or --resume)")
        upto = None if args.upto is None else int(_big(args.upto))
        rep = verify.verify_range(_big(args.lo), _big(args.hi), policy, upto=upto,
                                  checkpoint_path=args.checkpoint)
    return rep.to_dict(include_elapsed=args.timing), None, 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="collatzpoly",
        description="Accelerated Collatz map on odd integers viewed as binary polynomials (x = 2).",
        epilog=f"Worker pools default to ${WORKERS_ENV} (or 1).",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    basic = ("text", "json", "csv")

    p = sub.add_parser("step", help="one operation C_q on an odd value")
    _add_input(p)
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("traj", help="trajectory down to 1")
    _add_input(p)
    p.add_argument("--max-steps", type=int, default=core.DEFAULT_MAX_STEPS)
    p.add_argument("--max-degree", type=int, default=None)
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_traj)

    p = sub.add_parser("family", help="build a member of the F, U, G, H or Mersenne family")
    _add_input(p, required=False)
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("check", help="evaluate one identity; exit 0 if it holds, 3 if not")
    p.add_argument("which", choices=("corollary1", "g-relations", "h-chain", "mersenne-prefix", "fixed-point"))
    _add_input(p, required=False)
    p.add_argument("--j", type=int, default=1, help="number of x^2 liftings (corollary1)")
    p.add_argument("--k", type=int, help="chain index k with 2k = 4 mod 6 (h-chain)")
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("census", help="per-residue-class q statistics over [lo, hi)")
    p.add_argument("--lo", required=True)
    p.add_argument("--hi", required=True)
    p.add_argument("--workers", type=int, default=_default_workers())
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("drift", help="degree drift of a trajectory against the average envelope")
    _add_input(p)
    p.add_argument("--mersenne", action="store_true", help="use the envelope for x^(p+1)-1 starts")
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("table", help="reproduce table 1, 2 or 3")
    p.add_argument("--which", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--max", type=int, default=None, help="largest q (table 1) or even p (tables 2, 3)")
    _add_output(p, basic, "text")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("tree", help="forward graph over odd values of bounded degree")
    p.add_argument("--max-degree", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=core.DEFAULT_MAX_STEPS)
    p.add_argument("--label", choices=("decimal", "poly"), default="decimal")
    p.add_argument("--elide", action="store_true", help="collapse runs of high-degree nodes")
    p.add_argument("--max-label-degree", type=int, default=None)
    _add_output(p, ("dot", "json", "text", "csv"), "dot")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("verify", help="convergence sweep over odd n in [lo, hi)")
    p.add_argument("--lo")
    p.add_argument("--hi")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--floor", default="1", help="odd values below this are taken as verified")
    p.add_argument("--step-limit", type=int, default=10**6)
    p.add_argument("--no-early-exit", action="store_true")
    p.add_argument("--checkpoint", help="write a checkpoint file while sweeping")
    p.add_argument("--resume", help="continue from a checkpoint file")
    p.add_argument("--upto", help="stop at this cursor (partial sweep)")
    p.add_argument("--timing", action="store_true", help="include elapsed seconds")
    _add_output(p, basic, "json")
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        data, csv_rows, code = args.func(args)
        doc = data if isinstance(data, str) else emit(data, args.format, csv_rows)
    except UsageError as exc:
        print(f"collatzpoly: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DomainError, PolySyntaxError, verify.CheckpointError) as exc:
        print(f"collatzpoly: error: {exc}", file=stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc)
    else:
        stdout.write(doc)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
