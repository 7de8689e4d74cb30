"""Command line frontend.

Four subcommands over the four file formats (plus ``.fun`` sources for the
mini-language):

- ``sct``      decide termination / soundness; exit 0 terminating, 1 not;
- ``unravel``  unfold a sound input into an inductive proof file;
- ``verify``   run the proof checker over a proof file;
- ``show``     render any document as text or dot.

Exit codes: 0 ok / positive verdict, 1 negative verdict or failed check,
2 usage, I/O or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import formats
from .core import induced_call_graph, induced_proof_system
from .dot import call_system_to_dot, derivation_to_dot, rep_to_dot
from .logic import LogicError, check_proof, count_rule, proof_size
from .minilang import MiniLangError, parse_call_system
from .sct import decide_termination
from .translate import translate
from .unfold import ResetRep, UnfoldCapError, unravel_rep


class _CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _CliError(str(e)) from None


def _load(path: str):
    text = _read(path)
    if path.endswith(".fun"):
        try:
            return "callsystem", parse_call_system(text)
        except MiniLangError as e:
            raise _CliError(f"{path}: {e}") from None
    try:
        return formats.loads(text)
    except formats.FormatError as e:
        raise _CliError(f"{path}: {e}") from None


def _as_call_system(kind, obj):
    if kind == "callsystem":
        return obj
    if kind == "derivation":
        sys_, deriv = obj
        return induced_call_graph(deriv, sys_)
    if kind == "resetrep":
        return induced_call_graph(obj.deriv, obj.system)
    raise _CliError(f"cannot run termination analysis on a {kind} document")


def render_trace(rep: ResetRep) -> str:
    """Preorder listing of the representation: one line per node with its
    annotation, resets, and back-edge."""
    lines = []
    stack = [rep.root]
    while stack:
        nid = stack.pop()
        n = rep.nodes[nid]
        ann = n.ann
        parts = []
        for j in range(ann.ob):
            bits = list(ann.stacks[j]) + [f"~{a}~" for a in ann.struck(j)]
            parts.append(" ".join(bits) if bits else "-")
        line = f"{'  ' * ann.depth}{nid} {n.rule}: ({' | '.join(parts)})"
        for r in ann.resets:
            line += f" [reset {r.name} covered by {r.cover}]"
        if n.is_bud:
            line += f" => {n.sprout} on {n.prog}"
        lines.append(line)
        stack.extend(reversed(n.children))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sct(args) -> int:
    kind, obj = _load(args.path)
    cs = _as_call_system(kind, obj)
    roots = frozenset(args.roots) if args.roots else None
    if roots:
        unknown = roots - set(cs.functions)
        if unknown:
            raise _CliError(f"unknown roots: {', '.join(sorted(unknown))}")
    verdict = decide_termination(cs, roots=roots)
    if args.json:
        doc = {
            "terminating": verdict.terminating,
            "closure_size": verdict.closure_size,
            "counterexample": None
            if verdict.counterexample is None
            else {
                "prefix": list(verdict.counterexample.prefix),
                "cycle": list(verdict.counterexample.cycle),
            },
        }
        print(json.dumps(doc, indent=2))
    elif verdict.terminating:
        print(f"terminating (closure size {verdict.closure_size})")
    else:
        lasso = verdict.counterexample
        print("non-terminating: cycle with no progressing trace")
        print(f"  prefix: {' '.join(lasso.prefix) if lasso.prefix else '(empty)'}")
        print(f"  cycle:  {' '.join(lasso.cycle)}")
        print(f"  (closure size {verdict.closure_size})")
    return 0 if verdict.terminating else 1


def _pick_derivation(kind, obj, fun):
    if kind == "callsystem":
        sys_, derivs = induced_proof_system(obj)
        if fun is None:
            fun = next(iter(obj.functions))
        if fun not in derivs:
            raise _CliError(f"no function {fun!r} in the input")
        return sys_, derivs[fun]
    if kind == "derivation":
        if fun is not None:
            raise _CliError("--fun only applies to call-system inputs")
        return obj
    raise _CliError(f"cannot unravel a {kind} document")


def cmd_unravel(args) -> int:
    kind, obj = _load(args.path)
    sys_, deriv = _pick_derivation(kind, obj, args.fun)
    cs = induced_call_graph(deriv, sys_)
    verdict = decide_termination(cs)
    if not verdict.terminating:
        lasso = verdict.counterexample
        print("input is not sound: cycle with no progressing trace", file=sys.stderr)
        print(f"  prefix: {' '.join(lasso.prefix) if lasso.prefix else '(empty)'}", file=sys.stderr)
        print(f"  cycle:  {' '.join(lasso.cycle)}", file=sys.stderr)
        return 1
    try:
        rep = unravel_rep(deriv, sys_)
    except UnfoldCapError as e:
        raise _CliError(str(e)) from None
    proof = translate(rep)
    check_proof(sys_, proof)
    if args.trace:
        sys.stdout.write(render_trace(rep))
    if args.dot:
        Path(args.dot).write_text(rep_to_dot(rep))
    doc = formats.dumps(formats.proof_to_doc(proof, sys_))
    if args.out:
        Path(args.out).write_text(doc)
        print(
            f"wrote proof: {proof_size(proof)} nodes,"
            f" {count_rule(proof, 'gt_ind')} induction applications -> {args.out}"
        )
    else:
        sys.stdout.write(doc)
    return 0


def cmd_verify(args) -> int:
    kind, obj = _load(args.path)
    if kind != "proof":
        raise _CliError(f"verify expects a proof document, found {kind}")
    sys_, proof = obj
    try:
        check_proof(sys_, proof)
    except LogicError as e:
        print(f"invalid proof: {e}", file=sys.stderr)
        return 1
    print(f"ok: {proof_size(proof)} nodes, conclusion {proof.seq.render()}")
    return 0


def cmd_show(args) -> int:
    kind, obj = _load(args.path)
    if args.dot:
        if kind == "callsystem":
            out = call_system_to_dot(obj)
        elif kind == "derivation":
            out = derivation_to_dot(obj[1], obj[0])
        elif kind == "resetrep":
            out = rep_to_dot(obj)
        else:
            raise _CliError("no dot rendering for proof documents")
        sys.stdout.write(out)
        return 0
    if kind == "callsystem":
        print(f"call system: {len(obj.functions)} functions, {len(obj.calls)} calls")
        for f, sorts in obj.functions.items():
            print(f"  fun {f}({', '.join(sorts)})")
        for c in obj.calls:
            print(f"  {c.id}: {c.dom} -> {c.codom}  {c.graph}")
    elif kind == "derivation":
        sys_, deriv = obj
        print(f"derivation: {len(deriv.nodes)} nodes, root {deriv.root}")
        for nid, n in deriv.nodes.items():
            kids = ", ".join(n.children) if n.children else "-"
            print(f"  {nid}: {n.rule} [{kids}]")
    elif kind == "resetrep":
        sys.stdout.write(render_trace(obj))
    else:
        sys_, proof = obj
        hist: dict[str, int] = {}
        stack = [proof]
        seen = set()
        while stack:
            d = stack.pop()
            if id(d) in seen:
                continue
            seen.add(id(d))
            hist[d.rule] = hist.get(d.rule, 0) + 1
            stack.extend(d.children)
        print(f"proof: {proof_size(proof)} nodes")
        print(f"  conclusion: {proof.seq.render()}")
        for rule in sorted(hist):
            print(f"  {rule}: {hist[rule]}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cycind",
        description="size-change termination and unravelling of cyclic proofs",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sct", help="decide termination of a call system or derivation")
    p.add_argument("path")
    p.add_argument("--roots", nargs="*", help="restrict entry points to these functions")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(fn=cmd_sct)

    p = sub.add_parser("unravel", help="unfold a sound input into an inductive proof")
    p.add_argument("path")
    p.add_argument("--out", help="write the proof document here (default: stdout)")
    p.add_argument("--dot", help="also write the annotated representation as dot")
    p.add_argument("--trace", action="store_true", help="print the annotation trace")
    p.add_argument("--fun", help="which function to unravel (call-system inputs)")
    p.set_defaults(fn=cmd_unravel)

    p = sub.add_parser("verify", help="check a proof document")
    p.add_argument("path")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("show", help="render any document as text or dot")
    p.add_argument("path")
    p.add_argument("--dot", action="store_true", help="emit graphviz instead of text")
    p.set_defaults(fn=cmd_show)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except LogicError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
