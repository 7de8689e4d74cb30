"""Versioned JSON formats for the four artifact kinds.

Every document carries a ``format`` tag (``cycind/<kind>@1``); loaders check
it and raise :class:`FormatError` on anything unexpected.  Node tables are
flat — children refer to other rows by id — so documents stay linear in the
size of the shared structure and never nest deeply.  Formulas are nested
arrays with ``["b", k]`` for bound references and ``["v", name]`` for free
variables.
"""

from __future__ import annotations

import json
from typing import Any

from . import logic
from .annotate import Annotation, Origin, Reset
from .core import (
    Call,
    CallSystem,
    CyclicSystem,
    DerivNode,
    Judgment,
    RegularDerivation,
    RuleScheme,
    SizeChangeGraph,
    VarRef,
)
from .unfold import RepNode, ResetRep

CALLSYSTEM = "cycind/callsystem@1"
DERIVATION = "cycind/derivation@1"
RESETREP = "cycind/resetrep@1"
PROOF = "cycind/proof@1"


class FormatError(ValueError):
    pass


def _tag(doc: Any, want: str) -> None:
    if not isinstance(doc, dict):
        raise FormatError("document is not a JSON object")
    tag = doc.get("format")
    if tag != want:
        raise FormatError(f"expected format {want!r}, found {tag!r}")


# ---------------------------------------------------------------------------
# call systems
# ---------------------------------------------------------------------------

def call_system_to_doc(cs: CallSystem) -> dict:
    return {
        "format": CALLSYSTEM,
        "functions": {f: list(s) for f, s in cs.functions.items()},
        "ind_sorts": sorted(cs.ind_sorts),
        "calls": [
            {
                "id": c.id,
                "dom": c.dom,
                "codom": c.codom,
                "edges": [list(e) for e in c.graph.sorted_edges()],
            }
            for c in cs.calls
        ],
    }


def call_system_from_doc(doc: dict) -> CallSystem:
    _tag(doc, CALLSYSTEM)
    functions = {f: tuple(s) for f, s in doc["functions"].items()}
    calls = []
    for c in doc["calls"]:
        if c["dom"] not in functions or c["codom"] not in functions:
            raise FormatError(f"call {c['id']!r} refers to an undeclared function")
        graph = SizeChangeGraph(
            len(functions[c["dom"]]),
            len(functions[c["codom"]]),
            frozenset((int(s), int(d), lab) for s, d, lab in c["edges"]),
        )
        calls.append(Call(id=c["id"], dom=c["dom"], codom=c["codom"], graph=graph))
    return CallSystem(
        functions=functions,
        calls=tuple(calls),
        ind_sorts=frozenset(doc["ind_sorts"]),
    )


# ---------------------------------------------------------------------------
# cyclic proof systems (embedded in other documents)
# ---------------------------------------------------------------------------

def system_to_doc(sys: CyclicSystem) -> dict:
    return {
        "judgments": [
            {"id": j.id, "ob": j.ob, "sorts": list(j.sorts)}
            for j in sys.judgments.values()
        ],
        "rules": [
            {
                "id": r.id,
                "conclusion": r.conclusion,
                "premises": list(r.premises),
                "graphs": [[list(e) for e in g.sorted_edges()] for g in r.graphs],
            }
            for r in sys.rules.values()
        ],
        "ind_sorts": sorted(sys.ind_sorts),
    }


def system_from_doc(doc: dict) -> CyclicSystem:
    judgments = {
        j["id"]: Judgment(j["id"], int(j["ob"]), tuple(j["sorts"])) for j in doc["judgments"]
    }
    rules = {}
    for r in doc["rules"]:
        if r["conclusion"] not in judgments:
            raise FormatError(f"rule {r['id']!r} concludes an unknown judgment")
        src = judgments[r["conclusion"]].ob
        graphs = []
        for prem, ges in zip(r["premises"], r["graphs"]):
            if prem not in judgments:
                raise FormatError(f"rule {r['id']!r} has an unknown premise {prem!r}")
            graphs.append(
                SizeChangeGraph(
                    src,
                    judgments[prem].ob,
                    frozenset((int(s), int(d), lab) for s, d, lab in ges),
                )
            )
        rules[r["id"]] = RuleScheme(
            id=r["id"],
            conclusion=r["conclusion"],
            premises=tuple(r["premises"]),
            graphs=tuple(graphs),
        )
    return CyclicSystem(
        judgments=judgments, rules=rules, ind_sorts=frozenset(doc["ind_sorts"])
    )


# ---------------------------------------------------------------------------
# regular derivations
# ---------------------------------------------------------------------------

def derivation_to_doc(deriv: RegularDerivation, sys: CyclicSystem) -> dict:
    return {
        "format": DERIVATION,
        "system": system_to_doc(sys),
        "nodes": [
            {"id": nid, "rule": n.rule, "children": list(n.children)}
            for nid, n in deriv.nodes.items()
        ],
        "root": deriv.root,
    }


def derivation_from_doc(doc: dict) -> tuple[CyclicSystem, RegularDerivation]:
    _tag(doc, DERIVATION)
    sys = system_from_doc(doc["system"])
    nodes = {
        n["id"]: DerivNode(rule=n["rule"], children=tuple(n["children"]))
        for n in doc["nodes"]
    }
    return sys, RegularDerivation(nodes=nodes, root=doc["root"])


# ---------------------------------------------------------------------------
# annotated representations
# ---------------------------------------------------------------------------

def _var_to_doc(v: VarRef) -> list:
    return [v.depth, v.pos]


def _var_from_doc(x) -> VarRef:
    return VarRef(int(x[0]), int(x[1]))


def _ann_to_doc(a: Annotation) -> dict:
    return {
        "names": list(a.names),
        "binding": [_var_to_doc(v) for v in a.binding],
        "stacks": [list(s) for s in a.stacks],
        "pre_stacks": [list(s) for s in a.pre_stacks],
        "origins": [{"kind": o.kind, "src": o.src, "fresh": o.fresh} for o in a.origins],
        "resets": [
            {"name": r.name, "cover": r.cover, "cover_var": _var_to_doc(r.cover_var)}
            for r in a.resets
        ],
        "depth": a.depth,
    }


def _ann_from_doc(d: dict) -> Annotation:
    return Annotation(
        names=tuple(d["names"]),
        binding=tuple(_var_from_doc(v) for v in d["binding"]),
        stacks=tuple(tuple(s) for s in d["stacks"]),
        pre_stacks=tuple(tuple(s) for s in d["pre_stacks"]),
        origins=tuple(
            Origin(kind=o["kind"], src=o["src"], fresh=o["fresh"]) for o in d["origins"]
        ),
        resets=tuple(
            Reset(name=r["name"], cover=r["cover"], cover_var=_var_from_doc(r["cover_var"]))
            for r in d["resets"]
        ),
        depth=int(d["depth"]),
    )


def rep_to_doc(rep: ResetRep) -> dict:
    return {
        "format": RESETREP,
        "system": system_to_doc(rep.system),
        "deriv": {
            "nodes": [
                {"id": nid, "rule": n.rule, "children": list(n.children)}
                for nid, n in rep.deriv.nodes.items()
            ],
            "root": rep.deriv.root,
        },
        "nodes": [
            {
                "id": n.id,
                "deriv_node": n.deriv_node,
                "rule": n.rule,
                "parent": n.parent,
                "index": n.index,
                "children": list(n.children),
                "ann": _ann_to_doc(n.ann),
                "sprout": n.sprout,
                "prog": n.prog,
            }
            for n in rep.nodes.values()
        ],
        "root": rep.root,
    }


def rep_from_doc(doc: dict) -> ResetRep:
    _tag(doc, RESETREP)
    sys = system_from_doc(doc["system"])
    dnodes = {
        n["id"]: DerivNode(rule=n["rule"], children=tuple(n["children"]))
        for n in doc["deriv"]["nodes"]
    }
    deriv = RegularDerivation(nodes=dnodes, root=doc["deriv"]["root"])
    nodes = {}
    for n in doc["nodes"]:
        nodes[n["id"]] = RepNode(
            id=n["id"],
            deriv_node=n["deriv_node"],
            rule=n["rule"],
            parent=n["parent"],
            index=n["index"],
            children=tuple(n["children"]),
            ann=_ann_from_doc(n["ann"]),
            sprout=n["sprout"],
            prog=n["prog"],
        )
    return ResetRep(system=sys, deriv=deriv, nodes=nodes, root=doc["root"])


# ---------------------------------------------------------------------------
# inductive proofs
# ---------------------------------------------------------------------------

def _term_to_doc(t) -> list:
    if isinstance(t, logic.FreeV):
        return ["v", t.name]
    if isinstance(t, logic.BoundV):
        return ["b", t.k]
    raise FormatError(f"unknown term {t!r}")


def _formula_to_doc(phi) -> list:
    if isinstance(phi, logic.Atom):
        return ["atom", phi.judg, [_term_to_doc(a) for a in phi.args]]
    if isinstance(phi, logic.Geq):
        return [">=", phi.sort, _term_to_doc(phi.left), _term_to_doc(phi.right)]
    if isinstance(phi, logic.Gt):
        return [">", phi.sort, _term_to_doc(phi.left), _term_to_doc(phi.right)]
    if isinstance(phi, logic.Imp):
        return ["imp", _formula_to_doc(phi.lhs), _formula_to_doc(phi.rhs)]
    if isinstance(phi, logic.Forall):
        return ["all", phi.sort, phi.hint, _formula_to_doc(phi.body)]
    raise FormatError(f"unknown formula {phi!r}")


def _term_from_doc(x):
    if x[0] == "v":
        return logic.FreeV(x[1])
    if x[0] == "b":
        return logic.BoundV(int(x[1]))
    raise FormatError(f"unknown term tag {x[0]!r}")


def _formula_from_doc(x):
    tag = x[0]
    if tag == "atom":
        return logic.Atom(x[1], tuple(_term_from_doc(a) for a in x[2]))
    if tag == ">=":
        return logic.Geq(x[1], _term_from_doc(x[2]), _term_from_doc(x[3]))
    if tag == ">":
        return logic.Gt(x[1], _term_from_doc(x[2]), _term_from_doc(x[3]))
    if tag == "imp":
        return logic.Imp(_formula_from_doc(x[1]), _formula_from_doc(x[2]))
    if tag == "all":
        return logic.Forall(x[1], _formula_from_doc(x[3]), hint=x[2])
    raise FormatError(f"unknown formula tag {tag!r}")


def _seq_to_doc(seq: logic.Sequent) -> dict:
    return {
        "ctx": [[v, s] for v, s in seq.ctx],
        "hyps": [_formula_to_doc(h) for h in seq.hyps],
        "concl": _formula_to_doc(seq.concl),
    }


def _seq_from_doc(d: dict) -> logic.Sequent:
    return logic.Sequent(
        ctx=tuple((v, s) for v, s in d["ctx"]),
        hyps=tuple(_formula_from_doc(h) for h in d["hyps"]),
        concl=_formula_from_doc(d["concl"]),
    )


def proof_to_doc(proof: logic.Deriv, sys: CyclicSystem) -> dict:
    """Flatten a proof DAG into a table; shared subderivations are emitted once."""
    rows: list[dict] = []
    memo: dict[int, int] = {}
    stack: list[tuple[logic.Deriv, bool]] = [(proof, False)]
    while stack:
        d, done = stack.pop()
        if id(d) in memo:
            continue
        if not done:
            stack.append((d, True))
            for c in d.children:
                if id(c) not in memo:
                    stack.append((c, False))
            continue
        memo[id(d)] = len(rows)
        rows.append(
            {
                "id": len(rows),
                "rule": d.rule,
                "seq": _seq_to_doc(d.seq),
                "children": [memo[id(c)] for c in d.children],
                "data": list(d.data),
            }
        )
    return {
        "format": PROOF,
        "system": system_to_doc(sys),
        "nodes": rows,
        "root": memo[id(proof)],
    }


def proof_from_doc(doc: dict) -> tuple[CyclicSystem, logic.Deriv]:
    _tag(doc, PROOF)
    sys = system_from_doc(doc["system"])
    built: dict[int, logic.Deriv] = {}
    for row in doc["nodes"]:
        kids = []
        for c in row["children"]:
            if c not in built:
                raise FormatError(f"node {row['id']} refers to a later node {c}")
            kids.append(built[c])
        built[row["id"]] = logic.Deriv(
            rule=row["rule"],
            seq=_seq_from_doc(row["seq"]),
            children=tuple(kids),
            data=tuple(row["data"]),
        )
    if doc["root"] not in built:
        raise FormatError("root not present in the node table")
    return sys, built[doc["root"]]


# ---------------------------------------------------------------------------
# top-level helpers
# ---------------------------------------------------------------------------

_KIND_OF_TAG = {
    CALLSYSTEM: "callsystem",
    DERIVATION: "derivation",
    RESETREP: "resetrep",
    PROOF: "proof",
}


def loads(text: str) -> tuple[str, Any]:
    """Parse any known document; returns (kind, loaded object(s))."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise FormatError("document is not a JSON object")
    kind = _KIND_OF_TAG.get(doc.get("format"))
    if kind is None:
        raise FormatError(f"unknown format tag {doc.get('format')!r}")
    loader = {
        "callsystem": call_system_from_doc,
        "derivation": derivation_from_doc,
        "resetrep": rep_from_doc,
        "proof": proof_from_doc,
    }[kind]
    return kind, loader(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
