"""A small sorted natural-deduction kernel with well-founded order rules.

Formulas are judgment atoms over variables, the two order relations ``>`` and
``>=`` at inductive sorts, implication, and sorted universal quantification
(De Bruijn indices under the binders, named free variables elsewhere).  A
sequent is ``ctx; hyps |- concl`` where ``ctx`` is an *ordered* list of sorted
variables: quantifier rules bind the last context entry, so the context
discipline is part of the proof structure.

Rules: identity, exchange (adjacent swap), weakening and contraction at the
end of the hypothesis list, implication intro/elim, universal intro/elim,
reflexivity / transitivity / subsumption / mixed-transitivity for the orders,
well-founded induction on ``>``, and one case-analysis rule per rule scheme of
the ambient cyclic system.  ``check_proof`` verifies a derivation bottom-up
and is the only authority on validity; all builder helpers merely construct
candidate derivations.

The derived strong induction principle (inducting on an entire sequent rather
than a single formula) is provided as a macro: :func:`expand_ind_prime`
returns the premise sequent carrying the induction hypothesis and a
completion function that wraps a derivation of that premise into kernel rules
only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .core import CyclicSystem, GT


# ---------------------------------------------------------------------------
# Terms and formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeV:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BoundV:
    k: int

    def __str__(self) -> str:
        return f"^{self.k}"


Term = FreeV | BoundV


@dataclass(frozen=True)
class Atom:
    judg: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Geq:
    sort: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Gt:
    sort: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Imp:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    sort: str
    body: "Formula"
    hint: str = field(default="x", compare=False)


Formula = Atom | Geq | Gt | Imp | Forall


def ordered(sort: str, label: str, left: Term, right: Term) -> Formula:
    return Gt(sort, left, right) if label == GT else Geq(sort, left, right)


def _map_terms(phi: Formula, f: Callable[[Term, int], Term], depth: int = 0) -> Formula:
    # Returns ``phi`` itself when nothing changes, so untouched subtrees stay
    # shared between input and output.
    if isinstance(phi, Atom):
        args = tuple(f(t, depth) for t in phi.args)
        return phi if args == phi.args else Atom(phi.judg, args)
    if isinstance(phi, Geq):
        left, right = f(phi.left, depth), f(phi.right, depth)
        return phi if left is phi.left and right is phi.right else Geq(phi.sort, left, right)
    if isinstance(phi, Gt):
        left, right = f(phi.left, depth), f(phi.right, depth)
        return phi if left is phi.left and right is phi.right else Gt(phi.sort, left, right)
    if isinstance(phi, Imp):
        lhs = _map_terms(phi.lhs, f, depth)
        rhs = _map_terms(phi.rhs, f, depth)
        return phi if lhs is phi.lhs and rhs is phi.rhs else Imp(lhs, rhs)
    if isinstance(phi, Forall):
        body = _map_terms(phi.body, f, depth + 1)
        return phi if body is phi.body else Forall(phi.sort, body, hint=phi.hint)
    raise TypeError(f"not a formula: {phi!r}")


def subst_free(phi: Formula, sub: Mapping[str, str]) -> Formula:
    """Rename free variables; bound variables are indices, so no capture."""
    def f(t: Term, _d: int) -> Term:
        if isinstance(t, FreeV) and t.name in sub:
            return FreeV(sub[t.name])
        return t
    return _map_terms(phi, f)


def open_bound(body: Formula, name: str) -> Formula:
    """Instantiate the outermost binder of a quantifier body with a free variable."""
    def f(t: Term, d: int) -> Term:
        if isinstance(t, BoundV):
            if t.k == d:
                return FreeV(name)
            if t.k > d:
                return BoundV(t.k - 1)
        return t
    return _map_terms(body, f)


def close_free(phi: Formula, name: str) -> Formula:
    """Abstract a free variable into the outermost binder position."""
    def f(t: Term, d: int) -> Term:
        if isinstance(t, FreeV) and t.name == name:
            return BoundV(d)
        if isinstance(t, BoundV) and t.k >= d:
            return BoundV(t.k + 1)
        return t
    return _map_terms(phi, f)


def free_vars(phi: Formula) -> set[str]:
    out: set[str] = set()
    def f(t: Term, _d: int) -> Term:
        if isinstance(t, FreeV):
            out.add(t.name)
        return t
    _map_terms(phi, f)
    return out


def fold_imp(hyps: Iterable[Formula], concl: Formula) -> Formula:
    acc = concl
    for phi in reversed(tuple(hyps)):
        acc = Imp(phi, acc)
    return acc


def peel_forall(phi: Formula) -> tuple[list[tuple[str, str]], Formula]:
    """Strip leading quantifiers; returns [(sort, hint)] and the raw body."""
    binders: list[tuple[str, str]] = []
    while isinstance(phi, Forall):
        binders.append((phi.sort, phi.hint))
        phi = phi.body
    return binders, phi


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    k = 1
    while f"{base}~{k}" in avoid:
        k += 1
    return f"{base}~{k}"


def render_formula(phi: Formula, binders: tuple[str, ...] = ()) -> str:
    if isinstance(phi, Atom):
        return f"{phi.judg}({', '.join(_render_term(t, binders) for t in phi.args)})"
    if isinstance(phi, Geq):
        return f"{_render_term(phi.left, binders)} >= {_render_term(phi.right, binders)}"
    if isinstance(phi, Gt):
        return f"{_render_term(phi.left, binders)} > {_render_term(phi.right, binders)}"
    if isinstance(phi, Imp):
        lhs = render_formula(phi.lhs, binders)
        if isinstance(phi.lhs, (Imp, Forall)):
            lhs = f"({lhs})"
        return f"{lhs} -> {render_formula(phi.rhs, binders)}"
    if isinstance(phi, Forall):
        used = set(binders)
        nm = fresh_name(phi.hint, used)
        return f"all {nm}:{phi.sort}. {render_formula(phi.body, binders + (nm,))}"
    raise TypeError(f"not a formula: {phi!r}")


def _render_term(t: Term, binders: tuple[str, ...]) -> str:
    if isinstance(t, FreeV):
        return t.name
    if t.k < len(binders):
        return binders[-1 - t.k]
    return f"^{t.k}"


# ---------------------------------------------------------------------------
# Sequents and derivations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sequent:
    ctx: tuple[tuple[str, str], ...]  # ordered (variable, sort) pairs
    hyps: tuple[Formula, ...]
    concl: Formula

    def sort_of(self, name: str) -> str:
        for v, s in self.ctx:
            if v == name:
                return s
        raise KeyError(f"variable {name!r} not in context")

    def ctx_names(self) -> tuple[str, ...]:
        return tuple(v for v, _s in self.ctx)

    def render(self) -> str:
        cv = ", ".join(f"{v}:{s}" for v, s in self.ctx)
        hy = ", ".join(render_formula(h) for h in self.hyps)
        return f"[{cv}] {hy} |- {render_formula(self.concl)}"


@dataclass(frozen=True)
class Deriv:
    rule: str
    seq: Sequent
    children: tuple["Deriv", ...] = ()
    data: tuple = ()


class LogicError(Exception):
    """A derivation failed to check; ``path`` locates the offending node."""

    def __init__(self, message: str, path: tuple[int, ...] = ()) -> None:
        self.path = path
        loc = "/".join(map(str, path)) if path else "root"
        super().__init__(f"at {loc}: {message}")


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------

# Formula objects are shared structurally between the sequents of a
# derivation, so their context-independent wellformedness (arities, sort
# agreement, bound indices in scope) plus the sorts they demand of their free
# variables are computed once per object and cached by identity.
_SUMMARY_CACHE: dict[tuple[int, int], tuple[Formula, "dict[str, str] | str"]] = {}


def _formula_summary(system: CyclicSystem, phi: Formula) -> dict[str, str] | str:
    key = (id(system), id(phi))
    hit = _SUMMARY_CACHE.get(key)
    if hit is not None and hit[0] is phi:
        return hit[1]
    req: dict[str, str] = {}

    def walk(f: Formula, binders: list[str]) -> str | None:
        if isinstance(f, Atom):
            judg = system.judgments.get(f.judg)
            if judg is None:
                return f"unknown judgment {f.judg!r}"
            if len(f.args) != judg.ob:
                return f"{f.judg} expects {judg.ob} arguments, got {len(f.args)}"
            for i, t in enumerate(f.args):
                if err := use(t, judg.sorts[i], binders):
                    return f"argument {i} of {f.judg}: {err}"
            return None
        if isinstance(f, (Geq, Gt)):
            if f.sort not in system.ind_sorts:
                return f"order at non-inductive sort {f.sort!r}"
            for t in (f.left, f.right):
                if err := use(t, f.sort, binders):
                    return f"order operand: {err}"
            return None
        if isinstance(f, Imp):
            return walk(f.lhs, binders) or walk(f.rhs, binders)
        if isinstance(f, Forall):
            binders.append(f.sort)
            try:
                return walk(f.body, binders)
            finally:
                binders.pop()
        return f"not a formula: {f!r}"

    def use(t: Term, want: str, binders: list[str]) -> str | None:
        if isinstance(t, FreeV):
            have = req.setdefault(t.name, want)
            if have != want:
                return f"{t.name} used at sorts {have!r} and {want!r}"
            return None
        if isinstance(t, BoundV):
            if t.k >= len(binders):
                return f"unbound index {t.k}"
            if binders[-1 - t.k] != want:
                return f"bound variable has sort {binders[-1 - t.k]!r}, expected {want!r}"
            return None
        return f"not a term: {t!r}"

    res: dict[str, str] | str = walk(phi, []) or req
    _SUMMARY_CACHE[key] = (phi, res)
    return res


def _check_sequent(system: CyclicSystem, seq: Sequent) -> str | None:
    names = [v for v, _s in seq.ctx]
    if len(set(names)) != len(names):
        return "repeated context variable"
    ctx = dict(seq.ctx)
    for spot, phi in (*((f"hypothesis {i}", h) for i, h in enumerate(seq.hyps)), ("conclusion", seq.concl)):
        summary = _formula_summary(system, phi)
        if isinstance(summary, str):
            return f"{spot}: {summary}"
        for name, want in summary.items():
            have = ctx.get(name)
            if have is None:
                return f"{spot}: variable {name!r} not in context"
            if have != want:
                return f"{spot}: variable {name!r} has sort {have!r}, expected {want!r}"
    return None


def _same(a: Sequent, b: Sequent, ctx: bool = True, hyps: bool = True) -> bool:
    return (not ctx or a.ctx == b.ctx) and (not hyps or a.hyps == b.hyps)


def _check_node(system: CyclicSystem, d: Deriv) -> str | None:
    seq = d.seq
    kids = d.children
    r = d.rule

    def arity(n: int) -> str | None:
        return None if len(kids) == n else f"{r} expects {n} premises, got {len(kids)}"

    if r == "identity":
        if err := arity(0):
            return err
        if seq.hyps != (seq.concl,):
            return "identity needs the conclusion as only hypothesis"
        return None
    if r == "exchange":
        if err := arity(1):
            return err
        if len(d.data) != 1 or not isinstance(d.data[0], int):
            return "exchange needs one integer position"
        (i,) = d.data
        p = kids[0].seq
        if not _same(seq, p, hyps=False) or seq.concl != p.concl:
            return "exchange must preserve context and conclusion"
        if not (0 <= i < len(seq.hyps) - 1):
            return f"exchange position {i} out of range"
        swapped = list(p.hyps)
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        if tuple(swapped) != seq.hyps:
            return "exchange conclusion is not an adjacent swap of the premise"
        return None
    if r == "weakening":
        if err := arity(1):
            return err
        p = kids[0].seq
        if not seq.hyps or seq.hyps[:-1] != p.hyps:
            return "weakening must append one hypothesis"
        if not _same(seq, p, hyps=False) or seq.concl != p.concl:
            return "weakening must preserve context and conclusion"
        return None
    if r == "contraction":
        if err := arity(1):
            return err
        p = kids[0].seq
        if not seq.hyps or p.hyps != seq.hyps + (seq.hyps[-1],):
            return "contraction premise must duplicate the last hypothesis"
        if not _same(seq, p, hyps=False) or seq.concl != p.concl:
            return "contraction must preserve context and conclusion"
        return None
    if r == "imp_intro":
        if err := arity(1):
            return err
        p = kids[0].seq
        if not isinstance(seq.concl, Imp):
            return "imp_intro conclusion must be an implication"
        if p.hyps != seq.hyps + (seq.concl.lhs,) or p.concl != seq.concl.rhs:
            return "imp_intro premise must move the antecedent into the hypotheses"
        if not _same(seq, p, hyps=False):
            return "imp_intro must preserve context"
        return None
    if r == "imp_elim":
        if err := arity(2):
            return err
        maj, mnr = kids[0].seq, kids[1].seq
        if not (_same(seq, maj) and _same(seq, mnr)):
            return "imp_elim premises must share the sequent context and hypotheses"
        if maj.concl != Imp(mnr.concl, seq.concl):
            return "imp_elim major premise must be minor -> conclusion"
        return None
    if r == "forall_intro":
        if err := arity(1):
            return err
        p = kids[0].seq
        if len(p.ctx) != len(seq.ctx) + 1 or p.ctx[:-1] != seq.ctx:
            return "forall_intro premise must extend the context by one variable"
        x, s = p.ctx[-1]
        if not isinstance(seq.concl, Forall) or seq.concl.sort != s:
            return "forall_intro conclusion must quantify at the bound variable's sort"
        if p.hyps != seq.hyps:
            return "forall_intro must preserve hypotheses"
        if seq.concl.body != close_free(p.concl, x):
            return "forall_intro conclusion body does not match the premise"
        return None
    if r == "forall_elim":
        if err := arity(1):
            return err
        if len(d.data) != 1 or not isinstance(d.data[0], str):
            return "forall_elim needs one target variable"
        (y,) = d.data
        p = kids[0].seq
        if not _same(seq, p):
            return "forall_elim must preserve context and hypotheses"
        if not isinstance(p.concl, Forall):
            return "forall_elim premise must conclude a quantified formula"
        try:
            s = seq.sort_of(y)
        except KeyError:
            return f"forall_elim target {y!r} not in context"
        if s != p.concl.sort:
            return f"forall_elim target has sort {s!r}, expected {p.concl.sort!r}"
        if seq.concl != open_bound(p.concl.body, y):
            return "forall_elim conclusion is not the instantiated body"
        return None
    if r == "geq_refl":
        if err := arity(0):
            return err
        c = seq.concl
        if not isinstance(c, Geq) or c.left != c.right or not isinstance(c.left, FreeV):
            return "geq_refl concludes x >= x for a context variable"
        try:
            s = seq.sort_of(c.left.name)
        except KeyError:
            return "geq_refl variable not in context"
        if s != c.sort:
            return "geq_refl sort mismatch"
        return None
    if r in ("geq_trans", "gt_extend0", "gt_extend1"):
        if err := arity(2):
            return err
        a, b = kids[0].seq, kids[1].seq
        if not (_same(seq, a) and _same(seq, b)):
            return f"{r} premises must share the sequent context and hypotheses"
        kinds = {
            "geq_trans": (Geq, Geq, Geq),
            "gt_extend0": (Geq, Gt, Gt),
            "gt_extend1": (Gt, Geq, Gt),
        }[r]
        if not (isinstance(a.concl, kinds[0]) and isinstance(b.concl, kinds[1]) and isinstance(seq.concl, kinds[2])):
            return f"{r} connective mismatch"
        if not (a.concl.sort == b.concl.sort == seq.concl.sort):
            return f"{r} sort mismatch"
        if a.concl.right != b.concl.left or seq.concl.left != a.concl.left or seq.concl.right != b.concl.right:
            return f"{r} endpoints do not chain"
        return None
    if r == "geq_subsum":
        if err := arity(1):
            return err
        p = kids[0].seq
        if not _same(seq, p):
            return "geq_subsum must preserve context and hypotheses"
        if not isinstance(p.concl, Gt) or seq.concl != Geq(p.concl.sort, p.concl.left, p.concl.right):
            return "geq_subsum conclusion must weaken the premise"
        return None
    if r == "gt_ind":
        if err := arity(1):
            return err
        p = kids[0].seq
        if not isinstance(seq.concl, Forall):
            return "gt_ind conclusion must be quantified"
        sort = seq.concl.sort
        if sort not in system.ind_sorts:
            return f"gt_ind at non-inductive sort {sort!r}"
        if len(p.ctx) != len(seq.ctx) + 1 or p.ctx[:-1] != seq.ctx:
            return "gt_ind premise must extend the context by the induction variable"
        x, s = p.ctx[-1]
        if s != sort:
            return "gt_ind variable sort mismatch"
        body = seq.concl.body
        ih = Forall(sort, Imp(Gt(sort, FreeV(x), BoundV(0)), body))
        if p.hyps != seq.hyps + (ih,):
            return "gt_ind premise must carry the induction hypothesis"
        if p.concl != open_bound(body, x):
            return "gt_ind premise conclusion does not open the quantified body"
        return None
    if r == "c_rule":
        if len(d.data) != 1 or not isinstance(d.data[0], str):
            return "c_rule needs one rule scheme id"
        (rid,) = d.data
        scheme = system.rules.get(rid)
        if scheme is None:
            return f"unknown rule scheme {rid!r}"
        if err := arity(len(scheme.premises)):
            return err
        judg = system.judgments[scheme.conclusion]
        c = seq.concl
        if not isinstance(c, Atom) or c.judg != judg.id:
            return f"c_rule {rid} must conclude a {judg.id} atom"
        if not all(isinstance(t, FreeV) for t in c.args):
            return "c_rule arguments must be context variables"
        xs = tuple(t.name for t in c.args)
        for i, kid in enumerate(kids):
            p = kid.seq
            prem = system.judgments[scheme.premises[i]]
            if len(p.ctx) != len(seq.ctx) + prem.ob or p.ctx[: len(seq.ctx)] != seq.ctx:
                return f"premise {i} must extend the context by {prem.ob} fresh variables"
            ys = p.ctx[len(seq.ctx):]
            for j, (yv, ysort) in enumerate(ys):
                if ysort != prem.sorts[j]:
                    return f"premise {i}: variable {j} has sort {ysort!r}, expected {prem.sorts[j]!r}"
            block = tuple(
                ordered(judg.sorts[a], lab, FreeV(xs[a]), FreeV(ys[b][0]))
                for a, b, lab in scheme.graphs[i].sorted_edges()
            )
            if p.hyps != seq.hyps + block:
                return f"premise {i} must extend the hypotheses by the edge facts"
            if p.concl != Atom(prem.id, tuple(FreeV(y) for y, _ in ys)):
                return f"premise {i} must conclude {prem.id} at the fresh variables"
        return None
    return f"unknown rule {r!r}"


def check_proof(system: CyclicSystem, root: Deriv) -> None:
    """Verify a derivation; raises :class:`LogicError` locating the first defect."""
    stack: list[tuple[Deriv, tuple[int, ...]]] = [(root, ())]
    while stack:
        node, path = stack.pop()
        err = _check_sequent(system, node.seq)
        if err is None:
            err = _check_node(system, node)
        if err is not None:
            raise LogicError(err, path)
        for i in reversed(range(len(node.children))):
            stack.append((node.children[i], path + (i,)))


def proof_size(root: Deriv) -> int:
    n = 0
    stack = [root]
    while stack:
        d = stack.pop()
        n += 1
        stack.extend(d.children)
    return n


def count_rule(root: Deriv, rule: str) -> int:
    n = 0
    stack = [root]
    while stack:
        d = stack.pop()
        if d.rule == rule:
            n += 1
        stack.extend(d.children)
    return n


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def identity(ctx: tuple[tuple[str, str], ...], phi: Formula) -> Deriv:
    return Deriv("identity", Sequent(ctx, (phi,), phi))


def weaken(d: Deriv, phi: Formula) -> Deriv:
    s = d.seq
    return Deriv("weakening", Sequent(s.ctx, s.hyps + (phi,), s.concl), (d,))


def exchange(d: Deriv, i: int) -> Deriv:
    s = d.seq
    hyps = list(s.hyps)
    hyps[i], hyps[i + 1] = hyps[i + 1], hyps[i]
    return Deriv("exchange", Sequent(s.ctx, tuple(hyps), s.concl), (d,), (i,))


def contract(d: Deriv) -> Deriv:
    s = d.seq
    return Deriv("contraction", Sequent(s.ctx, s.hyps[:-1], s.concl), (d,))


def imp_intro(d: Deriv) -> Deriv:
    s = d.seq
    return Deriv("imp_intro", Sequent(s.ctx, s.hyps[:-1], Imp(s.hyps[-1], s.concl)), (d,))


def imp_elim(major: Deriv, minor: Deriv) -> Deriv:
    s = major.seq
    assert isinstance(s.concl, Imp)
    return Deriv("imp_elim", Sequent(s.ctx, s.hyps, s.concl.rhs), (major, minor))


def forall_intro(d: Deriv) -> Deriv:
    s = d.seq
    x, sort = s.ctx[-1]
    body = close_free(s.concl, x)
    return Deriv("forall_intro", Sequent(s.ctx[:-1], s.hyps, Forall(sort, body, hint=x)), (d,))


def forall_elim(d: Deriv, y: str) -> Deriv:
    s = d.seq
    assert isinstance(s.concl, Forall)
    return Deriv("forall_elim", Sequent(s.ctx, s.hyps, open_bound(s.concl.body, y)), (d,), (y,))


def geq_refl(ctx: tuple[tuple[str, str], ...], hyps: tuple[Formula, ...], sort: str, y: str) -> Deriv:
    return Deriv("geq_refl", Sequent(ctx, hyps, Geq(sort, FreeV(y), FreeV(y))))


def _chain2(rule: str, a: Deriv, b: Deriv, out_kind) -> Deriv:
    s = a.seq
    concl = out_kind(a.seq.concl.sort, a.seq.concl.left, b.seq.concl.right)
    return Deriv(rule, Sequent(s.ctx, s.hyps, concl), (a, b))


def geq_trans(a: Deriv, b: Deriv) -> Deriv:
    return _chain2("geq_trans", a, b, Geq)


def gt_extend0(a: Deriv, b: Deriv) -> Deriv:
    return _chain2("gt_extend0", a, b, Gt)


def gt_extend1(a: Deriv, b: Deriv) -> Deriv:
    return _chain2("gt_extend1", a, b, Gt)


def geq_subsum(d: Deriv) -> Deriv:
    s = d.seq
    return Deriv("geq_subsum", Sequent(s.ctx, s.hyps, Geq(s.concl.sort, s.concl.left, s.concl.right)), (d,))


def gt_ind(d: Deriv) -> Deriv:
    s = d.seq
    x, sort = s.ctx[-1]
    body = close_free(s.concl, x)
    ih = Forall(sort, Imp(Gt(sort, FreeV(x), BoundV(0)), body), hint=f"{x}'")
    assert s.hyps and s.hyps[-1] == ih, "gt_ind builder: last hypothesis is not the induction hypothesis"
    return Deriv("gt_ind", Sequent(s.ctx[:-1], s.hyps[:-1], Forall(sort, body, hint=x)), (d,))


def c_apply(system: CyclicSystem, rid: str, ctx, hyps, args: tuple[str, ...], children: tuple[Deriv, ...]) -> Deriv:
    scheme = system.rules[rid]
    concl = Atom(scheme.conclusion, tuple(FreeV(a) for a in args))
    return Deriv("c_rule", Sequent(ctx, hyps, concl), children, (rid,))


def assumption(ctx: tuple[tuple[str, str], ...], hyps: tuple[Formula, ...], k: int) -> Deriv:
    """Fetch hypothesis ``k``: identity plus weakening and adjacent exchanges."""
    d = identity(ctx, hyps[k])
    for phi in hyps[:k]:
        d = weaken(d, phi)
    for i in range(k):
        d = exchange(d, i)
    for phi in hyps[k + 1:]:
        d = weaken(d, phi)
    return d


def imp_intro_all(d: Deriv) -> Deriv:
    while d.seq.hyps:
        d = imp_intro(d)
    return d


def weaken_all(d: Deriv, hyps: Iterable[Formula]) -> Deriv:
    for phi in hyps:
        d = weaken(d, phi)
    return d


def forall_elims(d: Deriv, ys: Iterable[str]) -> Deriv:
    for y in ys:
        d = forall_elim(d, y)
    return d


# ---------------------------------------------------------------------------
# Retargeting: move a derivation under a renamed, widened context
# ---------------------------------------------------------------------------

def retarget(d: Deriv, sub: Mapping[str, str], new_ctx: tuple[tuple[str, str], ...]) -> Deriv:
    """Rebuild ``d`` with its root context replaced by ``new_ctx`` and free
    variables renamed by ``sub``.

    The derivation's own context extensions (eigenvariables of quantifier and
    case rules) are kept, renamed where they would collide with a name already
    in scope.  ``sub`` must map the variables of the old root context to
    variables of ``new_ctx``.
    """
    old_root_len = len(d.seq.ctx)
    # hypothesis tuples share formula objects all the way down a derivation,
    # so substitute each distinct (formula, frame) pair once
    memo: dict[tuple[int, int], Formula] = {}
    frames: list[dict[str, str]] = []  # keep frames alive so ids stay unique

    def subst(phi: Formula, cm: dict[str, str]) -> Formula:
        key = (id(phi), id(cm))
        out = memo.get(key)
        if out is None:
            out = memo[key] = subst_free(phi, cm)
        return out

    def transform(node: Deriv, m: dict[str, str], scope: set[str]) -> Deriv:
        stack: list[tuple[Deriv, dict[str, str], set[str], list[Deriv], int]] = [
            (node, m, scope, [], 0)
        ]
        done: Deriv | None = None
        while stack:
            cur, cm, cscope, acc, idx = stack.pop()
            if idx < len(cur.children):
                child = cur.children[idx]
                stack.append((cur, cm, cscope, acc, idx + 1))
                # context extension introduced for this child
                ext = child.seq.ctx[len(cur.seq.ctx):]
                km = cm
                kscope = cscope
                if ext:
                    km = dict(cm)
                    frames.append(km)
                    kscope = set(cscope)
                    for v, _s in ext:
                        nv = fresh_name(v, kscope)
                        km[v] = nv
                        kscope.add(nv)
                stack.append((child, km, kscope, [], 0))
            else:
                s = cur.seq
                ext = s.ctx[old_root_len:]
                nctx = new_ctx + tuple((cm.get(v, v), srt) for v, srt in ext)
                nseq = Sequent(
                    nctx,
                    tuple(subst(h, cm) for h in s.hyps),
                    subst(s.concl, cm),
                )
                data = cur.data
                if cur.rule == "forall_elim":
                    data = (cm.get(data[0], data[0]),)
                rebuilt = Deriv(cur.rule, nseq, tuple(acc), data)
                if stack:
                    stack[-1][3].append(rebuilt)
                else:
                    done = rebuilt
        assert done is not None
        return done

    scope0 = {v for v, _s in new_ctx} | set(sub.values())
    return transform(d, dict(sub), scope0)


# ---------------------------------------------------------------------------
# Induction hypotheses and the strong induction macro
# ---------------------------------------------------------------------------

def ind_block(target: Sequent, x: str) -> list[tuple[str, str]]:
    """The quantifier block of the induction hypothesis for ``target`` and ``x``:
    the context variables free in the sequent formula (plus ``x``), in context
    order, with their sorts."""
    chain = fold_imp(target.hyps, target.concl)
    fv = free_vars(chain) | {x}
    return [(v, s) for v, s in target.ctx if v in fv]


def ind_hypothesis(target: Sequent, x: str) -> Formula:
    """The induction hypothesis for inducting on ``x`` over a whole sequent.

    Universally closes the sequent formula over the context variables that
    occur free in it (plus ``x``), in context order, guarding with
    ``x > x-copy``: the result only has ``x`` free.
    """
    sort = target.sort_of(x)
    chain = fold_imp(target.hyps, target.concl)
    block = ind_block(target, x)
    avoid = {v for v, _s in target.ctx}
    temps: dict[str, str] = {}
    for v, _s in block:
        temps[v] = fresh_name(f"{v}'", avoid)
        avoid.add(temps[v])
    phi: Formula = Imp(Gt(sort, FreeV(x), FreeV(temps[x])), subst_free(chain, temps))
    for v, s in reversed(block):
        phi = Forall(s, close_free(phi, temps[v]), hint=f"{v}'")
    return phi


@dataclass
class IndPrime:
    """Strong induction on a sequent: prove the premise (which carries the
    hypothesis as its last assumption), then ``complete`` it into a kernel
    derivation of the target."""

    target: Sequent
    var: str
    hypothesis: Formula
    premise: Sequent
    complete: Callable[[Deriv], Deriv]


def expand_ind_prime(target: Sequent, x: str) -> IndPrime:
    """Build the strong-induction macro for ``target``, inducting on ``x``.

    The returned completion wraps a derivation of ``premise`` using one
    ``gt_ind`` plus implication/quantifier bookkeeping: the sequent formula is
    universally closed, proved by well-founded induction on a fresh copy of
    ``x`` (the premise derivation is retargeted under the copies), and then
    instantiated back at the original variables.
    """
    sort = target.sort_of(x)
    hyp = ind_hypothesis(target, x)
    premise = Sequent(target.ctx, target.hyps + (hyp,), target.concl)

    def complete(dp: Deriv) -> Deriv:
        assert dp.seq == premise, "completion requires a derivation of the premise sequent"
        ctx, gamma, delta = target.ctx, target.hyps, target.concl
        names = [v for v, _s in ctx]
        avoid = set(names)
        u = fresh_name("u", avoid)
        avoid.add(u)
        others = [(v, s) for v, s in ctx if v != x]
        copies = {}
        for v, _s in others:
            copies[v] = fresh_name(f"{v}*", avoid)
            avoid.add(copies[v])
        sub = {x: u, **copies}
        wide = ctx + ((u, sort),) + tuple((copies[v], s) for v, s in others)

        # the closed sequent formula, as a function of u
        chain_u = subst_free(fold_imp(gamma, delta), sub)
        phi_u: Formula = chain_u
        for v, _s in reversed(others):
            phi_u = Forall(dict(ctx)[v], close_free(phi_u, copies[v]), hint=f"{v}*")
        ih_u = Forall(sort, Imp(Gt(sort, FreeV(u), BoundV(0)), close_free(phi_u, u)), hint=f"{u}'")

        core_hyps = gamma + (ih_u,) + tuple(subst_free(g, sub) for g in gamma)

        # H[u/x] from the kernel induction hypothesis, by pure plumbing
        binders, _body = peel_forall(hyp)
        block = ind_block(target, x)
        assert len(binders) == len(block)
        tavoid = {v for v, _s in wide} | set(avoid)
        ts = {}
        for v, _s in block:
            ts[v] = fresh_name(f"{v}^", tavoid)
            tavoid.add(ts[v])
        inner_ctx = wide + tuple((ts[v], s) for v, s in block)
        guard = Gt(sort, FreeV(u), FreeV(ts[x]))
        inner_hyps = core_hyps + (guard,)
        a = assumption(inner_ctx, inner_hyps, len(gamma))  # ih_u
        a = forall_elim(a, ts[x])
        g = assumption(inner_ctx, inner_hyps, len(inner_hyps) - 1)
        a = imp_elim(a, g)  # phi at ts[x]
        elim_order = [ts[v] if v in ts else copies[v] for v, _s in others]
        a = forall_elims(a, elim_order)
        a = imp_intro(a)
        for _v, _s in reversed(block):
            a = forall_intro(a)
        h_at_u = subst_free(hyp, {x: u})
        assert a.seq.concl == h_at_u, "induction hypothesis reconstruction mismatch"

        # the retargeted premise derivation, applied to the copied hypotheses
        dr = retarget(dp, sub, wide)
        chain = imp_intro_all(dr)
        d = weaken_all(chain, core_hyps)
        for i in range(len(gamma)):
            d = imp_elim(d, assumption(wide, core_hyps, len(gamma) + 1 + i))
        d = imp_elim(d, a)

        # close over the copies and induct
        for _ in range(len(gamma)):
            d = imp_intro(d)
        for _v, _s in reversed(others):
            d = forall_intro(d)
        d = gt_ind(d)

        # instantiate back at the original variables and discharge
        d = forall_elim(d, x)
        d = forall_elims(d, [v for v, _s in others])
        for i in range(len(gamma)):
            d = imp_elim(d, assumption(ctx, gamma, i))
        assert d.seq == target
        return d

    return IndPrime(target, x, hyp, premise, complete)


def hyp_monotone(
    hyp: Formula,
    hyp_index: int,
    y: str,
    ctx: tuple[tuple[str, str], ...],
    hyps: tuple[Formula, ...],
    geq_fact: Callable[[tuple[tuple[str, str], ...], tuple[Formula, ...]], Deriv],
) -> Deriv:
    """Derive ``hyp[y/w]`` from ``hyp`` (at ``hyp_index``) and ``w >= y``.

    ``hyp`` must be an induction hypothesis: a quantifier block over a guard
    ``w > copy`` with ``w`` its only free variable.  ``geq_fact`` must produce
    a derivation of ``w >= y`` over any extension of the given sequent.
    """
    (w,) = free_vars(hyp)
    binders, body = peel_forall(hyp)
    assert isinstance(body, Imp) and isinstance(body.lhs, Gt) and body.lhs.left == FreeV(w)
    sort = body.lhs.sort
    avoid = {v for v, _s in ctx}
    ts = []
    for bsort, hint in binders:
        t = fresh_name(hint.rstrip("'") + "^", avoid)
        avoid.add(t)
        ts.append((t, bsort))
    inner_ctx = ctx + tuple(ts)
    opened = hyp
    for t, _s in ts:
        opened = open_bound(opened.body, t)  # type: ignore[union-attr]
    assert isinstance(opened, Imp)
    guard_ix = opened.lhs  # w > t_x
    assert isinstance(guard_ix, Gt)
    tx = guard_ix.right
    assert isinstance(tx, FreeV)
    new_guard = Gt(sort, FreeV(y), tx)
    inner_hyps = hyps + (new_guard,)
    a = assumption(inner_ctx, inner_hyps, hyp_index)
    a = forall_elims(a, [t for t, _s in ts])
    wy = geq_fact(inner_ctx, inner_hyps)
    yg = assumption(inner_ctx, inner_hyps, len(inner_hyps) - 1)
    a = imp_elim(a, gt_extend0(wy, yg))
    a = imp_intro(a)
    for _ in ts:
        a = forall_intro(a)
    assert a.seq.concl == subst_free(hyp, {w: y})
    return a
