"""The command line, run in process through main()."""

import json
from pathlib import Path

import pytest

from cycind import formats
from cycind.cli import main

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_sct_terminating(capsys):
    code, out, err = run(capsys, "sct", DATA / "plus.fun")
    assert (code, out, err) == (0, "terminating (closure size 3)\n", "")


def test_sct_non_terminating(capsys):
    code, out, err = run(capsys, "sct", DATA / "loop.fun")
    assert code == 1
    assert out == (
        "non-terminating: cycle with no progressing trace\n"
        "  prefix: (empty)\n"
        "  cycle:  f.0\n"
        "  (closure size 1)\n"
    )


def test_sct_json(capsys):
    code, out, err = run(capsys, "sct", DATA / "ack.fun", "--json")
    assert code == 0
    assert json.loads(out) == {
        "terminating": True,
        "closure_size": 2,
        "counterexample": None,
    }


def test_sct_json_counterexample(capsys):
    code, out, err = run(capsys, "sct", DATA / "loop.fun", "--json")
    assert code == 1
    assert json.loads(out)["counterexample"] == {"prefix": [], "cycle": ["f.0"]}


def test_sct_unknown_roots(capsys):
    code, out, err = run(capsys, "sct", DATA / "plus.fun", "--roots", "nosuch")
    assert (code, err) == (2, "error: unknown roots: nosuch\n")


def test_sct_on_derivation_document(capsys, tmp_path, pipelines):
    p = pipelines["plus"]
    path = tmp_path / "deriv.json"
    path.write_text(formats.dumps(formats.derivation_to_doc(p.deriv, p.system)))
    code, out, err = run(capsys, "sct", path)
    assert (code, out) == (0, "terminating (closure size 3)\n")


def test_sct_refuses_proof_documents(capsys, tmp_path, pipelines):
    p = pipelines["plus"]
    path = tmp_path / "proof.json"
    path.write_text(formats.dumps(formats.proof_to_doc(p.proof, p.system)))
    code, out, err = run(capsys, "sct", path)
    assert code == 2
    assert err == "error: cannot run termination analysis on a proof document\n"


def test_unravel_writes_a_checkable_proof(capsys, tmp_path):
    out_path = tmp_path / "proof.json"
    code, out, err = run(capsys, "unravel", DATA / "plus.fun", "--out", out_path)
    assert code == 0
    assert out == f"wrote proof: 214 nodes, 1 induction applications -> {out_path}\n"
    kind, _ = formats.loads(out_path.read_text())
    assert kind == "proof"
    code, out, err = run(capsys, "verify", out_path)
    assert code == 0
    assert out == (
        "ok: 214 nodes, conclusion [x0_0:Nat, x0_1:Nat]  |- plus(x0_0, x0_1)\n"
    )


def test_unravel_to_stdout(capsys):
    code, out, err = run(capsys, "unravel", DATA / "plus.fun")
    assert code == 0
    kind, (sysm, proof) = formats.loads(out)
    assert kind == "proof"


def test_unravel_trace_and_dot(capsys, tmp_path):
    dot_path = tmp_path / "rep.dot"
    code, out, err = run(
        capsys, "unravel", DATA / "plus.fun",
        "--out", tmp_path / "p.json", "--trace", "--dot", dot_path,
    )
    assert code == 0
    assert out.startswith((GOLDEN / "plus.trace").read_text())
    assert out.endswith("induction applications -> " + str(tmp_path / "p.json") + "\n")
    assert dot_path.read_text().startswith("digraph")


def test_unravel_unsound_input(capsys):
    code, out, err = run(capsys, "unravel", DATA / "loop.fun")
    assert code == 1
    assert err == (
        "input is not sound: cycle with no progressing trace\n"
        "  prefix: (empty)\n"
        "  cycle:  f.0\n"
    )
    assert out == ""


def test_unravel_fun_selects_and_rejects(capsys, tmp_path, pipelines):
    code, out, err = run(capsys, "unravel", DATA / "plus.fun", "--fun", "nosuch")
    assert (code, err) == (2, "error: no function 'nosuch' in the input\n")
    p = pipelines["plus"]
    path = tmp_path / "deriv.json"
    path.write_text(formats.dumps(formats.derivation_to_doc(p.deriv, p.system)))
    code, out, err = run(capsys, "unravel", path, "--fun", "plus")
    assert (code, err) == (2, "error: --fun only applies to call-system inputs\n")


def test_unravel_refuses_reps(capsys, tmp_path, pipelines):
    path = tmp_path / "rep.json"
    path.write_text(formats.dumps(formats.rep_to_doc(pipelines["plus"].rep)))
    code, out, err = run(capsys, "unravel", path)
    assert (code, err) == (2, "error: cannot unravel a resetrep document\n")


def test_verify_flags_a_broken_proof(capsys, tmp_path, pipelines):
    p = pipelines["plus"]
    doc = formats.proof_to_doc(p.proof, p.system)
    doc["nodes"][doc["root"]]["rule"] = "bogus"
    path = tmp_path / "bad.json"
    path.write_text(formats.dumps(doc))
    code, out, err = run(capsys, "verify", path)
    assert (code, err) == (1, "invalid proof: at root: unknown rule 'bogus'\n")


def test_verify_wants_proofs(capsys):
    code, out, err = run(capsys, "verify", DATA / "plus.fun")
    assert (code, err) == (2, "error: verify expects a proof document, found callsystem\n")


def test_show_call_system(capsys):
    code, out, err = run(capsys, "show", DATA / "plus.fun")
    assert code == 0
    assert out == (
        "call system: 1 functions, 1 calls\n"
        "  fun plus(Nat, Nat)\n"
        "  plus.0: plus -> plus  {0>1, 1>=0}\n"
    )


def test_show_derivation(capsys, tmp_path, pipelines):
    p = pipelines["plus"]
    path = tmp_path / "deriv.json"
    path.write_text(formats.dumps(formats.derivation_to_doc(p.deriv, p.system)))
    code, out, err = run(capsys, "show", path)
    assert (code, out) == (0, "derivation: 1 nodes, root plus\n  plus: plus [plus]\n")


def test_show_rep_renders_the_trace(capsys, tmp_path, pipelines):
    path = tmp_path / "rep.json"
    path.write_text(formats.dumps(formats.rep_to_doc(pipelines["plus"].rep)))
    code, out, err = run(capsys, "show", path)
    assert code == 0
    assert out == (GOLDEN / "plus.trace").read_text()


def test_show_proof_histogram(capsys, tmp_path, pipelines):
    p = pipelines["plus"]
    path = tmp_path / "proof.json"
    path.write_text(formats.dumps(formats.proof_to_doc(p.proof, p.system)))
    code, out, err = run(capsys, "show", path)
    assert code == 0
    assert out == (
        "proof: 214 nodes\n"
        "  conclusion: [x0_0:Nat, x0_1:Nat]  |- plus(x0_0, x0_1)\n"
        "  c_rule: 2\n"
        "  exchange: 44\n"
        "  forall_elim: 6\n"
        "  forall_intro: 3\n"
        "  geq_refl: 5\n"
        "  geq_subsum: 2\n"
        "  geq_trans: 4\n"
        "  gt_extend0: 1\n"
        "  gt_ind: 1\n"
        "  identity: 20\n"
        "  imp_elim: 19\n"
        "  imp_intro: 16\n"
        "  weakening: 91\n"
    )


def test_show_dot(capsys, tmp_path, pipelines):
    code, out, err = run(capsys, "show", DATA / "plus.fun", "--dot")
    assert code == 0
    assert out.startswith("digraph")
    path = tmp_path / "proof.json"
    p = pipelines["plus"]
    path.write_text(formats.dumps(formats.proof_to_doc(p.proof, p.system)))
    code, out, err = run(capsys, "show", path, "--dot")
    assert (code, err) == (2, "error: no dot rendering for proof documents\n")


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "sct", tmp_path / "nosuch.fun")
    assert code == 2
    assert err.startswith("error: ")
    assert "nosuch.fun" in err


def test_parse_error_in_fun_source(capsys, tmp_path):
    path = tmp_path / "broken.fun"
    path.write_text("sort Nat = 0\nfun f(Nat)\nf(x) := x ? x\n")
    code, out, err = run(capsys, "sct", path)
    assert code == 2
    assert err == f"error: {path}: line 3: unexpected character '?'\n"


def test_bad_json_document(capsys, tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{]")
    code, out, err = run(capsys, "verify", path)
    assert code == 2
    assert err.startswith(f"error: {path}: not valid JSON")
