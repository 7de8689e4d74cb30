"""Decide whether recursive definitions terminate on size arguments alone.

A call system records, for every recursive call, which callee arguments are
known to be smaller (>) or no larger (>=) than which caller arguments.  The
decision procedure composes these graphs until nothing new appears; the
system terminates exactly when every idempotent composite carries a strict
self-edge.
"""

from cycind import decide_termination, parse_call_system

ACK = """
sort Nat = 0 | suc(Nat)
fun ack(Nat, Nat)
ack(0, x1) := suc(x1)
ack(suc(x0'), 0) := ack(x0', suc(0))
ack(suc(x0'), suc(x1')) := ack(x0', ack(suc(x0'), x1'))
"""

cs = parse_call_system(ACK)
print("extracted calls:")
for call in cs.calls:
    print(f"  {call.id}: {call.dom} -> {call.codom}  {call.graph}")

verdict = decide_termination(cs)
print(f"\nterminating: {verdict.terminating}"
      f" (checked {verdict.closure_size} composite graphs)")

# Stop matching on the first argument in the nested clause and nothing
# shrinks across the outer call any more; the negative verdict comes with a
# concrete lasso: a call sequence that can repeat with no argument shrinking.
broken = parse_call_system(
    "sort Nat = 0 | suc(Nat)\n"
    "fun ack(Nat, Nat)\n"
    "ack(0, x1) := suc(x1)\n"
    "ack(suc(x0'), 0) := ack(x0', suc(0))\n"
    "ack(x0, suc(x1')) := ack(x0, ack(x0, x1'))\n"
)
verdict = decide_termination(broken)
print(f"\nweakened variant terminating: {verdict.terminating}")
print(f"repeatable call cycle with no progress: {verdict.counterexample}")
