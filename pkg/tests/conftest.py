import dataclasses

import pytest

from cycind import (
    build_reset_rep,
    check_proof,
    induced_proof_system,
    respect_induction_order,
    translate,
)

import systems


@dataclasses.dataclass
class Pipeline:
    cs: object
    system: object
    deriv: object
    rep: object      # after both phases
    proof: object


@pytest.fixture(scope="session")
def pipelines():
    """The five worked systems taken all the way to checked proofs, once."""
    out = {}
    for name in ("plus", "ack", "dist", "treedist", "fg"):
        cs = systems.load(name)
        system, derivs = induced_proof_system(cs)
        deriv = derivs[systems.ROOT_FUN[name]]
        rep = respect_induction_order(build_reset_rep(deriv, system))
        proof = translate(rep)
        check_proof(system, proof)
        out[name] = Pipeline(cs, system, deriv, rep, proof)
    return out
