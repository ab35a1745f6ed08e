"""A passive system that admits no port-Hamiltonian realization.

z' = -z + 2u, y = 0: every input supplies zero energy, the storage
H = 0 certifies passivity, but no positive definite Q satisfies Q B = C^T
when C = 0 and B != 0.
"""
from phrealize import DEFAULT, LtiSystem, passivity_certificate, realize_general
from phrealize.cli import analyze
from phrealize.errors import ConditionsFailedAtStep

sys = LtiSystem([[-1.0]], [[2.0]], [[0.0]], [[0.0]])

cert = passivity_certificate(sys)
print("storage certificate:", cert.Q.ravel(), cert.kind)

rep = analyze(sys, DEFAULT)
print("verdicts:", rep["verdicts"])

try:
    realize_general(sys)
except ConditionsFailedAtStep as exc:
    print(f"realization fails at step {exc.step} ({exc.condition_id}): {exc}")
