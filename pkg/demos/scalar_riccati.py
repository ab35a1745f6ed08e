"""Scalar Riccati example: extremal storages and where they stop existing.

The system  x' = -(1 + alpha) x + u,  y = -x + u/2  is passive for
alpha >= 1. Its Riccati equation reduces to q^2 - 2 alpha q + 1 = 0, so
the extremal storages are alpha -+ sqrt(alpha^2 - 1).
"""
import numpy as np

from phrealize import LtiSystem, build_even_pencil, pencil_spectrum, solve_are
from phrealize.errors import NoLagrangianSubspace


def scalar(alpha):
    return LtiSystem([[-1.0 - alpha]], [[1.0]], [[-1.0]], [[0.5]])


for alpha in (1.0, 2.0, 10.0):
    sys = scalar(alpha)
    qm = solve_are(sys.A, sys.B, sys.C, sys.S, side="left").Q[0, 0]
    qp = solve_are(sys.A, sys.B, sys.C, sys.S, side="right").Q[0, 0]
    r = np.sqrt(alpha ** 2 - 1)
    print(f"alpha={alpha:5.1f}  Q-={qm:.12f} (exact {alpha - r:.12f})"
          f"  Q+={qp:.12f} (exact {alpha + r:.12f})")

# the even pencil carries the same information; one infinite eigenvalue
ps = pencil_spectrum(build_even_pencil(scalar(2.0)))
print("pencil finite eigenvalues:", np.round(ps["finite"].real, 12), "infinite:", ps["n_infinite"])

# below alpha = 1 the Hamiltonian eigenvalues sit on the imaginary axis
sys = scalar(0.5)
try:
    solve_are(sys.A, sys.B, sys.C, sys.S)
except NoLagrangianSubspace as exc:
    print("alpha=0.5:", exc.condition_id, "-", exc)
