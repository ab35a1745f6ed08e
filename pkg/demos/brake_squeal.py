"""Disc brake squeal: friction coupling destroys the PH structure.

Without the non-conservative circulatory term N the brake model is a
damped gyroscopic system and realizes as PH. Scaling up a rank-two skew N
makes the symmetric part of R indefinite and, for large enough N, drives
an eigenvalue into the right half plane (squeal). realize_general then
reports instability. In between, R is indefinite in the mechanical
coordinates yet the system is still stable and passive, so other
coordinates with a PH form exist.
"""
import numpy as np

from phrealize import brake_squeal_instance, realize_general
from phrealize.errors import NotStable

for scale in (0.0, 0.5, 2.0, 5.0):
    sys, rep = brake_squeal_instance(10, rank_n=0 if scale == 0 else 1, n_scale=scale, seed=0)
    line = (f"N scale {scale:4.1f}: lambda_min(R) = {rep['lambda_min_R']:8.3f}, "
            f"max Re eig = {rep['max_real_part']:8.4f}")
    try:
        _, ph, _ = realize_general(sys)
        print(line, "-> PH realization, cond(Q) =", round(float(np.linalg.cond(ph.Q)), 2))
    except NotStable as exc:
        print(line, "->", exc.condition_id)
    except Exception as exc:
        print(line, "->", type(exc).__name__, getattr(exc, "condition_id", ""))
