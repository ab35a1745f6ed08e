"""Lyapunov equations and the Lyapunov inequality ``A^T Q + Q A <= 0``.

A symmetric Q > 0 solving the inequality exists exactly when A is stable:
no eigenvalue in the open right half plane and all imaginary-axis
eigenvalues semisimple. The construction splits A into its asymptotically
stable part (solved with a Lyapunov equation) and its imaginary-axis part
(normalized to skew-symmetric form, where the identity works).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotStable, SolveFailure, UnstableMatrix
from .linalg_kernels import SpectralSplit, lambda_max, split_stable_imaginary, sym
from .tolerances import DEFAULT

__all__ = ["LyapunovSolution", "lyapunov_equation", "solve_lyapunov_inequality",
           "is_lyapunov_solution"]


@dataclass(frozen=True, eq=False)
class LyapunovSolution:
    Q: np.ndarray
    Theta: np.ndarray
    split: SpectralSplit
    decay: float
    cond_M: float


def lyapunov_equation(A, Theta):
    """Solve ``A^T Q + Q A + Theta = 0`` for an asymptotically stable A.

    Raises
    ------
    UnstableMatrix
        If A has an eigenvalue with nonnegative real part.
    SolveFailure
        If the residual of the computed solution is not small.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Theta = sym(np.atleast_2d(Theta))
    if A.size == 0:
        return np.zeros((0, 0))
    ev = np.linalg.eigvals(A)
    if ev.real.max() >= 0:
        raise UnstableMatrix("A is not asymptotically stable",
                             witnesses={"max_real_part": float(ev.real.max())})
    Q = sym(sla.solve_continuous_lyapunov(A.T, -Theta))
    res = np.linalg.norm(A.T @ Q + Q @ A + Theta)
    ref = 2 * np.linalg.norm(A) * np.linalg.norm(Q) + np.linalg.norm(Theta)
    if not np.isfinite(res) or res > 1e-8 * ref:
        raise SolveFailure("Lyapunov residual too large", witnesses={"residual": float(res)})
    return Q


def solve_lyapunov_inequality(A, tol=DEFAULT):
    """Construct Q > 0 with ``A^T Q + Q A <= 0``.

    Returns
    -------
    LyapunovSolution
        ``Theta`` is the achieved right-hand side,
        ``A^T Q + Q A = -Theta = -M^T diag(I, 0) M``, and ``decay`` the
        margin ``-lambda_max(A^T Q + Q A)`` (positive only in the
        asymptotically stable case).

    Raises
    ------
    NotStable
        With ``condition_id`` ``not_stable`` for a right half-plane
        eigenvalue and ``not_semisimple`` for a defective axis eigenvalue.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    try:
        split = split_stable_imaginary(A, tol.axis_tol, cluster_tol=tol.cluster_tol,
                                       normalize=True)
    except UnstableMatrix as exc:
        raise NotStable("A has an eigenvalue in the right half plane",
                        condition_id="not_stable", witnesses=exc.witnesses) from exc
    if not split.semisimple_flag:
        raise NotStable("an imaginary-axis eigenvalue is not semisimple",
                        condition_id="not_semisimple",
                        witnesses={"clusters": list(split.rank_decisions)})
    M, n1, n2 = split.M_transform, split.n1, split.n2
    if n2 == 0:
        Q = lyapunov_equation(A, np.eye(n))
        Theta = np.eye(n)
    else:
        Q1 = lyapunov_equation(split.A1, np.eye(n1))
        Q = sym(M.T @ sla.block_diag(Q1, np.eye(n2)) @ M)
        Theta = sym(M.T @ sla.block_diag(np.eye(n1), np.zeros((n2, n2))) @ M)
    decay = -lambda_max(A.T @ Q + Q @ A) if n else 0.0
    return LyapunovSolution(Q, Theta, split, float(decay), split.cond_M)


def is_lyapunov_solution(A, Q, tol=DEFAULT):
    """Membership test for user-supplied candidates."""
    A = np.asarray(A, dtype=float)
    Q = sym(Q)
    if np.linalg.eigvalsh(Q)[0] <= 0:
        return False
    scale = max(np.linalg.norm(A, 2) * np.linalg.norm(Q, 2), 1e-300)
    return lambda_max(A.T @ Q + Q @ A) <= tol.tol_psd * scale
