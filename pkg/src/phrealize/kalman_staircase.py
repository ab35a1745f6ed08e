"""Orthogonal Kalman decomposition via staircase reductions.

The result exposes, in the order used by the Riccati construction, the
controllable-observable part, the controllable-unobservable part and the
uncontrollable part::

    U^T A U = [[A11,   0, A13],     U^T B = [[B1],     C U = [C1, 0, C3]
               [A21, A22, A23],              [B2],
               [  0,   0, A33]]              [ 0]]
"""

from dataclasses import dataclass

import numpy as np

from .linalg_kernels import ranked_svd
from .system_model import LtiSystem
from .tolerances import DEFAULT

__all__ = ["StaircaseForm", "controllable_subspace", "staircase_decompose",
           "pbh_controllable", "pbh_observable"]


@dataclass(frozen=True, eq=False)
class StaircaseForm:
    U: np.ndarray
    n_co: int
    n_c_unobs: int
    n_unctrl: int
    At: np.ndarray
    Bt: np.ndarray
    Ct: np.ndarray
    rank_decisions: tuple

    def _blk(self, M, i, j):
        cuts = np.cumsum([0, self.n_co, self.n_c_unobs, self.n_unctrl])
        return M[cuts[i]:cuts[i + 1], cuts[j]:cuts[j + 1]]

    @property
    def A11(self):
        return self._blk(self.At, 0, 0)

    @property
    def A21(self):
        return self._blk(self.At, 1, 0)

    @property
    def A22(self):
        return self._blk(self.At, 1, 1)

    @property
    def A13(self):
        return self._blk(self.At, 0, 2)

    @property
    def A23(self):
        return self._blk(self.At, 1, 2)

    @property
    def A33(self):
        return self._blk(self.At, 2, 2)

    @property
    def B1(self):
        return self.Bt[:self.n_co]

    @property
    def B2(self):
        return self.Bt[self.n_co:self.n_co + self.n_c_unobs]

    @property
    def C1(self):
        return self.Ct[:, :self.n_co]

    @property
    def C3(self):
        return self.Ct[:, self.n_co + self.n_c_unobs:]

    def pattern_residual(self):
        """Norm of the entries that must vanish in the staircase pattern."""
        nc = self.n_co + self.n_c_unobs
        parts = [self.At[nc:, :nc], self.Bt[nc:], self._blk(self.At, 0, 1),
                 self.Ct[:, self.n_co:nc]]
        return max((np.linalg.norm(p) for p in parts if p.size), default=0.0)


def controllable_subspace(A, B, rank_tol=DEFAULT.rank_tol, scale=None):
    """Orthogonal U whose first ``n_c`` columns span the controllable subspace.

    Classic staircase: compress the input map with an SVD, then repeat on
    the part of A that feeds the not yet reached coordinates.

    Returns
    -------
    U, n_c, decisions
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if scale is None:
        scale = max(np.linalg.norm(A, 2) if n else 0.0,
                    np.linalg.norm(B, 2) if B.size else 0.0, np.finfo(float).tiny)
    U = np.eye(n)
    At = A.copy()
    done = 0
    G = B.copy()
    decisions = []
    while done < n and G.size:
        sv = ranked_svd(G, rank_tol, scale)
        decisions.append({"rank": sv.rank, "sigma": sv.Sigma.tolist()})
        if sv.rank == 0:
            break
        W = np.eye(n)
        W[done:, done:] = sv.U
        U = U @ W
        At = W.T @ At @ W
        new = done + sv.rank
        G = At[new:, done:new]
        done = new
    return U, done, tuple(decisions)


def staircase_decompose(sys, rank_tol=DEFAULT.rank_tol):
    """Kalman-type decomposition of ``sys`` (see module docstring).

    Returns
    -------
    StaircaseForm
    """
    A, B, C = sys.A, sys.B, sys.C
    n = A.shape[0]
    scale = max(np.linalg.norm(A, 2) if n else 0.0,
                np.linalg.norm(B, 2) if B.size else 0.0,
                np.linalg.norm(C, 2) if C.size else 0.0, np.finfo(float).tiny)
    Uc, nc, dc = controllable_subspace(A, B, rank_tol, scale)
    Ac = Uc[:, :nc].T @ A @ Uc[:, :nc]
    Cc = C @ Uc[:, :nc]
    # observable part of the controllable subsystem via the dual staircase
    Uo, no, do = controllable_subspace(Ac.T, Cc.T, rank_tol, scale)
    W = np.eye(n)
    W[:nc, :nc] = Uo
    U = Uc @ W
    At = U.T @ A @ U
    Bt = U.T @ B
    Ct = C @ U
    return StaircaseForm(U, no, nc - no, n - nc, At, Bt, Ct, dc + do)


def _pbh(A, X, rank_tol):
    n = A.shape[0]
    if n == 0:
        return True
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(X, 2) if X.size else 0.0,
                np.finfo(float).tiny)
    for lam in np.linalg.eigvals(A):
        Mx = np.hstack([lam * np.eye(n) - A, X.astype(complex)])
        s = np.linalg.svd(Mx, compute_uv=False)
        if np.sum(s > rank_tol * scale) < n:
            return False
    return True


def pbh_controllable(A, B, rank_tol=DEFAULT.rank_tol):
    """PBH test: rank [sI - A, B] = n at every eigenvalue s of A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return _pbh(A, np.asarray(B, dtype=float).reshape(A.shape[0], -1), rank_tol)


def pbh_observable(A, C, rank_tol=DEFAULT.rank_tol):
    """PBH test on the dual pair (A^T, C^T)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.asarray(C, dtype=float).reshape(-1, A.shape[0])
    return _pbh(A.T, C.T, rank_tol)
