"""System data types, validation, PH assembly and the dissipation check.

An LTI system ``x' = Ax + Bu, y = Cx + Du`` is port-Hamiltonian when it can
be written as::

    xi' = (J - R) Q xi + (F - P) phi
    eta = (F + P)^T Q xi + (S + N) phi

with J, N skew, Q > 0 and K = [[R, P], [P^T, S]] >= 0.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CertificateRejected, InputError, IntegrationFailure, SingularT
from .linalg_kernels import lambda_max, lambda_min, sym
from .tolerances import DEFAULT

__all__ = [
    "LtiSystem", "PhRealization", "EquivalenceTransform", "StorageCertificate",
    "validate_lti", "lmi_matrix", "lmi_scale", "lmi_residual",
    "assemble_ph_from_storage", "transform_system", "transfer_function",
    "dissipation_check", "ph_to_lti",
]


def _mat(x, shape=None):
    a = np.array(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(shape if shape is not None else (1, -1))
    return a


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """Dense state-space system (A, B, C, D)."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _mat(self.A)
        n = A.shape[0]
        B = _mat(self.B, (n, -1) if n else None)
        C = _mat(self.C)
        D = _mat(self.D)
        for name, val in zip("ABCD", (A, B, C, D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_arrays(cls, A, B, C, D, check=True):
        sys = cls(A, B, C, D)
        if check:
            bad = validate_lti(sys)
            if bad:
                raise InputError("; ".join(bad))
        return sys

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def S(self):
        """Symmetric part of the feedthrough, D + D^T."""
        return self.D + self.D.T

    def norm(self):
        return max(np.linalg.norm(np.block([[self.A, self.B], [self.C, self.D]]), 2), 1.0) \
            if self.n else max(np.linalg.norm(self.D, 2), 1.0)


def validate_lti(sys):
    """List of violated invariants (empty when the system is well formed)."""
    out = []
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        out.append(f"dimension mismatch: A is {A.shape}, expected square")
        return out
    n = A.shape[0]
    m = B.shape[1] if B.ndim == 2 else -1
    if B.ndim != 2 or B.shape[0] != n:
        out.append(f"dimension mismatch: B is {B.shape}, expected ({n}, m)")
    if C.ndim != 2 or C.shape != (m, n):
        out.append(f"dimension mismatch: C is {C.shape}, expected ({m}, {n})")
    if D.ndim != 2 or D.shape != (m, m):
        out.append(f"dimension mismatch: D is {D.shape}, expected ({m}, {m})")
    for name, M in zip("ABCD", (A, B, C, D)):
        if not np.all(np.isfinite(M)):
            out.append(f"non-finite entry in {name}")
    return out


@dataclass(frozen=True, eq=False)
class PhRealization:
    """Port-Hamiltonian data (J, R, Q, F, P, S, N)."""
    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    F: np.ndarray
    P: np.ndarray
    S: np.ndarray
    N: np.ndarray

    @property
    def K(self):
        return np.block([[self.R, self.P], [self.P.T, self.S]])

    @property
    def n(self):
        return self.J.shape[0]

    @property
    def m(self):
        return self.S.shape[0]

    def violations(self, tol=DEFAULT):
        """Invariant violations at the given tolerances (empty if valid)."""
        out = []

        def rel(x, M):
            return x / max(1.0, np.linalg.norm(M, 2)) if M.size else 0.0

        if rel(np.linalg.norm(self.J + self.J.T), self.J) > tol.tol_sym:
            out.append("J not skew-symmetric")
        if rel(np.linalg.norm(self.R - self.R.T), self.R) > tol.tol_sym:
            out.append("R not symmetric")
        if rel(np.linalg.norm(self.S - self.S.T), self.S) > tol.tol_sym:
            out.append("S not symmetric")
        if rel(np.linalg.norm(self.N + self.N.T), self.N) > tol.tol_sym:
            out.append("N not skew-symmetric")
        if self.n and lambda_min(self.Q) <= 0:
            out.append("Q not positive definite")
        K = self.K
        if K.size and lambda_min(K) < -tol.tol_psd * max(np.linalg.norm(K, 2), 1.0):
            out.append("K not positive semidefinite")
        return out


@dataclass(frozen=True, eq=False)
class EquivalenceTransform:
    """State map T (invertible) and orthogonal input/output map V."""
    T: np.ndarray
    V: np.ndarray

    @property
    def cond_T(self):
        return float(np.linalg.cond(self.T)) if self.T.size else 1.0

    def orthogonality_residual(self):
        V = self.V
        return float(np.linalg.norm(V.T @ V - np.eye(V.shape[0]))) if V.size else 0.0


@dataclass(frozen=True, eq=False)
class StorageCertificate:
    """Symmetric Q with the largest eigenvalue of the negated LMI matrix."""
    Q: np.ndarray
    kind: str
    lmi_residual: float
    scale: float = 1.0
    details: dict = None

    def __post_init__(self):
        object.__setattr__(self, "Q", sym(self.Q))


def lmi_matrix(sys, Q):
    """The matrix [[-A^T Q - Q A, C^T - Q B], [C - B^T Q, D + D^T]]."""
    A, B, C = sys.A, sys.B, sys.C
    Q = sym(Q)
    W = np.block([[-A.T @ Q - Q @ A, C.T - Q @ B], [C - B.T @ Q, sys.S]])
    return sym(W)


def lmi_scale(sys, Q):
    """Magnitude used to judge the LMI residual of a candidate Q."""
    nQ = np.linalg.norm(Q, 2) if np.size(Q) else 0.0
    parts = [1.0, 2 * np.linalg.norm(sys.A, 2) * nQ if sys.n else 0.0,
             (np.linalg.norm(sys.B, 2) * nQ + np.linalg.norm(sys.C, 2)) if sys.n and sys.m else 0.0,
             np.linalg.norm(sys.S, 2) if sys.m else 0.0]
    return float(max(parts))


def lmi_residual(sys, Q):
    """Largest eigenvalue of the negated LMI matrix (<= 0 means feasible)."""
    W = lmi_matrix(sys, Q)
    return -lambda_min(W) if W.size else 0.0


def transform_system(sys, T, V=None):
    """Return (T A T^-1, T B V, V^T C T^-1, V^T D V)."""
    T = np.asarray(T, dtype=float)
    V = np.eye(sys.m) if V is None else np.asarray(V, dtype=float)
    Ti = np.linalg.inv(T) if T.size else T
    return LtiSystem(T @ sys.A @ Ti, T @ sys.B @ V, V.T @ sys.C @ Ti, V.T @ sys.D @ V)


def assemble_ph_from_storage(sys, T, V=None, tol=DEFAULT, check=True):
    """Port-Hamiltonian data in the coordinates ``xi = T x`` (so Q = I).

    Parameters
    ----------
    sys : LtiSystem
    T : (n, n) array_like
        Invertible factor of a storage matrix, ``Q = T^T T``.
    V : (m, m) array_like, optional
        Orthogonal input/output transformation, identity by default.
    check : bool
        Re-verify the LMI for Q = T^T T before assembling.

    Returns
    -------
    PhRealization

    Raises
    ------
    SingularT, CertificateRejected
    """
    T = np.atleast_2d(np.asarray(T, dtype=float)) if sys.n else np.zeros((0, 0))
    if sys.n:
        s = np.linalg.svd(T, compute_uv=False)
        if s[-1] <= 1e3 * np.finfo(float).eps * s[0]:
            raise SingularT("T is singular to working precision",
                            witnesses={"sigma_min": float(s[-1]), "sigma_max": float(s[0])})
    if check:
        Q = T.T @ T
        res = lmi_residual(sys, Q)
        scale = lmi_scale(sys, Q)
        if res > tol.tol_psd * scale:
            raise CertificateRejected("Q = T^T T does not satisfy the LMI",
                                      witnesses={"lmi_residual": res, "scale": scale})
    ts = transform_system(sys, T, V)
    At, Bt, Ct, Dt = ts.A, ts.B, ts.C, ts.D
    J = 0.5 * (At - At.T)
    R = -0.5 * (At + At.T)
    F = 0.5 * (Bt + Ct.T)
    P = -0.5 * (Bt - Ct.T)
    S = 0.5 * (Dt + Dt.T)
    N = 0.5 * (Dt - Dt.T)
    return PhRealization(J, R, np.eye(sys.n), F, P, S, N)


def ph_to_lti(ph):
    """Expand PH data to (A, B, C, D)."""
    return LtiSystem((ph.J - ph.R) @ ph.Q, ph.F - ph.P, (ph.F + ph.P).T @ ph.Q, ph.S + ph.N)


def transfer_function(sys, s):
    """C (sI - A)^-1 B + D at the complex point ``s``."""
    n = sys.n
    if n == 0:
        return sys.D.astype(complex)
    X = np.linalg.solve(s * np.eye(n) - sys.A, sys.B.astype(complex))
    return sys.C @ X + sys.D


def _as_signal(u, m, horizon, steps):
    """Wrap an input description as a callable t -> (m,) array."""
    if callable(u):
        return lambda t: np.atleast_1d(np.asarray(u(t), dtype=float)).reshape(m)
    U = np.asarray(u, dtype=float)
    if U.ndim == 1:
        U = U.reshape(-1, 1) if m == 1 else U.reshape(1, -1)
    grid = np.linspace(0.0, horizon, U.shape[0])
    spline = CubicSpline(grid, U, axis=0)
    return lambda t: spline(t)


def dissipation_check(ph, u: Union[Callable, np.ndarray], x0, horizon, steps):
    """Energy balance of a PH system along a simulated trajectory.

    The state is integrated with the classical 4th order Runge-Kutta
    scheme; the supplied energy ``int y^T u dt`` is carried as an extra
    state so that both sides share the same 4th order quadrature.

    Parameters
    ----------
    ph : PhRealization
    u : callable or (k, m) array
        Input signal ``u(t)``; sampled inputs on a uniform grid over
        ``[0, horizon]`` are interpolated by a cubic spline.
    x0 : (n,) array_like
    horizon : float
    steps : int

    Returns
    -------
    lhs, rhs : float
        ``H(x(T)) - H(x(0))`` and ``int_0^T y^T u dt``.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    lti = ph_to_lti(ph)
    A, B, C, D = lti.A, lti.B, lti.C, lti.D
    n, m = lti.n, lti.m
    sig = _as_signal(u, m, horizon, steps)
    h = horizon / steps
    if not np.isfinite(h) or h <= np.finfo(float).eps * max(horizon, 1.0):
        raise IntegrationFailure("step size underflow", witnesses={"h": h})

    def f(t, z):
        x = z[:n]
        ut = sig(t)
        y = C @ x + D @ ut
        return np.concatenate([A @ x + B @ ut, [y @ ut]])

    z = np.concatenate([np.asarray(x0, dtype=float).reshape(n), [0.0]])
    t = 0.0
    for _ in range(steps):
        k1 = f(t, z)
        k2 = f(t + h / 2, z + h / 2 * k1)
        k3 = f(t + h / 2, z + h / 2 * k2)
        k4 = f(t + h, z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if not np.all(np.isfinite(z)):
            raise IntegrationFailure("trajectory diverged", witnesses={"t": t})
    x0v = np.asarray(x0, dtype=float).reshape(n)
    xT = z[:n]
    lhs = 0.5 * xT @ ph.Q @ xT - 0.5 * x0v @ ph.Q @ x0v
    return float(lhs), float(z[n])
