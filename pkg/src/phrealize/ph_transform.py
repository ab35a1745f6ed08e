"""Equivalence of a general LTI system to port-Hamiltonian form.

The construction splits off the kernel of the symmetric feedthrough with an
orthogonal input/output map V0, checks the kernel conditions on the
corresponding input/output columns, and builds a storage matrix Q = T^T T
through the staircase-reduced passivity LMI. The state map T is the
symmetric square root of Q; every other factor with the same Q differs from
it by an orthogonal left factor, which leaves the PH data unchanged up to
an orthogonal change of the PH state.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConditionAViolated, ConditionBViolated, ConditionCViolated, ConditionsFailed,
    ConditionsFailedAtStep, InputError, NoStabilizingZ, NotPsd, NotStable,
    StorageInfeasible, StructureViolation,
)
from .linalg_kernels import (
    biorthogonal_kernel_bases, lambda_min, ranked_svd, sym, symmetric_sqrt_factor,
)
from .lyapunov import solve_lyapunov_inequality
from .riccati_even import even_staircase_reduce, solve_lmi_storage
from .system_model import (
    EquivalenceTransform, LtiSystem, PhRealization, assemble_ph_from_storage,
    lmi_residual, lmi_scale, ph_to_lti,
)
from .tolerances import DEFAULT

__all__ = [
    "FeedthroughSplit", "SkewCaseVerdict", "T0Factor", "RecursionTrace",
    "feedthrough_reduce", "check_skew_case_conditions", "build_t0",
    "realize_skew_case", "realize_general", "passivity_certificate",
    "brake_squeal_instance", "random_ph_realization", "scramble",
]


# ---------------------------------------------------------------------------
# Feedthrough reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FeedthroughSplit:
    V0: np.ndarray
    k0: int
    S2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    eigenvalues: np.ndarray

    @property
    def V0_1(self):
        return self.V0[:, :self.k0]

    @property
    def V0_2(self):
        return self.V0[:, self.k0:]


def feedthrough_reduce(sys, tol=DEFAULT):
    """Orthogonal V0 with ``1/2 V0^T (D + D^T) V0 = blockdiag(0, S2)``.

    The first ``k0`` columns of V0 span the numerical kernel of D + D^T.
    Without a kernel, or with ``D + D^T = 0``, V0 is the identity.
    """
    m = sys.m
    Sh = 0.5 * sys.S
    w, V = np.linalg.eigh(Sh) if m else (np.zeros(0), np.zeros((0, 0)))
    thr = tol.rank_tol * max(sys.norm(), 1e-300)
    ker = np.abs(w) <= thr
    k0 = int(ker.sum())
    if k0 in (0, m):
        V0 = np.eye(m)
        k0 = m if k0 == m else 0
    else:
        V0 = np.hstack([V[:, ker], V[:, ~ker]])
    S2 = sym(V0[:, k0:].T @ Sh @ V0[:, k0:])
    Bv, Cv = sys.B @ V0, V0.T @ sys.C
    return FeedthroughSplit(V0, k0, S2, Bv[:, :k0], Bv[:, k0:], Cv[:k0], Cv[k0:], w)


# ---------------------------------------------------------------------------
# Kernel conditions and the factor T0
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SkewCaseVerdict:
    kernel_ok: bool
    rank_ok: bool
    psd_ok: bool
    rank: int
    witnesses: dict

    @property
    def ok(self):
        return self.kernel_ok and self.rank_ok and self.psd_ok

    @property
    def failed(self):
        ids = [("lemT_a_kernel", self.kernel_ok), ("lemT_a_rank", self.rank_ok),
               ("lemT_a_psd", self.psd_ok)]
        return [c for c, good in ids if not good]


def check_skew_case_conditions(B, C, tol=DEFAULT):
    """Test ``Ker C^T = Ker B``, ``rank CB = rank B`` and ``CB >= 0``.

    Parameters
    ----------
    B : (n, m) array_like
    C : (m, n) array_like

    Returns
    -------
    SkewCaseVerdict
        Witnesses are the largest principal angle between the kernels, the
        r-th singular value of CB and the smallest eigenvalue of the
        compressed product C1 B1 (r x r).
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n, m = B.shape
    scale = max(np.linalg.norm(B, 2), np.linalg.norm(C, 2), 1e-300)
    sb = ranked_svd(B, tol.rank_tol, scale)
    sc = ranked_svd(C.T, tol.rank_tol, scale)
    r = sb.rank
    wit = {"rank_B": r, "rank_C": sc.rank}
    NB = sb.Vt[r:].T               # Ker B in R^m
    NCt = sc.Vt[sc.rank:].T        # Ker C^T in R^m
    if NB.shape[1] != NCt.shape[1]:
        kernel_ok = False
        wit["max_principal_angle"] = float(np.pi / 2)
    elif NB.shape[1] == 0:
        kernel_ok = True
        wit["max_principal_angle"] = 0.0
    else:
        ang = sla.subspace_angles(NB, NCt)
        wit["max_principal_angle"] = float(ang.max())
        kernel_ok = bool(ang.max() <= np.sqrt(tol.rank_tol))
    CB = C @ B
    s = np.linalg.svd(CB, compute_uv=False) if CB.size else np.zeros(0)
    sr = float(s[r - 1]) if r else 0.0
    wit["sigma_r_CB"] = sr
    rank_ok = bool(r == 0 or sr > tol.rank_tol * scale * scale)
    V1 = sb.Vt[:r].T
    C1B1 = C @ B @ V1
    C1B1 = V1.T @ C1B1 if r else np.zeros((0, 0))
    lm = lambda_min(C1B1) if r else 0.0
    asym = float(np.linalg.norm(C1B1 - C1B1.T)) if r else 0.0
    wit["lambda_min_C1B1"] = lm
    wit["asymmetry_C1B1"] = asym
    psd_ok = bool(lm >= -tol.tol_psd * scale * scale and asym <= 1e-8 * scale * scale)
    return SkewCaseVerdict(kernel_ok, rank_ok, psd_ok, r, wit)


@dataclass(frozen=True, eq=False)
class T0Factor:
    T0: np.ndarray
    T0_inv: np.ndarray
    Y: np.ndarray
    NB_tilde: np.ndarray
    NC_tilde: np.ndarray

    def constraint_residual(self, B1, C1):
        """``||(T0 B1)^T - C1 T0^-1||``."""
        return float(np.linalg.norm((self.T0 @ B1).T - C1 @ self.T0_inv))


def build_t0(B1, C1, tol=DEFAULT):
    """T0 = [NB~^T; Y^-1 C1] with inverse [NC~, B1 Y^-T].

    Here ``Y`` is the symmetric positive square root of ``C1 B1`` and
    NB~, NC~ are bi-orthogonal bases of Ker B1^T and Ker C1.

    Raises
    ------
    DegenerateKernelPairing, NotPsd
    """
    B1 = np.atleast_2d(np.asarray(B1, dtype=float))
    C1 = np.atleast_2d(np.asarray(C1, dtype=float))
    CB = C1 @ B1
    asym = float(np.linalg.norm(CB - CB.T))
    if asym > 1e-8 * max(np.linalg.norm(CB), 1e-300):
        raise NotPsd("C1 B1 is not symmetric", condition_id="lemT_a_psd",
                     witnesses={"asymmetry": asym})
    Y = symmetric_sqrt_factor(sym(CB), tol.tol_psd)
    NB, NC = biorthogonal_kernel_bases(B1, C1, tol.rank_tol)
    T0 = np.vstack([NB.T, np.linalg.solve(Y, C1)])
    T0i = np.hstack([NC, np.linalg.solve(Y, B1.T).T])
    return T0Factor(T0, T0i, Y, NB, NC)


# ---------------------------------------------------------------------------
# Realization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RecursionTrace:
    """Record of the reduction.

    ``steps`` holds one dict per elimination step with the remaining state
    dimension ``ell``, the number ``r`` of fixed state coordinates, the
    kernel dimension and the rank witnesses. ``final`` is the terminal
    system with positive definite feedthrough (or no state).
    """
    V0: np.ndarray
    t0: T0Factor
    steps: tuple
    final: LtiSystem
    constraint_residual: float
    kstep_lambda_min: float
    lmi_residual: float
    lmi_scale: float
    details: dict = field(default_factory=dict)


def _first_step_conditions(split, tol):
    if split.k0 == 0:
        return None
    v = check_skew_case_conditions(split.B1, split.C1, tol)
    if not v.ok:
        raise ConditionsFailedAtStep(
            "kernel conditions fail on the feedthrough kernel "
            f"({', '.join(v.failed)}); the transformation matrix T would be singular",
            condition_id=v.failed[0], step=0, witnesses=v.witnesses)
    return v


def _stability(sys, tol):
    if sys.n:
        solve_lyapunov_inequality(sys.A, tol)


def _storage(sys, mode, tol):
    try:
        return solve_lmi_storage(sys, mode, tol)
    except StructureViolation as exc:
        msg = str(exc)
        if exc.condition_id == "lemT_a_rank":
            msg += " (the transformation matrix T becomes singular)"
        raise ConditionsFailedAtStep(msg, condition_id=exc.condition_id,
                                     step=exc.step, witnesses=exc.witnesses) from exc
    except (ConditionAViolated, ConditionBViolated, ConditionCViolated) as exc:
        raise StorageInfeasible(str(exc), condition_id=exc.condition_id,
                                witnesses=exc.witnesses) from exc


def _trace(sys, split, t0, cert, tol):
    red = even_staircase_reduce(sys, "definite", tol)
    steps = []
    ell = sys.n
    for j, st in enumerate(red.steps):
        ell -= st.r
        steps.append({"step": j, "ell": ell, "r": st.r, "n_kernel": st.n_kernel,
                      **st.witnesses})
    Q = cert.Q
    cres = 0.0
    if split.k0 and sys.n:
        cres = float(np.linalg.norm(Q @ split.B1 - split.C1.T))
    W = np.block([[-sys.A.T @ Q - Q @ sys.A, sys.C.T - Q @ sys.B],
                  [sys.C - sys.B.T @ Q, sys.S]])
    return RecursionTrace(split.V0, t0, tuple(steps), red.reduced, cres,
                          lambda_min(W) if W.size else 0.0,
                          cert.lmi_residual, cert.scale, dict(cert.details or {}))


def realize_general(sys, tol=DEFAULT):
    """Transformations (T, V) and PH data for a general LTI system.

    Returns
    -------
    transform : EquivalenceTransform
    ph : PhRealization
        Data of the transformed system ``(T A T^-1, T B V, V^T C T^-1,
        V^T D V)`` with ``Q = I``.
    trace : RecursionTrace

    Raises
    ------
    NotStable
        ``not_stable`` / ``not_semisimple``.
    ConditionsFailedAtStep
        A kernel condition fails at the reported step.
    StorageInfeasible
        The terminal Riccati problem has no positive definite solution.
    """
    split = feedthrough_reduce(sys, tol)
    _stability(sys, tol)
    v = _first_step_conditions(split, tol)
    t0 = None
    if v is not None and v.rank and sys.n:
        sb = ranked_svd(split.B1, tol.rank_tol)
        Vr = sb.Vt[:v.rank].T
        t0 = build_t0(split.B1 @ Vr, Vr.T @ split.C1, tol)
    cert = _storage(sys, "definite", tol)
    T = symmetric_sqrt_factor(cert.Q, tol.tol_psd) if sys.n else np.zeros((0, 0))
    ph = assemble_ph_from_storage(sys, T, split.V0, tol)
    trace = _trace(sys, split, t0, cert, tol)
    return EquivalenceTransform(T, split.V0), ph, trace


def realize_skew_case(sys, tol=DEFAULT):
    """PH realization when ``D = -D^T``.

    Returns
    -------
    transform : EquivalenceTransform
    ph : PhRealization

    Raises
    ------
    InputError
        D is not skew-symmetric.
    ConditionsFailed
        The kernel conditions on (B, C) fail.
    NoStabilizingZ
        The reduced Lyapunov/Riccati problem has no solution.
    """
    if np.linalg.norm(sys.S) > tol.tol_sym * max(1.0, np.linalg.norm(sys.D)):
        raise InputError("D is not skew-symmetric")
    v = check_skew_case_conditions(sys.B, sys.C, tol)
    if not v.ok:
        raise ConditionsFailed(f"kernel conditions fail ({', '.join(v.failed)})",
                               condition_id=v.failed[0], witnesses=v.witnesses)
    try:
        tr, ph, _ = realize_general(sys, tol)
    except NotStable as exc:
        raise NoStabilizingZ(str(exc), condition_id=exc.condition_id,
                             witnesses=exc.witnesses) from exc
    except (StorageInfeasible, ConditionsFailedAtStep) as exc:
        raise NoStabilizingZ(str(exc), condition_id=exc.condition_id,
                             witnesses=exc.witnesses, step=exc.step) from exc
    return tr, ph


def passivity_certificate(sys, tol=DEFAULT):
    """Positive semidefinite storage (passivity without PH structure)."""
    _stability(sys, tol)
    return _storage(sys, "semidefinite", tol)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _spd(rng, k, cond=10.0):
    U, _ = np.linalg.qr(rng.standard_normal((k, k)))
    return sym(U @ np.diag(np.logspace(0, np.log10(cond), k)) @ U.T)


def _skew(rng, k):
    X = rng.standard_normal((k, k))
    return 0.5 * (X - X.T)


def random_ph_realization(n, m, seed=None, lossless=False, singular_S=False,
                          q_cond=10.0):
    """Random PH data with K = [[R, P], [P^T, S]] >= 0.

    Parameters
    ----------
    lossless : bool
        R = 0 and P = 0 (S is then random PSD, singular if requested).
    singular_S : bool
        S gets a one-dimensional kernel (P vanishes on it, as K >= 0
        requires).
    """
    rng = np.random.default_rng(seed)
    J = _skew(rng, n)
    Q = _spd(rng, n, q_cond)
    F = rng.standard_normal((n, m))
    N = _skew(rng, m)
    Ws = rng.standard_normal((m, n + m))
    if singular_S:
        v = rng.standard_normal(m)
        v /= np.linalg.norm(v)
        Ws = Ws - np.outer(v, v @ Ws)
    if lossless:
        R = np.zeros((n, n))
        P = np.zeros((n, m))
        S = sym(Ws @ Ws.T)
    else:
        W = np.vstack([rng.standard_normal((n, n + m)), Ws])
        K = sym(W @ W.T)
        R, P, S = K[:n, :n], K[:n, n:], K[n:, n:]
    return PhRealization(J, R, Q, F, P, S, N)


def scramble(sys, seed=None, cond_max=1e3):
    """Apply a random state map (cond <= cond_max) and orthogonal IO map.

    Returns
    -------
    scrambled : LtiSystem
    T_s, V_s : arrays
        ``scrambled = (T_s A T_s^-1, T_s B V_s, V_s^T C T_s^-1, V_s^T D V_s)``.
    """
    rng = np.random.default_rng(seed)
    n, m = sys.n, sys.m
    U1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    U2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    c = 10 ** rng.uniform(0, np.log10(cond_max))
    Ts = U1 @ np.diag(np.logspace(0, np.log10(c), n)) @ U2.T
    Vs, _ = np.linalg.qr(rng.standard_normal((m, m)))
    Ti = np.linalg.inv(Ts)
    out = LtiSystem(Ts @ sys.A @ Ti, Ts @ sys.B @ Vs, Vs.T @ sys.C @ Ti, Vs.T @ sys.D @ Vs)
    return out, Ts, Vs


def brake_squeal_instance(n_q, omega_ratio=1.0, rank_n=0, seed=None, n_scale=1.0,
                          n_inputs=1, damping=0.05):
    """Desk-scale disc brake model in first-order PH-like form.

    Second-order model ``M q'' + (D + G) q' + (K + N) q = E u`` with
    ``D = C1 + C_R / omega_ratio``, ``G = omega_ratio * C_G`` (skew) and
    ``K = K1 + omega_ratio**2 * K_G``; the circulatory term N is skew with
    ``rank_n`` rank-two components scaled by ``n_scale``. With
    ``p = M q'`` and ``x = [p; q]`` the dynamics read ``x' = (J - R) Q x +
    [E; 0] u``, ``Q = diag(M^-1, K)``, output ``y = E^T q'``.

    Returns
    -------
    sys : LtiSystem
    report : dict
        ``J``, ``R``, ``Q`` blocks, ``lambda_min_R``, the substitution
        residual of the first-order form, the residual of the printed block
        pattern, the eigenvalues of ``(J - R) Q`` and the eigenvector test
        ``x^* R x < 0``.
    """
    rng = np.random.default_rng(seed)
    k = n_q
    M = _spd(rng, k, 10.0)
    K1 = _spd(rng, k, 100.0)
    KG = sym(rng.standard_normal((k, k)) @ rng.standard_normal((k, k)).T) * 0.01
    K = K1 + omega_ratio ** 2 * KG
    Cm = damping * _spd(rng, k, 10.0)
    g = rng.standard_normal((k, 2))
    CR = damping * g @ g.T
    D = Cm + CR / omega_ratio
    G = omega_ratio * _skew(rng, k) * 0.1
    N = np.zeros((k, k))
    for _ in range(rank_n):
        a, b = rng.standard_normal(k), rng.standard_normal(k)
        N += n_scale * (np.outer(a, b) - np.outer(b, a))
    Ki = np.linalg.inv(K)
    I = np.eye(k)
    Z = np.zeros((k, k))
    X = N @ Ki
    # skew and symmetric parts of [[-G - D, -(I + N K^-1)], [I, 0]]
    J = np.block([[-G, -(I + 0.5 * X)], [I + 0.5 * X.T, Z]])
    R = np.block([[D, 0.5 * X], [0.5 * X.T, Z]])
    Q = sla.block_diag(np.linalg.inv(M), K)
    A = (J - R) @ Q
    E = rng.standard_normal((k, n_inputs))
    B = np.vstack([E, np.zeros((k, n_inputs))])
    C = B.T @ Q
    sys = LtiSystem(A, B, C, np.zeros((n_inputs, n_inputs)))
    # substitution check against the second-order model
    Mi = np.linalg.inv(M)
    A_ref = np.block([[-(D + G) @ Mi, -(K + N)], [Mi, Z]])
    subst = float(np.linalg.norm(A - A_ref) / max(np.linalg.norm(A_ref), 1.0))
    # printed block pattern for comparison
    J_pr = np.block([[-G, -(I + 0.5 * X)], [I + 0.5 * Ki @ N, Z]])
    R_pr = -np.block([[D, 0.5 * X], [0.5 * Ki @ N, Z]])
    printed = {
        "J_skew_residual": float(np.linalg.norm(J_pr + J_pr.T)),
        "R_asymmetry": float(np.linalg.norm(R_pr - R_pr.T)),
        "dynamics_residual": float(np.linalg.norm((J_pr - R_pr) @ Q - A_ref)
                                   / max(np.linalg.norm(A_ref), 1.0)),
    }
    ev = np.linalg.eigvals(A)
    wJ, VJ = np.linalg.eig(J)
    xRx = np.real(np.einsum("ij,ik,kj->j", VJ.conj(), R, VJ))
    report = {
        "J": J, "R": R, "Q": Q, "N": N,
        "lambda_min_R": lambda_min(R),
        "substitution_residual": subst,
        "printed_pattern": printed,
        "eigenvalues": ev,
        "max_real_part": float(ev.real.max()),
        "unstable_eigenvector_witness": bool((xRx < 0).any()),
        "min_xRx": float(xRx.min()),
    }
    return sys, report
