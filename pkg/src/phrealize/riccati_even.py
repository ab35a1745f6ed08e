"""Riccati equations, Hamiltonian matrices, even pencils and the storage LMI.

The passivity LMI for a storage matrix Q reads::

    W(Q) = [[-A^T Q - Q A, C^T - Q B],
            [C - B^T Q,    D + D^T ]] >= 0

With S = D + D^T > 0 it is equivalent (Schur complement) to the Riccati
inequality ``Psi(Q) <= 0`` where::

    Psi(Q) = F^T Q + Q F + Q G Q + H,
    F = A - B S^-1 C,  G = B S^-1 B^T,  H = C^T S^-1 C.

Solutions of ``Psi(Q) = 0`` come from Lagrangian invariant subspaces of the
Hamiltonian matrix [[F, G], [-H, -F^T]].  With a singular S the LMI forces
``Q B1 = C1^T`` on the kernel directions; :func:`even_staircase_reduce`
eliminates these constraints step by step until the remaining feedthrough
is positive definite.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    CertificateRejected, ConditionAViolated, ConditionBViolated,
    ConditionCViolated, InfeasibleError, NoLagrangianSubspace, NotStable,
    SingularS, StructureViolation, UnstableMatrix, W1Singular,
)
from .kalman_staircase import staircase_decompose
from .linalg_kernels import (
    classify_spectrum, lambda_min, ordered_schur, ranked_svd,
    schur_eigenvalues, split_stable_imaginary, sym,
)
from .system_model import LtiSystem, StorageCertificate, lmi_residual, lmi_scale
from .tolerances import DEFAULT

__all__ = [
    "HamiltonianMatrix", "LagrangianSubspace", "RiccatiSolution", "EvenPencil",
    "EvenStaircaseStep", "EvenStaircase", "build_hamiltonian",
    "hamiltonian_from_blocks", "lagrangian_subspace", "riccati_residual",
    "solve_are", "solve_lmi_storage", "build_even_pencil", "pencil_spectrum",
    "even_deflating_check", "even_staircase_reduce",
]


# ---------------------------------------------------------------------------
# Hamiltonian matrices and Lagrangian subspaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    H: np.ndarray
    F: np.ndarray
    G: np.ndarray
    Hc: np.ndarray

    @property
    def k(self):
        return self.F.shape[0]

    def structure_residual(self):
        k = self.k
        Gam = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
        X = Gam @ self.H
        return float(np.linalg.norm(X - X.T))


def hamiltonian_from_blocks(F, G, Hc):
    """Hamiltonian [[F, G], [-Hc, -F^T]] of ``F^T Q + Q F + Q G Q + Hc = 0``."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    G, Hc = sym(G), sym(Hc)
    H = np.block([[F, G], [-Hc, -F.T]])
    return HamiltonianMatrix(H, F, G, Hc)


def _spd_inverse(S):
    S = sym(np.atleast_2d(S))
    if S.size == 0:
        return S.copy()
    try:
        c = sla.cho_factor(S)
    except np.linalg.LinAlgError as exc:
        raise SingularS("S is not symmetric positive definite",
                        witnesses={"lambda_min": lambda_min(S)}) from exc
    w = np.linalg.eigvalsh(S)
    if w[0] <= 1e-14 * w[-1]:
        raise SingularS("S is numerically singular", witnesses={"lambda_min": float(w[0])})
    return sym(sla.cho_solve(c, np.eye(S.shape[0])))


def build_hamiltonian(A, B, C, S):
    """Hamiltonian of the passivity Riccati equation.

    ``H = [[A - B S^-1 C, B S^-1 B^T], [-C^T S^-1 C, -(A - B S^-1 C)^T]]``

    Raises
    ------
    SingularS
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.asarray(B, dtype=float).reshape(n, -1)
    C = np.asarray(C, dtype=float).reshape(-1, n)
    Si = _spd_inverse(S)
    return hamiltonian_from_blocks(A - B @ Si @ C, B @ Si @ B.T, C.T @ Si @ C)


@dataclass(frozen=True, eq=False)
class LagrangianSubspace:
    W1: np.ndarray
    W2: np.ndarray
    E: np.ndarray
    n_axis: int
    isotropy_residual: float
    invariance_residual: float


def _axis_lagrangian_part(T22, clusters, scale, rank_tol):
    """Real invariant subspace of half dimension for the on-axis block.

    For each eigenvalue pair +-iw (or 0) of multiplicity d the candidate is
    the kernel of (T22^2 + w^2 I)^j (resp. T22^j) for the smallest j whose
    kernel reaches dimension d/2.  Existence of such a j is necessary for a
    Lagrangian subspace.
    """
    nc = T22.shape[0]
    byw = {}
    for cl in clusters:
        w = round(abs(cl.center.imag) / max(scale, 1e-300), 9)
        byw.setdefault(w, []).append(cl)
    bases = []
    for _, cls in sorted(byw.items()):
        d = sum(len(c.members) for c in cls)
        w = float(np.mean([abs(c.center.imag) for c in cls]))
        if d % 2 or (w > 0 and d % 4):
            raise NoLagrangianSubspace(
                "imaginary-axis eigenvalues of odd multiplicity admit no real "
                "Lagrangian invariant subspace",
                witnesses={"eigenvalue": complex(0, w), "multiplicity": d})
        Nw = T22 if w == 0 else T22 @ T22 + w * w * np.eye(nc)
        target = d // 2
        P = np.eye(nc)
        found = None
        for j in range(1, d + 1):
            P = P @ Nw
            sv = ranked_svd(P, rank_tol, scale=max(np.linalg.norm(Nw, 2), 1e-300) ** j)
            dim = nc - sv.rank
            if dim == target:
                found = sv.Vt[sv.rank:].T
                break
            if dim > target:
                break
        if found is None:
            raise NoLagrangianSubspace(
                "imaginary-axis eigenvalues admit no real Lagrangian invariant subspace",
                witnesses={"eigenvalue": complex(0, w), "multiplicity": d})
        bases.append(found)
    return np.hstack(bases) if bases else np.zeros((nc, 0))


def lagrangian_subspace(H, side="left", tol=DEFAULT):
    """Lagrangian invariant subspace ``H [W1; W2] = [W1; W2] E``.

    Parameters
    ----------
    H : HamiltonianMatrix or (2k, 2k) array
    side : {"left", "right"}
        Spectrum of E in the closed left (resp. right) half plane.

    Returns
    -------
    LagrangianSubspace

    Raises
    ------
    NoLagrangianSubspace
    """
    Hm = H.H if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=float)
    k2 = Hm.shape[0]
    k = k2 // 2
    if k == 0:
        z = np.zeros((0, 0))
        return LagrangianSubspace(z, z, z, 0, 0.0, 0.0)
    scale = max(np.linalg.norm(Hm, 2), 1e-300)
    sgn = 1 if side == "left" else -1
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")

    def groups(ev):
        lab, _ = classify_spectrum(ev, scale, tol.axis_tol, tol.cluster_tol)
        return sgn * lab + 1  # 0: chosen half plane, 1: axis, 2: other

    T, Z, lab = ordered_schur(Hm, groups)
    ns = int(np.sum(lab == 0))
    nc = int(np.sum(lab == 1))
    nu = int(np.sum(lab == 2))
    if ns != nu or nc % 2:
        raise NoLagrangianSubspace(
            "spectrum is not Hamiltonian-symmetric at tolerance",
            witnesses={"n_chosen": ns, "n_axis": nc, "n_other": nu})
    T22 = T[ns:ns + nc, ns:ns + nc]
    _, clusters = classify_spectrum(schur_eigenvalues(T22), scale, tol.axis_tol,
                                    tol.cluster_tol)
    X = _axis_lagrangian_part(T22, clusters, scale, max(tol.rank_tol, 1e-8))
    W = Z[:, :ns + nc] @ sla.block_diag(np.eye(ns), X)
    W1, W2 = W[:k], W[k:]
    iso = float(np.linalg.norm(W1.T @ W2 - W2.T @ W1))
    if iso > 1e-6:
        raise NoLagrangianSubspace("invariant subspace is not isotropic",
                                   witnesses={"isotropy_residual": iso})
    E = W.T @ Hm @ W
    inv = float(np.linalg.norm(Hm @ W - W @ E) / scale)
    return LagrangianSubspace(W1, W2, E, nc, iso, inv)


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    Q: np.ndarray
    closed_loop_spectrum: np.ndarray
    kind: str
    residual: float
    subspace: LagrangianSubspace = None


def riccati_residual(F, G, Hc, Q):
    """Frobenius norm of ``F^T Q + Q F + Q G Q + Hc``."""
    return float(np.linalg.norm(F.T @ Q + Q @ F + Q @ G @ Q + Hc))


def _riccati_from_hamiltonian(ham, side, tol):
    sub = lagrangian_subspace(ham, side, tol)
    k = ham.k
    if k == 0:
        return np.zeros((0, 0)), sub
    s = np.linalg.svd(sub.W1, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300) or s[-1] < 1e-12:
        raise W1Singular("W1 is singular (controllability hypothesis violated)",
                         witnesses={"sigma_min_W1": float(s[-1])})
    Q = sym(np.linalg.solve(sub.W1.T, sub.W2.T).T)
    return Q, sub


def solve_are(A, B, C, S, side="left", tol=DEFAULT):
    """Extremal solution of the passivity Riccati equation.

    ``side="left"`` returns the minimal solution Q- (closed loop
    ``A - B S^-1 (C - B^T Q)`` in the closed left half plane), ``"right"``
    the maximal solution Q+.

    Returns
    -------
    RiccatiSolution

    Raises
    ------
    SingularS, NoLagrangianSubspace, W1Singular
    """
    ham = build_hamiltonian(A, B, C, S)
    Q, sub = _riccati_from_hamiltonian(ham, side, tol)
    res = riccati_residual(ham.F, ham.G, ham.Hc, Q)
    cl = np.linalg.eigvals(ham.F + ham.G @ Q) if Q.size else np.zeros(0)
    kind = "minimal" if side == "left" else "maximal"
    return RiccatiSolution(Q, cl, kind, res, sub)


# ---------------------------------------------------------------------------
# Storage LMI, positive definite feedthrough
# ---------------------------------------------------------------------------

def _sym_basis(p):
    """Orthonormal basis of symmetric p x p matrices as (p*p, p(p+1)/2)."""
    cols = []
    for j in range(p):
        for i in range(j + 1):
            E = np.zeros((p, p))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1 / np.sqrt(2)
            cols.append(E.reshape(-1, order="F"))
    return np.array(cols).T if cols else np.zeros((0, 0))


def _condition_a(A2, B2, C2, mode, tol):
    """Q2 with ``A2^T Q2 + Q2 A2 = 0`` and ``B2^T Q2 = C2``.

    A2 is expected in normalized (skew) form, where the first condition is
    the commutant condition ``A2 Q2 = Q2 A2``. Among all solutions we take
    the one closest to a multiple of the identity, which is positive
    definite whenever the affine solution set reaches far enough inside
    the cone.
    """
    p = A2.shape[0]
    m = B2.shape[1]
    if p == 0:
        return np.zeros((0, 0)), {}
    Pb = _sym_basis(p)
    I = np.eye(p)
    L = np.vstack([(np.kron(I, A2.T) + np.kron(A2.T, I)) @ Pb,
                   np.kron(I, B2.T) @ Pb])
    rhs = np.concatenate([np.zeros(p * p), C2.reshape(-1, order="F")])
    q0, *_ = np.linalg.lstsq(L, rhs, rcond=None)
    scale = max(np.linalg.norm(L, 2) * np.linalg.norm(q0) + np.linalg.norm(rhs), 1e-300)
    res = float(np.linalg.norm(L @ q0 - rhs))
    wit = {"residual": res, "scale": scale}
    if res > 1e-9 * scale:
        raise ConditionAViolated(
            "no symmetric Q2 with B2^T Q2 = C2 on the imaginary-axis part",
            witnesses=wit)
    sv = ranked_svd(L, 1e-10)
    Nb = sv.Vt[sv.rank:].T
    iv = Pb.T @ I.reshape(-1, order="F")
    base = max(np.linalg.norm(q0), 1.0)
    best = None
    for c in [0.0] + [base * f for f in (1.0, 10.0, 100.0, 1e3)]:
        q = q0 + Nb @ (Nb.T @ (c * iv - q0)) if Nb.size else q0
        Q2 = sym((Pb @ q).reshape(p, p, order="F"))
        lm = lambda_min(Q2)
        nq = max(np.linalg.norm(Q2, 2), 1e-300)
        ok = lm > 1e-10 * nq if mode == "definite" else lm >= -tol.tol_psd * nq
        if best is None or lm / nq > best[1]:
            best = (Q2, lm / nq)
        if ok:
            wit["lambda_min_Q2"] = lm
            return Q2, wit
        if not Nb.size:
            break
    wit["best_relative_lambda_min"] = float(best[1])
    raise ConditionAViolated("no positive definite Q2 on the imaginary-axis part",
                             witnesses=wit)


def _xi_riccati(Sig, Bs, Si, eps0, tries=24):
    """Small positive definite Y with ``Sig^T Y + Y Sig + Y G Y + eps I = 0``."""
    p = Sig.shape[0]
    G = Bs @ Si @ Bs.T
    eps = eps0
    last = None
    for _ in range(tries):
        ham = hamiltonian_from_blocks(Sig, G, eps * np.eye(p))
        try:
            Y, _ = _riccati_from_hamiltonian(ham, "left", DEFAULT)
            if lambda_min(Y) > 0 and riccati_residual(Sig, G, eps * np.eye(p), Y) \
                    <= 1e-8 * max(eps, np.linalg.norm(Sig) * np.linalg.norm(Y)):
                return Y, eps
        except (NoLagrangianSubspace, W1Singular) as exc:
            last = exc
        eps *= 0.25
    raise ConditionCViolated("perturbed Riccati equation not solvable",
                             witnesses={"last_eps": eps, "cause": str(last)})


def _storage_spd(A, B, C, S, mode, tol, details):
    """Storage matrix for S > 0 following the split / staircase pipeline."""
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    Si = _spd_inverse(S)
    nA = max(np.linalg.norm(A, 2), 1e-300)

    # (i) split into asymptotically stable and imaginary-axis parts
    try:
        sp = split_stable_imaginary(A, tol.axis_tol, cluster_tol=tol.cluster_tol,
                                    normalize=True)
    except UnstableMatrix as exc:
        raise NotStable("A has a right half-plane eigenvalue",
                        condition_id="not_stable", witnesses=exc.witnesses) from exc
    if not sp.semisimple_flag:
        raise NotStable("imaginary-axis eigenvalue is not semisimple",
                        condition_id="not_semisimple",
                        witnesses={"clusters": list(sp.rank_decisions)})
    M, Mi, n1, n2 = sp.M_transform, sp.M_inv, sp.n1, sp.n2
    details["cond_M"] = sp.cond_M
    Bh, Ch = M @ B, C @ Mi
    B1, B2, C1, C2 = Bh[:n1], Bh[n1:], Ch[:, :n1], Ch[:, n1:]

    # (ii) condition (a) on the imaginary-axis part
    Q2, wa = _condition_a(sp.A2, B2, C2, mode, tol)
    details["condition_a"] = wa

    Q1 = _storage_stable_part(sp.A1, B1, C1, Si, mode, tol, details, nA)
    return sym(M.T @ sla.block_diag(Q1, Q2) @ M)


def _storage_stable_part(A1, B1, C1, Si, mode, tol, details, nA):
    n1 = A1.shape[0]
    if n1 == 0:
        return np.zeros((0, 0))
    m = B1.shape[1]
    # (iii) Kalman staircase
    st = staircase_decompose(LtiSystem(A1, B1, C1, np.zeros((m, m))), tol.rank_tol)
    U, At, Bt, Ct = st.U, st.At, st.Bt, st.Ct
    nco, ncu, nu = st.n_co, st.n_c_unobs, st.n_unctrl
    nc = nco + ncu
    details["staircase"] = {"n_co": nco, "n_c_unobs": ncu, "n_unctrl": nu}
    A11, B11, C11 = At[:nco, :nco], Bt[:nco], Ct[:, :nco]
    band = tol.axis_tol * nA

    # (iv) condition (b)
    if nco:
        ev = np.linalg.eigvals(A11 - B11 @ Si @ C11)
        details["condition_b_max_real"] = float(ev.real.max())
        if ev.real.max() >= -band:
            raise ConditionBViolated(
                "A11 - B1 S^-1 C1 is not asymptotically stable",
                witnesses={"max_real_part": float(ev.real.max())})

    # (v) condition (c): Lagrangian subspace of the reduced Hamiltonian
    Q110 = np.zeros((0, 0))
    if nco:
        try:
            ham = build_hamiltonian(A11, B11, C11, sla.inv(Si))
            Q110, sub = _riccati_from_hamiltonian(ham, "left", tol)
        except (NoLagrangianSubspace, W1Singular) as exc:
            raise ConditionCViolated(
                "reduced Hamiltonian has no suitable Lagrangian subspace",
                witnesses=exc.witnesses) from exc
        details["condition_c_axis_eigenvalues"] = sub.n_axis

    # (vi) controllable part: Qt11 = Qt11^0 (+ Xi correction)
    Ac, Bc, Cc = At[:nc, :nc], Bt[:nc], Ct[:, :nc]
    Abar = Ac - Bc @ Si @ Cc
    G = Bc @ Si @ Bc.T
    Qt11 = sla.block_diag(Q110, np.zeros((ncu, ncu)))
    if mode == "definite" and nc:
        A0 = Abar + G @ Qt11
        spl = split_stable_imaginary(A0, tol.axis_tol, cluster_tol=tol.cluster_tol)
        L, ns = spl.M_transform, spl.n1
        if ns:
            Bs = (L @ Bc)[:ns]
            psi_scale = max(np.linalg.norm(Cc.T @ Si @ Cc, 2),
                            nA * np.linalg.norm(Qt11, 2), nA, 1e-300)
            Y2, eps = _xi_riccati(spl.A1, Bs, Si, 1e-1 * psi_scale)
            details["xi_eps"] = eps
            Yfull = sla.block_diag(Y2, np.zeros((nc - ns, nc - ns)))
            Qt11 = sym(Qt11 + L.T @ Yfull @ L)
        if lambda_min(Qt11) <= 0:
            raise ConditionCViolated("controllable part has no positive definite storage",
                                     witnesses={"lambda_min": lambda_min(Qt11)})

    # Sylvester step for the coupling to the uncontrollable part
    A33 = At[nc:, nc:]
    Abar12 = At[:nc, nc:] - Bc @ Si @ Ct[:, nc:]
    C2t = Ct[:, nc:]
    if nu and nc:
        X = sla.solve_sylvester((Abar + G @ Qt11).T, A33,
                                -(Qt11 @ Abar12 + Cc.T @ Si @ C2t))
    else:
        X = np.zeros((nc, nu))
    Q22 = np.zeros((0, 0))
    if nu:
        K0 = Abar12.T @ X + X.T @ Abar12 + X.T @ G @ X + C2t.T @ Si @ C2t
        xi2 = nA * max(1.0, np.linalg.norm(Qt11)) if mode == "definite" else 0.0
        Q22 = sym(sla.solve_continuous_lyapunov(A33.T, -(sym(K0) + xi2 * np.eye(nu))))
    Qt = np.block([[Qt11, X], [X.T, Q22]])
    return sym(U @ Qt @ U.T)


def _check_certificate(sys, Q, mode, tol, details):
    res = lmi_residual(sys, Q)
    scale = lmi_scale(sys, Q)
    details["lmi_residual"] = res
    details["lmi_scale"] = scale
    lm = lambda_min(Q) if Q.size else np.inf
    nq = max(np.linalg.norm(Q, 2), 1e-300) if Q.size else 1.0
    if res > tol.tol_psd * scale:
        raise CertificateRejected("constructed Q violates the LMI",
                                  witnesses={"lmi_residual": res, "scale": scale})
    if mode == "definite" and sys.n and lm <= 0:
        raise CertificateRejected("constructed Q is not positive definite",
                                  witnesses={"lambda_min": lm})
    if mode != "definite" and sys.n and lm < -tol.tol_psd * nq:
        raise CertificateRejected("constructed Q is not positive semidefinite",
                                  witnesses={"lambda_min": lm})
    kind = "positive_definite" if (sys.n == 0 or lm > 0) else "positive_semidefinite"
    return StorageCertificate(Q, kind, res, scale, details)


def solve_lmi_storage(sys, mode="definite", tol=DEFAULT):
    """Storage matrix Q solving the passivity LMI.

    Parameters
    ----------
    sys : LtiSystem
    mode : {"definite", "semidefinite"}
        ``definite`` asks for Q > 0 (port-Hamiltonian storage),
        ``semidefinite`` for Q >= 0 (passivity only).

    Returns
    -------
    StorageCertificate

    Raises
    ------
    NotStable, ConditionAViolated, ConditionBViolated, ConditionCViolated,
    StructureViolation, CertificateRejected
    """
    if mode not in ("definite", "semidefinite"):
        raise ValueError("mode must be 'definite' or 'semidefinite'")
    details = {"mode": mode}
    if sys.n:
        from .lyapunov import solve_lyapunov_inequality
        solve_lyapunov_inequality(sys.A, tol)  # raises NotStable
    red = even_staircase_reduce(sys, mode, tol)
    details["reduction_steps"] = len(red.steps)
    fin = red.final
    Qk = _storage_spd(fin.A, fin.B, fin.C, fin.S, mode, tol, details)
    Q = red.assemble(Qk)
    return _check_certificate(sys, Q, mode, tol, details)


# ---------------------------------------------------------------------------
# Even pencils
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvenPencil:
    N: np.ndarray
    M: np.ndarray
    n: int
    m: int


def build_even_pencil(sys):
    """Even pencil ``lambda N - M`` of the passivity LMI."""
    n, m = sys.n, sys.m
    Z = np.zeros
    N = np.block([[Z((n, n)), np.eye(n), Z((n, m))],
                  [-np.eye(n), Z((n, n)), Z((n, m))],
                  [Z((m, n)), Z((m, n)), Z((m, m))]])
    M = np.block([[Z((n, n)), sys.A, sys.B],
                  [sys.A.T, Z((n, n)), sys.C.T],
                  [sys.B.T, sys.C, sys.S]])
    return EvenPencil(N, sym(M), n, m)


def pencil_spectrum(P, inf_tol=1e-8):
    """Finite eigenvalues, infinite count and +- pairing residual.

    Returns
    -------
    dict with keys ``finite``, ``n_infinite``, ``pairing_residual``.
    """
    if P.M.size == 0:
        return {"finite": np.zeros(0, complex), "n_infinite": 0, "pairing_residual": 0.0}
    w = sla.eig(P.M, P.N, right=False, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    nM = max(np.linalg.norm(P.M, 2), 1e-300)
    inf = np.abs(beta) * nM <= inf_tol * np.abs(alpha)
    fin = alpha[~inf] / beta[~inf]
    fin = fin[np.lexsort((fin.imag, fin.real))]
    mirror = -fin.conj()
    pr = 0.0
    if fin.size:
        d = np.abs(fin[:, None] - mirror[None, :]).min(axis=1)
        pr = float(d.max() / max(1.0, np.abs(fin).max()))
    return {"finite": fin, "n_infinite": int(inf.sum()), "pairing_residual": pr}


def even_deflating_check(P, Q, Y=None):
    """Relative residual of ``N X (A - B Y) = M X`` with ``X = [Q; -I; Y]``.

    Y defaults to ``S^-1 (C - B^T Q)``.
    """
    n, m = P.n, P.m
    A = P.M[:n, n:2 * n]
    B = P.M[:n, 2 * n:]
    C = P.M[n:2 * n, 2 * n:].T
    S = P.M[2 * n:, 2 * n:]
    Q = sym(Q)
    if Y is None:
        Y = np.linalg.solve(S, C - B.T @ Q)
    X = np.vstack([Q, -np.eye(n), Y])
    lhs = P.N @ X @ (A - B @ Y)
    rhs = P.M @ X
    scale = max(np.linalg.norm(P.M, 2) * np.linalg.norm(X, 2) * max(1.0, np.linalg.norm(Y, 2)), 1.0)
    return float(np.linalg.norm(lhs - rhs, 2) / scale)


# ---------------------------------------------------------------------------
# Staircase reduction for singular feedthrough
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Stage:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    S: np.ndarray


@dataclass(frozen=True, eq=False)
class EvenStaircaseStep:
    """One elimination step.

    ``P`` is the state transformation ``U1 T0``; in its coordinates the
    storage is ``blockdiag(Q_next, Q22)``. ``W`` is the input/output
    congruence that exposes the kernel of the feedthrough.
    """
    P: np.ndarray
    W: np.ndarray
    Q12: np.ndarray
    Q22: np.ndarray
    r: int
    n_kernel: int
    witnesses: dict


@dataclass(frozen=True, eq=False)
class EvenStaircase:
    steps: tuple
    final: _Stage

    @property
    def reduced(self):
        f = self.final
        return LtiSystem(f.A, f.B, f.C, 0.5 * f.S)

    def assemble(self, Qk):
        """Storage of the original system from the terminal storage Qk."""
        Q = np.asarray(Qk, dtype=float)
        for st in reversed(self.steps):
            if st.r == 0:
                continue
            Pi = np.linalg.inv(st.P)
            Q = sym(Pi.T @ sla.block_diag(Q, st.Q22) @ Pi)
        return Q


def even_staircase_reduce(sys, mode="definite", tol=DEFAULT, max_steps=None):
    """Eliminate the kernel of the feedthrough from the storage LMI.

    Each step splits off the kernel directions of the current S, enforces
    ``Q B1 = C1^T`` by fixing the blocks Q12, Q22 of the storage in a
    compressed basis and moves the fixed state coordinates into the
    input/output part of a smaller LMI. It stops when S is positive
    definite or no state is left.

    Returns
    -------
    EvenStaircase

    Raises
    ------
    StructureViolation
        With ``condition_id`` ``lemT_a_kernel`` (kernel mismatch),
        ``lemT_a_rank`` / ``lemT_a_psd`` (fixed block not positive
        definite) or ``feedthrough_psd`` (S not positive semidefinite).
    """
    A, B, C = sys.A.copy(), sys.B.copy(), sys.C.copy()
    S = sym(sys.S)
    p1 = 0  # trailing block of S known to be positive definite
    scale = sys.norm()
    steps = []
    max_steps = sys.n + 2 if max_steps is None else max_steps
    for j in range(max_steps + 1):
        n, p = A.shape[0], S.shape[0]
        q = p - p1
        D11, D12, S1 = S[:q, :q], S[:q, q:], S[q:, q:]
        E = np.eye(p)
        if p1:
            E[q:, :q] = -np.linalg.solve(S1, D12.T)
        Sc = sym(D11 - D12 @ np.linalg.solve(S1, D12.T)) if p1 else sym(D11)
        w, Z = np.linalg.eigh(Sc) if q else (np.zeros(0), np.zeros((0, 0)))
        thr = tol.rank_tol * scale * 10
        if q and w[0] < -thr:
            raise StructureViolation(
                "feedthrough part is not positive semidefinite",
                condition_id="feedthrough_psd", step=j,
                witnesses={"lambda_min": float(w[0]), "threshold": thr})
        ker = w <= thr
        k0 = int(ker.sum())
        order = np.concatenate([np.flatnonzero(ker), np.flatnonzero(~ker)])
        Z = Z[:, order]
        W = E @ sla.block_diag(Z, np.eye(p1)) if p else np.zeros((0, 0))
        if k0 == 0 or n == 0:
            return EvenStaircase(tuple(steps), _Stage(A, B, C, S))
        B, C = B @ W, W.T @ C
        S = sym(W.T @ S @ W)
        S[:k0, :] = 0.0
        S[:, :k0] = 0.0
        B1, B2, C1, C2 = B[:, :k0], B[:, k0:], C[:k0], C[k0:]
        S2 = S[k0:, k0:]

        sv = ranked_svd(B1, tol.rank_tol, scale=scale)
        r = sv.rank
        Ub, Vb = sv.U, sv.Vt.T
        U1 = np.hstack([Ub[:, r:], Ub[:, :r]])
        Ct = Vb.T @ C1 @ U1
        kern_res = float(np.linalg.norm(Ct[r:])) if k0 > r else 0.0
        wit = {"rank_B1": r, "sigma_B1": sv.Sigma.tolist(), "kernel_residual": kern_res}
        if kern_res > tol.rank_tol * scale * 10:
            raise StructureViolation("Ker B1 is not contained in Ker C1^T",
                                     condition_id="lemT_a_kernel", step=j, witnesses=wit)
        if r == 0:
            steps.append(EvenStaircaseStep(np.eye(n), W, np.zeros((n, 0)),
                                           np.zeros((0, 0)), 0, k0, wit))
            B, C, S = B2, C2, S2
            p1 = S.shape[0]
            continue
        SigB = sv.Sigma[:r]
        C11, C12 = Ct[:r, :n - r], Ct[:r, n - r:]
        Q12 = C11.T / SigB
        Q22 = C12.T / SigB
        asym = float(np.linalg.norm(Q22 - Q22.T) / max(np.linalg.norm(Q22), 1e-300))
        Q22 = sym(Q22)
        lm = lambda_min(Q22)
        wit.update({"Q22_asymmetry": asym, "Q22_lambda_min": lm})
        nq = max(np.linalg.norm(Q22, 2), 1e-300)
        if asym > 1e-6 or lm < -tol.tol_psd * nq:
            raise StructureViolation("C1 B1 is not symmetric positive semidefinite",
                                     condition_id="lemT_a_psd", step=j, witnesses=wit)
        if mode == "definite" and lm <= tol.rank_tol * max(nq, scale):
            raise StructureViolation(
                "C1 B1 is singular on the range of B1; the transformation "
                "matrix would be singular", condition_id="lemT_a_rank", step=j,
                witnesses=wit)
        Q22p = np.linalg.pinv(Q22, rcond=1e-10) if mode != "definite" else np.linalg.inv(Q22)
        if mode != "definite":
            kr = np.linalg.norm(Q12 - Q12 @ Q22p @ Q22)
            if kr > 1e-8 * max(np.linalg.norm(Q12), 1.0):
                raise StructureViolation("Ker Q22 not contained in Ker Q12",
                                         condition_id="lemT_a_kernel", step=j,
                                         witnesses={"residual": float(kr)})
        ell = n - r
        T0 = np.eye(n)
        T0[ell:, :ell] = -Q22p @ Q12.T
        P = U1 @ T0
        Pinv = np.linalg.solve(T0, U1.T)
        At = Pinv @ A @ P
        B2t = Pinv @ B2
        C2t = C2 @ P
        A11, A12, A21, A22 = At[:ell, :ell], At[:ell, ell:], At[ell:, :ell], At[ell:, ell:]
        An = A11
        Bn = np.hstack([A12, B2t[:ell]])
        Cn = np.vstack([-Q22 @ A21, C2t[:, :ell]])
        Sn = np.block([[-A22.T @ Q22 - Q22 @ A22, C2t[:, ell:].T - Q22 @ B2t[ell:]],
                       [C2t[:, ell:] - B2t[ell:].T @ Q22, S2]])
        steps.append(EvenStaircaseStep(P, W, Q12, Q22, r, k0, wit))
        A, B, C, S = An, Bn, Cn, sym(Sn)
        p1 = S2.shape[0]
    raise StructureViolation("staircase reduction did not terminate",
                             condition_id="lemT_a_rank", step=max_steps)
