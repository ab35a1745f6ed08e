"""Dense linear-algebra primitives with explicit tolerance contracts.

Rank-revealing SVD, ordered real Schur forms, the split of a matrix into
an asymptotically stable part and an imaginary-axis part, symmetric
square roots and bi-orthogonal kernel bases.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import (
    ConvergenceFailure, DegenerateKernelPairing, NotPsd, SpectraOverlap,
    UnstableMatrix,
)
from .tolerances import DEFAULT

__all__ = [
    "RankedSvd", "SpectralSplit", "EigenCluster", "sym", "skew",
    "lambda_min", "lambda_max", "is_psd", "ranked_svd", "null_space",
    "schur_eigenvalues", "ordered_schur", "classify_spectrum",
    "split_stable_imaginary", "symmetric_sqrt_factor",
    "biorthogonal_kernel_bases", "solve_sylvester",
]


def sym(M):
    """Symmetric part of a square matrix."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def skew(M):
    """Skew-symmetric part of a square matrix."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M - M.T)


def lambda_min(M):
    """Smallest eigenvalue of sym(M) (+inf for an empty matrix)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(sym(M))[0])


def lambda_max(M):
    """Largest eigenvalue of sym(M) (-inf for an empty matrix)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return -np.inf
    return float(np.linalg.eigvalsh(sym(M))[-1])


def is_psd(M, tol_psd=DEFAULT.tol_psd):
    """PSD test by smallest eigenvalue against ``-tol_psd*||M||``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return True
    return lambda_min(M) >= -tol_psd * max(np.linalg.norm(M, 2), np.finfo(float).tiny)


@dataclass(frozen=True)
class RankedSvd:
    U: np.ndarray
    Sigma: np.ndarray
    Vt: np.ndarray
    rank: int
    threshold: float

    @property
    def gap(self):
        """Ratio sigma_rank / sigma_{rank+1} (inf when nothing is cut)."""
        s = self.Sigma
        if self.rank == 0 or self.rank >= s.size:
            return np.inf
        return float(s[self.rank - 1] / max(s[self.rank], np.finfo(float).tiny))


def ranked_svd(M, rank_tol=DEFAULT.rank_tol, scale=None):
    """Full SVD with a numerical rank decision.

    Parameters
    ----------
    M : (p, q) array_like
    rank_tol : float
        Singular values ``> rank_tol * scale`` count towards the rank.
    scale : float, optional
        Reference magnitude. Defaults to the largest singular value, which
        gives the usual relative rank; pass an external norm when small
        matrices must be judged against the size of a larger problem.

    Returns
    -------
    RankedSvd
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p, q = M.shape
    if p == 0 or q == 0:
        return RankedSvd(np.eye(p), np.zeros(0), np.eye(q), 0, 0.0)
    if not np.all(np.isfinite(M)):
        raise ConvergenceFailure("ranked_svd: non-finite input")
    try:
        U, s, Vt = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc
    ref = s[0] if scale is None else float(scale)
    thr = rank_tol * ref
    rank = int(np.sum(s > thr)) if ref > 0 else 0
    return RankedSvd(U, s, Vt, rank, thr)


def null_space(M, rank_tol=DEFAULT.rank_tol, scale=None):
    """Orthonormal basis of the numerical right kernel of M."""
    M = np.atleast_2d(np.asarray(M))
    q = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(q, dtype=M.dtype)
    U, s, Vh = np.linalg.svd(M)
    ref = s[0] if (scale is None and s.size) else (scale or 0.0)
    rank = int(np.sum(s > rank_tol * ref)) if ref > 0 else 0
    return Vh[rank:].conj().T


# ---------------------------------------------------------------------------
# Schur forms and spectral classification
# ---------------------------------------------------------------------------

def schur_eigenvalues(T):
    """Eigenvalues read off a real quasi-triangular matrix, one per index."""
    n = T.shape[0]
    ev = np.zeros(n, dtype=complex)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            ev[i:i + 2] = np.linalg.eigvals(T[i:i + 2, i:i + 2])
            # keep the conjugate pair ordered (+imag first)
            if ev[i].imag < ev[i + 1].imag:
                ev[i], ev[i + 1] = ev[i + 1], ev[i]
            i += 2
        else:
            ev[i] = T[i, i]
            i += 1
    return ev


def _block_starts(T):
    """Index -> size of the diagonal block starting there (0 inside a block)."""
    n = T.shape[0]
    size = np.zeros(n, dtype=int)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            size[i] = 2
            i += 2
        else:
            size[i] = 1
            i += 1
    return size


def _reorder(T, Z, select):
    """Move the diagonal blocks flagged in ``select`` to the top."""
    n = T.shape[0]
    if n == 0 or select.all() or not select.any():
        return T, Z
    # a 2x2 block is selected as a whole
    sizes = _block_starts(T)
    sel = np.zeros(n, dtype=np.int32)
    for i in range(n):
        if sizes[i] == 2:
            flag = bool(select[i] or select[i + 1])
            sel[i] = sel[i + 1] = flag
        elif sizes[i] == 1:
            sel[i] = bool(select[i])
    ts, qs, _, _, _, _, _, info = lapack.dtrsen(sel, T, Z, job="N")
    if info != 0:
        raise ConvergenceFailure(f"Schur reordering failed (info={info})")
    return ts, qs


def ordered_schur(A, groups):
    """Real Schur form with eigenvalues grouped top to bottom.

    Parameters
    ----------
    A : (n, n) array_like
    groups : callable
        Maps the array of Schur eigenvalues to integer group labels; the
        result has label 0 first, then 1, and so on.

    Returns
    -------
    T, Z, labels
        ``A = Z T Z^T`` with ``labels`` aligned to the diagonal of T.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.eye(0), np.zeros(0, dtype=int)
    try:
        T, Z = sla.schur(A, output="real")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"Schur form failed: {exc}") from exc
    labels = np.asarray(groups(schur_eigenvalues(T)), dtype=int)
    top = labels.max()
    # bring labels <= g to the top, from the largest threshold down
    for g in range(top - 1, -1, -1):
        T, Z = _reorder(T, Z, labels <= g)
        labels = np.asarray(groups(schur_eigenvalues(T)), dtype=int)
    return T, Z, labels


@dataclass(frozen=True)
class EigenCluster:
    """A group of eigenvalues treated as one multiple eigenvalue."""
    center: complex
    members: tuple
    on_axis: bool


def _cluster(ev, radius):
    """Single-linkage grouping of eigenvalues within ``radius``."""
    n = ev.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ev[i] - ev[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [tuple(v) for v in groups.values()]


def classify_spectrum(ev, scale, axis_tol=DEFAULT.axis_tol,
                      cluster_tol=DEFAULT.cluster_tol):
    """Label eigenvalues as stable (-1), on-axis (0) or unstable (+1).

    Eigenvalues are first grouped into clusters; a cluster whose *mean*
    real part lies within ``axis_tol*scale`` of the imaginary axis counts
    as on-axis. Cluster means are well conditioned even when individual
    eigenvalues of a Jordan block scatter by O(sqrt(eps)).

    Returns
    -------
    labels : (n,) int array
    clusters : list of EigenCluster
    """
    ev = np.asarray(ev, dtype=complex)
    band = axis_tol * scale
    labels = np.where(ev.real < -band, -1, np.where(ev.real > band, 1, 0))
    clusters = []
    # cap the radius by the spectral radius so that a large non-normal
    # norm does not merge well separated eigenvalues
    radius = cluster_tol * scale
    if ev.size:
        radius = min(radius, max(1e-3 * np.abs(ev).max(), 1e2 * band))
    near = np.flatnonzero(np.abs(ev.real) <= max(band, radius))
    for grp in _cluster(ev[near], radius):
        idx = tuple(int(near[k]) for k in grp)
        center = complex(np.mean(ev[list(idx)]))
        on_axis = abs(center.real) <= band
        if on_axis:
            labels[list(idx)] = 0
            clusters.append(EigenCluster(complex(0.0, center.imag), idx, True))
        else:
            for k in idx:
                labels[k] = -1 if ev[k].real < 0 else (1 if ev[k].real > band else 0)
    return labels, clusters


@dataclass(frozen=True)
class SpectralSplit:
    """``M A M^{-1} = blockdiag(A1, A2)``.

    A1 is asymptotically stable, A2 carries the imaginary-axis spectrum.
    When ``normalized`` is true, A2 is (numerically) skew-symmetric.
    """
    M_transform: np.ndarray
    M_inv: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    semisimple_flag: bool
    axis_clusters: tuple = ()
    normalized: bool = False
    rank_decisions: tuple = field(default=())

    @property
    def n1(self):
        return self.A1.shape[0]

    @property
    def n2(self):
        return self.A2.shape[0]

    @property
    def cond_M(self):
        if self.M_transform.size == 0:
            return 1.0
        return float(np.linalg.cond(self.M_transform))


def _axis_eigenspaces(A2, clusters, rank_tol, scale):
    """Kernel dimensions and bases of A2 - lambda*I per on-axis cluster."""
    n2 = A2.shape[0]
    out = []
    for cl in clusters:
        w = cl.center.imag
        if w < 0:
            continue  # conjugate of a cluster handled with +w
        if w == 0:
            Mx = A2.astype(float)
        else:
            Mx = A2 - 1j * w * np.eye(n2)
        k = len(cl.members)
        U, s, Vh = np.linalg.svd(Mx)
        rank = int(np.sum(s > rank_tol * scale))
        geom = n2 - rank
        out.append((cl, k, geom, Vh[n2 - k:].conj().T if geom >= k else None,
                    s[rank - 1] if rank else np.inf, s[rank] if rank < n2 else 0.0))
    return out


def split_stable_imaginary(A, axis_tol=DEFAULT.axis_tol, rank_tol=None,
                           cluster_tol=DEFAULT.cluster_tol, normalize=False):
    """Split A into asymptotically stable and imaginary-axis parts.

    Ordered real Schur form (stable eigenvalues first) followed by a
    Sylvester solve that removes the coupling block.

    Parameters
    ----------
    A : (n, n) array_like
    axis_tol : float
        Relative half-width of the band around the imaginary axis.
    rank_tol : float, optional
        Relative tolerance of the semisimplicity rank test
        (defaults to ``axis_tol``).
    normalize : bool
        If true and the axis part is semisimple, additionally transform A2
        to skew-symmetric form with the positive definite solution of
        ``A2^T Q + Q A2 = 0`` built from its eigenspaces.

    Returns
    -------
    SpectralSplit

    Raises
    ------
    UnstableMatrix
        If an eigenvalue lies to the right of the band.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    rank_tol = axis_tol if rank_tol is None else rank_tol
    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny) if n else 1.0

    def groups(ev):
        labels, _ = classify_spectrum(ev, scale, axis_tol, cluster_tol)
        if np.any(labels > 0):
            bad = ev[labels > 0]
            raise UnstableMatrix(
                "right half-plane eigenvalue",
                witnesses={"max_real_part": float(bad.real.max()),
                           "band": axis_tol * scale})
        return np.where(labels < 0, 0, 1)

    T, Z, lab = ordered_schur(A, groups)
    n1 = int(np.sum(lab == 0))
    T11, T12, T22 = T[:n1, :n1], T[:n1, n1:], T[n1:, n1:]
    if n1 and n - n1:
        X = sla.solve_sylvester(T11, -T22, -T12)
    else:
        X = np.zeros((n1, n - n1))
    W = np.eye(n)
    W[:n1, n1:] = X
    Winv = np.eye(n)
    Winv[:n1, n1:] = -X
    M = Winv @ Z.T
    Minv = Z @ W
    A1, A2 = T11.copy(), T22.copy()

    ev2 = schur_eigenvalues(T22)
    _, clusters = classify_spectrum(ev2, scale, axis_tol, cluster_tol)
    spaces = _axis_eigenspaces(A2, clusters, rank_tol, scale)
    semisimple = all(geom == k for _, k, geom, *_ in spaces)
    decisions = tuple(
        {"eigenvalue": complex(cl.center), "algebraic": k, "geometric": geom,
         "sigma_kept": float(sk), "sigma_cut": float(sc)}
        for cl, k, geom, _, sk, sc in spaces)

    normalized = False
    if normalize and semisimple and A2.size:
        Sig = np.zeros((A2.shape[0],) * 2)
        for cl, k, geom, basis, *_ in spaces:
            G = basis @ basis.conj().T
            Sig += G.real if cl.center.imag == 0 else 2.0 * G.real
        Q2 = np.linalg.inv(sym(Sig))
        W2 = symmetric_sqrt_factor(Q2)
        W2inv = np.linalg.inv(W2)
        A2 = W2 @ A2 @ W2inv
        M = sla.block_diag(np.eye(n1), W2) @ M
        Minv = Minv @ sla.block_diag(np.eye(n1), W2inv)
        normalized = True

    return SpectralSplit(M, Minv, A1, A2, bool(semisimple), tuple(clusters),
                         normalized, decisions)


def symmetric_sqrt_factor(M, tol_psd=DEFAULT.tol_psd):
    """Symmetric positive semidefinite square root Y with M = Y Y^T.

    Raises
    ------
    NotPsd
        If ``lambda_min(M) < -tol_psd*||M||``.
    """
    M = sym(M)
    if M.size == 0:
        return M.copy()
    w, V = np.linalg.eigh(M)
    nrm = max(abs(w).max(), np.finfo(float).tiny)
    if w[0] < -tol_psd * nrm:
        raise NotPsd("matrix is not positive semidefinite",
                     witnesses={"lambda_min": float(w[0]), "norm": float(nrm)})
    w = np.clip(w, 0.0, None)
    return sym((V * np.sqrt(w)) @ V.T)


def _sign_normalize(NB, NC):
    """Fix the column signs so the largest entry of NB is positive."""
    for j in range(NB.shape[1]):
        i = np.argmax(np.abs(NB[:, j]))
        if NB[i, j] < 0:
            NB[:, j] *= -1
            NC[:, j] *= -1
    return NB, NC


def biorthogonal_kernel_bases(B, C, rank_tol=DEFAULT.rank_tol):
    """Bases of Ker B^T and Ker C normalised to ``NB^T NC = I``.

    Parameters
    ----------
    B : (n, m) array_like
    C : (m, n) array_like

    Returns
    -------
    NB_tilde, NC_tilde : (n, n - r) arrays

    Raises
    ------
    DegenerateKernelPairing
        If B and C have different ranks or ``NB^T NC`` is singular.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = B.shape[0]
    sb = ranked_svd(B, rank_tol)
    sc = ranked_svd(C, rank_tol)
    if sb.rank != sc.rank:
        raise DegenerateKernelPairing(
            "rank B differs from rank C",
            witnesses={"rank_B": sb.rank, "rank_C": sc.rank})
    r = sb.rank
    NB = sb.U[:, r:]
    NC = sc.Vt[r:].T
    if n - r == 0:
        return np.zeros((n, 0)), np.zeros((n, 0))
    U2, d, V2t = np.linalg.svd(NB.T @ NC)
    if d[-1] < rank_tol:
        raise DegenerateKernelPairing(
            "kernels of B^T and C are not complementary to the ranges",
            witnesses={"sigma_min": float(d[-1])})
    scl = 1.0 / np.sqrt(d)
    NBt = NB @ U2 * scl
    NCt = NC @ V2t.T * scl
    return _sign_normalize(NBt, NCt)


def solve_sylvester(A, B, C, sep_tol=None):
    """Solve ``A X + X B = C`` (Bartels-Stewart).

    Raises
    ------
    SpectraOverlap
        If some eigenvalue of A is within ``sep_tol`` of one of -B.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.asarray(C, dtype=float).reshape(A.shape[0], B.shape[0])
    if A.size == 0 or B.size == 0:
        return np.zeros_like(C)
    if sep_tol is None:
        sep_tol = 1e-12 * max(np.linalg.norm(A, 2) + np.linalg.norm(B, 2), 1.0)
    la = np.linalg.eigvals(A)
    lb = np.linalg.eigvals(B)
    sep = np.min(np.abs(la[:, None] + lb[None, :]))
    if sep <= sep_tol:
        raise SpectraOverlap("spectra of A and -B intersect",
                             witnesses={"separation": float(sep)})
    return sla.solve_sylvester(A, B, C)
