import numpy as np
import pytest

from phrealize import LtiSystem, ph_to_lti, random_ph_realization


def lmi_lambda_max(sys, Q):
    """Largest eigenvalue of the negated LMI matrix, assembled from scratch."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    Q = 0.5 * (Q + Q.T)
    W = np.block([[-A.T @ Q - Q @ A, C.T - Q @ B], [C - B.T @ Q, D + D.T]])
    return -np.linalg.eigvalsh(0.5 * (W + W.T))[0]


def lmi_scale(sys, Q):
    nQ = np.linalg.norm(Q, 2)
    return max(1.0, 2 * np.linalg.norm(sys.A, 2) * nQ,
               np.linalg.norm(sys.B, 2) * nQ + np.linalg.norm(sys.C, 2),
               np.linalg.norm(sys.D + sys.D.T, 2))


def tf(A, B, C, D, s):
    n = A.shape[0]
    return C @ np.linalg.solve(s * np.eye(n) - A, B.astype(complex)) + D


def minimal_passive(n, m, seed):
    """Strictly passive PH system with S > 0 (minimal for generic data)."""
    ph = random_ph_realization(n, m, seed=seed)
    return ph_to_lti(ph), ph


def scalar_example(alpha):
    return LtiSystem([[-1.0 - alpha]], [[1.0]], [[-1.0]], [[0.5]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _rot(w):
    return np.array([[0.0, w], [-w, 0.0]])


def lyapunov_corpus(count, seed):
    """Random matrices labelled by construction.

    Classes cycle through: asymptotically stable, stable with semisimple
    imaginary-axis eigenvalues, defective on the axis, unstable.
    """
    import scipy.linalg as sla
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        cls = ["asymptotic", "axis", "jordan", "unstable"][i % 4]
        blocks = []
        for _ in range(int(rng.integers(1, 3))):
            if rng.random() < 0.5:
                blocks.append(np.array([[-rng.uniform(0.1, 3.0)]]))
            else:
                a, b = -rng.uniform(0.1, 3.0), rng.uniform(0.5, 3.0)
                blocks.append(np.array([[a, b], [-b, a]]))
        if cls == "axis":
            w = rng.uniform(0.5, 3.0)
            blocks.append(_rot(w))
            if rng.random() < 0.5:
                blocks.append(_rot(w))        # repeated, still semisimple
            if rng.random() < 0.5:
                blocks.append(np.zeros((1, 1)))
        elif cls == "jordan":
            if rng.random() < 0.5:
                blocks.append(np.array([[0.0, 1.0], [0.0, 0.0]]))
            else:
                w = rng.uniform(0.5, 3.0)
                blocks.append(np.block([[_rot(w), np.eye(2)], [np.zeros((2, 2)), _rot(w)]]))
        elif cls == "unstable":
            blocks.append(np.array([[rng.uniform(0.05, 2.0)]]))
        D = sla.block_diag(*blocks)
        n = D.shape[0]
        U, _ = np.linalg.qr(rng.standard_normal((n, n)))
        V, _ = np.linalg.qr(rng.standard_normal((n, n)))
        T = U @ np.diag(np.logspace(0, rng.uniform(0, 1.5), n)) @ V.T
        out.append((T @ D @ np.linalg.inv(T), cls))
    return out


def spectral_oracle(A):
    """Stability via eigenvalues plus a rank test for semisimplicity."""
    n = A.shape[0]
    nA = max(np.linalg.norm(A, 2), 1e-300)
    ev = np.linalg.eigvals(A)
    if ev.real.max() > 1e-6 * nA:
        return False
    axis = list(ev[np.abs(ev.real) <= 1e-6 * nA])
    while axis:
        lam = axis.pop(0)
        grp = [lam] + [z for z in axis if abs(z - lam) <= 1e-4 * nA]
        axis = [z for z in axis if abs(z - lam) > 1e-4 * nA]
        c = complex(0.0, np.mean(grp).imag)
        s = np.linalg.svd(A - c * np.eye(n), compute_uv=False)
        geom = int(np.sum(s <= 1e-6 * nA))
        if geom != len(grp):
            return False
    return True
