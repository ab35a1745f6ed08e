import numpy as np

from phrealize import LtiSystem, pbh_controllable, pbh_observable, staircase_decompose


def _check_form(sys, st):
    n = sys.n
    U = st.U
    assert np.linalg.norm(U.T @ U - np.eye(n)) <= 1e-12 * np.sqrt(max(n, 1)) * 10
    scale = max(np.linalg.norm(sys.A), np.linalg.norm(sys.B), np.linalg.norm(sys.C), 1)
    assert st.pattern_residual() <= 1e-12 * scale * 10
    ev = np.sort_complex(np.linalg.eigvals(sys.A))
    evt = np.sort_complex(np.linalg.eigvals(st.At))
    np.testing.assert_allclose(evt, ev, atol=1e-10 * scale)


def test_minimal_system(rng):
    s = LtiSystem(rng.standard_normal((4, 4)), rng.standard_normal((4, 1)),
                  rng.standard_normal((1, 4)), [[0.0]])
    st = staircase_decompose(s)
    assert (st.n_co, st.n_c_unobs, st.n_unctrl) == (4, 0, 0)
    _check_form(s, st)


def test_zero_input(rng):
    A = rng.standard_normal((3, 3))
    s = LtiSystem(A, np.zeros((3, 1)), rng.standard_normal((1, 3)), [[0.0]])
    st = staircase_decompose(s)
    assert st.n_co == 0 and st.n_unctrl == 3
    np.testing.assert_allclose(st.A33, A, atol=1e-15)


def test_diagonal_example():
    s = LtiSystem(np.diag([-1.0, -2.0]), [[1.0], [0.0]], [[1.0, 0.0]], [[0.0]])
    st = staircase_decompose(s)
    assert (st.n_co, st.n_c_unobs, st.n_unctrl) == (1, 0, 1)
    np.testing.assert_allclose(st.A33, [[-2.0]])
    # direct PBH ranks on the 2x2 instance
    assert not pbh_controllable(s.A, s.B)
    assert pbh_controllable(st.A11, st.B1) and pbh_observable(st.A11, st.C1)


def test_all_three_parts(rng):
    # controllable-observable (2), controllable-unobservable (1), uncontrollable (2)
    A0 = np.zeros((5, 5))
    A0[:2, :2] = [[-1.0, 1.0], [0.0, -2.0]]
    A0[2, :3] = [0.5, 0.0, -3.0]
    A0[3:, 3:] = [[-1.0, 2.0], [-2.0, -1.0]]
    A0[:3, 3:] = rng.standard_normal((3, 2))
    B0 = np.zeros((5, 1))
    B0[:3, 0] = [0.0, 1.0, 1.0]
    C0 = np.zeros((1, 5))
    C0[0, [0, 3]] = [1.0, 1.0]
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    s = LtiSystem(Q @ A0 @ Q.T, Q @ B0, C0 @ Q.T, [[0.0]])
    st = staircase_decompose(s)
    assert (st.n_co, st.n_c_unobs, st.n_unctrl) == (2, 1, 2)
    _check_form(s, st)
    assert pbh_controllable(st.At[:3, :3], st.Bt[:3])
    assert pbh_observable(st.A11, st.C1)
    # idempotence on the controllable-observable part
    sub = LtiSystem(st.A11, st.B1, st.C1, [[0.0]])
    assert staircase_decompose(sub).n_co == 2


def test_pbh_trivial():
    assert pbh_controllable([[0.0]], [[1.0]])
    assert not pbh_controllable([[0.0]], [[0.0]])


def test_pbh_canonical(rng):
    # controllable companion form under a random similarity
    a = rng.standard_normal(4)
    A = np.diag(np.ones(3), 1)
    A[-1] = a
    B = np.eye(4)[:, [3]]
    T = rng.standard_normal((4, 4))
    assert pbh_controllable(T @ A @ np.linalg.inv(T), T @ B)
