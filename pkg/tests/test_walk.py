import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

import qlevy
from qlevy import NotAnIsometryError, StepTooLargeError
from qlevy.fixtures import PACKAGED_NAMES, packaged_algebra, packaged_pair

from conftest import random_element, random_step


@pytest.fixture(scope="module")
def flip_data():
    B, gamma = packaged_pair("fz2")
    T = qlevy.gns_triple(B, gamma)
    return B, gamma, T, qlevy.assemble_structure_map(B, T)


# -- interaction unitaries -----------------------------------------------------


def test_unitary_trivial_vector(flip_data):
    _, _, T, _ = flip_data
    U = qlevy.build_walk_unitary(T.pi, np.zeros(1), 0.3)
    assert np.array_equal(U, np.eye(2))


def test_unitary_quarter_step_exact_entries(flip_data):
    """One-dimensional case at h = 1/4: [[sqrt(3)/2, -1/2], [1/2, sqrt(3)/2]]."""
    _, _, T, _ = flip_data
    U = qlevy.build_walk_unitary(T.pi, T.xi, 0.25)
    expected = np.array([[np.sqrt(3) / 2, -0.5], [0.5, np.sqrt(3) / 2]])
    assert np.max(np.abs(U - expected)) <= 1e-15


def test_unitary_at_admissibility_boundary(flip_data):
    _, _, T, _ = flip_data
    U = qlevy.build_walk_unitary(T.pi, T.xi, 1.0)  # h ||xi||^2 = 1, c = 0
    assert np.max(np.abs(U.conj().T @ U - np.eye(2))) <= 1e-13
    assert U[0, 0] == 0.0


def test_unitary_step_too_large(flip_data):
    _, _, T, _ = flip_data
    with pytest.raises(StepTooLargeError):
        qlevy.build_walk_unitary(T.pi, T.xi, 1.01)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(data=st.data())
def test_unitary_random_vectors(data):
    dim = data.draw(st.integers(1, 4))
    raw = data.draw(st.lists(st.integers(-5, 5), min_size=2 * dim, max_size=2 * dim))
    xi = np.asarray(raw[:dim], float) + 1j * np.asarray(raw[dim:], float)
    norm2 = float(np.vdot(xi, xi).real)
    h = data.draw(st.sampled_from([0.1, 0.25, 0.5, 1.0]))
    if norm2 > 0:
        h = min(h, 1.0 / norm2)
    pi = np.zeros((1, dim, dim), complex)  # dimension carrier only
    U = qlevy.build_walk_unitary(pi, xi, h)
    eye = np.eye(dim + 1)
    assert np.max(np.abs(U.conj().T @ U - eye)) <= 1e-12
    assert np.max(np.abs(U @ U.conj().T - eye)) <= 1e-12


def test_isometry_identity_embedding(flip_data):
    _, _, T, _ = flip_data
    U = qlevy.build_walk_unitary(T.pi, T.xi, 0.25)
    V = qlevy.build_walk_isometry(T.pi, T.xi, np.eye(1), 0.25)
    assert np.array_equal(U, V)


def test_isometry_vacuum_compression(flip_data):
    """Zero-dimensional k: V is the first column of U."""
    _, _, T, _ = flip_data
    U = qlevy.build_walk_unitary(T.pi, T.xi, 0.25)
    V = qlevy.build_walk_isometry(T.pi, T.xi, np.zeros((1, 0)), 0.25)
    assert V.shape == (2, 1)
    assert np.array_equal(V[:, 0], U[:, 0])
    assert np.max(np.abs(V.conj().T @ V - np.eye(1))) <= 1e-13


def test_isometry_random_embedding():
    B, gamma = packaged_pair("cz4")
    T = qlevy.gns_triple(B, gamma)
    rng = np.random.default_rng(7)
    v = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
    D = v / np.linalg.norm(v)
    V = qlevy.build_walk_isometry(T.pi, T.xi, D, 0.25)
    assert np.max(np.abs(V.conj().T @ V - np.eye(2))) <= 1e-13


def test_isometry_rejects_non_isometry(flip_data):
    _, _, T, _ = flip_data
    with pytest.raises(NotAnIsometryError):
        qlevy.build_walk_isometry(T.pi, T.xi, np.array([[2.0]]), 0.25)


# -- one-step maps ---------------------------------------------------------------


def test_walk_map_quarter_step_blocks(flip_data):
    B, _, T, _ = flip_data
    psi = qlevy.walk_map(B, T.pi, T.xi, 0.25)
    c = np.sqrt(3) / 2
    expected = np.array([[0.25, c / 2], [c / 2, 0.75]])
    assert np.max(np.abs(psi.blocks[1] - expected)) <= 1e-15
    assert psi.blocks[1][0, 0] == pytest.approx(0.25)  # jump probability h


def test_walk_map_star_homomorphic(flip_data):
    B, _, T, _ = flip_data
    for h in (0.5, 0.25, 0.125):
        psi = qlevy.walk_map(B, T.pi, T.xi, h)
        mult = np.einsum("iab,jbc->ijac", psi.blocks, psi.blocks) \
            - np.einsum("ijk,kac->ijac", B.mult, psi.blocks)
        assert np.max(np.abs(mult)) <= 1e-10
        star = np.conj(psi.blocks.transpose(0, 2, 1)) \
            - np.einsum("ik,kab->iab", B.invol, psi.blocks)
        assert np.max(np.abs(star)) <= 1e-12
        assert np.max(np.abs(psi.apply(B.unit) - np.eye(2))) <= 1e-12


def test_walk_map_isometry_case_cp_preunital():
    B, gamma = packaged_pair("cz4")
    T = qlevy.gns_triple(B, gamma)
    rng = np.random.default_rng(11)
    v = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
    D = v / np.linalg.norm(v)
    psi = qlevy.walk_map(B, T.pi, T.xi, 0.25, D=D)
    assert psi.target_dim == 2
    assert qlevy.choi_min_eig(B, psi) >= -1e-10
    assert np.max(np.abs(psi.apply(B.unit) - np.eye(2))) <= 1e-12


def test_walk_map_zero_vector_is_direct_sum(flip_data):
    B, _, T, phi = flip_data
    psi = qlevy.walk_map(B, T.pi, np.zeros(1), 0.25)
    direct = np.zeros((2, 2, 2), complex)
    direct[:, 0, 0] = B.counit
    direct[:, 1:, 1:] = T.pi
    assert np.max(np.abs(psi.blocks - direct)) == 0.0
    # the rescaled defect is h-independent: [[0, 0], [0, pi - eps I]]
    from qlevy.walk import scaled_defect
    for h in (0.5, 0.1):
        sd = scaled_defect(B, psi, h)
        expected = direct.copy()
        expected[:, 0, 0] -= B.counit
        expected[:, 1:, 1:] -= np.einsum("i,ab->iab", B.counit, np.eye(1))
        assert np.max(np.abs(sd - expected)) <= 1e-14


# -- the exact difference identity -------------------------------------------------


@pytest.mark.parametrize("h", [0.5, 0.25, 0.125, 1 / 16, 1.0])
def test_scaled_difference_identity_flip(flip_data, h):
    B, _, T, phi = flip_data
    assert qlevy.scaled_difference_identity(B, phi, T.pi, T.xi, h) <= 1e-13


def test_scaled_difference_identity_symbolic_oracle():
    """Exact verification at h = 1/4 for the flip generator, in sqrt(3) arithmetic."""
    h = sympy.Rational(1, 4)
    c = sympy.sqrt(1 - h)
    U = sympy.Matrix([[c, -sympy.sqrt(h)], [sympy.sqrt(h), c]])
    eps = [1, 0]
    pi = [sympy.Matrix([[0]]), sympy.Matrix([[1]])]
    S = sympy.Matrix([[1 / sympy.sqrt(h), 0], [0, 1]])
    for i in range(2):
        direct = sympy.Matrix([[eps[i], 0], [0, pi[i][0, 0]]])
        psi_i = U.T * direct * U
        lhs_blk = S * (psi_i - eps[i] * sympy.eye(2)) * S
        nu = pi[i][0, 0] - eps[i]
        gamma = nu  # xi = 1
        phi_i = sympy.Matrix([[gamma, nu], [nu, nu]])
        phi1 = sympy.Matrix([[0, gamma], [gamma, 2 * nu]])
        phi2 = sympy.Matrix([[0, 0], [0, gamma]])
        rhs = phi_i - (h / (1 + c)) * phi1 + (h ** 2 / (1 + c) ** 2) * phi2
        assert sympy.simplify(lhs_blk - rhs) == sympy.zeros(2, 2)


def test_scaled_difference_norm_shrinks_linearly(flip_data):
    B, _, T, phi = flip_data
    from qlevy.walk import scaled_defect
    norms = []
    for h in (0.5, 0.25, 0.125):
        psi = qlevy.walk_map(B, T.pi, T.xi, h)
        norms.append(np.max(np.abs(phi.blocks - scaled_defect(B, psi, h))))
        assert qlevy.scaled_difference_identity(B, phi, T.pi, T.xi, h) <= 1e-13
    assert norms[0] > norms[1] > norms[2]
    assert norms[0] / norms[2] == pytest.approx(4.0, rel=0.35)  # O(h)


def test_scaled_difference_zero_vector(flip_data):
    B, _, T, _ = flip_data
    psi = qlevy.walk_map(B, T.pi, np.zeros(1), 0.25)
    from qlevy.walk import scaled_defect
    blocks = scaled_defect(B, psi, 0.25)
    phi0 = qlevy.KernelMap(blocks)
    assert qlevy.scaled_difference_identity(B, phi0, T.pi, np.zeros(1), 0.25) <= 1e-15


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_scaled_difference_identity_all_packaged(name):
    B, gamma = packaged_pair(name)
    T = qlevy.gns_triple(B, gamma)
    phi = qlevy.assemble_structure_map(B, T)
    norm2 = float(np.vdot(T.xi, T.xi).real)
    for h in (0.5, 0.25, 0.125, 1 / 16):
        if h * norm2 > 1:
            continue
        assert qlevy.scaled_difference_identity(B, phi, T.pi, T.xi, h) <= 1e-12


# -- matrix elements ---------------------------------------------------------------


def test_walk_matrix_element_zero_steps(flip_data):
    B, _, T, _ = flip_data
    psi = qlevy.walk_map(B, T.pi, T.xi, 0.25)
    rng = np.random.default_rng(3)
    f = random_step(rng, 1)
    g = random_step(rng, 1)
    b = random_element(rng, 2)
    t_max = 2.5
    val = qlevy.walk_matrix_element(B, psi, 0.25, 0, f, g, b, t_max=t_max)
    expected = B.eval_functional(B.counit, b) * np.exp(qlevy.l2_inner(f, g, 0, t_max))
    assert val == pytest.approx(expected)


def test_walk_matrix_element_classical_chain(flip_data):
    """Vacuum column: value = (1 - (1 - 2h)^n)/2, the two-state chain."""
    B, _, T, _ = flip_data
    f0 = qlevy.zero_step(1)
    d1 = B.basis_element(1)
    for h in (0.5, 0.25, 0.125):
        psi = qlevy.walk_map(B, T.pi, T.xi, h)
        for n in (0, 1, 2, 5, 8):
            val = qlevy.walk_matrix_element(B, psi, h, n, f0, f0, d1)
            assert val == pytest.approx(0.5 * (1 - (1 - 2 * h) ** n), abs=1e-13)


def test_walk_vacuum_column_is_classical_transition(flip_data):
    """omega_e0 of the step map iterates like the stochastic matrix power."""
    B, _, T, _ = flip_data
    h = 0.25
    psi = qlevy.walk_map(B, T.pi, T.xi, h)
    q = psi.blocks[:, 0, 0]
    P = np.array([[1 - h, h], [h, 1 - h]])  # classical flip kernel
    acc = np.asarray(B.counit, complex)
    dist = np.array([1.0, 0.0])
    for _ in range(6):
        acc = qlevy.convolve(B, acc, q)
        dist = dist @ P
        assert np.max(np.abs(acc - dist)) <= 1e-13


def test_walk_matrix_element_matches_bruteforce_seeded(flip_data):
    B, _, T, _ = flip_data
    rng = np.random.default_rng(101)
    for _ in range(20):
        h = float(rng.uniform(0.05, 0.9))
        n = int(rng.integers(0, 5))
        psi = qlevy.walk_map(B, T.pi, T.xi, h)
        f = random_step(rng, 1, horizon=n * h + 0.5)
        g = random_step(rng, 1, horizon=n * h + 0.5)
        b = random_element(rng, 2)
        t_max = n * h + 1.0
        fast = qlevy.walk_matrix_element(B, psi, h, n, f, g, b, t_max=t_max)
        brute = qlevy.walk_matrix_element_bruteforce(B, psi, h, n, f, g, b, t_max=t_max)
        assert abs(fast - brute) <= 1e-12 * max(1.0, abs(brute))


def test_walk_matrix_element_multidimensional_noise():
    """Factorized path vs full tensor contraction with noise dimension 3."""
    B, gamma = packaged_pair("fs3")
    T = qlevy.gns_triple(B, gamma)
    assert T.noise_dim == 3
    psi = qlevy.walk_map(B, T.pi, T.xi, 0.2)
    rng = np.random.default_rng(77)
    for _ in range(5):
        f = random_step(rng, 3)
        g = random_step(rng, 3)
        b = random_element(rng, 6)
        fast = qlevy.walk_matrix_element(B, psi, 0.2, 2, f, g, b, t_max=1.5)
        brute = qlevy.walk_matrix_element_bruteforce(B, psi, 0.2, 2, f, g, b,
                                                     t_max=1.5)
        assert abs(fast - brute) <= 1e-11 * max(1.0, abs(brute))


def test_walk_matrix_element_horizon_error(flip_data):
    B, _, T, _ = flip_data
    psi = qlevy.walk_map(B, T.pi, T.xi, 0.25)
    with pytest.raises(qlevy.HorizonError):
        qlevy.walk_matrix_element(B, psi, 0.25, 8, qlevy.zero_step(1),
                                  qlevy.zero_step(1), [0, 1], t_max=1.0)


# -- convergence -------------------------------------------------------------------


def test_convergence_zero_generator():
    B = packaged_algebra("fz2")
    phi = qlevy.KernelMap(np.zeros((2, 1, 1), complex))
    pi = np.zeros((2, 0, 0), complex)
    xi = np.zeros(0, complex)
    f0 = qlevy.zero_step(0)
    rows = qlevy.convergence_table(B, phi, pi, xi, 1.0, f0, f0,
                                   [B.basis_element(0)], [0.25, 0.125])
    assert all(r.err <= 1e-14 for r in rows)


def test_convergence_closed_form_oracle(flip_data):
    """err(h) equals the Euler-vs-exponential gap of the two-state chain."""
    B, _, T, phi = flip_data
    f0 = qlevy.zero_step(1)
    d1 = B.basis_element(1)
    h_grid = [2.0 ** -k for k in range(2, 8)]
    rows = qlevy.convergence_table(B, phi, T.pi, T.xi, 1.0, f0, f0, [d1], h_grid)
    for row in rows:
        ns = np.arange(0, int(np.floor(1.0 / row.h + 1e-9)) + 1)
        gap = np.max(np.abs(0.5 * (1 - (1 - 2 * row.h) ** ns)
                            - 0.5 * (1 - np.exp(-2 * ns * row.h))))
        assert abs(row.err - gap) <= 1e-10
    errs = [r.err for r in rows]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.15 * errs[0]


def test_convergence_halving_decreases(flip_data):
    B, _, T, phi = flip_data
    f0 = qlevy.zero_step(1)
    d1 = B.basis_element(1)
    rows = qlevy.convergence_table(B, phi, T.pi, T.xi, 1.0, f0, f0, [d1],
                                   [1 / 16, 1 / 32, 1 / 64, 1 / 128])
    errs = [r.err for r in rows]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert rows[1].ratio == pytest.approx(errs[1] / errs[0])


def test_convergence_with_nonzero_test_functions(flip_data):
    B, _, T, phi = flip_data
    rng = np.random.default_rng(13)
    f = random_step(rng, 1, horizon=1.0, scale=0.4)
    g = random_step(rng, 1, horizon=1.0, scale=0.4)
    els = [B.basis_element(0), B.basis_element(1)]
    rows = qlevy.convergence_table(B, phi, T.pi, T.xi, 1.0, f, g, els,
                                   [0.25, 0.125, 1 / 16, 1 / 32])
    errs = [r.err for r in rows]
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.3 * errs[0]
