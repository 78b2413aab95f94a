import numpy as np
import pytest

import qlevy
from qlevy import ChiNotCharacterError, KernelMap, PreconditionError
from qlevy.fixtures import PACKAGED_NAMES, packaged_algebra, packaged_pair
from qlevy.schurmann import CP_CONTRACTIVE, CP_PREUNITAL, STAR_HOMOMORPHIC, UNCLASSIFIED


# -- check_generating --------------------------------------------------------


def test_check_generating_zero():
    B = packaged_algebra("fz2")
    report = qlevy.check_generating(B, np.zeros(2))
    assert report.passed
    assert report.reality_defect == 0.0
    assert report.unit_value == 0.0


def test_check_generating_flip_generator():
    """Ker eps = span{d1}; the 1x1 Gram is gamma(d1* d1) = gamma(d1) = 1."""
    B, gamma = packaged_pair("fz2")
    report = qlevy.check_generating(B, gamma)
    assert report.passed
    assert report.kernel_dim == 1
    assert report.cond_pos_min_eig == pytest.approx(1.0)


def test_check_generating_rejects_nonzero_unit_value():
    B = packaged_algebra("fz2")
    gamma = np.array([-2.0, 1.0])  # gamma(1) = -1
    report = qlevy.check_generating(B, gamma)
    assert not report.passed
    assert report.unit_value == pytest.approx(-1.0)


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_packaged_generators_pass(name):
    B, gamma = packaged_pair(name)
    assert qlevy.check_generating(B, gamma).passed


def test_convex_combinations_stay_generating():
    B, g1 = packaged_pair("fz2")
    g2 = np.array([-3.0, 3.0], complex)  # rate-3 flip
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert qlevy.check_generating(B, t * g1 + (1 - t) * g2).passed


# -- gns_triple ---------------------------------------------------------------


def test_gns_zero_generator_is_empty():
    B = packaged_algebra("fz2")
    T = qlevy.gns_triple(B, np.zeros(2))
    assert T.noise_dim == 0
    assert T.pi.shape == (2, 0, 0)
    assert T.xi is not None and T.xi.size == 0


def test_gns_flip_generator_frozen_values():
    """Hand Gram: Q = [[1,-1],[-1,1]]; pi = evaluation at the flip; xi = 1."""
    B, gamma = packaged_pair("fz2")
    T = qlevy.gns_triple(B, gamma)
    assert T.noise_dim == 1
    assert np.allclose(T.gram, [[1, -1], [-1, 1]])
    assert np.allclose(T.pi[:, 0, 0], [0.0, 1.0])
    assert T.xi is not None and np.allclose(T.xi, [1.0])
    assert np.allclose(T.delta[:, 0], [-1.0, 1.0])
    defects = qlevy.triple_defects(B, T)
    assert max(defects.values()) <= 1e-12


def test_gns_sign_generator_frozen_values():
    """C[Z/2] with gamma = (0, -2): Gram diag(0, 4), sign representation.

    The eigen-oracle: Q = [[0,0],[0,4]] has the single positive eigenvalue 4
    with eigenvector (0, 1), so |delta(u1)| = 2; the phase convention makes
    xi = 1 and delta(u1) = -2.
    """
    B, gamma = packaged_pair("cz2")
    T = qlevy.gns_triple(B, gamma)
    assert T.noise_dim == 1
    assert np.allclose(T.gram, [[0, 0], [0, 4]])
    assert np.allclose(T.pi[:, 0, 0], [1.0, -1.0])
    assert abs(T.delta[1, 0]) == pytest.approx(2.0)
    assert T.xi is not None and np.allclose(T.xi, [1.0])
    assert np.allclose(T.delta[:, 0], [0.0, -2.0])
    assert max(qlevy.triple_defects(B, T).values()) <= 1e-12


def test_gns_rejects_non_generating():
    B = packaged_algebra("fz2")
    with pytest.raises(PreconditionError):
        qlevy.gns_triple(B, np.array([1.0, -1.0]))  # conditionally negative


def test_gns_stable_under_tiny_perturbation():
    B, gamma = packaged_pair("fz2")
    T = qlevy.gns_triple(B, gamma + np.array([1e-13, -1e-13]))
    assert T.noise_dim == 1
    assert max(qlevy.triple_defects(B, T).values()) <= 1e-10


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_gns_triple_invariants_all_packaged(name):
    B, gamma = packaged_pair(name)
    T = qlevy.gns_triple(B, gamma)
    defects = qlevy.triple_defects(B, T)
    assert max(defects.values()) <= 1e-9, defects
    assert T.xi is not None


# -- assemble + structure relation -------------------------------------------


def test_assemble_flip_generator_blocks():
    B, gamma = packaged_pair("fz2")
    T = qlevy.gns_triple(B, gamma)
    phi = qlevy.assemble_structure_map(B, T)
    assert np.allclose(phi.blocks[1], [[1, 1], [1, 1]])
    assert np.allclose(phi.blocks[0], [[-1, -1], [-1, -1]])


def test_assemble_zero_triple():
    B = packaged_algebra("fz2")
    T = qlevy.gns_triple(B, np.zeros(2))
    phi = qlevy.assemble_structure_map(B, T)
    assert phi.target_dim == 1
    assert np.max(np.abs(phi.blocks)) == 0.0


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_structure_map_kills_unit(name, pipelines):
    B, _, _, phi = pipelines[name]
    assert np.max(np.abs(phi.apply(B.unit))) <= 1e-9


def test_verify_structure_relation_zero_map():
    B = packaged_algebra("fz2")
    zero = KernelMap(np.zeros((2, 2, 2), complex))
    assert qlevy.verify_structure_relation(B, zero) == 0.0


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_assembled_maps_satisfy_structure_relation(name, pipelines):
    B, _, _, phi = pipelines[name]
    assert qlevy.verify_structure_relation(B, phi) <= 1e-12


def test_structure_relation_detects_perturbation(pipelines):
    B, _, _, phi = pipelines["fz2"]
    blocks = phi.blocks.copy()
    blocks[1, 0, 0] += 0.1
    assert qlevy.verify_structure_relation(B, KernelMap(blocks)) >= 0.05


def test_structure_relation_requires_character():
    B = packaged_algebra("fz2")
    zero = KernelMap(np.zeros((2, 2, 2), complex))
    with pytest.raises(ChiNotCharacterError):
        qlevy.verify_structure_relation(B, zero, chi=np.array([0.5, 0.5]))


def _implemented_map(B, pi, xi, chi):
    """Block map [[<xi|nu xi>, <xi|nu], [nu|xi>, nu]] for nu = pi - chi I."""
    r = pi.shape[1]
    nu = pi - np.einsum("i,ab->iab", chi, np.eye(r))
    blocks = np.zeros((B.dim, r + 1, r + 1), complex)
    blocks[:, 0, 0] = np.einsum("a,iab,b->i", np.conj(xi), nu, xi)
    blocks[:, 1:, 0] = np.einsum("iab,b->ia", nu, xi)
    blocks[:, 0, 1:] = np.einsum("a,iab->ib", np.conj(xi), nu)
    blocks[:, 1:, 1:] = nu
    return KernelMap(blocks)


def test_any_implemented_pair_satisfies_chi_relation():
    """Converse direction, including a character different from the counit."""
    B = packaged_algebra("fz3")
    rng = np.random.default_rng(31)
    # pi: direct sum of two point evaluations of F(Z/3)
    pi = np.zeros((3, 2, 2), complex)
    pi[1, 0, 0] = 1.0
    pi[2, 1, 1] = 1.0
    for chi_point in range(3):
        chi = np.zeros(3, complex)
        chi[chi_point] = 1.0
        for _ in range(3):
            xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            phi = _implemented_map(B, pi, xi, chi)
            assert qlevy.verify_structure_relation(B, phi, chi=chi) <= 1e-12


# -- extract_implementing_pair -----------------------------------------------


def test_extract_pair_flip_generator(pipelines):
    B, _, T, phi = pipelines["fz2"]
    pair = qlevy.extract_implementing_pair(B, phi)
    assert pair.residual <= 1e-12
    assert np.allclose(pair.pi, T.pi)
    assert np.allclose(pair.xi, T.xi)
    assert pair.details["pi_multiplicative"] <= 1e-12


def test_extract_pair_zero_map():
    B = packaged_algebra("fz2")
    phi = KernelMap(np.zeros((2, 3, 3), complex))
    pair = qlevy.extract_implementing_pair(B, phi)
    assert np.allclose(pair.xi, 0.0)
    expected_pi = np.einsum("i,ab->iab", B.counit, np.eye(2))
    assert np.allclose(pair.pi, expected_pi)
    assert pair.residual <= 1e-14


def test_extract_pair_reports_infeasible_delta():
    """delta outside the range of nu: nonzero residual, least-squares point."""
    B = packaged_algebra("fz2")
    blocks = np.zeros((2, 2, 2), complex)
    blocks[1, 1, 0] = 1.0  # delta(d1) = 1 while nu = 0
    blocks[1, 0, 1] = 1.0
    pair = qlevy.extract_implementing_pair(B, KernelMap(blocks))
    assert pair.residual >= 0.5
    assert np.allclose(pair.xi, 0.0)


@pytest.mark.parametrize("name", PACKAGED_NAMES)
def test_extract_assemble_roundtrip(name, pipelines):
    B, _, T, phi = pipelines[name]
    pair = qlevy.extract_implementing_pair(B, phi)
    assert pair.residual <= 1e-9
    rebuilt = _implemented_map(B, pair.pi, pair.xi, B.counit)
    assert np.max(np.abs(rebuilt.blocks - phi.blocks)) <= 1e-9


def test_gram_roundtrip_is_basis_invariant(pipelines):
    """gamma of the assembled map regenerates a triple with the same Gram."""
    for name in PACKAGED_NAMES:
        B, _, T, phi = pipelines[name]
        T2 = qlevy.gns_triple(B, phi.gamma())
        assert np.max(np.abs(T2.gram - T.gram)) <= 1e-9
        assert T2.noise_dim == T.noise_dim


# -- classification -----------------------------------------------------------


def test_classify_structure_map_star_homomorphic(pipelines):
    B, _, _, phi = pipelines["fz2"]
    result = qlevy.classify_generator(B, phi)
    assert result.kind == STAR_HOMOMORPHIC


def test_classify_compression_with_witnesses(pipelines):
    """Vacuum compression: phi = gamma alone, psi = <xi| pi(.) xi>, zeta = 1/2."""
    B, gamma, T, _ = pipelines["fz2"]
    phi_c = qlevy.functional_as_kernel(gamma)
    psi = qlevy.functional_as_kernel(np.array([0.0, 1.0], complex))
    result = qlevy.classify_generator(B, phi_c, witnesses=(psi, np.array([0.5])))
    assert result.kind == CP_CONTRACTIVE
    assert result.certificate["psi_choi_min_eig"] >= -1e-12
    assert result.certificate["unit_max_eig"] <= 1e-12


def test_classify_compression_heuristic_search(pipelines):
    B, gamma, _, _ = pipelines["fz2"]
    result = qlevy.classify_generator(B, qlevy.functional_as_kernel(gamma))
    assert result.kind == CP_CONTRACTIVE
    assert result.certificate["psi_choi_min_eig"] >= -1e-12


def test_classify_scalar_decomposition():
    """phi = -2 eps(.) on C(+)0 with psi = 0, zeta = 1 is contractive."""
    B = packaged_algebra("fz2")
    phi = KernelMap((-2 * np.asarray(B.counit)).reshape(2, 1, 1))
    psi = KernelMap(np.zeros((2, 1, 1), complex))
    result = qlevy.classify_generator(B, phi, witnesses=(psi, np.array([1.0])))
    assert result.kind == CP_CONTRACTIVE
    assert result.certificate["unit_max_eig"] == pytest.approx(-2.0)


def test_classify_preunital_with_witnesses():
    """Strict isometry compression of a two-dimensional representation."""
    B = packaged_algebra("cz2")
    rho = B.rep_blocks[0].copy()
    xi = np.array([0.7, 0.3], complex)
    D = np.array([[1.0], [0.0]], complex)
    W = np.concatenate([xi[:, None], D], axis=1)
    nu = rho - np.einsum("i,ab->iab", B.counit, np.eye(2))
    phi = KernelMap(np.einsum("ac,icd,db->iab", W.conj().T, nu, W))
    result = qlevy.classify_generator(B, phi, witnesses=(rho, D, xi))
    assert result.kind == CP_PREUNITAL
    assert result.certificate["isometry_defect"] <= 1e-12


def test_classify_unit_violation_is_unclassified():
    B = packaged_algebra("fz2")
    eye2 = np.eye(2)
    blocks = np.einsum("i,ab->iab", np.asarray(B.counit), eye2)  # +eps(.) I
    result = qlevy.classify_generator(B, KernelMap(blocks))
    assert result.kind == UNCLASSIFIED
    assert result.certificate["unit_max_eig"] >= 0.9


def test_classify_keeps_random_hermitian_defect_unclassified():
    B = packaged_algebra("fz2")
    rng = np.random.default_rng(71)
    blocks = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
    blocks[:, 0, 0] += 3.0  # push the unit value positive
    result = qlevy.classify_generator(B, KernelMap(blocks))
    assert result.kind == UNCLASSIFIED
