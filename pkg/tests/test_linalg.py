import numpy as np
import pytest

from conftest import gram_rank
from zecap import linalg
from zecap.channels import e21_spanning_terms
from zecap.linalg import (
    basis_ket,
    eigh_descending,
    embed_operator,
    gram_schmidt,
    ket_from_terms,
    ket_to_matrix,
    matrix_to_ket,
    max_abs,
    max_entangled_ket,
    parity_phase,
    partial_trace,
    permute_factors,
    projector_from_span,
    random_density,
    random_hermitian,
    tensor,
    transpose_plain,
)

SQ2 = np.sqrt(2.0)


def e21_span_vectors():
    return [ket_from_terms([16], [(i, complex(c)) for i, c in terms])
            for terms in e21_spanning_terms()]


def test_tensor_basis_case():
    k0 = basis_ket([2], 0)
    assert np.array_equal(tensor(k0, k0), basis_ket([2, 2], 0))


def test_tensor_identity_case():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_kind_mismatch():
    with pytest.raises(ValueError):
        tensor(basis_ket([2], 0), np.eye(2))


def test_entangled_sum_normalized():
    alpha = (basis_ket([2, 2], 0) + basis_ket([2, 2], 3)) / SQ2
    assert abs(np.vdot(alpha, alpha) - 1.0) < 1e-15
    assert max_abs(alpha - max_entangled_ket(2)) < 1e-15


def test_gram_schmidt_disjoint_supports():
    v1 = basis_ket([16], 0) - basis_ket([16], 5)
    v2 = basis_ket([16], 10) - basis_ket([16], 15)
    basis = gram_schmidt([v1, v2])
    assert len(basis) == 2
    assert abs(np.vdot(basis[0], basis[1])) < 1e-12


def test_gram_schmidt_dependent_set():
    v = basis_ket([2], 0)
    assert len(gram_schmidt([v, v.copy()])) == 1


def test_gram_schmidt_empty():
    assert gram_schmidt([]) == []


def test_gram_schmidt_rank_matches_oracle_on_construction_span():
    vs = e21_span_vectors()
    assert gram_rank(vs) == 8          # frozen from the Gram-eigenvalue oracle
    assert len(gram_schmidt(vs)) == 8


def test_projector_from_single_vector():
    p = projector_from_span([basis_ket([2], 0)])
    assert max_abs(p - np.diag([1.0, 0.0])) < 1e-15


def test_projector_idempotent_hermitian_trace():
    vs = e21_span_vectors()
    p = projector_from_span(vs)
    assert max_abs(p - p.conj().T) < 1e-12
    assert max_abs(p @ p - p) < 1e-10
    assert abs(np.trace(p).real - 8) < 1e-9


def test_projector_complement_completeness():
    vs = e21_span_vectors()
    p0 = projector_from_span(vs)
    w, v = np.linalg.eigh(p0)
    kernel = [v[:, i] for i in range(16) if w[i] < 0.5]
    p1 = projector_from_span(kernel)
    assert max_abs(p0 + p1 - np.eye(16)) < 1e-10


def test_transpose_plain_vs_conjugation():
    m = np.array([[0, 1j], [0, 0]])
    t = transpose_plain(m)
    assert t[1, 0] == 1j and t[0, 1] == 0


def test_transpose_plain_requires_square():
    with pytest.raises(ValueError):
        transpose_plain(np.zeros((2, 3)))


def test_transpose_fixes_construction_projector():
    p = projector_from_span(e21_span_vectors())
    assert max_abs(p - transpose_plain(p)) < 1e-12


def test_embed_operator_slots():
    u = parity_phase(4)
    assert max_abs(embed_operator(u, 0, [4, 4]) - np.kron(u, np.eye(4))) == 0
    assert max_abs(embed_operator(u, 1, [4, 4]) - np.kron(np.eye(4), u)) == 0


def test_embed_operator_errors():
    with pytest.raises(ValueError):
        embed_operator(np.eye(2), 2, [2, 2])
    with pytest.raises(ValueError):
        embed_operator(np.eye(3), 0, [2, 2])


def test_eigh_descending_projector():
    w, _ = eigh_descending(np.diag([1.0, 0.0]).astype(complex))
    assert np.allclose(w, [1.0, 0.0])


def test_eigh_descending_rho1_spectrum():
    alpha = max_entangled_ket(2)
    rho1 = (np.eye(4) - np.outer(alpha, alpha.conj())) / 3.0
    w, v = eigh_descending(rho1)
    assert np.allclose(w, [1 / 3, 1 / 3, 1 / 3, 0.0], atol=1e-12)
    for i in range(4):
        assert np.linalg.norm(rho1 @ v[:, i] - w[i] * v[:, i]) < 1e-9


def test_eigh_descending_projector_multiplicity():
    p = projector_from_span(e21_span_vectors())
    w, _ = eigh_descending(p)
    assert int(np.sum(w > 0.5)) == 8
    assert int(np.sum(w < 0.5)) == 8


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigh_descending(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_partial_trace_entangled_marginal():
    alpha = max_entangled_ket(2)
    marg = partial_trace(np.outer(alpha, alpha.conj()), [2, 2], keep=[0])
    assert max_abs(marg - np.eye(2) / 2) < 1e-12


def test_partial_trace_product():
    rng = np.random.default_rng(1)
    rho = random_density(2, rng)
    sigma = random_density(3, rng)
    joint = np.kron(rho, sigma)
    assert max_abs(partial_trace(joint, [2, 3], keep=[0]) - rho) < 1e-12
    assert max_abs(partial_trace(joint, [2, 3], keep=[1]) - sigma) < 1e-12


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(2)
    rho = random_density(12, rng)
    red = partial_trace(rho, [2, 3, 2], keep=[1])
    assert abs(np.trace(red).real - 1.0) < 1e-12


def test_partial_trace_bad_keep():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4) / 4, [2, 2], keep=[2])


def test_permute_factors_ket_roundtrip():
    rng = np.random.default_rng(3)
    psi = rng.normal(size=24) + 1j * rng.normal(size=24)
    out = permute_factors(psi, [2, 3, 4], [2, 0, 1])
    back = permute_factors(out, [4, 2, 3], [1, 2, 0])
    assert max_abs(psi - back) == 0


def test_ket_to_matrix_basis():
    assert max_abs(ket_to_matrix(basis_ket([2, 2], 0), 2, 2)
                   - np.array([[1, 0], [0, 0]])) == 0


def test_ket_to_matrix_unnormalized_entangled_is_identity():
    psi = basis_ket([2, 2], 0) + basis_ket([2, 2], 3)
    assert max_abs(ket_to_matrix(psi, 2, 2) - np.eye(2)) == 0


def test_ket_to_matrix_radical_coefficients():
    # |1 0> - sqrt(2)|2 1> + |3 2> on a 4x4 cut
    psi = ket_from_terms([16], [(4, 1.0), (9, -SQ2), (14, 1.0)])
    k = ket_to_matrix(psi, 4, 4)
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 1] = 1.0
    expected[1, 2] = -SQ2
    expected[2, 3] = 1.0
    assert max_abs(k - expected) == 0


def test_ket_to_matrix_roundtrip_and_rank_one_on_products():
    for a in range(3):
        for b in range(4):
            psi = tensor(basis_ket([3], a), basis_ket([4], b))
            k = ket_to_matrix(psi, 3, 4)
            assert np.linalg.matrix_rank(k) == 1
            assert max_abs(matrix_to_ket(k) - psi) == 0


def test_ket_to_matrix_length_mismatch():
    with pytest.raises(ValueError):
        ket_to_matrix(np.zeros(5), 2, 2)


def test_entangled_quadratic_form_identity():
    # <Phi2|(R1 on use 1)(R2 on use 2)|Phi2> * D = tr(R1^T R2), with Phi2 the
    # maximally entangled state across two copies of a D-dimensional space.
    rng = np.random.default_rng(4)
    d = 16
    phi = max_entangled_ket(d)
    for _ in range(100):
        r1 = random_hermitian(d, rng)
        r2 = random_hermitian(d, rng)
        lhs = np.vdot(phi, np.kron(r1, r2) @ phi) * d
        rhs = np.trace(r1.T @ r2)
        assert abs(lhs - rhs) < 1e-9


def test_two_use_state_factor_grouping():
    # the two-use codeword stored use-major equals the D-dim maximally
    # entangled state after regrouping sender-major factors
    phi4 = max_entangled_ket(4)
    psi_sender_major = tensor(phi4, phi4)           # (A, A', B, B')
    psi = permute_factors(psi_sender_major, [4, 4, 4, 4], [0, 2, 1, 3])
    assert max_abs(psi - max_entangled_ket(16)) < 1e-12
    rho = np.outer(psi, psi.conj())
    # use cut: maximally mixed marginal
    use_marg = partial_trace(rho, [4, 4, 4, 4], keep=[0, 1])
    assert max_abs(use_marg - np.eye(16) / 16) < 1e-12
    # sender cut: pure maximally entangled marginal
    sender_marg = partial_trace(rho, [4, 4, 4, 4], keep=[0, 2])
    assert max_abs(sender_marg - np.outer(phi4, phi4.conj())) < 1e-12
