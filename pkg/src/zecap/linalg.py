"""Dense complex linear algebra over small tensor-product Hilbert spaces.

States (kets) are 1-D complex numpy arrays, operators are 2-D arrays.
Factor ordering is big-endian throughout: for dims = [d0, d1, ...] the
computational basis state |i0 i1 ...> sits at flat index
i0*(d1*d2*...) + i1*(d2*...) + ..., which is exactly numpy's C-order
reshape convention.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

ORTHO_TOL = 1e-10       # rank / orthogonality decisions
NORM_TOL = 1e-12        # ket normalization
DENSITY_TOL = 1e-9      # trace-one check for density operators


def dim_of(dims: Sequence[int]) -> int:
    return int(np.prod(dims)) if len(dims) else 1


def basis_ket(dims: Sequence[int], indices: Sequence[int] | int) -> np.ndarray:
    """Computational basis ket |i0 i1 ...> (or flat index) as a dense vector."""
    n = dim_of(dims)
    if isinstance(indices, (int, np.integer)):
        flat = int(indices)
    else:
        if len(indices) != len(dims):
            raise ValueError(f"expected {len(dims)} indices, got {len(indices)}")
        flat = int(np.ravel_multi_index(tuple(indices), tuple(dims)))
    v = np.zeros(n, dtype=complex)
    v[flat] = 1.0
    return v


def ket_from_terms(dims: Sequence[int], terms: Iterable[tuple[int, complex]],
                   normalize: bool = False) -> np.ndarray:
    """Build a ket from (flat index, amplitude) terms."""
    v = np.zeros(dim_of(dims), dtype=complex)
    for idx, coeff in terms:
        if not 0 <= idx < v.size:
            raise ValueError(f"index {idx} out of range for dimension {v.size}")
        v[idx] += coeff
    if normalize:
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        v = v / n
    return v


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of kets (1-D) or operators (2-D), big-endian order."""
    if not factors:
        raise ValueError("tensor() needs at least one factor")
    nd = factors[0].ndim
    if any(f.ndim != nd for f in factors):
        raise ValueError("cannot mix kets and operators in a tensor product")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def max_abs(a: np.ndarray) -> float:
    """Max-norm of an array; 0 for empty input."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_normalized(psi: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(np.vdot(psi, psi).real - 1.0) <= tol


def assert_density(rho: np.ndarray, tol: float = DENSITY_TOL,
                   eig_tol: float = 1e-8) -> None:
    """Raise if rho is not (numerically) a density operator."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got shape {rho.shape}")
    if max_abs(rho - dagger(rho)) > 1e-9:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density operator has trace {np.trace(rho).real}, expected 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -eig_tol:
        raise ValueError(f"density operator has negative eigenvalue {w[0]}")


def gram_schmidt(vectors: Sequence[np.ndarray], tol: float = ORTHO_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the span; vectors with residual norm < tol are dropped."""
    out: list[np.ndarray] = []
    for v in vectors:
        w = np.asarray(v, dtype=complex).copy()
        for e in out:
            w = w - e * np.vdot(e, w)
        # second pass for numerical stability of nearly dependent inputs
        for e in out:
            w = w - e * np.vdot(e, w)
        n = np.linalg.norm(w)
        if n >= tol:
            out.append(w / n)
    return out


def projector_from_span(vectors: Sequence[np.ndarray], tol: float = ORTHO_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of the given (not necessarily orthonormal) vectors."""
    basis = gram_schmidt(vectors, tol=tol)
    if not basis:
        dim = len(vectors[0]) if len(vectors) else 0
        return np.zeros((dim, dim), dtype=complex)
    b = np.stack(basis)
    return b.conj().T @ b


def transpose_plain(m: np.ndarray) -> np.ndarray:
    """Entrywise transpose in the computational basis (no conjugation)."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"transpose_plain expects a square operator, got {m.shape}")
    return m.T.copy()


def embed_operator(m: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    """I x ... x M x ... x I with M acting on factor `slot` of `dims`."""
    if not 0 <= slot < len(dims):
        raise ValueError(f"slot {slot} out of range for {len(dims)} factors")
    if m.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator shape {m.shape} does not match factor dimension {dims[slot]}")
    left = dim_of(dims[:slot])
    right = dim_of(dims[slot + 1:])
    return np.kron(np.kron(np.eye(left), m), np.eye(right)).astype(complex)


def eigh_descending(m: np.ndarray, herm_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching orthonormal eigenvector columns."""
    if max_abs(m - dagger(m)) > herm_tol:
        raise ValueError("eigh_descending expects a Hermitian operator")
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out all factors not in `keep`; kept factors stay in their original order."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep set {keep} out of range for {n} factors")
    total = dim_of(dims)
    if m.shape != (total, total):
        raise ValueError(f"operator shape {m.shape} does not match dims {dims}")
    t = m.reshape(*dims, *dims)
    traced = [k for k in range(n) if k not in keep]
    for offset, k in enumerate(traced):
        ax = k - offset  # axes shift as we trace
        t = np.trace(t, axis1=ax, axis2=ax + (n - offset))
    d_keep = dim_of([dims[k] for k in keep])
    return t.reshape(d_keep, d_keep)


def permute_factors(a: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so new factor k is old factor perm[k]."""
    dims = list(dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm {perm} is not a permutation of range({n})")
    new_dims = [dims[p] for p in perm]
    if a.ndim == 1:
        return a.reshape(dims).transpose(perm).reshape(dim_of(new_dims))
    total = dim_of(dims)
    if a.shape != (total, total):
        raise ValueError(f"operator shape {a.shape} does not match dims {dims}")
    t = a.reshape(*dims, *dims)
    axes = list(perm) + [n + p for p in perm]
    return t.transpose(axes).reshape(total, total)


def ket_to_matrix(psi: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Bipartite ket -> operator K mapping the A factor to the B factor.

    K[b, a] is the amplitude of |a>|b> in psi, so K @ x computes the
    contraction of psi with an A-side vector x.
    """
    if psi.size != d_a * d_b:
        raise ValueError(f"ket of length {psi.size} does not split as {d_a}x{d_b}")
    return psi.reshape(d_a, d_b).T.copy()


def matrix_to_ket(k: np.ndarray) -> np.ndarray:
    """Inverse of ket_to_matrix."""
    return k.T.reshape(-1).copy()


def max_entangled_ket(d: int) -> np.ndarray:
    """(1/sqrt(d)) sum_k |kk> on a d x d bipartite space."""
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * d + np.arange(d)] = 1.0 / np.sqrt(d)
    return psi


def parity_phase(dim: int) -> np.ndarray:
    """diag(+1, -1, +1, ...) on a single factor."""
    return np.diag([(-1.0) ** k for k in range(dim)]).astype(complex)


def haar_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + dagger(a))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.sum(np.abs(w)))
