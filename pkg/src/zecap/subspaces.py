"""Subspaces of multipartite spaces and completely-entangled certification.

The central question answered here is whether a subspace contains a product
state. Two independent routes are provided: an alternating eigenvector
maximization of <a x b x ...|P|a x b x ...> over normalized product states
(fast, local, many restarts), and an exhaustive grid over a gauge-fixed
parameterization of the product manifold (slow, global, coarse). Both return
lower bounds on the true maximum product overlap.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exactnum import ONE, exact_all_zero, exact_matmul, exact_projector, exact_zeros
from .linalg import (
    ORTHO_TOL,
    dim_of,
    embed_operator,
    gram_schmidt,
    haar_ket,
    max_abs,
    transpose_plain,
)

PRODUCT_FOUND_TOL = 1e-6     # overlap >= 1 - this counts as a product state
DEFAULT_CE_GAP = 1e-3
MIN_CERT_RESTARTS = 100


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Subspace:
    """A subspace given by party dimensions, an orthonormal basis and its projector.

    Immutable after construction (the held arrays are write-protected), so
    instances are safe to share across threads.
    """

    dims: tuple[int, ...]
    basis: np.ndarray          # shape (dim, total), rows orthonormal
    projector: np.ndarray      # shape (total, total)

    @classmethod
    def from_span(cls, dims: Sequence[int], spanning: Sequence[np.ndarray],
                  tol: float = ORTHO_TOL) -> "Subspace":
        total = dim_of(dims)
        for v in spanning:
            if np.asarray(v).shape != (total,):
                raise ValueError(
                    f"spanning vector of length {np.asarray(v).size} does not "
                    f"match dims {tuple(dims)} (total {total})")
        basis = gram_schmidt(spanning, tol=tol)
        b = np.stack(basis) if basis else np.zeros((0, total), dtype=complex)
        proj = b.conj().T @ b
        return cls(tuple(int(d) for d in dims), _frozen(b), _frozen(proj))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def total_dim(self) -> int:
        return dim_of(self.dims)

    def complement(self) -> "Subspace":
        """Orthogonal complement; the two projectors sum to the identity."""
        w, v = np.linalg.eigh(self.projector)
        kernel = [v[:, i] for i in range(self.total_dim) if w[i] < 0.5]
        b = np.stack(kernel) if kernel else np.zeros((0, self.total_dim), dtype=complex)
        return Subspace(self.dims, _frozen(b), _frozen(b.conj().T @ b))

    def is_real(self, tol: float = 1e-12) -> bool:
        return max_abs(self.projector.imag) <= tol


@dataclass
class ProductCandidate:
    """A normalized product state with its overlap <prod|P|prod>."""

    factors: list[np.ndarray]
    overlap: float
    restart_index: int = -1
    sweeps: int = 0

    def ket(self) -> np.ndarray:
        out = self.factors[0]
        for f in self.factors[1:]:
            out = np.kron(out, f)
        return out


@dataclass
class CECertificate:
    subspace_label: str
    max_overlap_found: float
    witness: ProductCandidate
    restarts: int
    converged: bool
    verdict: str               # certified-CE | product-state-found | inconclusive
    gap: float
    seed: int

    @property
    def certified(self) -> bool:
        return self.verdict == "certified-CE"


def default_restarts(dims: Sequence[int]) -> int:
    return 1000 if len(dims) == 2 else 200


def _slot_contraction_plan(dims: tuple[int, ...], slot: int):
    """Batched einsum subscripts for <fixed factors| P |fixed factors>."""
    letters = string.ascii_lowercase
    n_par = len(dims)
    out_sub = letters[:n_par]
    in_sub = letters[n_par:2 * n_par]
    lhs = [out_sub + in_sub]
    for t in range(n_par):
        if t == slot:
            continue
        lhs.append("z" + out_sub[t])
        lhs.append("z" + in_sub[t])
    return ",".join(lhs) + "->z" + out_sub[slot] + in_sub[slot]


def max_product_overlap(subspace: Subspace, restarts: int | None = None,
                        seed: int = 0, tol: float = 1e-12,
                        max_sweeps: int = 500) -> ProductCandidate:
    """Best product state found by alternating eigenvector maximization.

    Each restart starts from independent Haar-random factors (stream derived
    from (seed, restart index), so results do not depend on evaluation order)
    and alternates over the parties: with all factors but one fixed, the
    optimal remaining factor is the top eigenvector of the contracted
    operator. The objective never decreases within a restart. Restarts are
    independent and run in lockstep; the best is merged by (overlap, lowest
    restart index), so the result does not depend on the schedule.
    """
    if restarts is None:
        restarts = default_restarts(subspace.dims)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    dims = subspace.dims
    n_par = len(dims)
    tensor = subspace.projector.reshape(*dims, *dims)
    # each restart draws its factors from a private stream keyed by its index
    factors = [np.empty((restarts, d), dtype=complex) for d in dims]
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        for t, d in enumerate(dims):
            factors[t][r] = haar_ket(d, rng)
    equations = [_slot_contraction_plan(dims, slot) for slot in range(n_par)]
    paths = [None] * n_par
    obj = np.zeros(restarts)
    sweeps = np.zeros(restarts, dtype=int)
    alive = np.arange(restarts)
    for sweep in range(1, max_sweeps + 1):
        prev_sweep = obj[alive].copy()
        cur = obj[alive]
        for slot in range(n_par):
            operands = []
            for t in range(n_par):
                if t == slot:
                    continue
                block = factors[t][alive]
                operands.append(block.conj())
                operands.append(block)
            if paths[slot] is None:
                paths[slot], _ = np.einsum_path(equations[slot], tensor,
                                                *operands, optimize="greedy")
            m = np.einsum(equations[slot], tensor, *operands,
                          optimize=paths[slot])
            m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
            w, v = np.linalg.eigh(m)
            factors[slot][alive] = v[..., -1]
            new = w[..., -1].real
            if float(np.min(new - cur)) < -1e-9:
                raise RuntimeError("alternating maximization decreased")
            cur = new
        obj[alive] = cur
        sweeps[alive] = sweep
        alive = alive[cur - prev_sweep >= tol]
        if alive.size == 0:
            break
    best_idx = int(np.argmax(obj))      # ties resolve to the lowest index
    best_factors = [np.ascontiguousarray(factors[t][best_idx])
                    for t in range(n_par)]
    return ProductCandidate(best_factors, float(obj[best_idx]),
                            restart_index=best_idx, sweeps=int(sweeps[best_idx]))


def certify_completely_entangled(subspace: Subspace, restarts: int | None = None,
                                 gap: float = DEFAULT_CE_GAP, seed: int = 0,
                                 label: str = "", min_restarts: int = MIN_CERT_RESTARTS,
                                 ) -> CECertificate:
    """Numerical certificate that a subspace contains no product state.

    The certificate is honest about being numerical: certified-CE means the
    best product overlap over the full restart budget stayed below 1 - gap.
    """
    if restarts is None:
        restarts = default_restarts(subspace.dims)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if subspace.dim == 0:
        empty = ProductCandidate([np.zeros(d) for d in subspace.dims], 0.0)
        return CECertificate(label, 0.0, empty, restarts, True, "certified-CE",
                             gap, seed)
    cand = max_product_overlap(subspace, restarts=restarts, seed=seed)
    if cand.overlap >= 1.0 - PRODUCT_FOUND_TOL:
        verdict = "product-state-found"
    elif cand.overlap <= 1.0 - gap and restarts >= min_restarts:
        verdict = "certified-CE"
    else:
        verdict = "inconclusive"
    return CECertificate(label, cand.overlap, cand, restarts, True, verdict,
                         gap, seed)


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------

def _grid_factors(dim: int, resolution: int) -> np.ndarray:
    """Gauge-fixed grid over normalized states of one factor.

    Magnitudes come from hyperspherical angles in [0, pi/2]; every amplitude
    after the first carries a phase in [0, 2*pi). The first amplitude is real
    and non-negative.
    """
    thetas = np.linspace(0.0, np.pi / 2, resolution + 1)
    phis = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    grids = [thetas] * (dim - 1) + [phis] * (dim - 1)
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    n = flat[0].size
    mags = np.zeros((n, dim))
    running = np.ones(n)
    for k in range(dim - 1):
        mags[:, k] = running * np.cos(flat[k])
        running = running * np.sin(flat[k])
    mags[:, dim - 1] = running
    out = mags.astype(complex)
    for k in range(1, dim):
        out[:, k] *= np.exp(1j * flat[dim - 1 + k - 1])
    return out


def _absorb_leading_pair(cur: np.ndarray, vecs: np.ndarray, lead: int) -> np.ndarray:
    """Contract the first un-absorbed (out, in) index pair with grid vectors.

    cur has `lead` leading candidate axes followed by index pairs; the result
    gains one trailing candidate axis which is moved behind the existing ones.
    """
    moved = np.moveaxis(cur, (lead, lead + 1), (-2, -1))
    out = np.einsum("np,nq,...pq->...n", vecs.conj(), vecs, moved)
    return np.moveaxis(out, -1, lead)


def grid_product_overlap(subspace: Subspace, resolution: int,
                         max_evals: int = 200_000_000) -> float:
    """Exhaustive product-overlap maximum over the gauge-fixed grid.

    Accuracy improves like O(1/resolution) for gradient-bounded objectives;
    this is a practical bound, not a proven tight one. Raises when the grid
    would be astronomically large; the alternating search has no such limit.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    dims = subspace.dims
    sizes = [(resolution + 1) ** (d - 1) * resolution ** (d - 1) for d in dims]
    total = 1
    for s in sizes:
        total *= s
    if total > max_evals:
        raise ValueError(
            f"grid of {total} product states exceeds the {max_evals} evaluation "
            f"budget; use max_product_overlap (alternating search) instead")
    n_par = len(dims)
    tensor = subspace.projector.reshape(*dims, *dims)
    # interleave to out0,in0,out1,in1,... so pairs can be absorbed in order
    perm = []
    for k in range(n_par):
        perm += [k, n_par + k]
    tensor = np.transpose(tensor, perm)
    grids = [_grid_factors(d, resolution) for d in dims]

    tail = 1
    for s in sizes[1:]:
        tail *= s
    chunk = max(1, min(sizes[0], int(4_000_000 // max(tail, 1)) or 1, 4096))
    best = -np.inf
    first = grids[0]
    for start in range(0, sizes[0], chunk):
        cur = _absorb_leading_pair(tensor, first[start:start + chunk], 0)
        for t in range(1, n_par):
            cur = _absorb_leading_pair(cur, grids[t], t)
        best = max(best, float(np.max(cur.real)))
    return best


# ---------------------------------------------------------------------------
# transpose / phase-conjugation symmetry checks
# ---------------------------------------------------------------------------

@dataclass
class SymmetryCheck:
    name: str
    slot: int | None
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class SymmetryReport:
    checks: list[SymmetryCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def residual(self, name: str, slot: int | None = None) -> float:
        for c in self.checks:
            if c.name == name and c.slot == slot:
                return c.residual
        raise KeyError(f"no check {name!r} for slot {slot}")


def symmetry_checks(s0: Subspace, s1: Subspace, u: np.ndarray,
                    slots: Sequence[int] | None = None,
                    tol: float = 1e-9,
                    include_transpose: bool = True,
                    include_conjugation: bool = True,
                    include_products: bool = True) -> SymmetryReport:
    """Residuals of the transpose and phase-conjugation identities.

    Checks, for complementary projectors P0, P1 and a Hermitian unitary u
    applied on single party slots i:
      transpose:       P_l - P_l^T
      conjugation:     P_l - U^i P_{1-l} U^i
      orthogonality:   P_l^T P_{1-l}
      twist:           P_l^T U^i P_l U^i
    Each family can be toggled off; slots restrict which parties are tested
    (some constructions satisfy the conjugation identities only on one slot).
    """
    if s0.dims != s1.dims:
        raise ValueError(f"dims mismatch: {s0.dims} vs {s1.dims}")
    dims = s0.dims
    if slots is None:
        slots = [i for i, d in enumerate(dims) if d == u.shape[0]]
    projs = {0: s0.projector, 1: s1.projector}
    report = SymmetryReport()
    if include_transpose:
        for ell in (0, 1):
            p = projs[ell]
            report.checks.append(SymmetryCheck(
                f"transpose[{ell}]", None, max_abs(p - transpose_plain(p)), tol))
    for slot in slots:
        if u.shape != (dims[slot], dims[slot]):
            raise ValueError(
                f"u of shape {u.shape} does not act on slot {slot} of dims {dims}")
        ui = embed_operator(u, slot, dims)
        if include_conjugation:
            for ell in (0, 1):
                resid = max_abs(projs[ell] - ui @ projs[1 - ell] @ ui)
                report.checks.append(SymmetryCheck(
                    f"conjugation[{ell}]", slot, resid, tol))
        if include_products:
            for ell in (0, 1):
                resid = max_abs(transpose_plain(projs[ell]) @ ui @ projs[ell] @ ui)
                report.checks.append(SymmetryCheck(
                    f"twist[{ell}]", slot, resid, tol))
    if include_products:
        for ell in (0, 1):
            resid = max_abs(transpose_plain(projs[ell]) @ projs[1 - ell])
            report.checks.append(SymmetryCheck(
                f"orthogonality[{ell}]", None, resid, tol))
    return report


# ---------------------------------------------------------------------------
# exact-arithmetic variant of the symmetry checks
# ---------------------------------------------------------------------------

def _exact_transpose(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            out[i, j] = m[j, i]
    return out


def _exact_sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = a[idx] - b[idx]
    return out


def _parity_signs(dims: Sequence[int], slot: int) -> list[int]:
    total = dim_of(dims)
    signs = []
    for flat in range(total):
        digits = np.unravel_index(flat, tuple(dims))
        signs.append(-1 if digits[slot] % 2 else 1)
    return signs


def _exact_sign_conjugate(m: np.ndarray, signs: Sequence[int]) -> np.ndarray:
    # diag(s) M diag(s) for +-1 signs, entrywise
    out = np.empty(m.shape, dtype=object)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            v = m[i, j]
            out[i, j] = v if signs[i] * signs[j] == 1 else -v
    return out


def exact_symmetry_checks(dims: Sequence[int],
                          exact_spanning: Sequence[np.ndarray],
                          slots: Sequence[int]) -> dict[str, bool]:
    """Exact-field version of `symmetry_checks` for spans over Q(sqrt(2)).

    The projector pair is built by exact Gram-matrix inversion, so every
    reported identity is an exact zero test, not a tolerance comparison.
    The parity phase is applied entrywise as a sign pattern.
    """
    total = dim_of(dims)
    p0 = exact_projector(exact_spanning)
    eye = exact_zeros(total, total)
    for i in range(total):
        eye[i, i] = ONE
    p1 = _exact_sub(eye, p0)
    projs = {0: p0, 1: p1}
    results: dict[str, bool] = {}
    for ell in (0, 1):
        results[f"transpose[{ell}]"] = exact_all_zero(
            _exact_sub(projs[ell], _exact_transpose(projs[ell])))
        results[f"orthogonality[{ell}]"] = exact_all_zero(
            exact_matmul(_exact_transpose(projs[ell]), projs[1 - ell]))
    for slot in slots:
        signs = _parity_signs(dims, slot)
        for ell in (0, 1):
            conj = _exact_sign_conjugate(projs[1 - ell], signs)
            results[f"conjugation[{ell}]@{slot}"] = exact_all_zero(
                _exact_sub(projs[ell], conj))
            twist = exact_matmul(_exact_transpose(projs[ell]),
                                 _exact_sign_conjugate(projs[ell], signs))
            results[f"twist[{ell}]@{slot}"] = exact_all_zero(twist)
    return results
