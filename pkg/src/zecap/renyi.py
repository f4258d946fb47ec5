"""Minimum output Renyi entropies, output-rank searches and the p=0
additivity gap for channels built from bipartite subspaces.

The p=0 quantity is the log of the minimum output rank. For a channel whose
Kraus operators reshape an orthonormal basis of a real bipartite subspace S,
the output support at input x is {K x : K in span}, and a dimension-counting
duality identifies rank deficiency at x with product states x (x) eta in the
orthogonal complement of S. A completely-entangled complement therefore pins
the single-use minimum output rank at the full output dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import inf, log2
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .channels import MultiUserChannel, apply_channel_to_ket, make_cj_channel, tensor_power, to_kraus
from .linalg import dagger, haar_ket, max_entangled_ket
from .subspaces import CECertificate, Subspace, certify_completely_entangled

RANK_THRESHOLD_RATIO = 1e-7   # eigenvalues below this fraction of the top count as zero
DEFAULT_GAP_BUDGET = 5000


def renyi_entropy(rho: np.ndarray, p: float,
                  threshold_ratio: float = RANK_THRESHOLD_RATIO) -> float:
    """Renyi entropy of order p in bits; p = 0, 1 and inf take their limits."""
    if p < 0:
        raise ValueError("order p must be >= 0")
    rho = np.asarray(rho, dtype=complex)
    w = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    if w[0] < -1e-8 * max(w[-1], 1.0):
        raise ValueError(f"negative eigenvalue {w[0]} in the input spectrum")
    w = np.clip(w, 0.0, None)
    total = float(np.sum(w))
    if total <= 0:
        raise ValueError("cannot take the entropy of the zero operator")
    w = w / total
    w = w[w > threshold_ratio * np.max(w)]
    if p == 0:
        return log2(len(w))
    if p == 1:
        return float(-np.sum(w * np.log2(w)))
    if p == inf or np.isinf(p):
        return float(-np.log2(np.max(w)))
    return float(np.log2(np.sum(w ** p)) / (1.0 - p))


def spectrum_rank(spectrum: np.ndarray,
                  threshold_ratio: float = RANK_THRESHOLD_RATIO) -> int:
    w = np.clip(np.asarray(spectrum, dtype=float), 0.0, None)
    top = float(np.max(w)) if w.size else 0.0
    if top <= 0:
        return 0
    return int(np.sum(w > threshold_ratio * top))


@dataclass
class RenyiEstimate:
    p: float
    value: float                       # bits; an upper bound by construction
    achiever: np.ndarray               # pure input realizing `value`
    output_spectrum: np.ndarray        # descending
    restarts: int
    seed: int
    converged: bool


@dataclass
class RankSearchResult:
    best_rank: int
    achiever: np.ndarray
    output_spectrum: np.ndarray        # descending, trace-normalized
    second_eigenvalue: float
    threshold_ratio: float
    tried_ranks: dict[int, float] = field(default_factory=dict)  # target -> best tail mass

    @property
    def tail_mass(self) -> float:
        return float(np.sum(self.output_spectrum[self.best_rank:]))


def _output_spectrum(channel: MultiUserChannel, psi: np.ndarray) -> np.ndarray:
    psi = psi / np.linalg.norm(psi)
    rho = apply_channel_to_ket(channel, psi)
    w = np.linalg.eigvalsh(rho)[::-1]
    w = np.clip(w.real, 0.0, None)
    return w / np.sum(w)


def min_output_renyi(channel: MultiUserChannel, p: float, restarts: int = 40,
                     seed: int = 0, maxiter: int = 300) -> RenyiEstimate:
    """Upper bound on the minimum output Renyi entropy over pure inputs.

    Pure inputs suffice: the output support of a mixture contains the support
    of every component, so no mixed input can beat the best pure one (checked
    empirically in the test suite for fractional orders as well).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if p == 0:
        rank = min_output_rank_search(channel, restarts=restarts, seed=seed)
        spec = _output_spectrum(channel, rank.achiever)
        return RenyiEstimate(0.0, log2(rank.best_rank), rank.achiever, spec,
                             restarts, seed, True)
    d = channel.in_dim

    def objective(x: np.ndarray) -> float:
        psi = x[:d] + 1j * x[d:]
        n = np.linalg.norm(psi)
        if n < 1e-12:
            return float(log2(channel.out_dim))
        rho = apply_channel_to_ket(channel, psi / n)
        return renyi_entropy(rho, p)

    best_val = inf
    best_x = None
    converged = False
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        x0 = np.concatenate([haar_ket(d, rng).real, haar_ket(d, rng).imag])
        res = minimize(objective, x0, method="L-BFGS-B",
                       options={"maxiter": maxiter})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = res.x
            converged = bool(res.success)
    psi = best_x[:d] + 1j * best_x[d:]
    psi = psi / np.linalg.norm(psi)
    spec = _output_spectrum(channel, psi)
    return RenyiEstimate(float(p), best_val, psi, spec, restarts, seed, converged)


# ---------------------------------------------------------------------------
# output rank search
# ---------------------------------------------------------------------------

def structured_rank_seeds(channel: MultiUserChannel) -> list[np.ndarray]:
    """Deterministic seeds tried before random restarts.

    For tensor squares of subspace channels these include the maximally
    entangled state across the two input copies and its single-slot
    phase-twisted variants, which are exactly the inputs whose two-use
    outputs are forced rank-deficient by the transpose/conjugation
    symmetries of the underlying subspaces.
    """
    d = channel.in_dim
    seeds = [np.concatenate([np.ones(1), np.zeros(d - 1)]).astype(complex)]
    root = int(round(np.sqrt(d)))
    if root * root == d:
        phi = max_entangled_ket(root)
        seeds.append(phi)
        twist = np.diag([(-1.0) ** k for k in range(root)]).astype(complex)
        twisted = (np.kron(twist, np.eye(root)) @ phi)
        seeds.append(twisted)
        seeds.append(np.kron(np.eye(root), twist) @ phi)
    return seeds


def _reject_flag_completed(channel: MultiUserChannel) -> None:
    """Rank searches run on the completion-free form of subspace channels.

    The completing operators that restore trace preservation route weight
    into the extra flag dimension and can raise every output rank, so rank
    results on the completed channel would not reflect the subspace. Rank is
    invariant under the positive scaling of the completion-free form.
    """
    pl = getattr(channel, "payload", None)
    if channel.kind == "power":
        _reject_flag_completed(channel.payload.base)
        return
    if channel.kind == "subspace-cj" and pl.flag == "trace-preserving":
        raise ValueError(
            "rank searches need the completion-free form of a subspace "
            "channel (completion='none'); the flag completion can raise "
            "output ranks")


def _tail_objective(channel: MultiUserChannel, target_rank: int) -> Callable:
    d = channel.in_dim
    ops = to_kraus(channel)
    frame = np.zeros((d, d), dtype=complex)
    for k in ops:
        frame += dagger(k) @ k

    def fun(x: np.ndarray) -> tuple[float, np.ndarray]:
        psi = x[:d] + 1j * x[d:]
        norm2 = float(np.real(np.vdot(psi, psi)))
        if norm2 < 1e-14:
            return 1.0, np.zeros_like(x)
        vecs = np.stack([k @ psi for k in ops])
        rho = vecs.T @ vecs.conj()
        w, v = np.linalg.eigh(rho)
        order = np.argsort(w)[::-1]
        w = np.clip(w[order].real, 0.0, None)
        v = v[:, order]
        total = float(np.sum(w))
        tail = float(np.sum(w[target_rank:]))
        value = tail / total
        # subgradient through the tail eigenprojector (eigenbasis held fixed)
        tail_proj = v[:, target_rank:] @ dagger(v[:, target_rank:])
        a = np.zeros(d, dtype=complex)
        b = np.zeros(d, dtype=complex)
        for k in ops:
            a += dagger(k) @ (tail_proj @ (k @ psi))
        b = frame @ psi
        grad_psi_bar = (a * total - tail * b) / total ** 2
        grad = np.concatenate([2 * grad_psi_bar.real, 2 * grad_psi_bar.imag])
        return value, grad

    return fun


def min_output_rank_search(channel: MultiUserChannel,
                           seeds: Sequence[np.ndarray] | None = None,
                           restarts: int = 200, seed: int = 0,
                           threshold_ratio: float = RANK_THRESHOLD_RATIO,
                           refine_per_rank: int = 24,
                           maxiter: int = 400) -> RankSearchResult:
    """Minimum output rank over pure inputs, by seeded descent on tail mass.

    Structured seeds and random restarts are ranked first by direct
    evaluation; then, for each target rank below the best one seen, the
    trace-normalized mass beyond the target rank is minimized by L-BFGS from
    the most promising starting points. The walk down stops at the first
    target whose tail mass cannot be driven to zero, which is sound because
    tail masses are nested.
    """
    _reject_flag_completed(channel)
    d = channel.in_dim
    rng = np.random.default_rng([seed, 0x5eed])
    pool: list[np.ndarray] = [s / np.linalg.norm(s) for s in
                              (structured_rank_seeds(channel) if seeds is None else list(seeds))]
    pool += [haar_ket(d, np.random.default_rng([seed, 1, r]))
             for r in range(max(restarts, 1))]

    scored: list[tuple[int, float, int, np.ndarray]] = []
    for idx, psi in enumerate(pool):
        spec = _output_spectrum(channel, psi)
        r = spectrum_rank(spec, threshold_ratio)
        tail = float(np.sum(spec[max(r - 1, 0):]))
        scored.append((r, tail, idx, psi))
    scored.sort(key=lambda t: t[:3])
    best_rank, _, _, best_psi = scored[0]
    tried: dict[int, float] = {}

    target = best_rank - 1
    while target >= 1:
        objective = _tail_objective(channel, target)
        best_tail = inf
        found = None
        starts = [psi for r, _, _, psi in scored if r <= target + 2][:refine_per_rank]
        while len(starts) < refine_per_rank:
            starts.append(haar_ket(d, rng))
        for x_start in starts:
            x0 = np.concatenate([x_start.real, x_start.imag])
            res = minimize(objective, x0, jac=True, method="L-BFGS-B",
                           options={"maxiter": maxiter})
            if res.fun < best_tail:
                best_tail = float(res.fun)
                found = res.x[:d] + 1j * res.x[d:]
            if best_tail < threshold_ratio / 10:
                break
        tried[target] = best_tail
        if found is not None and best_tail < threshold_ratio / 10:
            psi = found / np.linalg.norm(found)
            spec = _output_spectrum(channel, psi)
            r = spectrum_rank(spec, threshold_ratio)
            if r <= target:
                best_rank, best_psi = r, psi
                target = r - 1
                continue
        break

    spec = _output_spectrum(channel, best_psi)
    second = float(spec[1]) if len(spec) > 1 else 0.0
    return RankSearchResult(best_rank, best_psi / np.linalg.norm(best_psi),
                            spec, second, threshold_ratio, tried)


# ---------------------------------------------------------------------------
# p = 0 additivity gap
# ---------------------------------------------------------------------------

@dataclass
class AdditivityGapReport:
    verdict: str                       # gap-found | no-gap | inconclusive
    single_use_rank: int               # best rank found for one use
    single_use_floor: int              # certified lower bound
    two_use_rank: int
    single_use_bits: float
    two_use_bits: float
    complement_certificate: CECertificate | None
    single_result: RankSearchResult | None
    two_use_result: RankSearchResult | None
    notes: str = ""


def additivity_gap_at_zero(subspace: Subspace, budget: int = DEFAULT_GAP_BUDGET,
                           seed: int = 0, ce_restarts: int | None = None,
                           gap: float = 1e-3) -> AdditivityGapReport:
    """Compare the minimum output rank of the subspace channel against two
    parallel uses of it.

    The single-use floor: for a real-coefficient subspace S, an output of rank
    at most out_dim - 1 at input x requires a product state x (x) eta in the
    complement of S, so a completely-entangled complement forces every output
    to full rank. The verdict gap-found means the best two-use rank found is
    strictly below the square of that certified floor, which only ever
    understates the true gap.
    """
    if len(subspace.dims) != 2:
        raise ValueError("the additivity gap check needs a bipartite subspace")
    if not subspace.is_real():
        raise ValueError(
            "the rank-floor certificate requires a conjugation-symmetric "
            "subspace; supply a basis with real coefficients in the "
            "computational basis")
    da, db = subspace.dims
    if subspace.dim == da * db:
        return AdditivityGapReport(
            verdict="no-gap", single_use_rank=db, single_use_floor=db,
            two_use_rank=db * db, single_use_bits=log2(db),
            two_use_bits=2 * log2(db), complement_certificate=None,
            single_result=None, two_use_result=None,
            notes="the full space maps every input to the maximally mixed "
                  "state, so ranks multiply exactly")

    complement = subspace.complement()
    cert = certify_completely_entangled(complement, restarts=ce_restarts,
                                        seed=seed, label="complement")
    channel = make_cj_channel(subspace, completion="none")
    two_use = tensor_power(channel, 2)

    single = min_output_rank_search(channel, restarts=min(budget, 200),
                                    seed=seed)
    two = min_output_rank_search(two_use, restarts=min(budget, 2000),
                                 seed=seed + 1,
                                 refine_per_rank=max(8, budget // 200))

    if cert.verdict == "certified-CE":
        floor = db
        notes = ("complement certified completely entangled: every single-use "
                 "output has full rank; ")
    elif cert.verdict == "product-state-found":
        floor = 1
        notes = "complement contains a product state; no rank floor; "
    else:
        floor = 1
        notes = "complement certification inconclusive; "

    s_bits = log2(single.best_rank)
    t_bits = log2(two.best_rank)
    if single.best_rank == 1:
        verdict = "no-gap"
        notes += "single-use rank 1 makes a gap impossible"
    elif cert.verdict == "certified-CE" and two.best_rank < floor * floor:
        verdict = "gap-found"
        notes += (f"two uses reach rank {two.best_rank} < {floor * floor} = "
                  f"(certified single-use rank)^2")
    elif cert.verdict != "certified-CE":
        verdict = "inconclusive"
        notes += "cannot certify the single-use rank floor"
    else:
        verdict = "inconclusive"
        notes += "no two-use input with deficient output found within budget"
    return AdditivityGapReport(verdict, single.best_rank, floor, two.best_rank,
                               s_bits, t_bits, cert, single, two, notes)
