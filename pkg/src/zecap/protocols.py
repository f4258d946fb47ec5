"""Zero-error coding protocols: locally preparable codes, output orthogonality,
one-shot no-transmission certificates, the teleportation decoder and privacy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import log2
from typing import Sequence

import numpy as np

from .channels import (
    MultiUserChannel,
    apply_channel_to_ket,
    parity_phase,
    tensor_power,
)
from .linalg import (
    dim_of,
    max_abs,
    max_entangled_ket,
    partial_trace,
    permute_factors,
    tensor,
)
from .subspaces import CECertificate, certify_completely_entangled

ORTHO_OVERLAP_TOL = 1e-9


@dataclass
class CodeBook:
    """Locally preparable inputs for k uses of a channel."""

    channel_name: str
    uses: int
    dims: tuple[int, ...]                  # input factor dims, use-major
    inputs: list[np.ndarray]               # pure-state kets
    sender_partition: tuple[tuple[int, ...], ...]
    labels: list[str] = field(default_factory=list)


@dataclass
class DistinguishabilityCertificate:
    overlaps: np.ndarray                   # tr(out_i out_j), normalized outputs
    orthogonal: bool
    decoder: str                           # single-receiver-projective | teleportation-LOCC | none


@dataclass
class AlphaLocalCertificate:
    """Certifies that one channel use cannot transmit even one bit."""

    channel_name: str
    alpha_local_one: bool
    s0_certificate: CECertificate | None
    s1_certificate: CECertificate | None
    notes: str = ""


def slot_index(channel: MultiUserChannel, slot: int | str) -> int:
    """Resolve a two-use slot given as index or label like 'A', "B'"."""
    m = len(channel.sender_dims)
    if isinstance(slot, (int, np.integer)):
        idx = int(slot)
    else:
        label = slot.strip()
        primes = label.count("'")
        letter = label.rstrip("'").upper()
        party = ord(letter) - ord("A")
        idx = primes * m + party
    if not 0 <= idx < 2 * m:
        raise ValueError(f"slot {slot!r} out of range for {m} senders, 2 uses")
    return idx


def build_two_use_code(channel: MultiUserChannel, slot: int | str) -> CodeBook:
    """Two-codeword book: every sender shares a maximally entangled state
    between its two uses; the message slot gets an alternating phase flip.

    Input factors are laid out use-major (use-1 factors, then use-2 factors).
    """
    if channel.kind not in ("binary-projective", "extended"):
        raise ValueError(f"no two-use code construction for kind {channel.kind!r}")
    sender_dims = channel.sender_dims
    m = len(sender_dims)
    idx = slot_index(channel, slot)
    total = dim_of(sender_dims)
    # product of per-sender pair states in sender-major order (s, s') ...
    pair_states = [max_entangled_ket(d) for d in sender_dims]
    psi_sender_major = tensor(*pair_states)
    # ... permuted to use-major order (all use-1 factors, then all use-2)
    sender_major_dims = [d for d in sender_dims for _ in range(2)]
    perm = [2 * s for s in range(m)] + [2 * s + 1 for s in range(m)]
    psi0 = permute_factors(psi_sender_major, sender_major_dims, perm)
    dims = tuple(sender_dims) * 2
    u = parity_phase(dims[idx])
    psi1 = _apply_on_slot(psi0, dims, u, idx)
    partition = tuple((s, m + s) for s in range(m))
    return CodeBook(
        channel_name=channel.name,
        uses=2,
        dims=dims,
        inputs=[psi0, psi1],
        sender_partition=partition,
        labels=["0", f"1@slot{idx}"],
    )


def _apply_on_slot(psi: np.ndarray, dims: Sequence[int], op: np.ndarray,
                   slot: int) -> np.ndarray:
    t = psi.reshape(dims)
    t = np.tensordot(op, t, axes=([1], [slot]))
    return np.moveaxis(t, 0, slot).reshape(-1)


def basis_codebook(channel: MultiUserChannel, uses: int,
                   codewords: Sequence[Sequence[int]]) -> CodeBook:
    """Computational-basis codewords for k uses (classical preparation).

    Each codeword is one basis index per use; basis states are product across
    every cut, so the book is locally preparable for any sender partition.
    """
    m = len(channel.sender_dims)
    dims = tuple(channel.sender_dims) * uses
    inputs = []
    for word in codewords:
        if len(word) != uses:
            raise ValueError(f"codeword {word} does not give one index per use")
        psi = None
        for idx in word:
            use_ket = np.zeros(channel.in_dim, dtype=complex)
            use_ket[int(idx)] = 1.0
            psi = use_ket if psi is None else np.kron(psi, use_ket)
        inputs.append(psi)
    partition = tuple(tuple(use * m + s for use in range(uses)) for s in range(m))
    return CodeBook(channel.name, uses, dims, inputs, partition,
                    labels=[",".join(str(i) for i in w) for w in codewords])


def check_local_preparability(state: np.ndarray, dims: Sequence[int],
                              partition: Sequence[Sequence[int]],
                              tol: float = 1e-9) -> bool:
    """True iff the state is a product across the given partition.

    Works for kets and density operators: the state (as a density operator,
    permuted to group-major factor order) is compared entrywise against the
    tensor product of its per-group marginals.
    """
    dims = list(dims)
    groups = [tuple(int(i) for i in g) for g in partition]
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(len(dims))):
        raise ValueError(f"partition {groups} does not cover factors 0..{len(dims) - 1}")
    state = np.asarray(state, dtype=complex)
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    marginals = [partial_trace(rho, dims, keep=g) for g in groups]
    perm = [i for g in groups for i in g]
    rho_grouped = permute_factors(rho, dims, perm)
    prod = marginals[0]
    for marg in marginals[1:]:
        prod = np.kron(prod, marg)
    return max_abs(rho_grouped - prod) <= tol


def verify_orthogonal_outputs(channel: MultiUserChannel,
                              code: CodeBook) -> DistinguishabilityCertificate:
    """Pairwise output overlap matrix tr(E(rho_i) E(rho_j)) and the verdict.

    Distinguishability under local measurements is certified constructively
    only: a single receiver distinguishes orthogonal outputs by a projective
    measurement, and for the qubit-pair-output channel used twice the
    teleportation decoder is run on every codeword. No general local-protocol
    search is attempted.
    """
    outputs = []
    for psi in code.inputs:
        if psi.size != channel.in_dim:
            raise ValueError(
                f"codeword of dimension {psi.size} does not match channel "
                f"input dimension {channel.in_dim}")
        outputs.append(apply_channel_to_ket(channel, psi))
    n = len(outputs)
    overlaps = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            overlaps[i, j] = float(np.real(np.trace(outputs[i] @ outputs[j])))
    off = max((abs(overlaps[i, j]) for i in range(n) for j in range(n) if i != j),
              default=0.0)
    orthogonal = off <= ORTHO_OVERLAP_TOL
    decoder = "none"
    if orthogonal:
        if _receiver_count(channel) == 1:
            decoder = "single-receiver-projective"
        elif _teleportation_decodes(channel, outputs):
            decoder = "teleportation-LOCC"
    return DistinguishabilityCertificate(overlaps, orthogonal, decoder)


def _teleportation_decodes(channel: MultiUserChannel,
                           outputs: list[np.ndarray]) -> bool:
    """True when the teleportation decoder maps the codewords to distinct
    deterministic outcomes (codeword labels themselves do not matter)."""
    if channel.kind != "power" or channel.payload.uses != 2:
        return False
    base = channel.payload.base
    if (base.kind != "cq" or len(base.sender_dims) != 1
            or base.receiver_dims != (2, 2) or len(outputs) != 2):
        return False
    seen = set()
    for out in outputs:
        probs = teleportation_decode(out)
        outcome, best = max(probs.items(), key=lambda kv: kv[1])
        if abs(best - 1.0) > 1e-10 or outcome in seen:
            return False
        seen.add(outcome)
    return True


def _receiver_count(channel: MultiUserChannel) -> int:
    if channel.kind == "power":
        return _receiver_count(channel.payload.base)
    return len(channel.receiver_dims)


def certify_alpha_local_one(channel: MultiUserChannel,
                            restarts: int | None = None,
                            gap: float = 1e-3, seed: int = 0,
                            ) -> AlphaLocalCertificate:
    """One-shot no-transmission certificate for flag-output channels.

    The channel output is diagonal with weights (tr P0 rho, tr P1 rho), so two
    perfectly distinguishable outputs must be the two flag states, which
    requires one input supported inside each measured subspace. Locally
    preparable inputs may be taken to be product pure states, so certifying
    both subspaces completely entangled rules out any such pair.

    Trivial-party extensions inherit the base channel's certificate: added
    senders are ignored and added receivers get a fixed state, so output
    distinguishability is unchanged.
    """
    if channel.kind == "extended":
        base_cert = certify_alpha_local_one(channel.payload.base,
                                            restarts=restarts, gap=gap, seed=seed)
        notes = base_cert.notes + " inherited through a trivial-party extension;"
        return AlphaLocalCertificate(channel.name, base_cert.alpha_local_one,
                                     base_cert.s0_certificate,
                                     base_cert.s1_certificate, notes.strip())
    if channel.kind != "binary-projective":
        raise ValueError(
            f"one-shot certificate applies to binary projective channels, "
            f"got kind {channel.kind!r}")
    pl = channel.payload
    c0 = certify_completely_entangled(pl.s0, restarts=restarts, gap=gap,
                                      seed=seed, label=f"{channel.name}/S0")
    c1 = certify_completely_entangled(pl.s1, restarts=restarts, gap=gap,
                                      seed=seed + 1, label=f"{channel.name}/S1")
    ok = c0.certified and c1.certified
    notes = ("orthogonal flag outputs require product inputs inside each "
             "measured subspace; both subspaces are certified free of product states;"
             if ok else
             "certification failed: " +
             "; ".join(f"{c.subspace_label}: {c.verdict}" for c in (c0, c1) if not c.certified))
    return AlphaLocalCertificate(channel.name, ok, c0, c1, notes)


# ---------------------------------------------------------------------------
# teleportation decoding for the one-sender/two-receiver channel
# ---------------------------------------------------------------------------

def bell_basis() -> list[np.ndarray]:
    """(|00>+|11>)/rt2, (|00>-|11>)/rt2, (|01>+|10>)/rt2, (|01>-|10>)/rt2."""
    r = 1 / np.sqrt(2.0)
    return [
        np.array([r, 0, 0, r], dtype=complex),
        np.array([r, 0, 0, -r], dtype=complex),
        np.array([0, r, r, 0], dtype=complex),
        np.array([0, r, -r, 0], dtype=complex),
    ]


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_CORRECTIONS = [np.eye(2, dtype=complex), _Z, _X, _X @ _Z]


def teleport_qubit(rho_in: np.ndarray) -> np.ndarray:
    """Teleport one qubit through a perfect maximally entangled pair.

    Density-operator simulation of the full protocol (Bell measurement on the
    input and the sender half, conditional Pauli correction on the receiver
    half); returns the receiver's average post-correction state.
    """
    alpha = max_entangled_ket(2)
    rho = np.kron(rho_in, np.outer(alpha, alpha.conj()))
    dims = [2, 2, 2]
    out = np.zeros((2, 2), dtype=complex)
    for mu, bell in enumerate(bell_basis()):
        proj = np.kron(np.outer(bell, bell.conj()), np.eye(2))
        post = proj @ rho @ proj
        bob = partial_trace(post, dims, keep=[2])
        out += _CORRECTIONS[mu] @ bob @ _CORRECTIONS[mu].conj().T
    return out


def teleportation_decode(rho: np.ndarray, resource_tol: float = 1e-6) -> dict[int, float]:
    """LOCC decoder for two uses of the one-sender/two-receiver channel.

    Input: 4-qubit density operator on (Alice use-1, Bob use-1, Alice use-2,
    Bob use-2), where the use-1 pair is expected to be the shared maximally
    entangled resource. Alice Bell-measures her two qubits and announces the
    outcome; Bob corrects his use-1 qubit, then measures the two qubits he
    holds with {maximally-entangled projector, complement}. Outcome 0 means
    the first output state was detected.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (16, 16):
        raise ValueError(f"expected a 4-qubit density operator, got shape {rho.shape}")
    dims = [2, 2, 2, 2]
    alpha = max_entangled_ket(2)
    resource = partial_trace(rho, dims, keep=[0, 1])
    if max_abs(resource - np.outer(alpha, alpha.conj())) > resource_tol:
        warnings.warn("use-1 marginal deviates from the maximally entangled "
                      "resource; decoding anyway", stacklevel=2)
    q0 = np.outer(alpha, alpha.conj())
    p_detect_first = 0.0
    total = 0.0
    for mu, bell in enumerate(bell_basis()):
        # Bell measurement on Alice's qubits (slots 0 and 2)
        proj = _bell_projector(bell)
        post = proj @ rho @ proj
        p_mu = float(np.real(np.trace(post)))
        if p_mu <= 1e-15:
            continue
        bob = partial_trace(post, dims, keep=[1, 3])          # (B1, B2), order kept
        corr = np.kron(_CORRECTIONS[mu], np.eye(2))
        bob = corr @ bob @ corr.conj().T
        p_detect_first += float(np.real(np.trace(q0 @ bob)))
        total += p_mu
    if abs(total - 1.0) > 1e-8:
        warnings.warn(f"Bell outcome probabilities sum to {total}", stacklevel=2)
    p0 = min(max(p_detect_first, 0.0), 1.0)
    return {0: p0, 1: 1.0 - p0}


def _bell_projector(bell: np.ndarray) -> np.ndarray:
    """Projector |bell><bell| on qubits (0, 2) of a 4-qubit register."""
    op4 = np.outer(bell, bell.conj())
    full = np.kron(op4, np.eye(4)).reshape([2] * 8)
    # current order (A1, A2, B1, B2); move to (A1, B1, A2, B2)
    perm = [0, 2, 1, 3]
    axes = perm + [p + 4 for p in perm]
    return full.transpose(axes).reshape(16, 16)


def privacy_check(channel: MultiUserChannel, slot_pair: tuple[int | str, int | str],
                  tol: float = 1e-9) -> tuple[bool, dict[str, float]]:
    """True iff the two-use outputs for the two message slots coincide and are
    orthogonal to the unmodulated output (so the receiver learns the bit while
    neither sender can tell who sent it)."""
    i, j = (slot_index(channel, s) for s in slot_pair)
    if i == j:
        raise ValueError("privacy check needs two distinct slots")
    power = tensor_power(channel, 2)
    code_i = build_two_use_code(channel, i)
    code_j = build_two_use_code(channel, j)
    out0 = apply_channel_to_ket(power, code_i.inputs[0])
    out_i = apply_channel_to_ket(power, code_i.inputs[1])
    out_j = apply_channel_to_ket(power, code_j.inputs[1])
    same = max_abs(out_i - out_j)
    cross_i = abs(float(np.real(np.trace(out_i @ out0))))
    cross_j = abs(float(np.real(np.trace(out_j @ out0))))
    passed = same <= tol and cross_i <= tol and cross_j <= tol
    details = {"output_difference": same,
               "overlap_slot_i": cross_i,
               "overlap_slot_j": cross_j}
    return passed, details


def capacity_lower_bound(uses: int, distinguishable: int) -> float:
    """log2(N)/k bits per use from N perfectly distinguishable k-use inputs."""
    if uses < 1:
        raise ValueError("uses must be >= 1")
    if distinguishable < 1:
        raise ValueError("need at least one distinguishable input")
    return log2(distinguishable) / uses
