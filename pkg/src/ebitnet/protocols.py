"""Teleportation-based protocols with full resource accounting.

Every operation here runs on the exact ensemble engine and charges each
ebit and classical bit to a ledger while appending a replayable trace.
Held ebits are realized lazily: a phi+ pair enters the statevector only
when a step consumes it, which keeps the registry small.  The SWAP and
permutation demos apply the operation under study as an uncharged
collective oracle; everything else is strictly local plus messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import engine, gates
from .engine import BranchEnsemble, Gate, Povm, QubitId
from .gates import Permutation
from .ledger import (
    Allocate,
    ClassicalMessage,
    Coalesce,
    CollectiveOracle,
    DecodedBits,
    EbitConsume,
    EbitCreate,
    InsufficientResources,
    LocalGate,
    LocalMeasure,
    ProtocolTrace,
    Relabel,
    Relocate,
    ResourceLedger,
)


@dataclass(frozen=True)
class CollectiveOp:
    """Either a joint unitary on the data qubits or a POVM (optionally recorded)."""

    unitary: np.ndarray | None = None
    povm: Povm | None = None
    record: bool = False

    def __post_init__(self):
        if (self.unitary is None) == (self.povm is None):
            raise ValueError("specify exactly one of unitary or povm")
        if self.unitary is not None:
            object.__setattr__(self, "unitary", np.asarray(self.unitary, dtype=complex))


@dataclass
class ProtocolRun:
    """Exclusive owner of one ensemble, ledger and trace for a protocol run."""

    n_parties: int
    ensemble: BranchEnsemble
    ledger: ResourceLedger = field(default_factory=ResourceLedger)
    trace: ProtocolTrace | None = None
    data_qubits: dict[int, QubitId] = field(default_factory=dict)
    _labels: int = 0

    def fresh_label(self) -> str:
        self._labels += 1
        return f"a{self._labels - 1}"

    def snapshot_initial(self) -> None:
        """Record the current ensemble as the trace's replay starting point."""
        self.trace.initial = self.ensemble.copy()


def new_run(n_parties: int, max_qubits: int = engine.DEFAULT_MAX_QUBITS) -> ProtocolRun:
    run = ProtocolRun(n_parties, BranchEnsemble.vacuum(max_qubits))
    run.trace = ProtocolTrace(n_parties=n_parties)
    return run


def add_data_qubits(run: ProtocolRun, amplitudes: Sequence[complex] | None = None) -> None:
    """Give every party one data qubit, jointly in ``amplitudes`` (default all-zeros).

    Data qubits are labeled q1..qN in party order, so party i's qubit is
    amplitude-index bit i-1 of the joint state.  This is pre-run setup: it
    is not traced, so call it before snapshot_initial.
    """
    if run.trace.events:
        raise ValueError("data qubits must be set up before any traced events")
    for i in range(1, run.n_parties + 1):
        run.ensemble, (qid,) = engine.allocate_qubits(run.ensemble, i, 1, labels=(f"q{i}",))
        run.data_qubits[i] = qid
    if amplitudes is not None:
        order = [run.data_qubits[i] for i in range(1, run.n_parties + 1)]
        run.ensemble = BranchEnsemble.from_amplitudes(order, amplitudes, run.ensemble.max_qubits)


def data_order(run: ProtocolRun) -> list[QubitId]:
    return [run.data_qubits[i] for i in range(1, run.n_parties + 1)]


def _consume_pair(run: ProtocolRun, a: int, b: int) -> tuple[QubitId, QubitId]:
    """Turn one held ebit into a live phi+ pair (first qubit at a, second at b)."""
    run.ledger.consume_ebit(a, b)
    qa = QubitId(a, run.fresh_label())
    qb = QubitId(b, run.fresh_label())
    run.ensemble = engine.insert_bell_pair(run.ensemble, qa, qb)
    key = (a, b) if a < b else (b, a)
    run.trace.append(EbitConsume(key, (qa, qb)))
    return qa, qb


def _local_gate(run: ProtocolRun, party: int, targets: Sequence[QubitId], matrix: np.ndarray) -> None:
    if any(q.party != party for q in targets):
        raise ValueError(f"gate targets {targets} are not all at party {party}")
    run.ensemble = engine.apply_gate(run.ensemble, Gate(tuple(targets), matrix))
    run.trace.append(LocalGate(party, tuple(targets), matrix=matrix))


def _oracle(run: ProtocolRun, label: str, targets: Sequence[QubitId], matrix: np.ndarray) -> None:
    parties = tuple(sorted({q.party for q in targets}))
    run.ensemble = engine.apply_gate(run.ensemble, Gate(tuple(targets), matrix))
    run.trace.append(CollectiveOracle(label, parties, tuple(targets), matrix))


def _bell_measure_local(
    run: ProtocolRun, party: int, pair: Sequence[QubitId], discard: bool = True
) -> tuple[int, dict[str, float]]:
    if any(q.party != party for q in pair):
        raise ValueError(f"bell measurement of {pair} is not local to party {party}")
    midx = run.ensemble.measurement_count
    run.ensemble, dist = engine.bell_measure(run.ensemble, pair, discard=discard)
    run.trace.append(
        LocalMeasure(party, tuple(pair), "bell", discard, midx, tuple(sorted(dist.items())))
    )
    return midx, dist


def teleport(run: ProtocolRun, qubit: QubitId, to: int) -> QubitId:
    """Teleport one qubit to another party: 1 ebit plus 2 bits source->destination.

    The measured ancillas are discarded, corrections are applied per branch
    and the merged branches carry the logical qubit at ``to`` under its old
    label.  Refuses (ledger untouched) when no ebit is held for the pair.
    """
    source = qubit.party
    if to == source:
        raise ValueError("teleport destination must be a different party")
    if run.ledger.held(source, to) < 1:
        raise InsufficientResources(
            f"teleport {source}->{to} needs 1 held ebit, have {run.ledger.held(source, to)}"
        )
    anc_src, anc_dst = _consume_pair(run, source, to)
    midx, _ = _bell_measure_local(run, source, (qubit, anc_src), discard=True)
    run.ledger.send_bits(source, to, 2)
    run.trace.append(ClassicalMessage(source, to, Fraction(2)))
    cases = dict(gates.TELEPORT_CORRECTIONS)
    run.ensemble = engine.apply_conditional(run.ensemble, (anc_dst,), cases, midx)
    run.trace.append(
        LocalGate(to, (anc_dst,), cases=tuple(sorted(cases.items(), key=lambda kv: kv[0])),
                  conditional_on=midx)
    )
    new_id = QubitId(to, qubit.label)
    run.ensemble = engine.relabel_qubit(run.ensemble, anc_dst, new_id)
    run.trace.append(Relabel(anc_dst, new_id))
    run.ensemble = engine.coalesce(run.ensemble)
    run.trace.append(Coalesce())
    for party, q in run.data_qubits.items():
        if q == qubit:
            run.data_qubits[party] = new_id
    return new_id


def superdense_send(run: ProtocolRun, sender: int, receiver: int, message: str) -> str:
    """Convey 2 classical bits by dense coding over one held ebit.

    The sender Pauli-encodes its half of a shared pair, physically conveys
    that qubit (a relocation event), and the receiver Bell-measures.
    """
    if message not in gates.BELL_ENCODERS:
        raise ValueError(f"message must be 2 bits, got {message!r}")
    if run.ledger.held(sender, receiver) < 1:
        raise InsufficientResources(
            f"superdense {sender}->{receiver} needs 1 held ebit, have {run.ledger.held(sender, receiver)}"
        )
    q_send, q_recv = _consume_pair(run, sender, receiver)
    _local_gate(run, sender, (q_send,), gates.BELL_ENCODERS[message])
    run.ensemble, moved = engine.relocate_qubit(run.ensemble, q_send, receiver)
    run.trace.append(Relocate(q_send, receiver))
    _, dist = _bell_measure_local(run, receiver, (moved, q_recv), discard=True)
    decoded = max(dist, key=dist.get)
    if dist[decoded] < 1.0 - 1e-9:
        raise AssertionError(f"dense coding outcome not deterministic: {dist}")
    run.trace.append(DecodedBits(receiver, sender, Fraction(2), decoded))
    run.ensemble = engine.coalesce(run.ensemble)
    run.trace.append(Coalesce())
    return decoded


def supplementary_information(povm: Povm, ensemble: BranchEnsemble, targets: Sequence[QubitId]) -> float:
    """Bits a recorded measurement generates: Shannon entropy of its outcomes."""
    return engine.shannon_entropy(engine.measure_povm(ensemble, povm, targets))


def _apply_collective(run: ProtocolRun, op: CollectiveOp, at: int, targets: Sequence[QubitId],
                      inform: Sequence[int]) -> None:
    """Apply the collective op locally at ``at``; recorded POVMs send their
    outcome entropy to every party in ``inform``."""
    if op.unitary is not None:
        _local_gate(run, at, targets, op.unitary)
        return
    probs = engine.measure_povm(run.ensemble, op.povm, targets)
    midx = run.ensemble.measurement_count
    dist = {str(r): p for r, p in enumerate(probs) if p > 0.0}
    run.trace.append(
        LocalMeasure(at, tuple(targets), "povm", False, midx, tuple(sorted(dist.items())))
    )
    if op.record:
        c_s = engine.shannon_entropy(probs)
        run.ledger.add_supplementary(c_s)
        # the trace carries whole bits; the ledger keeps the exact entropy
        for other in inform:
            run.trace.append(ClassicalMessage(at, other, Fraction(math.ceil(c_s)), supplementary=True))


def collective_op_two_qubit(run: ProtocolRun, op: CollectiveOp) -> None:
    """Perform an arbitrary 2-qubit collective operation between parties 1 and 2.

    Party 1 teleports its qubit to party 2, the op runs locally there, and
    the qubit is teleported back: 2 ebits plus 2 bits each way, plus the
    outcome entropy for recorded measurements.
    """
    if run.n_parties != 2:
        raise ValueError("the two-qubit protocol runs on exactly 2 parties")
    if run.ledger.held(1, 2) < 2:
        raise InsufficientResources(f"need 2 held ebits between 1 and 2, have {run.ledger.held(1, 2)}")
    moved = teleport(run, run.data_qubits[1], to=2)
    _apply_collective(run, op, at=2, targets=(moved, run.data_qubits[2]), inform=(1,))
    teleport(run, moved, to=1)


def collective_op_star(run: ProtocolRun, op: CollectiveOp, hub: int = 1) -> None:
    """Perform an arbitrary N-qubit collective operation via a hub laboratory.

    Every spoke teleports its qubit to the hub, the op runs locally there,
    and the qubits are teleported back, consuming 2 ebits and 2 bits each
    way per spoke.  The hub defaults to party 1 but any party serves.
    """
    if not 1 <= hub <= run.n_parties:
        raise ValueError(f"hub {hub} out of range")
    spokes = [i for i in range(1, run.n_parties + 1) if i != hub]
    for i in spokes:
        if run.ledger.held(i, hub) < 2:
            raise InsufficientResources(f"spoke {i} needs 2 held ebits with hub {hub}")
    for i in spokes:
        teleport(run, run.data_qubits[i], to=hub)
    targets = data_order(run)
    _apply_collective(run, op, at=hub, targets=targets, inform=spokes)
    for i in spokes:
        teleport(run, run.data_qubits[i], to=i)


# --------------------------------------------------------------------------
# SWAP demos (section-II style, 2 parties)


@dataclass
class SwapCommResult:
    sent: tuple[str, str]          # (message A->B, message B->A)
    decoded: tuple[str, str]       # (decoded at B, decoded at A)
    run: ProtocolRun


def swap_communicate_demo(message_ab: str, message_ba: str,
                          max_qubits: int = engine.DEFAULT_MAX_QUBITS) -> SwapCommResult:
    """Communicate 2 bits each way through a single SWAP oracle.

    Both parties dense-code onto their half of a shared pair; the SWAP of
    the two encoded qubits hands each party the other's full Bell state,
    which a local Bell measurement then reads out.  Consumes the 2 held
    ebits and sends nothing over the classical channel.
    """
    run = new_run(2, max_qubits)
    run.ledger.grant(1, 2, 2)
    run.snapshot_initial()
    a1, b1 = _consume_pair(run, 1, 2)   # pair 1: encoded by A on a1
    a2, b2 = _consume_pair(run, 1, 2)   # pair 2: encoded by B on b2
    _local_gate(run, 1, (a1,), gates.BELL_ENCODERS[message_ab])
    _local_gate(run, 2, (b2,), gates.BELL_ENCODERS[message_ba])
    _oracle(run, "swap", (a1, b2), gates.swap_unitary())
    _, dist_b = _bell_measure_local(run, 2, (b2, b1), discard=True)
    _, dist_a = _bell_measure_local(run, 1, (a2, a1), discard=True)
    decoded_b = max(dist_b, key=dist_b.get)
    decoded_a = max(dist_a, key=dist_a.get)
    if min(dist_b[decoded_b], dist_a[decoded_a]) < 1.0 - 1e-9:
        raise AssertionError(f"demo outcomes not deterministic: {dist_a}, {dist_b}")
    run.trace.append(DecodedBits(2, 1, Fraction(2), decoded_b))
    run.trace.append(DecodedBits(1, 2, Fraction(2), decoded_a))
    return SwapCommResult((message_ab, message_ba), (decoded_b, decoded_a), run)


@dataclass
class SwapEntangleResult:
    entropy: float
    run: ProtocolRun


def swap_entangle_demo(max_qubits: int = engine.DEFAULT_MAX_QUBITS) -> SwapEntangleResult:
    """Establish 2 shared ebits from two local pairs through a single SWAP.

    Each party prepares one local phi+ pair; swapping one qubit state from
    each side stretches both pairs across the cut.
    """
    run = new_run(2, max_qubits)
    run.snapshot_initial()
    pairs = {}
    for party in (1, 2):
        run.ensemble, ids = engine.allocate_qubits(
            run.ensemble, party, 2, labels=(f"k{party}", f"m{party}")
        )
        run.trace.append(Allocate(party, ids, "00"))
        keep, move = ids
        _local_gate(run, party, (keep,), gates.HADAMARD)
        _local_gate(run, party, (keep, move), gates.cnot_unitary())
        pairs[party] = (keep, move)
    _oracle(run, "swap", (pairs[1][1], pairs[2][1]), gates.swap_unitary())
    run.ledger.create_ebit(1, 2, 2)
    run.trace.append(EbitCreate((1, 2)))
    run.trace.append(EbitCreate((1, 2)))
    entropy = engine.entanglement_entropy(run.ensemble, {1})
    return SwapEntangleResult(entropy, run)


# --------------------------------------------------------------------------
# permutation protocols (section-III style, N parties)


@dataclass
class PermutationEntangleResult:
    created: dict[tuple[int, int], Fraction]   # pair -> ebits established
    pair_qubits: list[tuple[QubitId, QubitId]]  # the physical Bell partners
    run: ProtocolRun


def permutation_entangle(p: Permutation,
                         max_qubits: int = engine.DEFAULT_MAX_QUBITS) -> PermutationEntangleResult:
    """Establish N shared ebits from N local pairs through one permutation oracle.

    Each lab holds a local phi+ pair; permuting the second qubits' states
    leaves lab i sharing one Bell state with lab P(i).  Requires a
    derangement, since fixed points would keep their pair local.
    """
    if not p.is_derangement:
        raise ValueError(f"permutation {p.mapping} has fixed points")
    n = p.n
    run = new_run(n, max_qubits)
    run.snapshot_initial()
    keeps: dict[int, QubitId] = {}
    moves: dict[int, QubitId] = {}
    for i in range(1, n + 1):
        run.ensemble, ids = engine.allocate_qubits(run.ensemble, i, 2, labels=(f"k{i}", f"m{i}"))
        run.trace.append(Allocate(i, ids, "00"))
        keeps[i], moves[i] = ids
        _local_gate(run, i, (keeps[i],), gates.HADAMARD)
        _local_gate(run, i, (keeps[i], moves[i]), gates.cnot_unitary())
    targets = tuple(moves[i] for i in range(1, n + 1))
    _oracle(run, "permutation", targets, gates.permutation_unitary(p))
    created: dict[tuple[int, int], Fraction] = {}
    pair_qubits = []
    for i in range(1, n + 1):
        j = p(i)
        key = (i, j) if i < j else (j, i)
        run.ledger.create_ebit(i, j)
        run.trace.append(EbitCreate(key))
        created[key] = created.get(key, Fraction(0)) + 1
        pair_qubits.append((keeps[i], moves[j]))
    return PermutationEntangleResult(created, pair_qubits, run)


@dataclass
class PermutationCommResult:
    sent: dict[int, str]      # receiver -> message encoded for them
    decoded: dict[int, str]   # receiver -> message read out
    run: ProtocolRun


def permutation_communicate(p: Permutation, messages: Mapping[int, str],
                            max_qubits: int = engine.DEFAULT_MAX_QUBITS) -> PermutationCommResult:
    """Communicate 2N bits through one permutation oracle over N shared ebits.

    Lab P^-1(i) holds the manipulable half of a pair shared with lab i and
    dense-codes the message bound for i onto it; the permutation localizes
    every encoded half at its receiver, who Bell-measures.
    """
    if not p.is_derangement:
        raise ValueError(f"permutation {p.mapping} has fixed points")
    n = p.n
    if sorted(messages) != list(range(1, n + 1)):
        raise ValueError("need one 2-bit message per receiving party")
    for msg in messages.values():
        if msg not in gates.BELL_ENCODERS:
            raise ValueError(f"message must be 2 bits, got {msg!r}")
    run = new_run(n, max_qubits)
    pinv = p.inverse()
    for i in range(1, n + 1):
        run.ledger.grant(i, pinv(i))
    run.snapshot_initial()
    firsts: dict[int, QubitId] = {}
    hollows: dict[int, QubitId] = {}   # hollow qubit resident at each lab
    for i in range(1, n + 1):
        sender = pinv(i)
        first, hollow = _consume_pair(run, i, sender)
        firsts[i] = first
        hollows[sender] = hollow
    for i in range(1, n + 1):
        sender = pinv(i)
        _local_gate(run, sender, (hollows[sender],), gates.BELL_ENCODERS[messages[i]])
    targets = tuple(hollows[j] for j in range(1, n + 1))
    _oracle(run, "permutation", targets, gates.permutation_unitary(p))
    decoded: dict[int, str] = {}
    for i in range(1, n + 1):
        # the oracle moved the encoded half into the hollow qubit resident at lab i
        _, dist = _bell_measure_local(run, i, (firsts[i], hollows[i]), discard=True)
        best = max(dist, key=dist.get)
        if dist[best] < 1.0 - 1e-9:
            raise AssertionError(f"receiver {i} outcome not deterministic: {dist}")
        decoded[i] = best
        run.trace.append(DecodedBits(i, pinv(i), Fraction(2), best))
    return PermutationCommResult(dict(messages), decoded, run)
