"""Resource accounting and protocol traces.

The ledger books ebits per unordered party pair and classical bits per
ordered pair, all in exact rationals so counting identities hold exactly.
A trace is the ordered, replayable log of everything a protocol did:
local gates and measurements, classical messages, ebit consumption and
creation, plus the registry plumbing (allocation, relocation, relabeling,
branch coalescing) and collective-oracle events needed to re-execute the
run from its recorded initial state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .engine import Branch, BranchEnsemble, QubitId


class InsufficientResources(RuntimeError):
    """A protocol step needs more held ebits than the ledger provides."""


def pair_key(a: int, b: int) -> tuple[int, int]:
    if a == b:
        raise ValueError("a party cannot share an ebit with itself")
    return (a, b) if a < b else (b, a)


@dataclass
class ResourceLedger:
    """Per-pair ebit and per-direction bit accounting in exact rationals."""

    ebits_held: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    ebits_consumed: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    ebits_created: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    bits_sent: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    granted: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    supplementary_bits: float = 0.0

    def grant(self, a: int, b: int, amount: int | Fraction = 1) -> None:
        """Endow the pair {a,b} with initially held ebits."""
        amount = Fraction(amount)
        if amount < 0:
            raise ValueError("cannot grant a negative amount")
        key = pair_key(a, b)
        self.ebits_held[key] = self.held(a, b) + amount
        self.granted[key] = self.granted.get(key, Fraction(0)) + amount

    def held(self, a: int, b: int) -> Fraction:
        return self.ebits_held.get(pair_key(a, b), Fraction(0))

    def consume_ebit(self, a: int, b: int, amount: int | Fraction = 1) -> None:
        amount = Fraction(amount)
        if amount < 0:
            raise ValueError("consumed amounts only grow")
        key = pair_key(a, b)
        if self.held(a, b) < amount:
            raise InsufficientResources(
                f"pair {key} holds {self.held(a, b)} ebits, needs {amount}"
            )
        self.ebits_held[key] = self.ebits_held[key] - amount
        self.ebits_consumed[key] = self.ebits_consumed.get(key, Fraction(0)) + amount

    def create_ebit(self, a: int, b: int, amount: int | Fraction = 1) -> None:
        amount = Fraction(amount)
        if amount < 0:
            raise ValueError("created amounts only grow")
        key = pair_key(a, b)
        self.ebits_created[key] = self.ebits_created.get(key, Fraction(0)) + amount

    def send_bits(self, sender: int, receiver: int, amount: int | Fraction) -> None:
        if sender == receiver:
            raise ValueError("sender and receiver must differ")
        amount = Fraction(amount)
        if amount < 0:
            raise ValueError("sent bits only grow")
        key = (sender, receiver)
        self.bits_sent[key] = self.bits_sent.get(key, Fraction(0)) + amount

    def add_supplementary(self, bits: float) -> None:
        if bits < 0:
            raise ValueError("supplementary information is nonnegative")
        self.supplementary_bits += bits

    # -- aggregates -------------------------------------------------------

    def total_consumed(self) -> Fraction:
        return sum(self.ebits_consumed.values(), Fraction(0))

    def total_created(self) -> Fraction:
        return sum(self.ebits_created.values(), Fraction(0))

    def total_bits_sent(self) -> Fraction:
        return sum(self.bits_sent.values(), Fraction(0))

    def consumed_matrix(self, n: int) -> list[list[Fraction]]:
        """Symmetric matrix of consumed ebits over parties 1..n."""
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (a, b), v in self.ebits_consumed.items():
            mat[a - 1][b - 1] = v
            mat[b - 1][a - 1] = v
        return mat

    def bits_matrix(self, n: int) -> list[list[Fraction]]:
        """Directed matrix of sent bits over parties 1..n."""
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (a, b), v in self.bits_sent.items():
            mat[a - 1][b - 1] = v
        return mat

    def granted_matrix(self, n: int) -> list[list[Fraction]]:
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (a, b), v in self.granted.items():
            mat[a - 1][b - 1] = v
            mat[b - 1][a - 1] = v
        return mat

    def summary(self) -> dict:
        def pairs(d: Mapping[tuple[int, int], Fraction], sep: str) -> dict[str, str]:
            return {f"{a}{sep}{b}": str(v) for (a, b), v in sorted(d.items())}

        return {
            "ebits_held": pairs(self.ebits_held, "-"),
            "ebits_consumed": pairs(self.ebits_consumed, "-"),
            "ebits_created": pairs(self.ebits_created, "-"),
            "bits_sent": pairs(self.bits_sent, ">"),
            "supplementary_bits": self.supplementary_bits,
        }


# --------------------------------------------------------------------------
# trace events


@dataclass(frozen=True)
class Allocate:
    party: int
    qubits: tuple[QubitId, ...]
    init: str


@dataclass(frozen=True)
class EbitConsume:
    pair: tuple[int, int]
    qubits: tuple[QubitId, QubitId]  # the instantiated phi+ pair


@dataclass(frozen=True)
class EbitCreate:
    pair: tuple[int, int]


@dataclass(frozen=True)
class LocalGate:
    party: int
    targets: tuple[QubitId, ...]
    matrix: np.ndarray | None = None
    cases: tuple[tuple[str, np.ndarray], ...] | None = None
    conditional_on: int | None = None


@dataclass(frozen=True)
class LocalMeasure:
    party: int
    targets: tuple[QubitId, ...]
    basis: str  # "computational" | "bell"
    discard: bool
    index: int
    distribution: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class ClassicalMessage:
    sender: int
    receiver: int
    bits: Fraction
    supplementary: bool = False


@dataclass(frozen=True)
class DecodedBits:
    at_party: int
    from_party: int
    bits: Fraction
    payload: str = ""


@dataclass(frozen=True)
class CollectiveOracle:
    """A joint unitary applied as the operation under study, not charged as LQCC."""

    label: str
    parties: tuple[int, ...]
    targets: tuple[QubitId, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class Relocate:
    qubit: QubitId
    to_party: int


@dataclass(frozen=True)
class Relabel:
    old: QubitId
    new: QubitId


@dataclass(frozen=True)
class Coalesce:
    pass


Event = (
    Allocate
    | EbitConsume
    | EbitCreate
    | LocalGate
    | LocalMeasure
    | ClassicalMessage
    | DecodedBits
    | CollectiveOracle
    | Relocate
    | Relabel
    | Coalesce
)


@dataclass
class ProtocolTrace:
    """Append-only event log, with the initial ensemble for replay."""

    n_parties: int
    initial: BranchEnsemble | None = None
    events: list[Event] = field(default_factory=list)

    def append(self, event: Event) -> None:
        self.events.append(event)

    def messages_total(self, sender: int, receiver: int) -> Fraction:
        return sum(
            (e.bits for e in self.events
             if isinstance(e, ClassicalMessage) and not e.supplementary
             and e.sender == sender and e.receiver == receiver),
            Fraction(0),
        )


# --------------------------------------------------------------------------
# serialization (JSON lines; one record per event, header first)


def _qid(q: QubitId) -> list:
    return [q.party, q.label]


def _parse_qid(raw) -> QubitId:
    return QubitId(int(raw[0]), str(raw[1]))


def _matrix_out(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat, dtype=complex)]


def _matrix_in(raw) -> np.ndarray:
    return np.array([[complex(c[0], c[1]) for c in row] for row in raw], dtype=complex)


def event_record(event: Event) -> dict:
    if isinstance(event, Allocate):
        return {"kind": "allocate", "party": event.party,
                "qubits": [_qid(q) for q in event.qubits], "init": event.init}
    if isinstance(event, EbitConsume):
        return {"kind": "ebit_consume", "pair": list(event.pair),
                "qubits": [_qid(q) for q in event.qubits]}
    if isinstance(event, EbitCreate):
        return {"kind": "ebit_create", "pair": list(event.pair)}
    if isinstance(event, LocalGate):
        rec = {"kind": "local_gate", "party": event.party,
               "targets": [_qid(q) for q in event.targets]}
        if event.matrix is not None:
            rec["matrix"] = _matrix_out(event.matrix)
        else:
            rec["conditional_on"] = event.conditional_on
            rec["cases"] = {k: _matrix_out(m) for k, m in event.cases}
        return rec
    if isinstance(event, LocalMeasure):
        return {"kind": "local_measure", "party": event.party,
                "targets": [_qid(q) for q in event.targets], "basis": event.basis,
                "discard": event.discard, "index": event.index,
                "distribution": {k: v for k, v in event.distribution}}
    if isinstance(event, ClassicalMessage):
        return {"kind": "message", "from": event.sender, "to": event.receiver,
                "bits": str(event.bits), "supplementary": event.supplementary}
    if isinstance(event, DecodedBits):
        return {"kind": "decoded", "at": event.at_party, "from": event.from_party,
                "bits": str(event.bits), "payload": event.payload}
    if isinstance(event, CollectiveOracle):
        return {"kind": "oracle", "label": event.label, "parties": list(event.parties),
                "targets": [_qid(q) for q in event.targets], "matrix": _matrix_out(event.matrix)}
    if isinstance(event, Relocate):
        return {"kind": "relocate", "qubit": _qid(event.qubit), "to": event.to_party}
    if isinstance(event, Relabel):
        return {"kind": "relabel", "old": _qid(event.old), "new": _qid(event.new)}
    if isinstance(event, Coalesce):
        return {"kind": "coalesce"}
    raise TypeError(f"unknown event type {type(event)!r}")


def event_from_record(rec: Mapping) -> Event:
    kind = rec.get("kind")
    if kind == "allocate":
        return Allocate(int(rec["party"]), tuple(_parse_qid(q) for q in rec["qubits"]), str(rec["init"]))
    if kind == "ebit_consume":
        a, b = rec["pair"]
        q1, q2 = (_parse_qid(q) for q in rec["qubits"])
        return EbitConsume(pair_key(int(a), int(b)), (q1, q2))
    if kind == "ebit_create":
        a, b = rec["pair"]
        return EbitCreate(pair_key(int(a), int(b)))
    if kind == "local_gate":
        targets = tuple(_parse_qid(q) for q in rec["targets"])
        if "matrix" in rec:
            return LocalGate(int(rec["party"]), targets, matrix=_matrix_in(rec["matrix"]))
        cases = tuple(sorted((k, _matrix_in(m)) for k, m in rec["cases"].items()))
        return LocalGate(int(rec["party"]), targets, cases=cases,
                         conditional_on=int(rec["conditional_on"]))
    if kind == "local_measure":
        return LocalMeasure(int(rec["party"]), tuple(_parse_qid(q) for q in rec["targets"]),
                            str(rec["basis"]), bool(rec["discard"]), int(rec["index"]),
                            tuple(sorted((k, float(v)) for k, v in rec["distribution"].items())))
    if kind == "message":
        return ClassicalMessage(int(rec["from"]), int(rec["to"]), Fraction(rec["bits"]),
                                bool(rec.get("supplementary", False)))
    if kind == "decoded":
        return DecodedBits(int(rec["at"]), int(rec["from"]), Fraction(rec["bits"]),
                           str(rec.get("payload", "")))
    if kind == "oracle":
        return CollectiveOracle(str(rec["label"]), tuple(int(p) for p in rec["parties"]),
                                tuple(_parse_qid(q) for q in rec["targets"]),
                                _matrix_in(rec["matrix"]))
    if kind == "relocate":
        return Relocate(_parse_qid(rec["qubit"]), int(rec["to"]))
    if kind == "relabel":
        return Relabel(_parse_qid(rec["old"]), _parse_qid(rec["new"]))
    if kind == "coalesce":
        return Coalesce()
    raise ValueError(f"unknown event kind {kind!r}")


def _header_record(trace: ProtocolTrace) -> dict:
    rec = {"kind": "header", "format": "ebitnet-trace/1", "n_parties": trace.n_parties}
    if trace.initial is not None:
        ens = trace.initial
        rec["max_qubits"] = ens.max_qubits
        rec["registry"] = [_qid(q) for q in ens.registry]
        rec["branches"] = [
            {"p": float(b.probability),
             "amplitudes": [[float(z.real), float(z.imag)] for z in b.amplitudes]}
            for b in ens.branches
        ]
    return rec


def _header_ensemble(rec: Mapping) -> BranchEnsemble | None:
    if "registry" not in rec:
        return None
    registry = tuple(_parse_qid(q) for q in rec["registry"])
    branches = [
        Branch(float(b["p"]), np.array([complex(c[0], c[1]) for c in b["amplitudes"]], dtype=complex))
        for b in rec["branches"]
    ]
    return BranchEnsemble(registry, branches, int(rec.get("max_qubits", 24)))


def dump_trace(trace: ProtocolTrace) -> str:
    lines = [json.dumps(_header_record(trace), sort_keys=True)]
    lines += [json.dumps(event_record(e), sort_keys=True) for e in trace.events]
    return "\n".join(lines) + "\n"


def load_trace(text: str) -> ProtocolTrace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("trace line 1: empty trace")
    records = []
    for i, ln in enumerate(lines, start=1):
        try:
            records.append(json.loads(ln))
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace line {i}: invalid JSON ({exc.msg})") from None
    header = records[0]
    if header.get("kind") != "header":
        raise ValueError("trace line 1: expected a header record")
    trace = ProtocolTrace(n_parties=int(header["n_parties"]), initial=_header_ensemble(header))
    for i, rec in enumerate(records[1:], start=2):
        try:
            trace.append(event_from_record(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"trace line {i}: {exc}") from None
    return trace
