"""Audit of protocol traces against declared resource graphs.

Checks, per trace:

* held ebits never go negative and classical messages fit the declared
  channel capacities;
* across every party bipartition, ebits claimed as created do not exceed
  ebits consumed across the cut plus the entanglement initially there, and
  bits claimed as decoded do not exceed messages sent plus two bits per
  consumed ebit (the dense-coding allowance) -- cuts spanned by a
  collective oracle are exempt, since the oracle is the operation under
  study rather than an LQCC step;
* when the trace carries its initial state, the run is replayed and the
  LQCC monotone (average entanglement entropy plus remaining held ebits
  across each cut) is checked to be non-increasing step by step, again
  excepting oracle and qubit-conveyance steps that span the cut.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import engine
from .engine import BranchEnsemble, Gate
from .graphs import CommunicationGraph, EntanglementGraph, GraphBundle
from .ledger import (
    Allocate,
    ClassicalMessage,
    Coalesce,
    CollectiveOracle,
    DecodedBits,
    EbitConsume,
    EbitCreate,
    Event,
    LocalGate,
    LocalMeasure,
    ProtocolTrace,
    Relabel,
    Relocate,
    pair_key,
)

ENTROPY_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    check: str
    detail: str
    step: int | None = None


@dataclass
class AuditReport:
    n_parties: int
    violations: list[Violation] = field(default_factory=list)
    checks_run: list[str] = field(default_factory=list)
    replayed: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations


def _cuts(n: int) -> list[frozenset[int]]:
    """All bipartitions of 1..n, each named by the side containing party 1."""
    rest = list(range(2, n + 1))
    out = []
    for r in range(0, len(rest)):
        for combo in itertools.combinations(rest, r):
            side = frozenset({1, *combo})
            if len(side) < n:
                out.append(side)
    return out


def _crosses(pair: tuple[int, int], side: frozenset[int]) -> bool:
    return (pair[0] in side) != (pair[1] in side)


def replay_events(initial: BranchEnsemble, events: Sequence[Event]):
    """Re-execute a trace deterministically, yielding the ensemble after each event.

    Raises ValueError when an event cannot be applied or a recorded
    measurement distribution disagrees with the replayed one.
    """
    ens = initial.copy()
    for step, ev in enumerate(events):
        if isinstance(ev, Allocate):
            ens, _ = engine.allocate_qubits(
                ens, ev.party, len(ev.qubits), init=ev.init,
                labels=[q.label for q in ev.qubits],
            )
        elif isinstance(ev, EbitConsume):
            ens = engine.insert_bell_pair(ens, *ev.qubits)
        elif isinstance(ev, LocalGate):
            if ev.matrix is not None:
                ens = engine.apply_gate(ens, Gate(ev.targets, ev.matrix))
            else:
                ens = engine.apply_conditional(ens, ev.targets, dict(ev.cases), ev.conditional_on)
        elif isinstance(ev, CollectiveOracle):
            ens = engine.apply_gate(ens, Gate(ev.targets, ev.matrix))
        elif isinstance(ev, LocalMeasure):
            if ev.basis == "computational":
                ens, dist = engine.measure_computational(ens, ev.targets, discard=ev.discard)
            elif ev.basis == "bell":
                ens, dist = engine.bell_measure(ens, ev.targets, discard=ev.discard)
            elif ev.basis == "povm":
                dist = dict(ev.distribution)  # statistics-only query; state untouched
            else:
                raise ValueError(f"step {step}: unknown measurement basis {ev.basis!r}")
            if ev.basis != "povm":
                recorded = dict(ev.distribution)
                if set(recorded) != set(dist) or any(
                    abs(recorded[k] - dist[k]) > 1e-9 for k in dist
                ):
                    raise ValueError(
                        f"step {step}: recorded distribution {recorded} "
                        f"disagrees with replay {dist}"
                    )
        elif isinstance(ev, Relocate):
            ens, _ = engine.relocate_qubit(ens, ev.qubit, ev.to_party)
        elif isinstance(ev, Relabel):
            ens = engine.relabel_qubit(ens, ev.old, ev.new)
        elif isinstance(ev, Coalesce):
            ens = engine.coalesce(ens)
        elif isinstance(ev, (ClassicalMessage, DecodedBits, EbitCreate)):
            pass  # bookkeeping only
        else:
            raise ValueError(f"step {step}: unknown event {type(ev).__name__}")
        yield step, ev, ens


def audit_trace(trace: ProtocolTrace, resources: GraphBundle, replay: bool = True) -> AuditReport:
    n = trace.n_parties
    if resources.n != n:
        raise ValueError(f"trace has {n} parties but graphs describe {resources.n}")
    ent = resources.entanglement or EntanglementGraph(
        n, tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n)))
    comm = resources.communication or CommunicationGraph(
        n, tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n)))
    report = AuditReport(n_parties=n)

    # -- running ledger reconstruction -------------------------------------
    report.checks_run.append("held-nonnegative")
    held: dict[tuple[int, int], Fraction] = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            held[(i, j)] = ent.weight(i, j)
    consumed: dict[tuple[int, int], Fraction] = {}
    created: dict[tuple[int, int], Fraction] = {}
    sent: dict[tuple[int, int], Fraction] = {}
    decoded: dict[tuple[int, int], Fraction] = {}  # (from, at)
    spanned_by_oracle: set[frozenset[int]] = set()
    spanned_by_conveyance: set[frozenset[int]] = set()
    cuts = _cuts(n)

    for step, ev in enumerate(trace.events):
        if isinstance(ev, EbitConsume):
            key = pair_key(*ev.pair)
            held[key] -= 1
            consumed[key] = consumed.get(key, Fraction(0)) + 1
            if held[key] < 0:
                report.violations.append(Violation(
                    "held-nonnegative",
                    f"pair {key} consumed beyond its {ent.weight(*key)} held ebits",
                    step,
                ))
        elif isinstance(ev, EbitCreate):
            key = pair_key(*ev.pair)
            created[key] = created.get(key, Fraction(0)) + 1
        elif isinstance(ev, ClassicalMessage) and not ev.supplementary:
            sent[(ev.sender, ev.receiver)] = sent.get((ev.sender, ev.receiver), Fraction(0)) + ev.bits
        elif isinstance(ev, DecodedBits):
            key = (ev.from_party, ev.at_party)
            decoded[key] = decoded.get(key, Fraction(0)) + ev.bits
        elif isinstance(ev, CollectiveOracle):
            for cut in cuts:
                if any((p in cut) != (q in cut) for p in ev.parties for q in ev.parties):
                    spanned_by_oracle.add(cut)
        elif isinstance(ev, Relocate):
            if ev.qubit.party != ev.to_party:
                for cut in cuts:
                    if _crosses((ev.qubit.party, ev.to_party), cut):
                        spanned_by_conveyance.add(cut)

    report.checks_run.append("locality")
    for step, ev in enumerate(trace.events):
        if isinstance(ev, (LocalGate, LocalMeasure)):
            strangers = [q for q in ev.targets if q.party != ev.party]
            if strangers:
                report.violations.append(Violation(
                    "locality",
                    f"event declared local to party {ev.party} targets {strangers}",
                    step,
                ))
        elif isinstance(ev, Relabel) and ev.old.party != ev.new.party:
            report.violations.append(Violation(
                "locality",
                f"relabel moves {ev.old} to party {ev.new.party}; "
                "qubit conveyance must be a relocate event",
                step,
            ))

    report.checks_run.append("channel-capacity")
    for (a, b), bits in sorted(sent.items()):
        if bits > comm.weight(a, b):
            report.violations.append(Violation(
                "channel-capacity",
                f"{bits} bits sent {a}->{b} exceed the declared capacity {comm.weight(a, b)}",
            ))

    report.checks_run.append("cut-entanglement")
    for cut in cuts:
        if cut in spanned_by_oracle or cut in spanned_by_conveyance:
            continue
        made = sum((v for k, v in created.items() if _crosses(k, cut)), Fraction(0))
        used = sum((v for k, v in consumed.items() if _crosses(k, cut)), Fraction(0))
        initial = sum(
            (ent.weight(i, j) for i in cut for j in range(1, n + 1) if j not in cut),
            Fraction(0),
        )
        if made > used + initial:
            report.violations.append(Violation(
                "cut-entanglement",
                f"cut {sorted(cut)}: {made} ebits created exceed {used} consumed "
                f"+ {initial} initially shared",
            ))

    report.checks_run.append("cut-communication")
    for cut in cuts:
        if cut in spanned_by_oracle:
            continue
        used = sum((v for k, v in consumed.items() if _crosses(k, cut)), Fraction(0))
        for side, name in ((cut, "out of"), (frozenset(range(1, n + 1)) - cut, "into")):
            got = sum(
                (v for (frm, at), v in decoded.items() if frm in side and at not in side),
                Fraction(0),
            )
            msg = sum(
                (v for (a, b), v in sent.items() if a in side and b not in side),
                Fraction(0),
            )
            if got > msg + 2 * used:
                report.violations.append(Violation(
                    "cut-communication",
                    f"cut {sorted(cut)}: {got} bits decoded {name} the cut exceed "
                    f"{msg} sent + dense-coding allowance {2 * used}",
                ))

    # -- statevector replay -------------------------------------------------
    if replay and trace.initial is not None:
        report.checks_run.append("replay-monotonicity")
        report.replayed = True
        universe = set(range(1, n + 1))
        run_held = {k: ent.weight(*k) for k in held}

        def monotone(ens: BranchEnsemble, cut: frozenset[int]) -> float:
            ebits = sum(
                (run_held[k] for k in run_held if _crosses(k, cut)), Fraction(0))
            return engine.entanglement_entropy(ens, cut, universe=universe) + float(ebits)

        last = {cut: monotone(trace.initial, cut) for cut in cuts}
        try:
            for step, ev, ens in replay_events(trace.initial, trace.events):
                if isinstance(ev, EbitConsume):
                    run_held[pair_key(*ev.pair)] -= 1
                for cut in cuts:
                    value = monotone(ens, cut)
                    exempt = (
                        (isinstance(ev, CollectiveOracle)
                         and any((p in cut) != (q in cut) for p in ev.parties for q in ev.parties))
                        or (isinstance(ev, Relocate) and _crosses((ev.qubit.party, ev.to_party), cut))
                    )
                    if not exempt and value > last[cut] + ENTROPY_TOL:
                        report.violations.append(Violation(
                            "replay-monotonicity",
                            f"cut {sorted(cut)}: monotone rose from {last[cut]:.12f} "
                            f"to {value:.12f}",
                            step,
                        ))
                    last[cut] = value
        except (ValueError, AssertionError) as exc:
            report.violations.append(Violation("replay", str(exc)))
    return report
