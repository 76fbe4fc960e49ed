import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from ebitnet import engine, gates, protocols
from ebitnet.engine import BranchEnsemble, Povm
from ebitnet.gates import Permutation
from ebitnet.ledger import ClassicalMessage, InsufficientResources, LocalMeasure


def single_qubit_run(state, ebits=1):
    run = protocols.new_run(2)
    run.ensemble, (q1,) = engine.allocate_qubits(run.ensemble, 1, 1, labels=("q1",))
    run.ensemble = BranchEnsemble.from_amplitudes((q1,), state)
    run.data_qubits[1] = q1
    if ebits:
        run.ledger.grant(1, 2, ebits)
    run.snapshot_initial()
    return run, q1


def two_party_run(state=None, ebits=2):
    run = protocols.new_run(2)
    protocols.add_data_qubits(run, state)
    run.ledger.grant(1, 2, ebits)
    run.snapshot_initial()
    return run


def star_run(n, state=None, hub=1, ebits=2):
    run = protocols.new_run(n)
    protocols.add_data_qubits(run, state)
    for i in range(1, n + 1):
        if i != hub:
            run.ledger.grant(i, hub, ebits)
    run.snapshot_initial()
    return run


class TestTeleport:
    def test_random_state_fidelity(self):
        rng = np.random.default_rng(1)
        state = gates.random_state(2, rng)
        run, q1 = single_qubit_run(state)
        moved = protocols.teleport(run, q1, to=2)
        assert moved.party == 2
        assert engine.ensemble_fidelity(run.ensemble, [moved], state) >= 1 - 1e-10
        assert run.ledger.total_consumed() == 1
        assert run.ledger.bits_sent[(1, 2)] == 2

    def test_entanglement_follows_the_qubit(self):
        # party 1 holds both halves of a pair; teleport one half to party 2
        run = protocols.new_run(2)
        ens = run.ensemble
        ens, (a,) = engine.allocate_qubits(ens, 1, 1, labels=("h1",))
        ens, (b,) = engine.allocate_qubits(ens, 1, 1, labels=("h2",))
        ens = BranchEnsemble.from_amplitudes((a, b), gates.bell_state("00"))
        run.ensemble = ens
        run.ledger.grant(1, 2, 1)
        run.snapshot_initial()
        assert engine.entanglement_entropy(run.ensemble, {1}, universe={1, 2}) == pytest.approx(0.0)
        before = engine.entropy_of_qubits(run.ensemble, [a])
        moved = protocols.teleport(run, b, to=2)
        after = engine.entanglement_entropy(run.ensemble, {1}, universe={1, 2})
        assert after == pytest.approx(before, abs=1e-9)
        assert after == pytest.approx(1.0, abs=1e-9)
        assert moved == engine.QubitId(2, "h2")

    def test_without_ebits_refuses_and_leaves_ledger(self):
        rng = np.random.default_rng(2)
        run, q1 = single_qubit_run(gates.random_state(2, rng), ebits=0)
        with pytest.raises(InsufficientResources):
            protocols.teleport(run, q1, to=2)
        assert run.ledger.total_consumed() == 0
        assert run.ledger.total_bits_sent() == 0
        assert not run.trace.events


class TestSuperdense:
    @pytest.mark.parametrize("msg", ["00", "01", "10", "11"])
    def test_all_messages_decode(self, msg):
        run = protocols.new_run(2)
        run.ledger.grant(1, 2, 1)
        run.snapshot_initial()
        assert protocols.superdense_send(run, 1, 2, msg) == msg
        assert run.ledger.total_consumed() == 1

    def test_message_00_measures_phi_plus(self):
        run = protocols.new_run(2)
        run.ledger.grant(1, 2, 1)
        run.snapshot_initial()
        protocols.superdense_send(run, 1, 2, "00")
        (meas,) = [e for e in run.trace.events if isinstance(e, LocalMeasure)]
        assert dict(meas.distribution) == {"00": pytest.approx(1.0)}

    def test_two_sends_cost_two_ebits(self):
        run = protocols.new_run(2)
        run.ledger.grant(1, 2, 2)
        run.snapshot_initial()
        assert protocols.superdense_send(run, 1, 2, "10") == "10"
        assert protocols.superdense_send(run, 2, 1, "01") == "01"
        assert run.ledger.total_consumed() == 2
        assert run.ledger.total_bits_sent() == 0  # no classical channel used

    def test_insufficient_ebits(self):
        run = protocols.new_run(2)
        run.snapshot_initial()
        with pytest.raises(InsufficientResources):
            protocols.superdense_send(run, 1, 2, "00")


class TestCollectiveTwoQubit:
    def test_swap_op_on_product_input(self):
        rng = np.random.default_rng(7)
        a = gates.random_state(2, rng)
        b = gates.random_state(2, rng)
        state = np.kron(b, a)  # party 1 = bit 0
        run = two_party_run(state)
        protocols.collective_op_two_qubit(run, protocols.CollectiveOp(unitary=gates.swap_unitary()))
        expected = np.kron(a, b)
        assert engine.ensemble_fidelity(run.ensemble, protocols.data_order(run), expected) >= 1 - 1e-10
        assert run.ledger.total_consumed() == 2
        assert run.ledger.bits_sent[(1, 2)] == 2
        assert run.ledger.bits_sent[(2, 1)] == 2

    def test_identity_costs_the_same(self):
        rng = np.random.default_rng(8)
        state = gates.random_state(4, rng)
        run = two_party_run(state)
        protocols.collective_op_two_qubit(run, protocols.CollectiveOp(unitary=np.eye(4)))
        assert engine.ensemble_fidelity(run.ensemble, protocols.data_order(run), state) >= 1 - 1e-10
        assert run.ledger.total_consumed() == 2
        assert run.ledger.total_bits_sent() == 4

    def test_recorded_uniform_povm_supplementary(self):
        rng = np.random.default_rng(9)
        run = two_party_run(gates.random_state(4, rng))
        povm = Povm(tuple(np.eye(4) / 4 for _ in range(4)))
        protocols.collective_op_two_qubit(run, protocols.CollectiveOp(povm=povm, record=True))
        assert run.ledger.supplementary_bits == pytest.approx(2.0, abs=1e-12)
        supp = [e for e in run.trace.events if isinstance(e, ClassicalMessage) and e.supplementary]
        assert len(supp) == 1
        assert supp[0].sender == 2 and supp[0].receiver == 1
        assert supp[0].bits == 2  # ceil(2.0) whole bits on the trace
        # the unrecorded bits stay at the teleportation figures
        assert run.ledger.bits_sent[(1, 2)] == 2 and run.ledger.bits_sent[(2, 1)] == 2

    def test_unrecorded_povm_adds_nothing(self):
        rng = np.random.default_rng(10)
        run = two_party_run(gates.random_state(4, rng))
        povm = Povm(tuple(np.eye(4) / 4 for _ in range(4)))
        protocols.collective_op_two_qubit(run, protocols.CollectiveOp(povm=povm, record=False))
        assert run.ledger.supplementary_bits == 0.0

    def test_insufficient_resources(self):
        run = two_party_run(ebits=1)
        with pytest.raises(InsufficientResources):
            protocols.collective_op_two_qubit(run, protocols.CollectiveOp(unitary=np.eye(4)))


class TestCollectiveStar:
    def test_n3_cyclic_permutation(self):
        rng = np.random.default_rng(11)
        state = gates.random_state(8, rng)
        run = star_run(3, state)
        u = gates.permutation_unitary(Permutation.cyclic_shift(3))
        protocols.collective_op_star(run, protocols.CollectiveOp(unitary=u))
        assert engine.ensemble_fidelity(run.ensemble, protocols.data_order(run), u @ state) >= 1 - 1e-9
        assert run.ledger.total_consumed() == 4
        assert run.ledger.total_bits_sent() == 8

    def test_n2_matches_two_qubit_ledger(self):
        rng = np.random.default_rng(12)
        state = gates.random_state(4, rng)
        run_star = star_run(2, state)
        run_two = two_party_run(state)
        op = protocols.CollectiveOp(unitary=gates.swap_unitary())
        protocols.collective_op_star(run_star, op)
        protocols.collective_op_two_qubit(run_two, op)
        assert run_star.ledger.summary() == run_two.ledger.summary()

    def test_n4_ps_matches_star_pattern(self):
        from ebitnet import graphs

        rng = np.random.default_rng(13)
        state = gates.random_state(16, rng)
        run = star_run(4, state)
        protocols.collective_op_star(run, protocols.CollectiveOp(unitary=gates.ps_unitary(4)))
        ent, comm = graphs.star_graphs(4, hub=1)
        assert run.ledger.consumed_matrix(4) == [list(r) for r in ent.weights]
        assert run.ledger.bits_matrix(4) == [list(r) for r in comm.weights]
        assert run.ledger.total_consumed() == 6
        assert run.ledger.total_bits_sent() == 12

    def test_alternative_hub(self):
        from ebitnet import graphs

        rng = np.random.default_rng(14)
        state = gates.random_state(8, rng)
        u = gates.haar_unitary(8, rng)
        run = star_run(3, state, hub=2)
        protocols.collective_op_star(run, protocols.CollectiveOp(unitary=u), hub=2)
        assert engine.ensemble_fidelity(run.ensemble, protocols.data_order(run), u @ state) >= 1 - 1e-9
        ent, _ = graphs.star_graphs(3, hub=2)
        assert run.ledger.consumed_matrix(3) == [list(r) for r in ent.weights]

    def test_local_dressing_does_not_change_costs(self):
        rng = np.random.default_rng(15)
        state = gates.random_state(8, rng)
        u = gates.permutation_unitary(Permutation.cyclic_shift(3))
        pre = [gates.haar_unitary(2, rng) for _ in range(3)]
        post = [gates.haar_unitary(2, rng) for _ in range(3)]
        dressed = gates.dress_with_locals(u, pre, post)
        run_plain = star_run(3, state)
        run_dressed = star_run(3, state)
        protocols.collective_op_star(run_plain, protocols.CollectiveOp(unitary=u))
        protocols.collective_op_star(run_dressed, protocols.CollectiveOp(unitary=dressed))
        assert run_plain.ledger.summary() == run_dressed.ledger.summary()


class TestSwapDemos:
    def test_all_sixteen_message_pairs(self):
        msgs = ["00", "01", "10", "11"]
        for ma, mb in itertools.product(msgs, msgs):
            result = protocols.swap_communicate_demo(ma, mb)
            assert result.decoded == (ma, mb)
            assert result.run.ledger.total_consumed() == 2
            assert result.run.ledger.total_bits_sent() == 0

    def test_entangle_demo_two_ebits(self):
        result = protocols.swap_entangle_demo()
        assert result.entropy == pytest.approx(2.0, abs=1e-9)
        assert result.run.ledger.total_created() == 2

    def test_without_swap_no_entanglement(self):
        # build the same two local pairs but skip the oracle
        ens = engine.BranchEnsemble.vacuum()
        for party in (1, 2):
            ens, (k, m) = engine.allocate_qubits(ens, party, 2, labels=(f"k{party}", f"m{party}"))
            ens = engine.apply_gate(ens, engine.Gate((k,), gates.HADAMARD))
            ens = engine.apply_gate(ens, engine.Gate((k, m), gates.cnot_unitary()))
        assert engine.entanglement_entropy(ens, {1}) == pytest.approx(0.0, abs=1e-9)

    def test_single_pair_half_size_run(self):
        # one local pair at party 1, a fresh qubit at party 2, one swap: 1 ebit
        ens = engine.BranchEnsemble.vacuum()
        ens, (k, m) = engine.allocate_qubits(ens, 1, 2, labels=("k", "m"))
        ens = engine.apply_gate(ens, engine.Gate((k,), gates.HADAMARD))
        ens = engine.apply_gate(ens, engine.Gate((k, m), gates.cnot_unitary()))
        ens, (b,) = engine.allocate_qubits(ens, 2, 1, labels=("b",))
        ens = engine.apply_gate(ens, engine.Gate((m, b), gates.swap_unitary()))
        assert engine.entanglement_entropy(ens, {1}) == pytest.approx(1.0, abs=1e-9)


class TestPermutationEntangle:
    def test_n6_cycle_creates_six(self):
        result = protocols.permutation_entangle(Permutation.cyclic_shift(6))
        assert result.run.ledger.total_created() == 6
        assert sum(result.created.values()) == 6

    def test_n2_swap_creates_two(self):
        result = protocols.permutation_entangle(Permutation.two_cycle())
        assert result.created == {(1, 2): 2}
        assert engine.entanglement_entropy(result.run.ensemble, {1}) == pytest.approx(2.0, abs=1e-9)

    def test_n4_double_transposition(self):
        result = protocols.permutation_entangle(Permutation((2, 1, 4, 3)))
        assert result.created == {(1, 2): 2, (3, 4): 2}
        for a, b in result.pair_qubits:
            rho = engine.reduced_density(result.run.ensemble, [a, b])
            phi = gates.bell_state("00")
            assert float(np.real(phi.conj() @ rho @ phi)) == pytest.approx(1.0, abs=1e-9)

    def test_every_lab_cut_carries_two_ebits(self):
        result = protocols.permutation_entangle(Permutation.cyclic_shift(4))
        for i in range(1, 5):
            ent = engine.entanglement_entropy(result.run.ensemble, {i})
            assert ent == pytest.approx(2.0, abs=1e-9)

    def test_fixed_points_rejected(self):
        with pytest.raises(ValueError, match="fixed point"):
            protocols.permutation_entangle(Permutation((1, 3, 2)))


class TestPermutationCommunicate:
    def test_n6_cycle_random_messages(self):
        rng = np.random.default_rng(19)
        msgs = {i: f"{rng.integers(0, 2)}{rng.integers(0, 2)}" for i in range(1, 7)}
        result = protocols.permutation_communicate(Permutation.cyclic_shift(6), msgs)
        assert result.decoded == msgs
        assert result.run.ledger.total_consumed() == 6

    def test_all_zero_messages_measure_phi_plus(self):
        msgs = {i: "00" for i in range(1, 4)}
        result = protocols.permutation_communicate(Permutation.cyclic_shift(3), msgs)
        for ev in result.run.trace.events:
            if isinstance(ev, LocalMeasure):
                assert dict(ev.distribution) == {"00": pytest.approx(1.0)}

    def test_n3_exhaustive(self):
        labels = ["00", "01", "10", "11"]
        p = Permutation.cyclic_shift(3)
        for combo in itertools.product(labels, repeat=3):
            msgs = {i + 1: combo[i] for i in range(3)}
            result = protocols.permutation_communicate(p, msgs)
            assert result.decoded == msgs

    def test_fixed_points_rejected(self):
        with pytest.raises(ValueError, match="fixed point"):
            protocols.permutation_communicate(Permutation((1, 3, 2)), {1: "00", 2: "00", 3: "00"})


class TestDerangementMaximality:
    """Every derangement, not just cycles, hits the n-ebit / 2n-bit caps."""

    @staticmethod
    def all_derangements(n):
        return [Permutation(p) for p in itertools.permutations(range(1, n + 1))
                if all(p[i - 1] != i for i in range(1, n + 1))]

    def test_all_derangements_up_to_five(self):
        rng = np.random.default_rng(77)
        for n in (2, 3, 4, 5):
            for p in self.all_derangements(n):
                ent = protocols.permutation_entangle(p)
                assert ent.run.ledger.total_created() == n
                msgs = {i: f"{rng.integers(0, 2)}{rng.integers(0, 2)}" for i in range(1, n + 1)}
                comm = protocols.permutation_communicate(p, msgs)
                assert comm.decoded == msgs

    def test_sampled_derangements_n6(self):
        rng = np.random.default_rng(78)
        pool = self.all_derangements(6)
        for idx in rng.choice(len(pool), size=5, replace=False):
            p = pool[idx]
            assert protocols.permutation_entangle(p).run.ledger.total_created() == 6
            msgs = {i: f"{rng.integers(0, 2)}{rng.integers(0, 2)}" for i in range(1, 7)}
            assert protocols.permutation_communicate(p, msgs).decoded == msgs


class TestSupplementaryInformation:
    def test_uniform_povm_log2m(self):
        rng = np.random.default_rng(20)
        ens = engine.BranchEnsemble.vacuum()
        ens, ids = engine.allocate_qubits(ens, 1, 2)
        ens = BranchEnsemble.from_amplitudes(ids, gates.random_state(4, rng))
        for m in (2, 4, 8):
            povm = Povm(tuple(np.eye(4) / m for _ in range(m)))
            assert protocols.supplementary_information(povm, ens, ids) == pytest.approx(math.log2(m))

    def test_projective_on_eigenstate_zero(self):
        ens = engine.BranchEnsemble.vacuum()
        ens, (a,) = engine.allocate_qubits(ens, 1, 1, init="1")
        povm = Povm((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
        assert protocols.supplementary_information(povm, ens, (a,)) == pytest.approx(0.0)

    def test_two_outcome_uniform_one_bit(self):
        ens = engine.BranchEnsemble.vacuum()
        ens, (a,) = engine.allocate_qubits(ens, 1, 1)
        povm = Povm((np.eye(2) / 2, np.eye(2) / 2))
        assert protocols.supplementary_information(povm, ens, (a,)) == pytest.approx(1.0)


class TestLedgerInvariants:
    def test_consumption_matches_instantiated_pairs(self):
        from ebitnet.ledger import EbitConsume

        rng = np.random.default_rng(21)
        run = star_run(4, gates.random_state(16, rng))
        protocols.collective_op_star(run, protocols.CollectiveOp(unitary=gates.haar_unitary(16, rng)))
        consumes = [e for e in run.trace.events if isinstance(e, EbitConsume)]
        assert Fraction(len(consumes)) == run.ledger.total_consumed()

    def test_held_never_negative(self):
        run = two_party_run(ebits=2)
        protocols.collective_op_two_qubit(run, protocols.CollectiveOp(unitary=np.eye(4)))
        assert all(v >= 0 for v in run.ledger.ebits_held.values())
        with pytest.raises(InsufficientResources):
            run.ledger.consume_ebit(1, 2)

    def test_every_message_event_has_a_ledger_increment(self):
        rng = np.random.default_rng(22)
        run = star_run(3, gates.random_state(8, rng))
        protocols.collective_op_star(run, protocols.CollectiveOp(unitary=gates.haar_unitary(8, rng)))
        for (a, b), total in run.ledger.bits_sent.items():
            assert run.trace.messages_total(a, b) == total
        traced = sum(
            (e.bits for e in run.trace.events
             if isinstance(e, ClassicalMessage) and not e.supplementary),
            Fraction(0),
        )
        assert traced == run.ledger.total_bits_sent()
