"""Exact pure-state simulation over a dynamic, party-tagged qubit registry.

States are kept as ensembles of weighted pure statevectors: measurements
split branches instead of sampling, so outcome distributions, entropies and
fidelities are exact up to float arithmetic.  Qubits are allocated and
discarded dynamically; every qubit belongs to one party (laboratory).

Conventions, fixed once:

* registry position 0 is the least significant bit of the amplitude index;
* a gate matrix indexes its targets the same way (first target = bit 0);
* Bell labels "00"/"01"/"10"/"11" are (I, X, Z, XZ) applied to the second
  qubit of the standard maximally entangled pair, i.e. phi+, psi+, phi-,
  psi-.  A Bell measurement reports the phase bit first.

Operations return fresh ensembles rather than mutating their input, so an
ensemble belongs to one logical owner at a time and pure queries (entropy,
reduced density, branch vectors) are safe on any snapshot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_MAX_QUBITS = 24
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
POVM_TOL = 1e-10
PRUNE_TOL = 1e-14
EIG_TOL = 1e-12


class RegistryCapacityError(RuntimeError):
    """Raised when an allocation would exceed the registry qubit cap."""


@dataclass(frozen=True, order=True)
class QubitId:
    """A qubit resident at a party, identified by an opaque local tag."""

    party: int
    label: str

    def __repr__(self) -> str:
        return f"{self.party}:{self.label}"


@dataclass
class Branch:
    """One pure-state component of an ensemble.

    ``record`` holds classical measurement outcomes keyed by the global
    measurement counter of the owning ensemble; conditional corrections
    look outcomes up through it.
    """

    probability: float
    amplitudes: np.ndarray
    record: dict[int, str] = field(default_factory=dict)


@dataclass
class BranchEnsemble:
    """Probability-weighted set of pure statevectors over a shared registry."""

    registry: tuple[QubitId, ...]
    branches: list[Branch]
    max_qubits: int = DEFAULT_MAX_QUBITS
    measurement_count: int = 0

    @classmethod
    def vacuum(cls, max_qubits: int = DEFAULT_MAX_QUBITS) -> "BranchEnsemble":
        return cls(registry=(), branches=[Branch(1.0, np.ones(1, dtype=complex))], max_qubits=max_qubits)

    @classmethod
    def from_amplitudes(
        cls,
        registry: Sequence[QubitId],
        amplitudes: Sequence[complex],
        max_qubits: int = DEFAULT_MAX_QUBITS,
    ) -> "BranchEnsemble":
        registry = tuple(registry)
        if len(set(registry)) != len(registry):
            raise ValueError("registry contains duplicate qubit ids")
        vec = np.asarray(amplitudes, dtype=complex)
        if vec.shape != (2 ** len(registry),):
            raise ValueError(f"expected {2 ** len(registry)} amplitudes, got {vec.shape}")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized (norm {norm})")
        ens = cls(registry=registry, branches=[Branch(1.0, vec / norm)], max_qubits=max_qubits)
        ens.check()
        return ens

    @property
    def num_qubits(self) -> int:
        return len(self.registry)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def parties(self) -> set[int]:
        return {q.party for q in self.registry}

    def qubits_of(self, party: int) -> tuple[QubitId, ...]:
        return tuple(q for q in self.registry if q.party == party)

    def position(self, qubit: QubitId) -> int:
        try:
            return self.registry.index(qubit)
        except ValueError:
            raise ValueError(f"unknown target qubit {qubit!r}") from None

    def copy(self) -> "BranchEnsemble":
        return BranchEnsemble(
            registry=self.registry,
            branches=[Branch(b.probability, b.amplitudes.copy(), dict(b.record)) for b in self.branches],
            max_qubits=self.max_qubits,
            measurement_count=self.measurement_count,
        )

    def check(self) -> None:
        total = sum(b.probability for b in self.branches)
        if abs(total - 1.0) > NORM_TOL:
            raise AssertionError(f"branch probabilities sum to {total}")
        for b in self.branches:
            norm = np.linalg.norm(b.amplitudes)
            if abs(norm - 1.0) > 1e-9:
                raise AssertionError(f"branch norm {norm} drifted from 1")


@dataclass(frozen=True)
class Gate:
    """A unitary bound to an ordered tuple of target qubits."""

    targets: tuple[QubitId, ...]
    matrix: np.ndarray

    def __post_init__(self):
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if len(set(targets)) != len(targets):
            raise ValueError("gate targets must be distinct")
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        dim = 1 << len(targets)
        if mat.shape != (dim, dim):
            raise ValueError(f"gate on {len(targets)} qubits needs a {dim}x{dim} matrix")
        err = np.max(np.abs(mat.conj().T @ mat - np.eye(dim)))
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {err:.3e})")


@dataclass(frozen=True)
class Povm:
    """Positive operator-valued measure: PSD elements summing to identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        if not elems:
            raise ValueError("POVM needs at least one element")
        dim = elems[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for i, e in enumerate(elems):
            if e.shape != (dim, dim):
                raise ValueError(f"POVM element {i} has shape {e.shape}, expected {(dim, dim)}")
            if np.max(np.abs(e - e.conj().T)) > POVM_TOL:
                raise ValueError(f"POVM element {i} is not Hermitian")
            if np.min(np.linalg.eigvalsh(e)) < -POVM_TOL:
                raise ValueError(f"POVM element {i} is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(dim))) > POVM_TOL:
            raise ValueError("POVM elements do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


# --------------------------------------------------------------------------
# low-level index plumbing


def _apply_matrix(vec: np.ndarray, positions: Sequence[int], matrix: np.ndarray, k: int) -> np.ndarray:
    """Apply ``matrix`` to the registry ``positions`` of a 2**k statevector."""
    m = len(positions)
    tensor = vec.reshape((2,) * k)
    state_axes = [k - 1 - p for p in positions]  # axis of gate bit j
    op = matrix.reshape((2,) * (2 * m))
    # contract column bit j (op axis 2m-1-j) with the state axis of gate bit j
    out = np.tensordot(op, tensor, axes=([2 * m - 1 - j for j in range(m)], state_axes))
    # row bit j sits at out axis m-1-j; put it back where the input axis was
    out = np.moveaxis(out, [m - 1 - j for j in range(m)], state_axes)
    return np.ascontiguousarray(out).reshape(-1)


def _outcome_masks(positions: Sequence[int], bits: Sequence[int], k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    sel = np.ones(1 << k, dtype=bool)
    for p, b in zip(positions, bits):
        sel &= ((idx >> p) & 1) == b
    return sel


def _reduced_from_vec(vec: np.ndarray, keep_positions: Sequence[int], k: int) -> np.ndarray:
    """Density matrix of the qubits at ``keep_positions`` (ascending order).

    Row index bit j of the result is the qubit at ``keep_positions[j]``.
    """
    m = len(keep_positions)
    tensor = vec.reshape((2,) * k)
    keep_axes = [k - 1 - p for p in keep_positions]
    order = [k - 1 - p for p in reversed(keep_positions)] + [a for a in range(k) if a not in keep_axes]
    mat = np.transpose(tensor, order).reshape(1 << m, -1)
    return mat @ mat.conj().T


def _reordered_vec(vec: np.ndarray, positions: Sequence[int], k: int) -> np.ndarray:
    """Permute a full statevector so that bit j becomes the qubit that was
    at registry position ``positions[j]``."""
    axes = [k - 1 - positions[k - 1 - i] for i in range(k)]
    return np.transpose(vec.reshape((2,) * k), axes).reshape(-1)


# --------------------------------------------------------------------------
# registry management


def allocate_qubits(
    ensemble: BranchEnsemble,
    party: int,
    count: int,
    init: str | None = None,
    labels: Sequence[str] | None = None,
) -> tuple[BranchEnsemble, tuple[QubitId, ...]]:
    """Append ``count`` fresh qubits at ``party`` in the basis state ``init``.

    New qubits occupy the highest registry positions.  ``init`` is a string
    of '0'/'1' characters, one per new qubit, defaulting to all zeros.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    init = "0" * count if init is None else init
    if len(init) != count or set(init) - {"0", "1"}:
        raise ValueError(f"init string {init!r} does not describe {count} basis qubits")
    if ensemble.num_qubits + count > ensemble.max_qubits:
        raise RegistryCapacityError(
            f"allocating {count} qubits would exceed the registry cap of {ensemble.max_qubits}"
        )
    if labels is None:
        base = len(ensemble.registry)
        labels = tuple(f"x{base + i}" for i in range(count))
    new_ids = tuple(QubitId(party, lbl) for lbl in labels)
    if len(set(new_ids)) != count or set(new_ids) & set(ensemble.registry):
        raise ValueError("new qubit ids collide with existing registry entries")
    block = np.zeros(1 << count, dtype=complex)
    block[sum(int(c) << j for j, c in enumerate(init))] = 1.0
    branches = [
        Branch(b.probability, np.kron(block, b.amplitudes), dict(b.record)) for b in ensemble.branches
    ]
    return (
        BranchEnsemble(ensemble.registry + new_ids, branches, ensemble.max_qubits, ensemble.measurement_count),
        new_ids,
    )


def insert_bell_pair(ensemble: BranchEnsemble, first: QubitId, second: QubitId) -> BranchEnsemble:
    """Append two fresh qubits jointly in the phi+ state.

    This is the resource primitive that realizes a held ebit in the
    statevector; it is not a local operation.
    """
    if ensemble.num_qubits + 2 > ensemble.max_qubits:
        raise RegistryCapacityError(
            f"bell pair would exceed the registry cap of {ensemble.max_qubits}"
        )
    new_ids = (first, second)
    if first == second or set(new_ids) & set(ensemble.registry):
        raise ValueError("bell pair qubit ids collide with the registry")
    block = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    branches = [
        Branch(b.probability, np.kron(block, b.amplitudes), dict(b.record)) for b in ensemble.branches
    ]
    return BranchEnsemble(ensemble.registry + new_ids, branches, ensemble.max_qubits, ensemble.measurement_count)


def relabel_qubit(ensemble: BranchEnsemble, old: QubitId, new: QubitId) -> BranchEnsemble:
    """Rename a registry entry (party and/or label); the state is untouched."""
    pos = ensemble.position(old)
    if new != old and new in ensemble.registry:
        raise ValueError(f"qubit id {new!r} already in use")
    registry = list(ensemble.registry)
    registry[pos] = new
    return BranchEnsemble(tuple(registry), ensemble.branches, ensemble.max_qubits, ensemble.measurement_count)


def relocate_qubit(ensemble: BranchEnsemble, qubit: QubitId, to_party: int) -> tuple[BranchEnsemble, QubitId]:
    """Move a qubit to another party, keeping its label."""
    new = QubitId(to_party, qubit.label)
    return relabel_qubit(ensemble, qubit, new), new


# --------------------------------------------------------------------------
# evolution


def apply_gate(ensemble: BranchEnsemble, gate: Gate) -> BranchEnsemble:
    """Apply a unitary to every branch; norms are preserved to 1e-12."""
    k = ensemble.num_qubits
    positions = [ensemble.position(q) for q in gate.targets]
    branches = []
    for b in ensemble.branches:
        vec = _apply_matrix(b.amplitudes, positions, gate.matrix, k)
        branches.append(Branch(b.probability, vec, dict(b.record)))
    out = BranchEnsemble(ensemble.registry, branches, ensemble.max_qubits, ensemble.measurement_count)
    out.check()
    return out


def apply_conditional(
    ensemble: BranchEnsemble,
    targets: Sequence[QubitId],
    cases: Mapping[str, np.ndarray],
    measurement_index: int,
) -> BranchEnsemble:
    """Apply an outcome-dependent unitary per branch.

    ``cases`` maps the outcome string of measurement ``measurement_index``
    (as stored in each branch record) to the matrix applied on that branch.
    """
    k = ensemble.num_qubits
    positions = [ensemble.position(q) for q in targets]
    dim = 1 << len(targets)
    for outcome, mat in cases.items():
        Gate(tuple(targets), mat)  # validates unitarity / shape
        del outcome
    branches = []
    for b in ensemble.branches:
        if measurement_index not in b.record:
            raise ValueError(f"branch has no outcome recorded for measurement {measurement_index}")
        outcome = b.record[measurement_index]
        if outcome not in cases:
            raise ValueError(f"no case for outcome {outcome!r}")
        mat = np.asarray(cases[outcome], dtype=complex).reshape(dim, dim)
        branches.append(Branch(b.probability, _apply_matrix(b.amplitudes, positions, mat, k), dict(b.record)))
    out = BranchEnsemble(ensemble.registry, branches, ensemble.max_qubits, ensemble.measurement_count)
    out.check()
    return out


def measure_computational(
    ensemble: BranchEnsemble, targets: Sequence[QubitId], discard: bool = False
) -> tuple[BranchEnsemble, dict[str, float]]:
    """Projective measurement in the computational basis.

    Every branch splits into its nonzero outcomes with Born-rule weights;
    branches below the pruning threshold are dropped.  With ``discard`` the
    measured qubits leave the registry.  The outcome string lists target
    values in target order.  Returns the post-measurement ensemble and the
    aggregate outcome distribution.
    """
    k = ensemble.num_qubits
    positions = [ensemble.position(q) for q in targets]
    m = len(targets)
    if len(set(positions)) != m:
        raise ValueError("measurement targets must be distinct")
    midx = ensemble.measurement_count
    dist: dict[str, float] = {}
    branches: list[Branch] = []
    for b in ensemble.branches:
        for code in range(1 << m):
            bits = [(code >> j) & 1 for j in range(m)]
            outcome = "".join(str(x) for x in bits)
            sel = _outcome_masks(positions, bits, k)
            weight = float(np.sum(np.abs(b.amplitudes[sel]) ** 2))
            prob = b.probability * weight
            if prob <= PRUNE_TOL:
                continue
            dist[outcome] = dist.get(outcome, 0.0) + prob
            if discard:
                vec = b.amplitudes[sel] / math.sqrt(weight)
            else:
                vec = np.where(sel, b.amplitudes, 0.0) / math.sqrt(weight)
            record = dict(b.record)
            record[midx] = outcome
            branches.append(Branch(prob, vec, record))
    registry = ensemble.registry
    if discard:
        registry = tuple(q for q in registry if q not in set(targets))
    out = BranchEnsemble(registry, branches, ensemble.max_qubits, midx + 1)
    out.check()
    return out, dict(sorted(dist.items()))


_BELL_BASIS_CHANGE: np.ndarray | None = None


def _bell_basis_change() -> np.ndarray:
    """Two-qubit unitary sending each Bell state to its label's basis state."""
    global _BELL_BASIS_CHANGE
    if _BELL_BASIS_CHANGE is None:
        cnot = np.zeros((4, 4), dtype=complex)  # control = bit 0, target = bit 1
        for g in range(4):
            cnot[g ^ ((g & 1) << 1), g] = 1.0
        h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        h_on_first = np.kron(np.eye(2), h)  # bit 0 is the least significant kron factor
        _BELL_BASIS_CHANGE = h_on_first @ cnot
    return _BELL_BASIS_CHANGE


def bell_measure(
    ensemble: BranchEnsemble, pair: Sequence[QubitId], discard: bool = False
) -> tuple[BranchEnsemble, dict[str, float]]:
    """Projective measurement of two qubits in the fixed Bell basis.

    The 2-bit outcome is (phase bit, flip bit), so phi+ reads "00", psi+
    "01", phi- "10" and psi- "11".
    """
    if len(pair) != 2:
        raise ValueError("bell_measure targets exactly 2 qubits")
    w = _bell_basis_change()
    ens = apply_gate(ensemble, Gate(tuple(pair), w))
    ens, dist = measure_computational(ens, pair, discard=discard)
    if not discard:
        ens = apply_gate(ens, Gate(tuple(pair), w.conj().T))
    return ens, dist


def measure_povm(ensemble: BranchEnsemble, povm: Povm, targets: Sequence[QubitId]) -> list[float]:
    """Outcome probabilities of a POVM on ``targets``; the state is untouched."""
    if povm.dim != 1 << len(targets):
        raise ValueError(f"POVM dimension {povm.dim} does not match {len(targets)} targets")
    rho = reduced_density(ensemble, targets)
    probs = [float(np.real(np.trace(rho @ e))) for e in povm.elements]
    total = sum(probs)
    if abs(total - 1.0) > 1e-10:
        raise AssertionError(f"POVM probabilities sum to {total}")
    return probs


def coalesce(ensemble: BranchEnsemble, tol: float = 1e-10) -> BranchEnsemble:
    """Merge branches whose states agree up to a global phase.

    Classical records survive only where merged branches agree, so
    conditioning across a coalesce is rejected loudly by apply_conditional.
    """
    groups: list[tuple[np.ndarray, Branch]] = []
    for b in ensemble.branches:
        vec = b.amplitudes
        anchor = int(np.argmax(np.abs(vec) > 1e-9))
        phase = vec[anchor] / abs(vec[anchor])
        canon = vec * np.conj(phase)
        for canon_g, merged in groups:
            if canon_g.shape == canon.shape and np.allclose(canon_g, canon, atol=tol):
                merged.probability += b.probability
                merged.record = {k: v for k, v in merged.record.items() if b.record.get(k) == v}
                break
        else:
            groups.append((canon, Branch(b.probability, vec.copy(), dict(b.record))))
    return BranchEnsemble(
        ensemble.registry, [g[1] for g in groups], ensemble.max_qubits, ensemble.measurement_count
    )


# --------------------------------------------------------------------------
# queries


def reduced_density(ensemble: BranchEnsemble, subset: Sequence[QubitId]) -> np.ndarray:
    """Ensemble-averaged density matrix of ``subset``.

    The basis orders the subset by registry position, least significant
    first; trace is 1 and the result Hermitian to 1e-10.
    """
    if not subset:
        raise ValueError("subset must be nonempty")
    positions = sorted(ensemble.position(q) for q in subset)
    if len(set(positions)) != len(subset):
        raise ValueError("subset qubits must be distinct")
    k = ensemble.num_qubits
    rho = np.zeros((1 << len(subset),) * 2, dtype=complex)
    for b in ensemble.branches:
        rho += b.probability * _reduced_from_vec(b.amplitudes, positions, k)
    return rho


def entropy_of_qubits(ensemble: BranchEnsemble, subset: Sequence[QubitId]) -> float:
    """Probability-weighted per-branch von Neumann entropy of ``subset`` (base 2)."""
    subset = list(subset)
    if not subset or len(subset) == ensemble.num_qubits:
        return 0.0
    positions = sorted(ensemble.position(q) for q in subset)
    k = ensemble.num_qubits
    total = 0.0
    for b in ensemble.branches:
        rho = _reduced_from_vec(b.amplitudes, positions, k)
        total += b.probability * _vn_entropy(rho)
    return total


def entanglement_entropy(
    ensemble: BranchEnsemble, partition: Iterable[int], universe: Iterable[int] | None = None
) -> float:
    """Average entanglement across the cut (partition parties | the rest), in ebits."""
    parts = set(partition)
    all_parties = set(universe) if universe is not None else ensemble.parties()
    if not parts or not parts < all_parties:
        raise ValueError(f"partition {sorted(parts)} is not a proper nonempty subset of {sorted(all_parties)}")
    qubits = [q for q in ensemble.registry if q.party in parts]
    return entropy_of_qubits(ensemble, qubits)


def _vn_entropy(rho: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(rho)
    eigs = eigs[eigs > EIG_TOL]
    return float(-np.sum(eigs * np.log2(eigs)))


def shannon_entropy(distribution) -> float:
    """Shannon entropy in bits of a probability distribution (mapping or sequence)."""
    probs = list(distribution.values()) if isinstance(distribution, Mapping) else list(distribution)
    if any(p < -1e-12 for p in probs):
        raise ValueError("probabilities must be nonnegative")
    total = sum(probs)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return float(-sum(p * math.log2(p) for p in probs if p > 0.0))


def branch_vectors(ensemble: BranchEnsemble, order: Sequence[QubitId]) -> list[tuple[float, np.ndarray]]:
    """Branch statevectors with qubit ``order[j]`` as amplitude-index bit j."""
    if sorted(order) != sorted(ensemble.registry):
        raise ValueError("order must list every registry qubit exactly once")
    k = ensemble.num_qubits
    positions = [ensemble.position(q) for q in order]
    return [(b.probability, _reordered_vec(b.amplitudes, positions, k)) for b in ensemble.branches]


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(np.asarray(a), np.asarray(b))) ** 2)


def ensemble_fidelity(ensemble: BranchEnsemble, order: Sequence[QubitId], reference: np.ndarray) -> float:
    """Worst-case branch fidelity against a reference pure state."""
    return min(state_fidelity(vec, reference) for _, vec in branch_vectors(ensemble, order))
