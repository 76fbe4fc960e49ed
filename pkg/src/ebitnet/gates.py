"""Operator constructors: Paulis, Bell states, SWAP and permutation unitaries.

Matrices follow the engine convention that the first target qubit is the
least significant bit of the operator index.  Permutations act on party
slots 1..n and move the state at slot i to slot P(i), so the cyclic shift
1->2->...->n->1 sends |abc> to |cab> for n = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# Bell label -> encoding operator on the second qubit of phi+
BELL_ENCODERS = {"00": ID2, "01": PAULI_X, "10": PAULI_Z, "11": PAULI_X @ PAULI_Z}

# teleportation correction for a given Bell outcome at the source
TELEPORT_CORRECTIONS = {"00": ID2, "01": PAULI_X, "10": PAULI_Z, "11": PAULI_Z @ PAULI_X}


@dataclass(frozen=True)
class Permutation:
    """Bijection on party indices 1..n; ``mapping[i-1]`` is P(i)."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(v) for v in self.mapping)
        object.__setattr__(self, "mapping", mapping)
        n = len(mapping)
        if sorted(mapping) != list(range(1, n + 1)):
            raise ValueError(f"{mapping} is not a bijection on 1..{n}")

    @property
    def n(self) -> int:
        return len(self.mapping)

    @property
    def is_derangement(self) -> bool:
        return all(self.mapping[i - 1] != i for i in range(1, self.n + 1))

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.mapping, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def cyclic_shift(cls, n: int) -> "Permutation":
        """The n-cycle sending slot i to slot i+1 (and n back to 1)."""
        return cls(tuple(i % n + 1 for i in range(1, n + 1)))

    @classmethod
    def two_cycle(cls) -> "Permutation":
        return cls((2, 1))


def ps_permutation(n: int) -> Permutation:
    """Pairwise swap of consecutive slots (1,2)(3,4)...; n must be even."""
    if n < 2 or n % 2:
        raise ValueError(f"pairwise swap needs an even slot count, got {n}")
    mapping = []
    for i in range(1, n + 1, 2):
        mapping += [i + 1, i]
    return Permutation(tuple(mapping))


def ps_cp_permutation(n: int) -> Permutation:
    """Pairwise swap on the first n-3 slots plus a 3-cycle on the rest; n odd >= 3."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"pairwise swap + cycle needs an odd slot count >= 3, got {n}")
    mapping = list(ps_permutation(n - 3).mapping) if n > 3 else []
    mapping += [n - 1, n, n - 2]  # n-2 -> n-1 -> n -> n-2
    return Permutation(tuple(mapping))


def permutation_unitary(p: Permutation) -> np.ndarray:
    """Unitary on n qubits moving the state at slot i to slot P(i)."""
    n = p.n
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    for old in range(dim):
        new = 0
        for i in range(1, n + 1):
            new |= ((old >> (i - 1)) & 1) << (p(i) - 1)
        mat[new, old] = 1.0
    return mat


def swap_unitary() -> np.ndarray:
    """Exchange of two qubit states; the 2-slot case of a permutation."""
    return permutation_unitary(Permutation.two_cycle())


def cnot_unitary() -> np.ndarray:
    """Controlled-NOT with the first target as control, the second as target."""
    mat = np.zeros((4, 4), dtype=complex)
    for g in range(4):
        mat[g ^ ((g & 1) << 1), g] = 1.0
    return mat


def ps_unitary(n: int) -> np.ndarray:
    return permutation_unitary(ps_permutation(n))


def ps_cp_unitary(n: int) -> np.ndarray:
    return permutation_unitary(ps_cp_permutation(n))


def bell_state(label: str) -> np.ndarray:
    """Amplitudes of the Bell state with the given 2-bit label."""
    if label not in BELL_ENCODERS:
        raise ValueError(f"unknown Bell label {label!r}")
    phi_plus = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    enc = BELL_ENCODERS[label]
    # operator on the second qubit (bit 1): kron puts bit 0 last
    return np.kron(enc, ID2) @ phi_plus


def bell_states() -> dict[str, np.ndarray]:
    return {label: bell_state(label) for label in ("00", "01", "10", "11")}


def tensor_each(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product with ``mats[0]`` acting on the least significant qubit."""
    return reduce(np.kron, reversed(list(mats)))


def local_equivalence_conjugate(
    t: np.ndarray, pre_locals: Sequence[np.ndarray], post_locals: Sequence[np.ndarray]
) -> np.ndarray:
    """Undo a dressing by per-slot locals: returns (tensor of post^dag) T (tensor of pre^dag).

    If ``t`` was built as (tensor of post) U (tensor of pre), this recovers U.
    """
    n = len(pre_locals)
    if len(post_locals) != n:
        raise ValueError("need one pre and one post local per slot")
    dim = 1 << n
    t = np.asarray(t, dtype=complex)
    if t.shape != (dim, dim):
        raise ValueError(f"operator shape {t.shape} does not match {n} slots")
    pre_dag = tensor_each([np.asarray(u).conj().T for u in pre_locals])
    post_dag = tensor_each([np.asarray(u).conj().T for u in post_locals])
    return post_dag @ t @ pre_dag


def dress_with_locals(
    u: np.ndarray, pre_locals: Sequence[np.ndarray], post_locals: Sequence[np.ndarray]
) -> np.ndarray:
    """(tensor of post) U (tensor of pre): a local-unitary equivalent of U."""
    return tensor_each(list(post_locals)) @ np.asarray(u, dtype=complex) @ tensor_each(list(pre_locals))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)
