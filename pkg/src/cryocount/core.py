"""Domain types and exact arithmetic for VQA observables.

Counts and parities are plain integers; single-term expectation values are
kept as :class:`fractions.Fraction` so that host-side and co-processor-side
reconstructions can be compared bit for bit. Real-valued weights are stored
as floats and promoted to exact rationals only inside the weighted sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

PAULI_OPS = "IXYZ"


class IncompatibleGroup(ValueError):
    """Two group members disagree on a non-identity operator at one qubit."""


@dataclass(frozen=True)
class PauliString:
    ops: str

    def __post_init__(self):
        ops = self.ops.upper()
        bad = set(ops) - set(PAULI_OPS)
        if bad:
            raise ValueError(f"invalid Pauli operators {sorted(bad)} in {self.ops!r}")
        object.__setattr__(self, "ops", ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __str__(self) -> str:
        return self.ops

    @property
    def weight(self) -> int:
        """Number of non-identity positions."""
        return sum(op != "I" for op in self.ops)

    def covered_by(self, inclusive: "PauliString") -> bool:
        if len(inclusive) != len(self):
            return False
        return all(a == "I" or a == b for a, b in zip(self.ops, inclusive.ops))


@dataclass(frozen=True)
class Paulimask:
    bits: tuple[int, ...]

    @classmethod
    def from_string(cls, s: str) -> "Paulimask":
        return cls(tuple(int(c) for c in s))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def popcount(self) -> int:
        return sum(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)


@dataclass(frozen=True)
class ShotRecord:
    """One measured N-bit outcome; ``padding`` marks surplus PS shots."""

    bits: tuple[int, ...]
    shot_index: int = 0
    lane: int = 0
    padding: bool = False

    @classmethod
    def from_string(cls, s: str, shot_index: int = 0) -> "ShotRecord":
        return cls(tuple(int(c) for c in s), shot_index)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class PauliGroup:
    members: list[PauliString]
    inclusive: PauliString
    weights: list[float]

    def __post_init__(self):
        if len(self.weights) != len(self.members):
            raise ValueError("one weight per member required")
        for m in self.members:
            if not m.covered_by(self.inclusive):
                raise IncompatibleGroup(f"{m} is not covered by {self.inclusive}")

    @classmethod
    def from_members(cls, members: Sequence[PauliString], weights: Sequence[float]) -> "PauliGroup":
        return cls(list(members), inclusive_pauli(members), list(weights))

    @property
    def masks(self) -> list[Paulimask]:
        return [paulimask_of(m) for m in self.members]

    def __len__(self) -> int:
        return len(self.members)


def hea_parameter_count(N: int, D: int = 1) -> int:
    """Rotation-angle count of a hardware-efficient ansatz (two per qubit per layer)."""
    return 2 * N * (D + 1)


def default_b_theta(N: int, D: int = 1) -> int:
    return 32 * hea_parameter_count(N, D)


def default_b_x(N: int) -> int:
    return 32 * N


@dataclass
class VqeProblem:
    N: int
    groups: list[PauliGroup]
    T: int = 10**6
    D: int = 1
    b_theta: int | None = None

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.b_theta is None:
            self.b_theta = default_b_theta(self.N, self.D)
        if self.b_theta <= 0:
            raise ValueError("b_theta must be positive")
        for g in self.groups:
            if len(g.inclusive) != self.N:
                raise ValueError("group width does not match N")

    @property
    def K(self) -> int:
        return max((len(g) for g in self.groups), default=0)

    @property
    def N_G(self) -> int:
        return len(self.groups)


@dataclass
class IsingProblem:
    """QAOA cost ``sum s_i z_i + sum_{i<j} c_ij (z_i xor z_j)``.

    ``c`` is an N x N symmetric array; only the strict upper triangle is read.
    """

    N: int
    s: np.ndarray
    c: np.ndarray
    T: int = 10**6
    p: int = 1
    b_theta: int | None = None

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if self.s.shape != (self.N,) or self.c.shape != (self.N, self.N):
            raise ValueError("s must have shape (N,) and c shape (N, N)")
        if not np.all(np.isfinite(self.s)) or not np.all(np.isfinite(self.c)):
            raise ValueError("coefficients must be finite")
        if np.any(np.diag(self.c) != 0):
            raise ValueError("c must have an empty diagonal")
        if not np.array_equal(self.c, self.c.T):
            raise ValueError("c must be symmetric")
        if self.b_theta is None:
            self.b_theta = default_b_theta(self.N)

    def pairs(self) -> list[tuple[int, int]]:
        return pair_index(self.N)

    @classmethod
    def random(cls, N: int, seed: int, T: int = 10**6) -> "IsingProblem":
        rng = np.random.default_rng(seed)
        s = rng.uniform(-1.0, 1.0, N)
        upper = np.triu(rng.uniform(-1.0, 1.0, (N, N)), 1)
        return cls(N, s, upper + upper.T, T=T)


@dataclass
class QmlProblem:
    N: int
    labels: list[int]
    T: int = 10**6
    b_x: int | None = None
    b_theta: int | None = None

    def __post_init__(self):
        if len(self.labels) < 1:
            raise ValueError("dataset must hold at least one datum")
        if self.b_x is None:
            self.b_x = default_b_x(self.N)
        if self.b_theta is None:
            self.b_theta = default_b_theta(self.N)
        if self.b_x <= 0:
            raise ValueError("b_x must be positive")
        if any(not 0 <= y < self.N for y in self.labels):
            raise ValueError("labels must index one of the N classes")

    @property
    def N_d(self) -> int:
        return len(self.labels)


def pair_index(N: int) -> list[tuple[int, int]]:
    """Qubit pairs (i, j), i < j, in the counter order used by the QAOA datapath."""
    return list(combinations(range(N), 2))


def paulimask_of(p: PauliString) -> Paulimask:
    return Paulimask(tuple(int(op != "I") for op in p.ops))


def inclusive_pauli(members: Sequence[PauliString]) -> PauliString:
    if not members:
        raise ValueError("empty group")
    n = len(members[0])
    if any(len(m) != n for m in members):
        raise ValueError("members differ in length")
    out = []
    for q in range(n):
        ops = {m.ops[q] for m in members} - {"I"}
        if len(ops) > 1:
            raise IncompatibleGroup(f"qubit {q} carries {sorted(ops)}")
        out.append(ops.pop() if ops else "I")
    return PauliString("".join(out))


def parity(mask: Paulimask | Sequence[int], z: ShotRecord | Sequence[int]) -> int:
    m = mask.bits if isinstance(mask, Paulimask) else tuple(mask)
    bits = z.bits if isinstance(z, ShotRecord) else tuple(z)
    if len(m) != len(bits):
        raise ValueError(f"length mismatch: mask {len(m)} vs shot {len(bits)}")
    return sum(a & b for a, b in zip(m, bits)) & 1


def pauli_expectation(C_odd: int, T: int) -> Fraction:
    if T <= 0:
        raise ValueError("T must be >= 1")
    if not 0 <= C_odd <= T:
        raise ValueError("C_odd must lie in [0, T]")
    return Fraction(T - 2 * C_odd, T)


def hamiltonian_expectation(weights: Sequence[float], pauli_expectations: Sequence[Fraction]) -> Fraction:
    if len(weights) != len(pauli_expectations):
        raise ValueError("weights and expectations differ in length")
    return sum((Fraction(w) * Fraction(e) for w, e in zip(weights, pauli_expectations)), Fraction(0))


def qaoa_cost(z: ShotRecord | Sequence[int], prob: IsingProblem) -> Fraction:
    bits = z.bits if isinstance(z, ShotRecord) else tuple(z)
    if len(bits) != prob.N:
        raise ValueError("shot length does not match problem size")
    total = sum((Fraction(prob.s[i]) for i in range(prob.N) if bits[i]), Fraction(0))
    for i, j in prob.pairs():
        if bits[i] ^ bits[j]:
            total += Fraction(prob.c[i, j])
    return total


def qaoa_expectation_from_counters(
    C_i: Sequence[int], C_ij: Sequence[int], prob: IsingProblem, T: int
) -> Fraction:
    """Sampled QAOA cost from per-qubit counts and per-pair XOR counts.

    ``C_ij`` follows :func:`pair_index` ordering.
    """
    if T <= 0:
        raise ValueError("T must be >= 1")
    pairs = prob.pairs()
    if len(C_i) != prob.N or len(C_ij) != len(pairs):
        raise ValueError("counter vector sizes do not match the problem")
    if any(c > T for c in C_i) or any(c > T for c in C_ij):
        raise ValueError("counts cannot exceed T")
    acc = sum((Fraction(prob.s[i]) * int(C_i[i]) for i in range(prob.N)), Fraction(0))
    acc += sum((Fraction(prob.c[i, j]) * int(C_ij[k]) for k, (i, j) in enumerate(pairs)), Fraction(0))
    return acc / T


def qml_class_probs(counts: Sequence[int], T: int) -> np.ndarray:
    """Softmax over the per-qubit ones-fraction ``counts / T``."""
    if T <= 0:
        raise ValueError("T must be >= 1")
    x = np.asarray(counts, dtype=float) / T
    if np.any(x > 1):
        raise ValueError("counts cannot exceed T")
    e = np.exp(x - x.max())
    return e / e.sum()


def qml_loss(probs: Sequence[Sequence[float]], labels: Sequence[int]) -> float:
    """Mean cross-entropy of the true-label probabilities."""
    if len(probs) != len(labels):
        raise ValueError("one label per probability vector required")
    total = 0.0
    for row, y in zip(probs, labels):
        if not 0 <= y < len(row):
            raise ValueError(f"label {y} out of range")
        p = float(row[y])
        if p <= 0.0:
            raise ValueError("zero probability at a true label")
        total -= np.log(p)
    return total / len(labels)


def synthetic_grouping(N: int, seed: int, T: int = 10**6, D: int = 1) -> VqeProblem:
    """Random grouped Hamiltonian with K = N_G = N**2 and unit-magnitude weights.

    Every group draws a fully non-identity inclusive string; each member keeps
    the inclusive operator on a uniformly drawn non-empty subset of qubits.
    Members may repeat when N is small. Meant for desk-scale N only: the
    problem holds N**4 strings.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    size = N * N
    groups = []
    for _ in range(size):
        gp = rng.integers(1, 4, N)
        inclusive = PauliString("".join(PAULI_OPS[k] for k in gp))
        members = []
        for _ in range(size):
            support = rng.integers(0, 2, N).astype(bool)
            if not support.any():
                support[rng.integers(N)] = True
            members.append(PauliString("".join(PAULI_OPS[k] if s else "I" for k, s in zip(gp, support))))
        weights = rng.choice([-1.0, 1.0], size).tolist()
        groups.append(PauliGroup(members, inclusive, weights))
    return VqeProblem(N, groups, T=T, D=D)


def as_bit_array(shots: Iterable[ShotRecord] | np.ndarray) -> np.ndarray:
    """Stack shot records (or pass through an array) as a (T, N) uint8 array."""
    if isinstance(shots, np.ndarray):
        return shots.astype(np.uint8, copy=False)
    return np.array([s.bits for s in shots], dtype=np.uint8)
