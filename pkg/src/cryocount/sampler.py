"""Seedable classical stand-ins for the QPU measurement stream.

Every lane owns an independent generator seeded from ``(seed, lane)``, so the
bits of lane ``l`` at shot ``t`` depend only on those three numbers and the
order of consumption within that lane. Qubit ``q`` of an explicit-distribution
outcome ``k`` is bit ``q`` of ``k`` (qubit 0 is the least significant bit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from pathlib import Path
from typing import Iterator

import numpy as np

from .core import ShotRecord

MAX_EXPLICIT_QUBITS = 20


@dataclass
class MeasurementSource:
    kind: str
    N: int
    params: np.ndarray
    seed: int = 0
    _streams: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if self.kind == "bernoulli":
            if self.params.shape != (self.N,):
                raise ValueError("bernoulli source needs one probability per qubit")
            if np.any((self.params < 0) | (self.params > 1)):
                raise ValueError("probabilities must lie in [0, 1]")
        elif self.kind == "explicit":
            if self.N > MAX_EXPLICIT_QUBITS:
                raise ValueError(f"explicit distributions are limited to {MAX_EXPLICIT_QUBITS} qubits")
            if self.params.shape != (2**self.N,):
                raise ValueError("explicit source needs 2**N outcome probabilities")
            if np.any(self.params < 0) or abs(self.params.sum() - 1.0) > 1e-12:
                raise ValueError("outcome probabilities must be non-negative and sum to 1")
        else:
            raise ValueError(f"unknown source kind {self.kind!r}")

    @classmethod
    def bernoulli(cls, p, seed: int = 0) -> "MeasurementSource":
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return cls("bernoulli", len(p), p, seed)

    @classmethod
    def explicit(cls, probs, seed: int = 0) -> "MeasurementSource":
        probs = np.asarray(probs, dtype=float)
        n = int(round(np.log2(len(probs))))
        return cls("explicit", n, probs, seed)

    def _stream(self, lane: int) -> "_LaneStream":
        if lane not in self._streams:
            self._streams[lane] = _LaneStream(self, lane)
        return self._streams[lane]

    def take(self, n: int, lane: int = 0) -> np.ndarray:
        """Next ``n`` shots of ``lane`` as a (n, N) uint8 array."""
        return self._stream(lane).take(n)

    def reset(self) -> None:
        self._streams.clear()


class _LaneStream:
    def __init__(self, src: MeasurementSource, lane: int):
        self.src = src
        self.rng = np.random.default_rng([src.seed & 0xFFFFFFFFFFFFFFFF, lane])
        self.position = 0
        if src.kind == "explicit":
            self.cdf = np.cumsum(src.params)
            self.cdf[-1] = 1.0
            self.bit_weights = 1 << np.arange(src.N)

    def take(self, n: int) -> np.ndarray:
        src = self.src
        if src.kind == "bernoulli":
            u = self.rng.random((n, src.N))
            out = (u < src.params).astype(np.uint8)
        else:
            u = self.rng.random(n)
            k = np.searchsorted(self.cdf, u, side="right")
            out = ((k[:, None] & self.bit_weights) != 0).astype(np.uint8)
        self.position += n
        return out


def next_shot(src: MeasurementSource, lane: int = 0) -> ShotRecord:
    stream = src._stream(lane)
    t = stream.position
    return ShotRecord(tuple(int(x) for x in stream.take(1)[0]), t, lane)


@dataclass(frozen=True)
class LaneLayout:
    M: int
    N: int
    T: int

    def __post_init__(self):
        if self.N < 1 or self.T < 1:
            raise ValueError("N and T must be >= 1")
        if self.M < self.N:
            raise ValueError(f"machine of {self.M} qubits cannot host an {self.N}-qubit task")

    @classmethod
    def single(cls, N: int, T: int) -> "LaneLayout":
        return cls(N, N, T)

    @property
    def L(self) -> int:
        return self.M // self.N

    @property
    def T_prime(self) -> int:
        return ceil(self.T / self.L)

    @property
    def padding(self) -> int:
        return self.L * self.T_prime - self.T


@dataclass
class LaneBlock:
    """Shots of a PS run: ``bits[step, lane]`` and the matching padding flags.

    Shot ``step * L + lane`` is padding when it is not below ``T``, so the
    surplus always sits at the tail of the final step.
    """

    bits: np.ndarray
    padding: np.ndarray

    @property
    def steps(self) -> int:
        return self.bits.shape[0]

    def real_shots(self) -> np.ndarray:
        """Non-padding shots flattened in step-major, lane-minor order."""
        return self.bits[~self.padding]


def padding_mask(layout: LaneLayout, start_step: int = 0, steps: int | None = None) -> np.ndarray:
    steps = layout.T_prime - start_step if steps is None else steps
    idx = (np.arange(start_step, start_step + steps)[:, None] * layout.L) + np.arange(layout.L)
    return idx >= layout.T


def lane_block(src: MeasurementSource, layout: LaneLayout) -> LaneBlock:
    """All T' steps of one sampling loop across the L lanes."""
    if src.N != layout.N:
        raise ValueError("source width does not match layout")
    bits = np.stack([src.take(layout.T_prime, lane) for lane in range(layout.L)], axis=1)
    return LaneBlock(bits, padding_mask(layout))


def lanes(src: MeasurementSource, layout: LaneLayout) -> Iterator[list[ShotRecord]]:
    """Yield one list of L shot records per step; surplus shots are flagged as padding."""
    block = lane_block(src, layout)
    for step in range(block.steps):
        yield [
            ShotRecord(
                tuple(int(x) for x in block.bits[step, lane]),
                step * layout.L + lane,
                lane,
                bool(block.padding[step, lane]),
            )
            for lane in range(layout.L)
        ]


def write_shot_file(path: str | Path, shots: np.ndarray) -> None:
    """Pack a (T, N) bit array row-major, little-endian within each byte."""
    shots = np.asarray(shots, dtype=np.uint8)
    Path(path).write_bytes(np.packbits(shots.reshape(-1), bitorder="little").tobytes())


def read_shot_file(path: str | Path, N: int, n_shots: int | None = None) -> np.ndarray:
    """Inverse of :func:`write_shot_file`.

    Without ``n_shots`` the count is inferred as ``floor(bits / N)``, which can
    over-count by one phantom all-zero shot when N < 8; pass it when known.
    """
    raw = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    flat = np.unpackbits(raw, bitorder="little")
    if n_shots is None:
        n_shots = flat.size // N
    if n_shots * N > flat.size:
        raise ValueError(f"file holds {flat.size} bits, fewer than {n_shots} x {N}")
    return flat[: n_shots * N].reshape(n_shots, N)
