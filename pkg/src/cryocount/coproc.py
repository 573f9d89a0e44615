"""Bit-exact functional model of the counter-based co-processor datapath.

The model advances in shot steps. In SS mode one shot arrives per step; in PS
mode ``L`` lanes deliver one shot each, and every lane owns its own counter
bank, so counter ``lane * per_lane + k`` is local counter ``k`` of ``lane``.
QAOA local counters are the N per-qubit counters followed by the pair
counters in :func:`cryocount.core.pair_index` order.

Every inter-temperature transfer lands in an :class:`EventLog`. Transfers
that are spread over a future window (Paulimask staging, overlapped residue
readout) are held back and appended once the clock reaches their step, which
keeps the log append-only and time-ordered.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field
from math import ceil
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import Paulimask, PauliString, ShotRecord, pair_index

TASKS = ("VQE", "QAOA", "QML")
OVERLAPPED = "overlapped"
POST_LOOP = "post-loop"

UPLINK = "uplink"
DOWNLINK = "downlink"


class ConfigError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


class ResidueNotCollected(SimulationError):
    pass


def counters_per_lane(task: str, N: int, K: int = 0) -> int:
    if task == "VQE":
        return K
    if task == "QAOA":
        return N * (N + 1) // 2
    if task == "QML":
        return N
    raise ConfigError(f"unknown task {task!r}")


@dataclass
class CoprocConfig:
    task: str
    N: int
    b: int
    T: int
    K: int = 0
    mode: str = "SS"
    L: int = 1
    collection: str | None = None
    r: float | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.N < 1 or self.b < 1 or self.T < 1:
            raise ConfigError("N, b and T must be >= 1")
        if self.mode not in ("SS", "PS"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "SS" and self.L != 1:
            raise ConfigError("SS mode runs a single lane")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.task == "VQE" and self.K < 1:
            raise ConfigError("VQE needs a group size K >= 1")
        if self.collection is None:
            self.collection = POST_LOOP if self.task == "QAOA" else OVERLAPPED
        if self.collection not in (OVERLAPPED, POST_LOOP):
            raise ConfigError(f"unknown collection policy {self.collection!r}")
        if self.task == "QAOA" and self.collection == OVERLAPPED:
            raise ConfigError("QAOA updates parameters every loop; overlapped collection does not apply")
        if self.r is not None and self.r <= 0:
            raise ConfigError("overhead fraction r must be positive")

    @property
    def per_lane(self) -> int:
        return counters_per_lane(self.task, self.N, self.K)

    @property
    def N_C(self) -> int:
        return self.L * self.per_lane

    @property
    def T_loop(self) -> int:
        """Shot steps per sampling loop (T in SS, ceil(T/L) in PS)."""
        return ceil(self.T / self.L)


class TffCounter:
    """A ``b``-stage toggle flip-flop ripple counter with overflow output."""

    def __init__(self, b: int):
        if b < 1:
            raise ValueError("b must be >= 1")
        self.b = b
        self.value = 0

    def pulse(self) -> bool:
        """Count one pulse; True when the counter wraps and emits its MSB pulse."""
        self.value = (self.value + 1) & ((1 << self.b) - 1)
        return self.value == 0

    def reset(self) -> None:
        self.value = 0


class CounterBank:
    """Vectorised set of counters, optionally double-buffered.

    Only the active bank receives pulses. :meth:`toggle` swaps banks (when
    double-buffered), reads the residue of the bank that just went inactive
    and clears it; the readout finishes before that bank becomes active again.
    """

    def __init__(self, n: int, b: int, double: bool = True):
        self.n = n
        self.b = b
        self.modulus = 1 << b
        self.double = double
        self.values = np.zeros((2 if double else 1, n), dtype=np.int64)
        self.active = 0
        self.msb_events = np.zeros(n, dtype=np.int64)

    def pulse(self, pulses: np.ndarray) -> np.ndarray:
        v = self.values[self.active]
        v += pulses
        wrapped = v >= self.modulus
        if wrapped.any():
            v[wrapped] -= self.modulus
            self.msb_events += wrapped
            return np.flatnonzero(wrapped)
        return np.empty(0, dtype=np.intp)

    def toggle(self) -> tuple[np.ndarray, np.ndarray]:
        done = self.active
        if self.double:
            self.active ^= 1
        residues = self.values[done].copy()
        self.values[done] = 0
        msb = self.msb_events
        self.msb_events = np.zeros(self.n, dtype=np.int64)
        return residues, msb


class DpModArray:
    """K dot-product/mod-2 units with a staging register for the next masks."""

    def __init__(self, K: int, N: int):
        self.K = K
        self.N = N
        self.mask_current: np.ndarray | None = None
        self.mask_next: np.ndarray | None = None

    def stage(self, masks: np.ndarray) -> None:
        self.mask_next = masks

    def commit(self) -> None:
        if self.mask_next is not None:
            self.mask_current = self.mask_next
            self.mask_next = None

    def parities(self, z: np.ndarray) -> np.ndarray:
        if self.mask_current is None:
            raise SimulationError("no Paulimasks committed")
        return (z.astype(np.int64) @ self.mask_current.T.astype(np.int64)) & 1


class XorNetwork:
    """Pairwise XOR gates whose result is read out by the next shot trigger."""

    def __init__(self, N: int, L: int):
        pairs = pair_index(N)
        self.i = np.array([p[0] for p in pairs], dtype=np.intp)
        self.j = np.array([p[1] for p in pairs], dtype=np.intp)
        self.latched = np.zeros((L, len(pairs)), dtype=np.int64)
        self.valid = np.zeros(L, dtype=bool)

    def trigger(self, z: np.ndarray, real: np.ndarray) -> np.ndarray:
        out = self.latched * self.valid[:, None]
        self.latched = (z[:, self.i] ^ z[:, self.j]).astype(np.int64)
        self.valid = real.copy()
        return out

    def flush(self) -> np.ndarray:
        out = self.latched * self.valid[:, None]
        self.valid[:] = False
        return out


class Event(NamedTuple):
    step: int
    direction: str
    kind: str
    bits: int
    lane: int | None = None
    counter_id: int | None = None


CSV_COLUMNS = ("step", "direction", "kind", "bits", "lane", "counter_id")


class EventLog:
    def __init__(self):
        self.events: list[Event] = []

    def append(self, ev: Event) -> None:
        if self.events and ev.step < self.events[-1].step:
            raise SimulationError(f"event at step {ev.step} precedes step {self.events[-1].step}")
        self.events.append(ev)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def select(
        self,
        direction: str | None = None,
        kinds: Iterable[str] | None = None,
        window: tuple[int, int] | None = None,
    ) -> list[Event]:
        kinds = set(kinds) if kinds is not None else None
        out = []
        for ev in self.events:
            if direction is not None and ev.direction != direction:
                continue
            if kinds is not None and ev.kind not in kinds:
                continue
            if window is not None and not window[0] <= ev.step < window[1]:
                continue
            out.append(ev)
        return out

    def total_bits(self, direction=None, kinds=None, window=None) -> int:
        return sum(ev.bits for ev in self.select(direction, kinds, window))

    def to_csv(self, fh=None) -> str | None:
        """Write the log as CSV to ``fh``; return the text when ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for ev in self.events:
            w.writerow(["" if x is None else x for x in ev])
        return buf.getvalue() if fh is None else None


def measured_bandwidth(
    log: EventLog,
    direction: str,
    window: tuple[int, int],
    t_qc: float,
    kinds: Iterable[str] | None = None,
) -> float:
    """Average bits per second carried in ``direction`` over the step window."""
    length = window[1] - window[0]
    if length <= 0:
        raise ValueError("window must be non-empty")
    return log.total_bits(direction, kinds, window) / (length * t_qc)


@dataclass
class LoopRecord:
    index: int
    start: int
    end: int
    msb: np.ndarray
    residues: np.ndarray
    overhead_steps: int = 0
    collected: np.ndarray = field(default=None, repr=False)

    @property
    def window(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def realized_overhead(self) -> float:
        return self.overhead_steps / (self.end - self.start)


class Coprocessor:
    """Shot-stepped simulation of one co-processor instance.

    Typical VQE driving sequence per group::

        cp.begin_loop()
        cp.load_paulimasks(next_group_masks, next_inclusive)   # overlaps this loop
        for z in shots: cp.step_shot(z)
        cp.end_sampling_loop()
    """

    def __init__(self, config: CoprocConfig):
        self.config = config
        c = config
        self.log = EventLog()
        self.bank = CounterBank(c.N_C, c.b, double=c.collection == OVERLAPPED)
        self.dpmod = DpModArray(c.K, c.N) if c.task == "VQE" else None
        self.xor = XorNetwork(c.N, c.L) if c.task == "QAOA" else None
        self.clock = 0
        self.loops: list[LoopRecord] = []
        self._pending: list[tuple[int, int, Event, int | None]] = []
        self._seq = 0
        self._in_loop = False
        self._loop_start = 0
        self._real_shots = 0

    # -- scheduling -------------------------------------------------------

    def _schedule(self, ev: Event, loop_index: int | None = None) -> None:
        heapq.heappush(self._pending, (ev.step, self._seq, ev, loop_index))
        self._seq += 1

    def _deliver_until(self, step: int) -> None:
        """Append every held-back event scheduled strictly before ``step``."""
        while self._pending and self._pending[0][0] < step:
            _, _, ev, loop_index = heapq.heappop(self._pending)
            self.log.append(ev)
            if loop_index is not None:
                self.loops[loop_index].collected[ev.counter_id] = True

    def _spread(self, start: int, width: int, count: int) -> list[int]:
        width = max(width, 1)
        return [start + (k * width) // count for k in range(count)]

    # -- operations -------------------------------------------------------

    def begin_loop(self) -> None:
        if self._in_loop:
            return
        self._deliver_until(self.clock)
        if self.dpmod is not None:
            self.dpmod.commit()
            if self.dpmod.mask_current is None:
                raise SimulationError("VQE loop started before any Paulimasks were loaded")
        self._in_loop = True
        self._loop_start = self.clock
        self._real_shots = 0

    def load_paulimasks(
        self, masks: Sequence[Paulimask] | np.ndarray, inclusive: PauliString | None = None
    ) -> list[Event]:
        """Stage up to K masks for the next loop and schedule their downlink transfer.

        Unused DP/mod units receive an all-zero mask, so K*N mask bits always
        travel. During a running loop the transfer spreads over the rest of
        it. Outside a loop it is a prologue: it occupies one loop length and
        the clock moves past it, since the masks must arrive before use.
        """
        c = self.config
        if c.task != "VQE":
            raise ConfigError("Paulimasks only apply to VQE")
        arr = np.array([m.bits if isinstance(m, Paulimask) else m for m in masks], dtype=np.uint8)
        arr = arr.reshape(-1, c.N) if arr.size else np.zeros((0, c.N), dtype=np.uint8)
        if len(arr) > c.K:
            raise ConfigError(f"{len(arr)} masks exceed the {c.K} DP/mod units")
        padded = np.zeros((c.K, c.N), dtype=np.uint8)
        padded[: len(arr)] = arr
        self.dpmod.stage(padded)

        if self._in_loop:
            start, width = self.clock, self._loop_start + c.T_loop - self.clock
        else:
            start, width = self.clock, c.T_loop
        # the basis string always travels with the masks, supplied or not
        if inclusive is not None and len(inclusive) != c.N:
            raise ConfigError("inclusive Pauli string width does not match N")
        events = [Event(start, DOWNLINK, "pauli-string", 2 * c.N)]
        for k, step in enumerate(self._spread(start, width, c.K)):
            events.append(Event(step, DOWNLINK, "paulimask", c.N, None, k))
        for ev in events:
            self._schedule(ev)
        if not self._in_loop:
            self.clock = start + width
            self._deliver_until(self.clock)
        return events

    def step_shot(
        self,
        z: ShotRecord | Sequence[ShotRecord] | np.ndarray,
        padding: np.ndarray | Sequence[bool] | None = None,
    ) -> list[Event]:
        """Advance one shot step and return the MSB events it produced.

        ``z`` is one shot record, a list of L records, an (N,) array or an
        (L, N) array. Padding shots are ignored by the counters.
        """
        c = self.config
        bits, real = self._coerce(z, padding)
        if not self._in_loop:
            self.begin_loop()
        n_real = int(real.sum())
        if self._real_shots + n_real > c.T:
            raise SimulationError("sampling loop already complete; call end_sampling_loop first")
        if self.clock - self._loop_start >= c.T_loop:
            raise SimulationError("step past the end of the sampling loop")
        self._deliver_until(self.clock + 1)

        if c.task == "VQE":
            pulses = self.dpmod.parities(bits) * real[:, None]
        elif c.task == "QML":
            pulses = bits.astype(np.int64) * real[:, None]
        else:
            direct = bits.astype(np.int64) * real[:, None]
            pulses = np.concatenate([direct, self.xor.trigger(bits, real)], axis=1)
        events = self._pulse(pulses.reshape(-1), self.clock)
        self._real_shots += n_real
        self.clock += 1
        return events

    def _coerce(self, z, padding) -> tuple[np.ndarray, np.ndarray]:
        c = self.config
        if isinstance(z, ShotRecord):
            z = [z]
        if isinstance(z, (list, tuple)) and z and isinstance(z[0], ShotRecord):
            bits = np.array([s.bits for s in z], dtype=np.uint8)
            pad = np.array([s.padding for s in z], dtype=bool)
        else:
            bits = np.asarray(z, dtype=np.uint8).reshape(-1, c.N)
            pad = np.zeros(len(bits), dtype=bool)
        if padding is not None:
            pad = np.asarray(padding, dtype=bool).reshape(-1)
        if bits.shape != (c.L, c.N):
            raise SimulationError(f"expected {c.L} shot(s) of {c.N} bits, got shape {bits.shape}")
        return bits, ~pad

    def _pulse(self, pulses: np.ndarray, step: int) -> list[Event]:
        wrapped = self.bank.pulse(pulses)
        per_lane = self.config.per_lane
        events = [Event(step, UPLINK, "MSB", 1, int(k) // per_lane, int(k)) for k in wrapped]
        for ev in events:
            self.log.append(ev)
        return events

    def end_sampling_loop(self) -> LoopRecord:
        c = self.config
        if not self._in_loop or self._real_shots != c.T:
            raise SimulationError(
                f"loop holds {self._real_shots} of {c.T} shots; cannot end it mid-loop"
            )
        last = self.clock - 1
        if self.xor is not None:
            flushed = self.xor.flush()
            direct = np.zeros((c.L, c.N), dtype=np.int64)
            self._pulse(np.concatenate([direct, flushed], axis=1).reshape(-1), last)
        residues, msb = self.bank.toggle()
        record = LoopRecord(
            len(self.loops), self._loop_start, self.clock, msb, residues,
            collected=np.zeros(c.N_C, dtype=bool),
        )
        self.loops.append(record)
        self._in_loop = False

        if c.collection == OVERLAPPED:
            steps = self._spread(self.clock, c.T_loop, c.N_C)
        else:
            width = self.overhead_steps()
            record.overhead_steps = width
            steps = self._spread(self.clock, width, c.N_C)
        for k, step in enumerate(steps):
            self._schedule(Event(step, UPLINK, "non-MSB", c.b, k // c.per_lane, k), record.index)
        if c.collection == POST_LOOP:
            self.clock += record.overhead_steps
            self._deliver_until(self.clock)
        return record

    def overhead_steps(self) -> int:
        """Steps appended after a post-loop sampling loop for residue readout.

        With no explicit ``r`` the residues drain at the MSB-channel rate of
        N_C / 2**b bits per step, i.e. b * 2**b steps.
        """
        c = self.config
        if c.r is None:
            return c.b * (1 << c.b)
        return max(1, ceil(c.r * c.T_loop))

    def finalize(self) -> None:
        """Deliver every held-back transfer (end of the run)."""
        if self._pending:
            last = max(p[0] for p in self._pending)
            self._deliver_until(last + 1)
            self.clock = max(self.clock, last + 1)

    # -- host-side reconstruction ----------------------------------------

    def _loop(self, loop: int | None) -> LoopRecord:
        if not self.loops:
            raise SimulationError("no completed sampling loop")
        return self.loops[-1 if loop is None else loop]

    def reconstruct_count(self, counter_id: int, loop: int | None = None) -> int:
        rec = self._loop(loop)
        if not rec.collected[counter_id]:
            raise ResidueNotCollected(f"residue of counter {counter_id} (loop {rec.index}) not yet read out")
        return int(rec.msb[counter_id]) * self.bank.modulus + int(rec.residues[counter_id])

    def counts(self, loop: int | None = None) -> np.ndarray:
        rec = self._loop(loop)
        if not rec.collected.all():
            missing = int(np.flatnonzero(~rec.collected)[0])
            raise ResidueNotCollected(f"residue of counter {missing} (loop {rec.index}) not yet read out")
        return rec.msb * self.bank.modulus + rec.residues

    def task_counts(self, loop: int | None = None) -> np.ndarray:
        """Per-task totals: lane banks summed counter by counter."""
        return self.counts(loop).reshape(self.config.L, self.config.per_lane).sum(axis=0)

    def run_loop(self, bits: np.ndarray, padding: np.ndarray | None = None) -> LoopRecord:
        """Step a whole loop of shots, (T, N) in SS or (T', L, N) in PS, then end it."""
        c = self.config
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1, c.L, c.N)
        if padding is None:
            padding = np.zeros(bits.shape[:2], dtype=bool)
        self.begin_loop()
        for step in range(bits.shape[0]):
            self.step_shot(bits[step], padding[step])
        return self.end_sampling_loop()
