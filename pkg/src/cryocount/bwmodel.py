"""Closed-form inter-temperature bandwidth models.

All rates are bits per second. The arithmetic is kept generic: pass ``int``
or :class:`fractions.Fraction` values (``t_qc`` in particular) and every
channel comes back as an exact rational; pass floats and you get floats.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import ceil

from .core import default_b_theta, default_b_x
from .coproc import OVERLAPPED, POST_LOOP, TASKS, ConfigError, counters_per_lane

CHANNELS = (
    "ansatz-gate-seq",
    "ansatz-params",
    "pauli-string",
    "training-data",
    "measurement",
    "msb",
    "non-msb",
    "paulimask",
)
UPLINK_CHANNELS = ("measurement", "msb", "non-msb")

T_QC_DEFAULT = 640e-9


@dataclass
class ScenarioParams:
    """One evaluation point. Unset sizes fall back to the evaluation defaults.

    ``N_C`` is the total counter count; left unset it is derived from the
    task (K, N(N+1)/2 or N per lane) times ``L``.
    """

    task: str
    N: int
    T: int = 10**6
    mode: str = "SS"
    M: int | None = None
    t_qc: float = T_QC_DEFAULT
    D: int = 1
    b_theta: int | None = None
    b_x: int | None = None
    N_d: int = 1
    N_G: int | None = None
    K: int | None = None
    b: int | None = None
    N_C: int | None = None
    r: float | None = None
    collection: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.mode not in ("SS", "PS"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if not self.t_qc > 0:
            raise ConfigError("t_qc must be positive")
        if self.M is None:
            self.M = self.N
        if self.mode == "PS" and self.M < self.N:
            raise ConfigError(f"M={self.M} cannot host an N={self.N} task")
        if self.b_theta is None:
            self.b_theta = default_b_theta(self.N, self.D)
        if self.b_x is None:
            self.b_x = default_b_x(self.N)
        if self.K is None:
            self.K = self.N * self.N
        if self.N_G is None:
            self.N_G = self.N * self.N
        if self.N_d < 1 or self.N_G < 1 or self.K < 1:
            raise ConfigError("N_d, N_G and K must be >= 1")
        if self.collection is None:
            self.collection = POST_LOOP if self.task == "QAOA" else OVERLAPPED
        if self.task == "QAOA" and self.collection == OVERLAPPED:
            raise ConfigError("overlapped collection is not applicable to QAOA")
        if self.N_C is None:
            self.N_C = self.L * self.N_C_lane
        if self.b is not None and self.b < 1:
            raise ConfigError("b must be >= 1")

    @property
    def L(self) -> int:
        return self.M // self.N if self.mode == "PS" else 1

    @property
    def T_prime(self) -> int:
        return ceil(self.T / self.L)

    @property
    def T_loop(self) -> int:
        return self.T_prime

    @property
    def N_C_lane(self) -> int:
        return counters_per_lane(self.task, self.N, self.K)

    def with_(self, **kw) -> "ScenarioParams":
        return replace(self, **kw)


@dataclass
class BandwidthBreakdown:
    components: dict = field(default_factory=dict)
    time_overhead: object = 0

    def __post_init__(self):
        for name in self.components:
            if name not in CHANNELS:
                raise ValueError(f"unknown channel {name!r}")
        for name in CHANNELS:
            self.components.setdefault(name, 0)
        if any(v < 0 for v in self.components.values()):
            raise ValueError("negative bandwidth component")

    def __getitem__(self, name: str):
        return self.components[name]

    @property
    def total(self):
        return sum(self.components[c] for c in CHANNELS)

    @property
    def uplink(self):
        return sum(self.components[c] for c in UPLINK_CHANNELS)

    @property
    def downlink(self):
        return self.total - self.uplink

    def to_csv(self, fh=None) -> str | None:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["channel", "bps"])
        for c in CHANNELS:
            w.writerow([c, float(self.components[c])])
        w.writerow(["total", float(self.total)])
        return buf.getvalue() if fh is None else None


def _instruction(p: ScenarioParams, T) -> dict:
    t = p.t_qc
    if p.task == "VQE":
        return {
            "ansatz-params": p.b_theta / (p.N_G * T * t),
            "pauli-string": 2 * p.N / (T * t),
        }
    if p.task == "QAOA":
        return {"ansatz-params": p.b_theta / (T * t)}
    return {
        "ansatz-params": p.b_theta / (p.N_d * T * t),
        "training-data": p.b_x / (T * t),
    }


def baseline_ss(p: ScenarioParams) -> BandwidthBreakdown:
    if p.mode != "SS":
        raise ConfigError("baseline_ss needs an SS scenario")
    comps = _instruction(p, p.T)
    comps["measurement"] = p.N / p.t_qc
    return BandwidthBreakdown(comps)


def baseline_ps(p: ScenarioParams) -> BandwidthBreakdown:
    if p.mode != "PS":
        raise ConfigError("baseline_ps needs a PS scenario")
    comps = _instruction(p, p.T_prime)
    comps["measurement"] = p.L * p.N / p.t_qc
    return BandwidthBreakdown(comps)


def baseline(p: ScenarioParams) -> BandwidthBreakdown:
    return baseline_ps(p) if p.mode == "PS" else baseline_ss(p)


def overhead_threshold(b: int, T: int) -> Fraction:
    """Smallest post-loop overhead fraction keeping residue traffic at the MSB rate."""
    return Fraction(b * 2**b, T)


def msb_rate(p: ScenarioParams):
    return p.N_C / (2**p.b * p.t_qc)


def post_loop_nonmsb_rate(p: ScenarioParams, r):
    """Residue readout rate when b * N_C bits drain within r * T_loop shot times."""
    return p.b * p.N_C / (r * p.T_loop * p.t_qc)


def _readout(p: ScenarioParams, lanes: int) -> tuple[dict, object]:
    if p.b is None:
        raise ConfigError("counter width b is unresolved; apply counter_width_policy first")
    msb = msb_rate(p)
    if p.collection == OVERLAPPED:
        non_msb = lanes * p.b * p.N_C / (p.T * p.t_qc)
        overhead = Fraction(1, p.N_d) if p.task == "QML" else Fraction(1, p.N_G)
    else:
        # post-loop residues move while the MSB channel idles; only the part
        # of their rate above the MSB rate needs extra wires
        r = overhead_threshold(p.b, p.T_loop) if p.r is None else p.r
        rate = post_loop_nonmsb_rate(p, r)
        non_msb = rate - msb if rate > msb else 0
        overhead = r
    return {"msb": msb, "non-msb": non_msb}, overhead


def _c3_instruction(p: ScenarioParams) -> dict:
    comps = _instruction(p, p.T)
    if p.task == "VQE":
        # the inclusive string travels with the masks on the same channel
        del comps["pauli-string"]
        comps["paulimask"] = p.N * (p.K + 2) / (p.T * p.t_qc)
    return comps


def c3_ss(p: ScenarioParams) -> BandwidthBreakdown:
    if p.mode != "SS":
        raise ConfigError("c3_ss needs an SS scenario")
    comps = _c3_instruction(p)
    readout, overhead = _readout(p, 1)
    comps.update(readout)
    return BandwidthBreakdown(comps, overhead)


def c3_ps(p: ScenarioParams) -> BandwidthBreakdown:
    if p.mode != "PS":
        raise ConfigError("c3_ps needs a PS scenario")
    if p.N_C % p.L:
        raise ConfigError("PS counter count must be a multiple of L")
    comps = _c3_instruction(p)
    readout, overhead = _readout(p, p.L)
    comps.update(readout)
    return BandwidthBreakdown(comps, overhead)


def c3(p: ScenarioParams) -> BandwidthBreakdown:
    return c3_ps(p) if p.mode == "PS" else c3_ss(p)


def bottleneck_ratio(p: ScenarioParams) -> dict[str, Fraction]:
    """Dominant instruction channel(s) over measurement readout for the baseline.

    Evaluated in exact rational arithmetic whatever the input types.
    """
    exact = p.with_(t_qc=Fraction(p.t_qc))
    bw = baseline(exact)
    meas = bw["measurement"]
    if p.task == "VQE":
        return {"pauli-string": bw["pauli-string"] / meas}
    if p.task == "QAOA":
        return {"ansatz-params": bw["ansatz-params"] / meas}
    return {
        "ansatz-params": bw["ansatz-params"] / meas,
        "training-data": bw["training-data"] / meas,
    }


def _exact(x) -> Fraction:
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def counter_width_policy(policy: str, p: ScenarioParams, value=None) -> int:
    """Resolve the counter width b.

    ``"explicit"`` returns ``value``; ``"log"`` returns ceil(log2 N_C);
    ``"overhead"`` returns the largest b with b * 2**b <= value * T_loop,
    ``value`` being the tolerated post-loop overhead fraction r.
    """
    if p.N_C < 1:
        raise ConfigError("N_C must be >= 1")
    if policy == "explicit":
        if value is None or int(value) < 1:
            raise ConfigError("explicit policy needs b >= 1")
        return int(value)
    if policy == "log":
        return max(1, (p.N_C - 1).bit_length())
    if policy == "overhead":
        if value is None or value <= 0:
            raise ConfigError("overhead policy needs r > 0")
        budget = _exact(value) * p.T_loop
        if budget < 2:
            raise ConfigError(f"overhead r={value} cannot fit even a 1-bit counter")
        b = 1
        while (b + 1) * 2 ** (b + 1) <= budget:
            b += 1
        return b
    raise ConfigError(f"unknown counter width policy {policy!r}")


def realized_overhead(b: int, T: int) -> float:
    return b * 2**b / T
