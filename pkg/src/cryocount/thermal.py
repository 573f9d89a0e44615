"""SFQ bias-current aggregation, ERSFQ power and the 4 K heat budget.

Bias currents are in milliamperes, powers in watts and times in seconds
unless a name says otherwise (``*_ns``, ``*_mA``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path

from .coproc import ConfigError, counters_per_lane

PHI0 = 2.068e-15  # Wb

# AIST 10 kA/cm^2 ADP cell library: name -> (JJ count, bias current in mA)
DEFAULT_CELLS = {
    "Splitter": (3, 0.30),
    "Merger": (7, 0.88),
    "RTFF": (13, 0.808),
    "T1": (12, 0.74),
    "NDRO": (11, 1.112),
    "NDROC2": (33, 3.464),
    "D2FF": (12, 0.944),
    "XOR": (11, 1.068),
}

MODULE_KINDS = ("SP", "DM", "SB", "TC_pair", "XG", "other")


@dataclass(frozen=True)
class Cell:
    jj_count: int
    bias_mA: float


@dataclass
class CellLibrary:
    cells: dict[str, Cell] = field(
        default_factory=lambda: {k: Cell(*v) for k, v in DEFAULT_CELLS.items()}
    )

    def __getitem__(self, name: str) -> Cell:
        return self.cells[name]

    @classmethod
    def from_json(cls, path: str | Path) -> "CellLibrary":
        """Load overrides keyed by cell name: ``{"NDRO": {"jj_count": 11, "bias_mA": 1.1}}``.

        Cells missing from the file keep their default values.
        """
        raw = json.loads(Path(path).read_text())
        lib = cls()
        for name, spec in raw.items():
            lib.cells[name] = Cell(int(spec["jj_count"]), float(spec["bias_mA"]))
        return lib

    def bias(self, counts: dict[str, float]) -> float:
        return sum(self.cells[name].bias_mA * n for name, n in counts.items())

    def jjs(self, counts: dict[str, float]) -> float:
        return sum(self.cells[name].jj_count * n for name, n in counts.items())


def module_cells(kind: str, task: str | None = None, N: int = 1, b: int = 1, K: int = 1) -> dict[str, float]:
    """Cell inventory of one submodule instance, wiring cells excluded."""
    if kind == "SP":
        return {"Splitter": 2 * (N - 1), "D2FF": N}
    if kind == "DM":
        return {"Splitter": N - 1, "Merger": N - 1, "T1": 1, "NDRO": N}
    if kind == "SB":
        return {"Splitter": 4, "Merger": 2, "RTFF": 1, "NDROC2": 2}
    if kind == "TC_pair":
        return {"Splitter": 2 * (b - 1), "RTFF": 2 * b}
    if kind == "XG":
        return {"Splitter": 3 * N * (N - 1) / 2, "XOR": N * (N - 1) / 2}
    if kind == "other":
        if task == "VQE":
            return {"Splitter": K * (N + 3)}
        if task == "QAOA":
            return {"Splitter": N + 1, "Merger": N * (N + 1) / 2}
        if task == "QML":
            return {"Splitter": N, "Merger": N}
        raise ConfigError(f"unknown task {task!r}")
    raise ConfigError(f"unknown module kind {kind!r}")


def module_bias(
    kind: str, task: str | None = None, N: int = 1, b: int = 1, K: int = 1,
    library: CellLibrary | None = None,
) -> float:
    """Total bias current (mA) of a submodule.

    Without a ``library`` this is the tabulated closed form for the ADP
    process; with one, the cell inventory is summed against it.
    """
    if library is not None:
        return library.bias(module_cells(kind, task, N, b, K))
    if kind == "SP":
        return 1.5 * N - 0.6
    if kind == "DM":
        return 2.2 * N - 0.44
    if kind == "SB":
        return 10.7
    if kind == "TC_pair":
        return 2.2 * b - 0.6
    if kind == "XG":
        return 0.98 * N * (N - 1)
    if kind == "other":
        if task == "VQE":
            return 0.3 * K * (N + 3)
        if task == "QAOA":
            return (N + 1) * (0.44 * N + 0.3)
        if task == "QML":
            return 1.2 * N
        raise ConfigError(f"unknown task {task!r}")
    raise ConfigError(f"unknown module kind {kind!r}")


@dataclass(frozen=True)
class GateTimes:
    """Gate durations in ns.

    ``init`` (QAOA initial-state layer) and ``encode`` (QML data encoder)
    default to one single-qubit layer each.
    """

    reset: float = 100
    one_qubit: float = 10
    two_qubit: float = 60
    measure: float = 380
    init: float | None = None
    encode: float | None = None

    def __post_init__(self):
        if min(self.reset, self.one_qubit, self.two_qubit, self.measure) < 0:
            raise ValueError("gate times must be non-negative")


def t_qc_ns(task: str = "VQE", D: int = 1, p: int = 1, g: GateTimes = GateTimes(), common: bool = False) -> float:
    if common:
        task, D = "VQE", 1
    t1, t2 = g.one_qubit, g.two_qubit
    if task == "VQE":
        if D < 1:
            raise ValueError("D must be >= 1")
        return g.reset + (D + 1) * (t1 + t1) + 2 * t2 + g.measure
    if task == "QAOA":
        if p < 1:
            raise ValueError("p must be >= 1")
        init = t1 if g.init is None else g.init
        return g.reset + init + p * (t1 + 2 * (2 * t2 + t1) + t1) + g.measure
    if task == "QML":
        enc = t1 if g.encode is None else g.encode
        return g.reset + enc + t1 + 2 * t2 + t1 + g.measure
    raise ConfigError(f"unknown task {task!r}")


def t_qc(task: str = "VQE", D: int = 1, p: int = 1, g: GateTimes = GateTimes(), common: bool = False) -> float:
    """Duration of one shot in seconds."""
    return t_qc_ns(task, D, p, g, common) / 1e9


def ersfq_power(bias_mA: float, f: float) -> float:
    return 2 * PHI0 * (bias_mA * 1e-3) * f


def task_bias(task: str, N: int, N_C: int, b: int, library: CellLibrary | None = None) -> tuple[float, float]:
    """(bias at f, bias at f*N/T_loop) in mA for one co-processor configuration.

    PS configurations pass N_C = L * (per-lane counters); everything that is
    replicated per lane scales with L.
    """
    if N < 1 or b < 1:
        raise ConfigError("N and b must be >= 1")
    lib = library
    if task == "VQE":
        sp = N_C * module_bias("SP", N=N, library=lib)
        per_chain = (
            module_bias("DM", N=N, library=lib) + module_bias("SB", library=lib)
            + module_bias("TC_pair", b=b, library=lib) + module_bias("other", "VQE", N=N, K=1, library=lib)
        )
        return N_C * per_chain, sp
    per_lane = counters_per_lane(task, N)
    if N_C < per_lane or N_C % per_lane:
        raise ConfigError(f"{task} needs a multiple of {per_lane} counters, got {N_C}")
    lanes = N_C // per_lane
    counter = module_bias("SB", library=lib) + module_bias("TC_pair", b=b, library=lib)
    if task == "QML":
        return lanes * (N * counter + module_bias("other", "QML", N=N, library=lib)), 0.0
    bias = (
        per_lane * counter + module_bias("XG", N=N, library=lib)
        + module_bias("other", "QAOA", N=N, library=lib)
    )
    return lanes * bias, 0.0


def task_power(
    task: str, N: int, N_C: int, b: int, T_loop: int, t_qc_s: float,
    library: CellLibrary | None = None,
) -> float:
    """ERSFQ power (W) at f = 1/t_qc; the VQE serial-to-parallel stage runs at f*N/T_loop."""
    if T_loop < 1 or not t_qc_s > 0:
        raise ConfigError("T_loop and t_qc must be positive")
    f = 1.0 / t_qc_s
    main, sp = task_bias(task, N, N_C, b, library)
    return ersfq_power(main, f) + ersfq_power(sp, f * N / T_loop)


@dataclass(frozen=True)
class WireSpec:
    passive_inflow: float = 1.0e-3
    peripheral_power: float = 10.5e-3
    per_wire_bandwidth: float = 1e9

    def __post_init__(self):
        if min(self.passive_inflow, self.peripheral_power, self.per_wire_bandwidth) <= 0:
            raise ValueError("wire parameters must be positive")

    @property
    def heat_per_wire(self) -> float:
        return self.passive_inflow + self.peripheral_power


@dataclass(frozen=True)
class HeatBudget:
    wires: int
    wire_heat: float
    coproc_power: float

    @property
    def total(self) -> float:
        return self.wire_heat + self.coproc_power


def wires_for(bandwidth: float, w: WireSpec = WireSpec()) -> int:
    """Wires needed to carry ``bandwidth`` (bps); a control link always exists."""
    if bandwidth < 0:
        raise ValueError("bandwidth must be non-negative")
    return max(1, ceil(bandwidth / w.per_wire_bandwidth))


def heat_budget(bw, coproc_power: float = 0.0, w: WireSpec = WireSpec()) -> HeatBudget:
    """Heat at 4 K for a bandwidth breakdown (or a plain total in bps)."""
    total = float(bw.total if hasattr(bw, "total") else bw)
    n = wires_for(total, w)
    return HeatBudget(n, n * w.heat_per_wire, coproc_power)
