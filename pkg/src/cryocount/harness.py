"""Sweeps, functional validation and the case-study driver.

Sweep configs are JSON with explicit units in key names::

    {"task": "QML", "scenario": "SS", "axis": "N", "values": [100, 1000, 10000],
     "fixed": {"T": 1000000, "t_qc_ns": 640},
     "b_policy": "log", "b_value": null,
     "wire": {"passive_inflow_mw": 1.0, "peripheral_power_mw": 10.5, "bw_gbps": 1.0}}
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bwmodel, thermal
from .bwmodel import ScenarioParams, counter_width_policy
from .coproc import (
    DOWNLINK,
    OVERLAPPED,
    UPLINK,
    ConfigError,
    CoprocConfig,
    Coprocessor,
    measured_bandwidth,
)
from .core import (
    PAULI_OPS,
    IsingProblem,
    PauliString,
    hamiltonian_expectation,
    pair_index,
    pauli_expectation,
    paulimask_of,
    qaoa_cost,
    qaoa_expectation_from_counters,
    qml_class_probs,
)
from .sampler import LaneLayout, MeasurementSource, lane_block

log = logging.getLogger(__name__)

CSV_SCHEMA = "# cryocount-results v1"
AXES = ("N", "M", "b", "T")
DESK_LIMITS = {"N": 8, "T": 4096, "L": 8}

# config keys carrying units -> (ScenarioParams field, scale to SI)
_UNIT_KEYS = {"t_qc_ns": ("t_qc", 1e-9), "t_qc_s": ("t_qc", 1.0)}


@dataclass
class ResultRow:
    task: str
    mode: str
    N: int
    M: int
    L: int
    T: int
    T_prime: int
    t_qc_ns: float
    K: int | None
    N_G: int | None
    N_C: int
    b: int
    baseline_bw: float
    baseline_wires: int
    baseline_heat: float
    c3_bw: float
    c3_msb: float
    c3_non_msb: float
    c3_paulimask: float
    c3_instruction: float
    c3_power: float
    c3_wires: int
    c3_heat: float
    bw_reduction: float
    heat_reduction: float
    time_overhead: float
    normalized_exec_time: float
    simulated_uplink: float | None = None
    error: str | None = None

    @classmethod
    def failed(cls, index: int, message: str, task: str = "", mode: str = "") -> "ResultRow":
        blank = {}
        for f in fields(cls):
            blank[f.name] = None if f.type in ("int | None", "float | None", "str | None") else (
                0 if f.type == "int" else float("nan"))
        blank.update(task=task, mode=mode, error=f"point {index}: {message}")
        return cls(**blank)


ROW_FIELDS = [f.name for f in fields(ResultRow)]


def evaluate(
    p: ScenarioParams,
    b_policy: str = "log",
    b_value=None,
    wire: thermal.WireSpec = thermal.WireSpec(),
    library: thermal.CellLibrary | None = None,
) -> ResultRow:
    """Baseline vs co-processor bandwidth, power and heat for one point."""
    if p.b is None:
        p = p.with_(b=counter_width_policy(b_policy, p, b_value))
    base = bwmodel.baseline(p)
    ours = bwmodel.c3(p)
    power = thermal.task_power(p.task, p.N, p.N_C, p.b, p.T_loop, p.t_qc, library)
    hb = thermal.heat_budget(base, 0.0, wire)
    hc = thermal.heat_budget(ours, power, wire)
    instruction = sum(
        float(ours[c]) for c in ("ansatz-gate-seq", "ansatz-params", "pauli-string", "training-data")
    )
    overhead = float(ours.time_overhead)
    return ResultRow(
        task=p.task, mode=p.mode, N=p.N, M=p.M, L=p.L, T=p.T, T_prime=p.T_prime,
        t_qc_ns=float(p.t_qc) * 1e9,
        K=p.K if p.task == "VQE" else None,
        N_G=p.N_G if p.task == "VQE" else None,
        N_C=p.N_C, b=p.b,
        baseline_bw=float(base.total), baseline_wires=hb.wires, baseline_heat=hb.total,
        c3_bw=float(ours.total), c3_msb=float(ours["msb"]), c3_non_msb=float(ours["non-msb"]),
        c3_paulimask=float(ours["paulimask"]), c3_instruction=instruction,
        c3_power=power, c3_wires=hc.wires, c3_heat=hc.total,
        bw_reduction=1 - float(ours.total) / float(base.total),
        heat_reduction=1 - hc.total / hb.total,
        time_overhead=overhead, normalized_exec_time=1 + overhead,
    )


@dataclass
class SweepSpec:
    task: str
    scenario: str
    axis: str
    values: list
    fixed: dict = field(default_factory=dict)
    b_policy: str = "log"
    b_value: float | None = None
    collection: str | None = None
    seed: int = 0
    wire: thermal.WireSpec = field(default_factory=thermal.WireSpec)
    cell_library: str | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"sweep axis must be one of {AXES}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
        if "wire" in d:
            w = d["wire"]
            d["wire"] = thermal.WireSpec(
                w.get("passive_inflow_mw", 1.0) * 1e-3,
                w.get("peripheral_power_mw", 10.5) * 1e-3,
                w.get("bw_gbps", 1.0) * 1e9,
            )
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot read sweep config {path}: {exc}") from exc

    def point(self, value) -> ScenarioParams:
        kw = params_from_dict(self.fixed)
        kw.update(task=self.task, mode=self.scenario, collection=self.collection)
        if self.axis == "b":
            kw["b"] = int(value)
        else:
            kw[self.axis] = int(value)
        return ScenarioParams(**kw)


def params_from_dict(d: dict) -> dict:
    """Map config keys (unit-suffixed where dimensional) onto ScenarioParams fields."""
    names = {f.name for f in fields(ScenarioParams)}
    out = {}
    for key, value in d.items():
        if key in _UNIT_KEYS:
            name, scale = _UNIT_KEYS[key]
            out[name] = value * scale
        elif key == "t_qc":
            raise ConfigError("give the shot duration as t_qc_ns or t_qc_s")
        elif key in names:
            out[key] = value
        else:
            raise ConfigError(f"unknown scenario key {key!r}")
    return out


def run_model_sweep(spec: SweepSpec, workers: int = 1) -> list[ResultRow]:
    """Evaluate every sweep point; bad points become error rows, in input order."""
    library = thermal.CellLibrary.from_json(spec.cell_library) if spec.cell_library else None

    def one(item):
        i, value = item
        try:
            p = spec.point(value)
            return evaluate(p, spec.b_policy, spec.b_value, spec.wire, library)
        except (ConfigError, ValueError, ZeroDivisionError) as exc:
            log.warning("sweep point %d (%s=%s) invalid: %s", i, spec.axis, value, exc)
            return ResultRow.failed(i, str(exc), spec.task, spec.scenario)

    items = list(enumerate(spec.values))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: list[ResultRow], fh) -> None:
    fh.write(CSV_SCHEMA + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for row in rows:
        w.writerow([_fmt(getattr(row, name)) for name in ROW_FIELDS])


def figure_series(rows: list[ResultRow], axis: str = "N") -> dict:
    """Plot-ready series: bandwidth, heat and normalised execution time against ``axis``."""
    good = [r for r in rows if r.error is None]
    x = [getattr(r, axis) for r in good]
    return {
        "x_axis": axis,
        "x": x,
        "bandwidth_bps": {"baseline": [r.baseline_bw for r in good], "c3": [r.c3_bw for r in good]},
        "heat_w": {"baseline": [r.baseline_heat for r in good], "c3": [r.c3_heat for r in good]},
        "normalized_exec_time": {"baseline": [1.0] * len(good), "c3": [r.normalized_exec_time for r in good]},
    }


def run_case_study(
    N: int | None, K: int | None, N_G: int | None, M: int, T: int = 10**6,
    t_qc: float = bwmodel.T_QC_DEFAULT, b_policy: str = "log", b_value=None,
) -> ResultRow:
    """PS evaluation of an externally characterised VQE problem (N, K, N_G)."""
    missing = [n for n, v in (("N", N), ("K", K), ("N_G", N_G)) if v is None]
    if missing:
        raise ConfigError(f"case study needs externally supplied {', '.join(missing)}")
    p = ScenarioParams("VQE", N, T=T, mode="PS", M=M, K=K, N_G=N_G, t_qc=t_qc)
    return evaluate(p, b_policy, b_value)


# -- functional validation -------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    params: ScenarioParams
    seed: int
    checks: list[Check] = field(default_factory=list)
    coproc: Coprocessor | None = field(default=None, repr=False)
    simulated_uplink: float | None = None

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
                for c in self.checks]

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def host_counts(task: str, shots: np.ndarray, masks: np.ndarray | None = None) -> np.ndarray:
    """Counts computed directly from raw (T, N) shots, as the room-temperature host would."""
    shots = shots.astype(np.int64)
    if task == "VQE":
        return ((shots @ masks.T.astype(np.int64)) & 1).sum(axis=0)
    if task == "QML":
        return shots.sum(axis=0)
    n = shots.shape[1]
    pairs = [(shots[:, i] ^ shots[:, j]).sum() for i, j in pair_index(n)]
    return np.concatenate([shots.sum(axis=0), np.array(pairs, dtype=np.int64)])


def _random_group(rng, N: int, K: int, saturate: bool):
    gp = rng.integers(1, 4, N)
    inclusive = PauliString("".join(PAULI_OPS[k] for k in gp))
    members = []
    for _ in range(K):
        while True:
            support = rng.integers(0, 2, N).astype(bool)
            if support.any() and (not saturate or support.sum() % 2 == 1):
                break
        members.append(PauliString("".join(PAULI_OPS[k] if s else "I" for k, s in zip(gp, support))))
    weights = rng.normal(size=K).tolist()
    return members, inclusive, weights


def check_desk_scale(p: ScenarioParams) -> None:
    if p.N > DESK_LIMITS["N"] or p.T > DESK_LIMITS["T"] or p.L > DESK_LIMITS["L"]:
        raise ConfigError(f"functional validation is limited to N<={DESK_LIMITS['N']}, "
                          f"T<={DESK_LIMITS['T']}, L<={DESK_LIMITS['L']}")
    if p.task == "VQE" and p.K > 16:
        raise ConfigError("functional validation is limited to K<=16")


def run_functional_validation(
    p: ScenarioParams, seed: int = 0, loops: int | None = None, saturate: bool = False,
) -> ValidationReport:
    """Drive sampler -> co-processor and check it against host-side computation.

    ``saturate`` feeds all-ones shots (and odd-weight Paulimasks for VQE) so
    every QML/VQE counter pulses every shot; the uplink rate is then compared
    two-sided against the analytic model. Otherwise the model is a worst-case
    bound and only ``measured <= model + one wrap`` is required.
    """
    check_desk_scale(p)
    if p.b is None:
        p = p.with_(b=counter_width_policy("log", p))
    rng = np.random.default_rng(seed)
    layout = LaneLayout(p.M if p.mode == "PS" else p.N, p.N, p.T)
    probs = np.ones(p.N) if saturate else rng.uniform(0, 1, p.N)
    src = MeasurementSource.bernoulli(probs, seed=int(rng.integers(2**63)))
    cfg = CoprocConfig(p.task, p.N, p.b, p.T, K=p.K if p.task == "VQE" else 0, mode=p.mode,
                       L=layout.L, collection=p.collection, r=p.r)
    cp = Coprocessor(cfg)
    report = ValidationReport(p, seed, coproc=cp)

    if loops is None:
        # at least two loops so overlapped readout reaches a steady state
        loops = {"VQE": min(max(p.N_G, 2), 3), "QML": min(max(p.N_d, 2), 3), "QAOA": 2}[p.task]
    groups = [_random_group(rng, p.N, p.K, saturate) for _ in range(loops)] if p.task == "VQE" else None
    ising = IsingProblem.random(p.N, int(rng.integers(2**31)), T=p.T) if p.task == "QAOA" else None

    if groups:
        members, inclusive, _ = groups[0]
        cp.load_paulimasks([paulimask_of(m) for m in members], inclusive)
    blocks = []
    for g in range(loops):
        block = lane_block(src, layout)
        blocks.append(block)
        cp.begin_loop()
        if groups and g + 1 < loops:
            members, inclusive, _ = groups[g + 1]
            cp.load_paulimasks([paulimask_of(m) for m in members], inclusive)
        for step in range(block.steps):
            cp.step_shot(block.bits[step], block.padding[step])
        cp.end_sampling_loop()
    cp.finalize()

    for g, (rec, block) in enumerate(zip(cp.loops, blocks)):
        masks = None
        if groups:
            masks = np.zeros((p.K, p.N), dtype=np.uint8)
            masks[: len(groups[g][0])] = [paulimask_of(m).bits for m in groups[g][0]]
        _check_loop(report, cp, g, rec, block, masks, groups, ising)

    _check_rates(report, cp, p, saturate)
    return report


def _check_loop(report, cp, g, rec, block, masks, groups, ising) -> None:
    c = cp.config
    counts = cp.counts(g)
    expected = np.concatenate([
        host_counts(c.task, block.bits[:, lane][~block.padding[:, lane]], masks) for lane in range(c.L)
    ])
    bad = np.flatnonzero(counts != expected)
    detail = ""
    if bad.size:
        k = int(bad[0])
        detail = (f"loop {g} counter {k}: reconstructed {int(counts[k])} != host {int(expected[k])}; "
                  f"shots {rec.start}..{rec.end - 1}")
    report.add(f"loop{g}/count-exactness", bad.size == 0, detail)

    bound = c.T_loop // (1 << c.b)
    worst = int(rec.msb.max()) if rec.msb.size else 0
    report.add(f"loop{g}/msb-bound", worst <= bound, f"max {worst} <= {bound}")

    real = block.real_shots()
    totals = cp.task_counts(g)
    if c.task == "VQE":
        members, _, weights = groups[g]
        ours = hamiltonian_expectation(weights, [pauli_expectation(int(totals[k]), c.T) for k in range(len(members))])
        host_c = host_counts("VQE", real, masks)
        host = hamiltonian_expectation(weights, [pauli_expectation(int(host_c[k]), c.T) for k in range(len(members))])
        same = ours == host
    elif c.task == "QAOA":
        ours = qaoa_expectation_from_counters(totals[: c.N], totals[c.N:], ising, c.T)
        host = sum((qaoa_cost(z, ising) for z in real), Fraction(0)) / c.T
        same = ours == host
    else:
        ours = qml_class_probs(totals, c.T)
        host = qml_class_probs(real.sum(axis=0), c.T)
        same = np.array_equal(ours, host)
    report.add(f"loop{g}/expectation-equality", same, "" if same else f"{ours} != {host}")

    if c.task == "VQE":
        window = (rec.start, rec.end)
        bits = cp.log.total_bits(DOWNLINK, window=window)
        want = c.N * (c.K + 2) if g + 1 < len(cp.loops) else 0
        report.add(f"loop{g}/downlink-bits", bits == want, f"{bits} == {want}")


def _check_rates(report, cp, p: ScenarioParams, saturate: bool) -> None:
    c = cp.config
    t = p.t_qc
    model = bwmodel.c3(p)
    predicted = float(model["msb"] + model["non-msb"])
    bound = c.N_C / (c.T_loop * t)
    # overlapped readout of loop g lands in loop g+1; measure a steady-state loop
    rec = cp.loops[1] if c.collection == OVERLAPPED and len(cp.loops) > 1 else cp.loops[0]
    measured = measured_bandwidth(cp.log, UPLINK, rec.window, t)
    if saturate:
        ok = abs(measured - predicted) <= bound * (1 + 1e-12)
        rel = "|measured - model|"
    else:
        ok = measured <= predicted + bound * (1 + 1e-12)
        rel = "measured <= model +"
    report.add("uplink-rate", ok, f"{rel} bound: measured {measured:.6g} model {predicted:.6g} bound {bound:.6g}")
    if c.collection != OVERLAPPED:
        window = (rec.end, rec.end + rec.overhead_steps)
        drain = measured_bandwidth(cp.log, UPLINK, window, t)
        msb = float(model["msb"])
        report.add("post-loop-drain-rate", drain <= msb * (1 + 1e-12) + bound,
                   f"drain {drain:.6g} vs msb {msb:.6g}")
    report.simulated_uplink = measured


def result_rows_to_dicts(rows: list[ResultRow]) -> list[dict]:
    return [asdict(r) for r in rows]
