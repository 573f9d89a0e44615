"""
Parallel shots on a 10^4-qubit machine
======================================

Small VQE problems can run L = floor(M/N) copies side by side. Measurement
traffic then stays near M bits per shot time, while the counters keep the
uplink to overflow pulses and residues.
"""

from cryocount.harness import SweepSpec, figure_series, run_model_sweep

spec = SweepSpec.from_dict({
    "task": "VQE", "scenario": "PS", "axis": "N", "values": [10, 20, 36, 50, 100, 200],
    "fixed": {"M": 10**4, "T": 10**6, "t_qc_ns": 640}, "b_policy": "log",
})
rows = run_model_sweep(spec)
print(" N    L     b   baseline Gbps  C3 Gbps  wires  heat reduction")
for r in rows:
    print(f"{r.N:3d} {r.L:4d} {r.b:4d} {r.baseline_bw / 1e9:12.3f} {r.c3_bw / 1e9:9.3f} {r.c3_wires:5d}   {r.heat_reduction:.1%}")

fig = figure_series(rows)
print("normalized execution time:", [round(x, 4) for x in fig["normalized_exec_time"]["c3"]])
