"""
Bandwidth and heat at scale
===========================

Closed-form comparison of the plain readout path and the counter
co-processor for all three tasks at N = 10^4 qubits and 10^6 shots.
"""

from cryocount.bwmodel import ScenarioParams, c3, counter_width_policy
from cryocount.harness import evaluate

# VQE with K = N^2 counters per group overwhelms the co-processor at this
# size (negative reduction); the parallel-shot demo shows where it pays off
for task, b in (("VQE", None), ("QAOA", 13), ("QML", None)):
    p = ScenarioParams(task, 10**4, T=10**6, b=b)
    row = evaluate(p, b_policy="log")
    print(f"{task:4s} b={row.b:2d}  baseline {row.baseline_bw / 1e9:7.3f} Gbps, {row.baseline_wires:3d} wires"
          f"   co-processor {row.c3_bw / 1e9:8.4f} Gbps, {row.c3_wires:3d} wires, {row.c3_power * 1e3:.4g} mW"
          f"   heat reduction {row.heat_reduction:+.1%}")

# channel by channel for QML
p = ScenarioParams("QML", 10**4, b=14)
for name, value in c3(p).components.items():
    if value:
        print(f"  {name:14s} {float(value) / 1e6:9.4f} Mbps")

# QAOA has no overlapped readout; the counter width trades overflow traffic
# against the pause needed to drain residues after each loop
p = ScenarioParams("QAOA", 10**4)
for r in (0.02, 0.05, 0.107, 0.25):
    b = counter_width_policy("overhead", p, r)
    bw = c3(p.with_(b=b, r=r))
    print(f"  r={r:<6} b={b:2d}  msb {float(bw['msb']) / 1e9:6.3f} Gbps")
