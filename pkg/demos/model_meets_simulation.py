"""
The model meets the simulator
=============================

The closed-form overflow rate assumes every counter pulses on every shot.
Feeding the simulator all-ones shots makes that true, and the measured
uplink then sits within one counter wrap of the prediction. Random shots
stay below it.
"""

from cryocount.bwmodel import ScenarioParams, c3
from cryocount.harness import run_functional_validation

for saturate in (True, False):
    p = ScenarioParams("QML", 6, T=2048, mode="PS", M=24, b=4)
    rep = run_functional_validation(p, seed=7, saturate=saturate)
    model = c3(p)
    predicted = float(model["msb"] + model["non-msb"])
    bound = p.N_C / (p.T_loop * p.t_qc)
    print(f"saturate={saturate!s:5}  measured {rep.simulated_uplink / 1e6:8.3f} Mbps"
          f"  model {predicted / 1e6:8.3f} Mbps  one-wrap bound {bound / 1e6:.3f} Mbps  ok={rep.ok}")

for line in rep.lines():
    print(" ", line)
