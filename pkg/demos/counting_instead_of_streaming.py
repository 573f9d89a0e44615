"""
Counting instead of streaming
=============================

A VQE group needs only the number of shots whose masked parity is odd.
Here a small co-processor counts those parities from a random shot stream,
and the host rebuilds each count from overflow pulses plus residues.
"""

import numpy as np

from cryocount.core import PauliString, PauliGroup, pauli_expectation, hamiltonian_expectation
from cryocount.coproc import CoprocConfig, Coprocessor, UPLINK
from cryocount.sampler import MeasurementSource

# a commuting group on four qubits; the inclusive string XZZY covers all three
group = PauliGroup.from_members(
    [PauliString("XZII"), PauliString("IZZI"), PauliString("XIZY")], weights=[0.5, -1.25, 0.75]
)
print("inclusive string:", group.inclusive, " masks:", [str(m) for m in group.masks])

T, b = 256, 3
src = MeasurementSource.bernoulli([0.2, 0.5, 0.7, 0.4], seed=1)
shots = src.take(T)

cp = Coprocessor(CoprocConfig("VQE", N=4, b=b, T=T, K=len(group)))
cp.load_paulimasks(group.masks, group.inclusive)
cp.run_loop(shots)
cp.finalize()

counts = cp.task_counts(0)
print("odd-parity counts:", counts.tolist())

# the same numbers straight from the raw stream
masks = np.array([m.bits for m in group.masks])
print("host recount:     ", ((shots @ masks.T) & 1).sum(axis=0).tolist())

energy = hamiltonian_expectation(group.weights, [pauli_expectation(int(c), T) for c in counts])
print("group energy:", energy, "=", float(energy))

# what crossed the boundary, versus 4 bits per shot without the counters
up = cp.log.total_bits(UPLINK)
print(f"uplink bits: {up} instead of {4 * T}")
