"""
Information backflow
====================

Trace-distance distinguishability of two states can only shrink under a
P-divisible map. The counterexample lets it grow after the onset, giving a
strictly positive non-Markovianity measure.
"""
from qthermo.markovianity import information_flow, nonmarkov_measure
from qthermo.phase_covariant import PhaseCovariantRates, counterexample_rates
from qthermo.propagation import uniform_grid

rates = counterexample_rates()
grid = uniform_grid(5.0, 0.01)
value, best = nonmarkov_measure(rates, 20, 5, grid, return_best=True)
print("measure (counterexample):", value)
flow = information_flow(rates, best, grid)
growth = [s for s in flow if s.derivative > 0]
print(f"distinguishability grows on [{growth[0].t:.2f}, {growth[-1].t:.2f}]")

markovian = PhaseCovariantRates(0.2, 0.8, 0.0)
print("measure (no dephasing):", nonmarkov_measure(markovian, 20, 5, grid))
