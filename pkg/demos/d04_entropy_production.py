"""
Entropy production without P-divisibility
=========================================

The entropy production rate is the decay rate of the relative entropy to the
instantaneous fixed point. For the counterexample it stays positive although
the map is not P-divisible; a generator with a positive eigenvalue instead has
states with negative production, and the witness finds one.
"""
import numpy as np

from qthermo.entropy import eigensign_witness, epr_general, sigma_map_probe
from qthermo.phase_covariant import PhaseCovariantRates, counterexample_rates, make_generator
from qthermo.propagation import integrate
from qthermo.states import bloch_to_state

gen = make_generator(counterexample_rates())
traj = integrate(gen, bloch_to_state([0.7, 0.0, 0.1]), 5.0, 1e-3, with_epr=True)
print("min sigma along a trajectory:", traj.sigma.min())
print("sigma at t = 3 for a fresh state:", epr_general(gen, 3.0, bloch_to_state([0.2, 0.3, -0.1])))

# negative relaxation rates give a positive eigenvalue and a negative-production state
bad = make_generator(PhaseCovariantRates(-0.1, -0.4, 0.0))
w = eigensign_witness(bad, 0.0)
print(f"witness: sigma = {w.sigma:.3e} for eigenvalue {w.eigenvalue.real:.2f}")

# the map-level entropy production is 0 while P-divisible and diverges afterwards
for t in (0.5, 3.0):
    v = sigma_map_probe(gen, t)
    print(f"t = {t}: divergent = {v.divergent}, last objective = {v.objective_trace[-1][1]:.1f}")
