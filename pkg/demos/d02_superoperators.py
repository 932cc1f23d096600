"""
Generators as matrices
======================

A time-dependent GKSL generator is a Hamiltonian plus weighted jump operators.
Column-stacking turns it into a d^2 x d^2 matrix whose spectrum carries the
relaxation rates and whose null vector is the instantaneous fixed point.
"""
import numpy as np

from qthermo.generators import build_superop, kossakowski_scan, spectral_decompose
from qthermo.phase_covariant import counterexample_rates, make_generator

gen = make_generator(counterexample_rates())

for t in (0.5, 3.0):
    sd = spectral_decompose(build_superop(gen, t))
    print(f"t = {t}: eigenvalues {np.round(np.sort(sd.eigenvalues.real), 4)}, fixed point Bloch {np.round(sd.ifp_bloch, 4)}")

# every eigenvalue keeps a negative real part, yet past t ~ 1.91 a Kossakowski
# element turns negative: the map stops being P-divisible
for t in (0.5, 3.0):
    verdict = kossakowski_scan(gen, t, n_bases=100)
    print(f"t = {t}: P-divisible = {verdict.pdiv}, worst element = {verdict.worst_value:.4f}")
