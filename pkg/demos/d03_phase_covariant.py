"""
The phase-covariant counterexample
==================================

Rates g+ = 0.2, g- = 0.8 and a dephasing rate that turns negative after t = 1.
Everything about this map has a closed form: Bloch propagation, the
P-divisibility margin, the complete-positivity functions and the bounds on how
far states can stray from the fixed point.
"""
import numpy as np

from qthermo.phase_covariant import appendix_c_bounds, counterexample_rates, cp_conditions, pdiv_onset, propagate_bloch

rates = counterexample_rates()
t = np.linspace(0, 5, 6)
print("g_z(t):", np.round(rates.gamma_z(t), 3))

# the margin sqrt(g+ g-) + 2 g_z crosses zero at 21/11
print("P-divisibility lost at t =", pdiv_onset(rates, 1.0, 2.0))

# the map nonetheless stays completely positive
f1, f2 = cp_conditions(rates, np.linspace(0, 5, 500))
print("max f1, f2:", f1.max(), f2.max())

# a state on the equator relaxes towards v* = (0, 0, -0.6)
print("v(t) from (1, 0, 0):\n", np.round(propagate_bloch(rates, [1.0, 0.0, 0.0], t), 4))

x0, p0 = appendix_c_bounds(rates, np.array([0.5, 1.0, 1.5, 3.0]))
print("x0:", np.round(x0, 4), " P0:", np.round(p0, 4))
