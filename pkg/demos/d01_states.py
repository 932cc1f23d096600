"""
Qubit states, Bloch vectors and relative entropy
================================================

States are plain complex matrices; qubits map to Bloch vectors and back.
"""
import numpy as np

from qthermo.states import bloch_to_state, random_state, relative_entropy, state_to_bloch, trace_distance

rng = np.random.default_rng(0)

# a qubit with Bloch vector (0.3, 0, -0.4)
rho = bloch_to_state([0.3, 0.0, -0.4])
print("rho =\n", np.round(rho, 3))
print("back to Bloch:", state_to_bloch(rho))

# relative entropy to the maximally mixed state equals log 2 minus the von Neumann entropy
mixed = np.eye(2) / 2
p = np.linalg.eigvalsh(rho)
print("D(rho || I/2) =", relative_entropy(rho, mixed), " log2 - S =", np.log(2) + np.sum(p * np.log(p)))

# trace distance between two random qutrit states
a, b = random_state(3, rng), random_state(3, rng)
print("trace distance of two random qutrits:", trace_distance(a, b))
