"""
Second-order relative entropy
=============================

Near rho the relative entropy is a quadratic form, the Bogoliubov-Kubo-Mori
Fisher product K_rho(X, X); the remainder is third order in eps.
"""
import numpy as np

from qthermo.entropy import expansion_residual, fisher_product
from qthermo.states import SIGMA_Z, random_hermitian, random_state

rng = np.random.default_rng(1)
rho = 0.7 * random_state(2, rng) + 0.15 * np.eye(2)
x = random_hermitian(2, rng, traceless=True)
x /= np.linalg.norm(x)

print("K(X, X) =", fisher_product(rho, x, x))
print("K at I/2 for sigma_z / 2 (expect 1):", fisher_product(np.eye(2) / 2, SIGMA_Z / 2, SIGMA_Z / 2))
res = [expansion_residual(rho, x, e) for e in (1e-2, 5e-3, 2.5e-3)]
print("residuals:", res, " ratios:", res[0] / res[1], res[1] / res[2])
