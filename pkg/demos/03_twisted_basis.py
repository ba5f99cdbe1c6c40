"""From spanning vectors to the orthonormal block basis.

One block at a time: the spanning vectors combine a port permutation, a Schur
basis state on the first n-2 qudits and a maximally entangled pair; the
rescaled change-of-basis matrix orthonormalizes them into a basis on which
the measurement operators become explicit small matrices.  Everything is
cross-checked against dense conjugation on the full space.
"""

import numpy as np

from pbtkit import (
    Partition,
    build_twisted,
    f_basis,
    mf_pi,
    mf_rho,
    mf_sqrt_pi,
    psi_vectors,
)
from pbtkit.pbt import pgm_tilde_dense

n, d = 3, 2
alpha = Partition((1,))

psi = psi_vectors(n, d, alpha)
print("spanning columns (rows of the transpose, unnormalized):")
print(psi.real.T)

blk = f_basis(n, d, alpha)
print("\northonormal block basis, scaled by sqrt(6):")
print(np.round(blk.f.real.T * np.sqrt(6), 4))
print("row labels (child, removal, index):", [(str(a), str(b), j) for a, b, j in blk.nu_index])

print("\nstate-sum matrix in this basis (diagonal by construction):")
print(mf_rho(n, d, alpha))

for i in (1, 2):
    print(f"\nmeasurement block for port {i}:")
    print(mf_pi(n, d, alpha, i))

print("\nsum over ports is the identity on the block:")
print(mf_pi(n, d, alpha, 1) + mf_pi(n, d, alpha, 2))

# dense cross-check of the square-root blocks
tw = build_twisted(n, d)
tilde = pgm_tilde_dense(n, d)
worst = 0.0
from pbtkit.pbt import principal_sqrt

for i in (1, 2):
    rebuilt = sum(
        b.f @ mf_sqrt_pi(n, d, b.alpha, i) @ b.f.conj().T for b in tw.blocks
    )
    worst = max(worst, np.abs(rebuilt - principal_sqrt(tilde[i - 1])).max())
print("\nworst square-root reconstruction residual vs dense:", worst)
