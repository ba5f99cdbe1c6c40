"""Young diagrams, orthogonal irrep matrices and the Gram spectrum.

Each irrep block of the partially transposed permutation algebra is labelled
by a diagram alpha on n-2 boxes.  Its spanning vectors have a Gram matrix
whose nonzero eigenvalues follow a closed form in the diagram data; this
script enumerates the blocks at small (n, d) and confirms the formula against
direct diagonalization.
"""

import numpy as np

from pbtkit import (
    Partition,
    add_box,
    dim_specht,
    dim_weyl,
    enumerate_partitions,
    gram_spectrum,
    psi_vectors,
    yor,
)
from pbtkit.twisted import block_dimension

n, d = 5, 2
print(f"diagram blocks at n = {n}, d = {d}")
print(f"{'alpha':>8} {'dim':>4} {'copies':>7} {'block dim':>10}   eigenvalue per child")
for alpha in enumerate_partitions(n - 2, d):
    lam = gram_spectrum(n, d, alpha)  # raises if formula and numerics disagree
    parts = ", ".join(f"{nu}: {v:.4f}" for nu, v in lam.items())
    print(
        f"{str(alpha):>8} {dim_specht(alpha):>4} {dim_weyl(alpha, d):>7} "
        f"{block_dimension(alpha, d):>10}   {parts}"
    )

alpha = Partition((2, 1))
psi = psi_vectors(n, d, alpha)
gram = psi.conj().T @ psi
print(f"\nGram matrix of the alpha = {alpha} block is {gram.shape[0]} x {gram.shape[1]};")
print("eigenvalues (with the zero modes from the excluded tall diagram):")
print(np.round(np.linalg.eigvalsh(gram), 6))

box = add_box(alpha, d)
print(f"\nlegal one-box additions of {alpha}: {[str(c) for c in box.children]}")
print(f"excluded tall addition: {box.theta} with dimension {box.theta_dim()}")

sigma = (1, 2, 0, 3)  # a 3-cycle in S(4)
mat = yor(Partition((3, 1)), sigma).matrix
print(f"\northogonal irrep matrix of {sigma} in the (3,1) representation:")
print(np.round(mat, 4))
print("orthogonality residual:", np.abs(mat @ mat.T - np.eye(3)).max())
