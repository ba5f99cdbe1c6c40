"""The dense Schur transform and its exact permutation covariance.

The transform maps the computational basis of m qudits to a basis labelled by
(diagram, multiplicity copy, standard tableau).  Conjugating any permutation
operator through it is exactly block diagonal, with each diagram contributing
an identity on its multiplicity space tensored with the orthogonal irrep
matrix; that exactness is what every later construction leans on.
"""

import numpy as np

from pbtkit import build_schur, permutation_operator
from pbtkit.schur import covariance_residual
from pbtkit.symrep import transposition

m, d = 4, 2
t = build_schur(m, d)
print(f"Schur transform on {m} qudits of dimension {d}: {t.matrix.shape[0]} rows")
print("row labels (diagram, copy, tableau) for the first few rows:")
for lam, r, tab in t.index[:6]:
    print(f"  {str(lam):>6}  copy {r}  tableau {tab}")

print("\nunitarity residual:", np.abs(t.matrix @ t.matrix.conj().T - np.eye(d**m)).max())

rng = np.random.default_rng(0)
worst = 0.0
for k in range(1, m):
    worst = max(worst, covariance_residual(t, transposition(k - 1, k, m)))
for _ in range(10):
    worst = max(worst, covariance_residual(t, tuple(rng.permutation(m))))
print("worst covariance residual over transpositions and random elements:", worst)

swap = permutation_operator(2, 2, (1, 0))
print("\ntwo-qudit swap in the computational basis:")
print(swap.dense().astype(int))
