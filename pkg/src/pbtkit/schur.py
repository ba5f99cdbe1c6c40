"""Dense Schur transform on m qudits whose symmetric-group action is exactly
Young's orthogonal form.

The transform is built from matrix-unit symmetrizers
``E_{ij} = (dim/m!) sum_sigma yor(sigma)_{ij} V(sigma)``: an orthonormal basis
of range(E_11) supplies the multiplicity labels and ``E_{j1}`` maps it across
the irrep.  By construction ``U V(sigma) U+`` is exactly block diagonal with
blocks ``I_m  (x)  yor(lambda, sigma)``, which is the property every formula
downstream relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .partitions import Partition, add_box, dim_specht, dim_weyl, enumerate_partitions
from .symrep import (
    Perm,
    StandardTableau,
    standard_tableaux,
    yor,
)

DENSE_GUARD = 2**20
_RANK_TOL = 1e-9
_SIGN_TOL = 1e-9


@dataclass(frozen=True)
class PermutationOperator:
    """The natural action of a permutation on m qudits: V(sigma)|i_1 .. i_m> =
    |i_{sigma^-1(1)} .. i_{sigma^-1(m)}>."""

    m: int
    d: int
    perm: Perm

    def source_index(self) -> np.ndarray:
        """``apply(v)[q] = v[source_index[q]]`` over flat base-d indices."""
        return _perm_source_index(self.m, self.d, self.perm)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Permute a state vector (or the rows of a stack of vectors)."""
        return np.asarray(vec)[self.source_index()]

    def dense(self) -> np.ndarray:
        n = self.d**self.m
        out = np.zeros((n, n))
        out[np.arange(n), self.source_index()] = 1.0
        return out


@lru_cache(maxsize=None)
def _digit_table(m: int, d: int) -> np.ndarray:
    idx = np.arange(d**m)
    return np.stack([(idx // d ** (m - 1 - t)) % d for t in range(m)], axis=1)


@lru_cache(maxsize=None)
def _perm_source_index(m: int, d: int, perm: Perm) -> np.ndarray:
    # output slot t carries input slot sigma^-1(t), so the source state of an
    # output state q has digit q_{sigma(s)} in slot s
    digits = _digit_table(m, d)
    weights = d ** (m - 1 - np.arange(m))
    src = digits[:, list(perm)] @ weights
    src.flags.writeable = False
    return src


def permutation_operator(m: int, d: int, sigma: Perm) -> PermutationOperator:
    if len(sigma) != m:
        raise ValueError(f"permutation degree {len(sigma)} != m = {m}")
    return PermutationOperator(m, d, tuple(sigma))


def permutation_dense(m: int, d: int, sigma: Perm) -> np.ndarray:
    return permutation_operator(m, d, sigma).dense()


def partial_transpose_last(op: np.ndarray, m: int, d: int) -> np.ndarray:
    """Transpose on the last tensor factor only; involutive."""
    n = d**m
    if op.shape != (n, n):
        raise ValueError(f"operator must be {n} x {n}")
    blocks = op.reshape(d ** (m - 1), d, d ** (m - 1), d)
    return np.ascontiguousarray(blocks.transpose(0, 3, 2, 1)).reshape(n, n)


@dataclass(frozen=True, eq=False)
class SchurTransform:
    """Unitary to the irrep-adapted basis of m qudits plus its row labels.

    Row order groups by diagram (lexicographically decreasing), then
    multiplicity copy, then standard tableau in last-letter order, so the
    copy-r block of diagram lambda occupies contiguous rows.
    """

    m: int
    d: int
    matrix: np.ndarray
    index: tuple[tuple[Partition, int, StandardTableau], ...]
    gauge_seed: int

    def row_position(self, lam: Partition, r: int, path: StandardTableau) -> int:
        key = (lam, r, path.growth)
        pos = _row_lookup(self)[key]
        return pos

    def row(self, lam: Partition, r: int, path: StandardTableau) -> np.ndarray:
        return np.array(self.matrix[self.row_position(lam, r, path)])

    def block_rows(self, lam: Partition, r: int) -> np.ndarray:
        """All rows of copy ``r`` of diagram ``lam``, in tableau order."""
        tabs = standard_tableaux(lam)
        start = self.row_position(lam, r, tabs[0])
        return np.array(self.matrix[start : start + len(tabs)])


@lru_cache(maxsize=None)
def _row_lookup(t: SchurTransform) -> dict:
    return {(lam, r, path.growth): i for i, (lam, r, path) in enumerate(t.index)}


def _orthonormal_columns(mat: np.ndarray, rank: int, rng: np.random.Generator | None) -> np.ndarray:
    """Deterministically pivoted orthonormal basis of the column range."""
    work = mat.astype(float).copy()
    basis: list[np.ndarray] = []
    scale = np.linalg.norm(work, axis=0).max()
    if scale == 0.0:
        raise ValueError("zero matrix has no range")
    for _ in range(rank):
        norms = np.linalg.norm(work, axis=0)
        pivot = int(np.argmax(norms))
        if norms[pivot] <= _RANK_TOL * scale:
            break
        v = work[:, pivot] / norms[pivot]
        for _ in range(2):  # re-orthogonalize for numerical safety
            for b in basis:
                v -= b * (b @ v)
            v /= np.linalg.norm(v)
        basis.append(v)
        work -= np.outer(v, v @ work)
    if len(basis) != rank:
        raise ArithmeticError(f"range has rank {len(basis)}, expected {rank}")
    out = np.stack(basis, axis=1)
    if rng is not None:
        mix = np.linalg.qr(rng.standard_normal((rank, rank)))[0]
        out = out @ mix
    return _fix_signs(out)


def _fix_signs(cols: np.ndarray) -> np.ndarray:
    out = cols.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > _SIGN_TOL)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


@lru_cache(maxsize=None)
def build_schur(m: int, d: int, gauge_seed: int = 0) -> SchurTransform:
    """Construct the m-qudit Schur transform as a dense unitary.

    ``gauge_seed`` != 0 rotates each multiplicity basis by a seeded orthogonal
    mix; all downstream scalar quantities must be independent of this gauge.
    """
    if m < 0 or d < 1:
        raise ValueError("need m >= 0 and d >= 1")
    if d**m > DENSE_GUARD:
        raise ValueError(f"d^m = {d**m} exceeds the dense-size guard {DENSE_GUARD}")
    dim = d**m
    if m == 0:
        mat = np.eye(1, dtype=complex)
        index = ((Partition(), 1, StandardTableau(Partition(), ())),)
        return SchurTransform(m, d, mat, index, gauge_seed)

    perms = list(itertools.permutations(range(m)))
    sources = {p: _perm_source_index(m, d, p) for p in perms}
    rng = np.random.default_rng(gauge_seed) if gauge_seed else None

    rows = np.zeros((dim, dim))
    index: list[tuple[Partition, int, StandardTableau]] = []
    cursor = 0
    for lam in enumerate_partitions(m, d):
        d_lam = dim_specht(lam)
        m_lam = dim_weyl(lam, d)
        tabs = standard_tableaux(lam)
        # E_{j1} for all j in one sweep over the group
        units = np.zeros((d_lam, dim, dim))
        cols = np.arange(dim)
        for p in perms:
            w = yor(lam, p).matrix[:, 0] * (d_lam / factorial(m))
            src = sources[p]
            for j in range(d_lam):
                if w[j] != 0.0:
                    units[j, cols, src] += w[j]
        mult_basis = _orthonormal_columns(units[0], m_lam, rng)
        for r in range(m_lam):
            v = mult_basis[:, r]
            for j in range(d_lam):
                w = units[j] @ v
                nrm = np.linalg.norm(w)
                if abs(nrm - 1.0) > 1e-8:
                    raise ArithmeticError(
                        f"symmetrizer row norm {nrm} != 1 for {lam}, copy {r + 1}"
                    )
                rows[cursor] = w / nrm
                index.append((lam, r + 1, tabs[j]))
                cursor += 1
    if cursor != dim:
        raise ArithmeticError(f"assembled {cursor} rows, expected {dim}")
    mat = rows.astype(complex)
    err = np.abs(mat @ mat.conj().T - np.eye(dim)).max()
    if err > 1e-10:
        raise ArithmeticError(f"Schur transform not unitary, residual {err:.2e}")
    mat.flags.writeable = False
    return SchurTransform(m, d, mat, tuple(index), gauge_seed)


def schur_row(t: SchurTransform, lam: Partition, r: int, path: StandardTableau) -> np.ndarray:
    """One row of the transform as a bra over the computational basis."""
    return t.row(lam, r, path)


def covariance_residual(t: SchurTransform, sigma: Perm) -> float:
    """Max deviation of U V(sigma) U+ from its exact block-diagonal irrep form."""
    conj = t.matrix @ permutation_dense(t.m, t.d, sigma) @ t.matrix.conj().T
    expected = np.zeros_like(conj)
    pos = 0
    for lam in enumerate_partitions(t.m, t.d):
        d_lam = dim_specht(lam)
        m_lam = dim_weyl(lam, t.d)
        block = np.kron(np.eye(m_lam), yor(lam, sigma).matrix)
        size = m_lam * d_lam
        expected[pos : pos + size, pos : pos + size] = block
        pos += size
    return float(np.abs(conj - expected).max())


def submatrix_U_nu_alpha(
    t: SchurTransform, nu: Partition, alpha: Partition, r_nu: int = 1
) -> np.ndarray:
    """Rows of copy ``r_nu`` of irrep ``nu`` whose tableau path passes through
    ``alpha``; shape (dim alpha) x d^m."""
    if alpha not in remove_shapes(nu):
        raise ValueError(f"{alpha} is not a one-box removal of {nu}")
    tabs = [tab for tab in standard_tableaux(nu) if tab.restricted_shape() == alpha]
    rows = [t.row_position(nu, r_nu, tab) for tab in tabs]
    return np.array(t.matrix[rows])


def remove_shapes(nu: Partition) -> tuple[Partition, ...]:
    from .partitions import remove_box

    return remove_box(nu)


def submatrix_U_alpha(
    t: SchurTransform, alpha: Partition, r_choice: dict[Partition, int] | None = None
) -> np.ndarray:
    """Stack, over every ``nu = alpha + box`` of legal height and every
    removal ``xi`` of ``nu``, the rows of the chosen copy of ``nu``; row order
    is (nu, xi, tableau-within-xi) lexicographic in the fixed enumerations."""
    blocks = []
    for nu in add_box(alpha, t.d).children:
        r_nu = 1 if r_choice is None else r_choice.get(nu, 1)
        blocks.append(t.block_rows(nu, r_nu))
    return np.concatenate(blocks, axis=0)
