"""Irrep blocks of the partially transposed permutation algebra on n qudits.

The ideal generated by elements that move the last qudit is supported on the
subspace spanned by product states maximally entangled between one of the
first n-1 qudits and the last.  Each irrep block is labelled by a diagram
``alpha`` on n-2 boxes and a multiplicity copy ``r``; its spanning vectors,
Gram spectrum, orthonormal f basis and the matrix forms of the algebra
generators are all computed here, each backed by a dense oracle check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .partitions import (
    BoxAddition,
    Partition,
    add_box,
    dim_specht,
    dim_weyl,
    enumerate_partitions,
)
from .schur import build_schur, permutation_operator
from .symrep import (
    Perm,
    branching_slices,
    embed_perm,
    prir_rows,
    transposition,
    yor,
)

GRAM_TOL = 1e-8
PSEUDO_TOL = 1e-8
FACTORED_TOL = 1e-10


def _validate_block_args(n: int, d: int, alpha: Partition) -> BoxAddition:
    if n < 2:
        raise ValueError("need n >= 2")
    if alpha.n != n - 2:
        raise ValueError(f"alpha must have {n - 2} boxes, got {alpha.n}")
    if alpha.height() > d:
        raise ValueError(f"alpha = {alpha} taller than d = {d}")
    return add_box(alpha, d)


def port_cycle(k: int, n: int) -> Perm:
    """The two-cycle (k, n-1) on n-1 points, 1-based k, as a 0-based tuple."""
    return transposition(k - 1, n - 2, n - 1)


def lambda_eigenvalue(n: int, d: int, alpha: Partition, nu: Partition) -> float:
    """Gram eigenvalue attached to the block nu = alpha + box:
    (n-1) m_nu d_alpha / (m_alpha d_nu)."""
    frac = Fraction(
        (n - 1) * dim_weyl(nu, d) * dim_specht(alpha),
        dim_weyl(alpha, d) * dim_specht(nu),
    )
    return float(frac)


def block_dimension(alpha: Partition, d: int) -> int:
    """D_alpha: total dimension of one irrep block, summing child Specht dims."""
    return sum(dim_specht(nu) for nu in add_box(alpha, d).children)


def nu_index(n: int, d: int, alpha: Partition) -> tuple[tuple[Partition, Partition, int], ...]:
    """(nu, xi, j) row labels of a block, nu outer, then xi blocks in basis order."""
    out = []
    for nu in add_box(alpha, d).children:
        for xi, a, b in branching_slices(nu):
            for j in range(b - a):
                out.append((nu, xi, j))
    return tuple(out)


def maximally_entangled(d: int) -> np.ndarray:
    """|phi+> on two qudits, unit norm."""
    v = np.zeros(d * d)
    v[(d + 1) * np.arange(d)] = 1.0 / np.sqrt(d)
    return v


def psi_vectors(n: int, d: int, alpha: Partition, r: int = 1, gauge_seed: int = 0) -> np.ndarray:
    """Spanning columns of one irrep block, each of squared norm d.

    Column (k, k_alpha), k outer, is sqrt(d) V[(k, n-1)] applied to the Schur
    basis state (alpha, r, k_alpha) on the first n-2 qudits tensored with the
    maximally entangled pair on qudits n-1, n.
    """
    box = _validate_block_args(n, d, alpha)
    del box
    sch = build_schur(n - 2, d, gauge_seed)
    d_alpha = dim_specht(alpha)
    if not 1 <= r <= dim_weyl(alpha, d):
        raise ValueError(f"multiplicity copy r = {r} out of range for {alpha}")
    base = sch.block_rows(alpha, r).conj()  # kets, shape (d_alpha, d^(n-2))
    phi = maximally_entangled(d)
    cols = np.zeros((d**n, (n - 1) * d_alpha), dtype=complex)
    for k in range(1, n):
        op = permutation_operator(n, d, embed_perm(port_cycle(k, n), n))
        src = op.source_index()
        for ka in range(d_alpha):
            vec = np.sqrt(d) * np.kron(base[ka], phi)
            cols[:, (k - 1) * d_alpha + ka] = vec[src]
    return cols


def gram_spectrum(
    n: int, d: int, alpha: Partition, r: int = 1, gauge_seed: int = 0, check: bool = True
) -> dict[Partition, float]:
    """Closed-form Gram eigenvalues {nu: lambda_nu}, verified against the
    numerically diagonalized Gram matrix of the spanning vectors.

    The Gram matrix has each lambda_nu with multiplicity dim(nu), padded by
    zeros when the spanning vectors are linearly dependent.  A mismatch beyond
    GRAM_TOL raises.
    """
    box = _validate_block_args(n, d, alpha)
    values = {nu: lambda_eigenvalue(n, d, alpha, nu) for nu in box.children}
    if check:
        psi = psi_vectors(n, d, alpha, r, gauge_seed)
        gram = psi.conj().T @ psi
        expected = []
        for nu, lam in values.items():
            expected.extend([lam] * dim_specht(nu))
        expected.extend([0.0] * box.theta_dim())
        got = np.linalg.eigvalsh(gram)
        if np.abs(np.sort(np.array(expected)) - got).max() > GRAM_TOL:
            raise ArithmeticError(
                f"Gram spectrum mismatch for n={n}, d={d}, alpha={alpha}"
            )
    return values


def z_matrix(n: int, d: int, alpha: Partition) -> tuple[np.ndarray, ...]:
    """Per-port blocks of the rescaled change-of-basis matrix.

    Block k has shape (dim alpha) x D_alpha; its nu columns are
    [(n-1) d_alpha]^(-1/2) sqrt(d_nu / lambda_nu) times the alpha row-block of
    yor(nu, (k, n-1)).
    """
    box = _validate_block_args(n, d, alpha)
    d_alpha = dim_specht(alpha)
    lam = {nu: lambda_eigenvalue(n, d, alpha, nu) for nu in box.children}
    blocks = []
    for k in range(1, n):
        pk = port_cycle(k, n)
        cols = []
        for nu in box.children:
            c = np.sqrt(dim_specht(nu) / lam[nu]) / np.sqrt((n - 1) * d_alpha)
            cols.append(c * prir_rows(nu, pk, alpha))
        blocks.append(np.concatenate(cols, axis=1))
    return tuple(blocks)


def z_stacked(n: int, d: int, alpha: Partition) -> np.ndarray:
    return np.concatenate(z_matrix(n, d, alpha), axis=0)


@dataclass(frozen=True, eq=False)
class IrrepBlock:
    """One (alpha, r) irrep block: spanning vectors, orthonormal f basis,
    row labels and Gram eigenvalues."""

    n: int
    d: int
    alpha: Partition
    r: int
    psi: np.ndarray
    f: np.ndarray
    nu_index: tuple[tuple[Partition, Partition, int], ...]
    lambdas: dict[Partition, float]

    @property
    def dim(self) -> int:
        return self.f.shape[1]


def f_basis(n: int, d: int, alpha: Partition, r: int = 1, gauge_seed: int = 0) -> IrrepBlock:
    """Orthonormal basis decomposing one irrep block under S(n-1).

    Columns are psi . z in (nu, xi, j) order; orthonormality is enforced.
    """
    psi = psi_vectors(n, d, alpha, r, gauge_seed)
    z = z_stacked(n, d, alpha)
    f = psi @ z
    dim = f.shape[1]
    err = np.abs(f.conj().T @ f - np.eye(dim)).max()
    if err > 1e-9:
        raise ArithmeticError(f"f basis not orthonormal, residual {err:.2e}")
    lams = gram_spectrum(n, d, alpha, check=False)
    return IrrepBlock(n, d, alpha, r, psi, f, nu_index(n, d, alpha), lams)


def _phi_map(n: int, d: int, alpha: Partition, r: int, gauge_seed: int = 0) -> np.ndarray:
    """dim(alpha) x d^n map onto the (alpha, r) Schur rows tensored with the
    maximally entangled bra on qudits n-1, n, times sqrt(d)."""
    sch = build_schur(n - 2, d, gauge_seed)
    rows = sch.block_rows(alpha, r)
    phi = maximally_entangled(d)
    return np.sqrt(d) * np.kron(rows, phi[None, :].conj())


def twisted_schur_block(
    n: int, d: int, alpha: Partition, r: int = 1, gauge_seed: int = 0, validate: bool = True
) -> np.ndarray:
    """The D_alpha x d^n isometry from the computational basis to the
    (nu, xi, j)-labelled f basis of one irrep block.

    With ``validate`` the factored form, a sum over ports of Schur submatrix
    products sandwiched between the entangling map and port permutations, is
    evaluated and must agree with the direct form to FACTORED_TOL.
    """
    block = f_basis(n, d, alpha, r, gauge_seed)
    direct = block.f.conj().T
    if validate:
        factored = _factored_block(n, d, alpha, r, gauge_seed)
        err = np.abs(direct - factored).max()
        if err > FACTORED_TOL:
            raise ArithmeticError(
                f"factored/direct twisted transform mismatch {err:.2e} at "
                f"n={n}, d={d}, alpha={alpha}, r={r}"
            )
    return direct


def _factored_block(n: int, d: int, alpha: Partition, r: int, gauge_seed: int = 0) -> np.ndarray:
    from .schur import submatrix_U_alpha, submatrix_U_nu_alpha

    box = add_box(alpha, d)
    sch1 = build_schur(n - 1, d, gauge_seed)
    d_alpha = dim_specht(alpha)
    u_alpha = submatrix_U_alpha(sch1, alpha)
    phi = _phi_map(n, d, alpha, r, gauge_seed)
    total = np.zeros((block_dimension(alpha, d), d**n), dtype=complex)
    for k in range(1, n):
        pk = port_cycle(k, n)
        vk = permutation_operator(n - 1, d, pk).dense()
        vlk = permutation_operator(n, d, embed_perm(pk, n)).dense()
        inner = np.zeros_like(total[:, : d_alpha])
        for nu in box.children:
            u_nu = submatrix_U_nu_alpha(sch1, nu, alpha)
            c = np.sqrt(dim_specht(nu) / lambda_eigenvalue(n, d, alpha, nu))
            inner = inner + c * (u_alpha @ vk @ u_nu.conj().T)
        total = total + inner @ phi @ vlk
    return total / np.sqrt((n - 1) * d_alpha)


# ---------------------------------------------------------------------------
# matrix forms of the algebra generators in the f basis


def _alpha_row_blocks(n: int, d: int, alpha: Partition, i: int) -> dict[Partition, np.ndarray]:
    """yor(nu, (i, n-1)) restricted to alpha rows, for every child nu."""
    pk = port_cycle(i, n)
    return {nu: prir_rows(nu, pk, alpha) for nu in add_box(alpha, d).children}


def mf_pi(n: int, d: int, alpha: Partition, i: int, check: bool = True) -> np.ndarray:
    """Matrix of the normalized measurement operator for port ``i`` in the f
    basis of block alpha: a (pseudo)projector with eigenvalues in
    {0, 1 - d_theta / ((n-1) d_alpha)}."""
    box = _validate_block_args(n, d, alpha)
    if not 1 <= i <= n - 1:
        raise ValueError(f"port index i = {i} out of range")
    d_alpha = dim_specht(alpha)
    rows = _alpha_row_blocks(n, d, alpha, i)
    dim = block_dimension(alpha, d)
    out = np.zeros((dim, dim))
    oa = 0
    for om in box.children:
        ob = oa + dim_specht(om)
        na = 0
        for nu in box.children:
            nb = na + dim_specht(nu)
            c = np.sqrt(dim_specht(nu) * dim_specht(om)) / ((n - 1) * d_alpha)
            out[oa:ob, na:nb] = c * (rows[om].T @ rows[nu])
            na = nb
        oa = ob
    if check:
        scale = 1.0 - box.theta_dim() / ((n - 1) * d_alpha)
        if np.abs(out @ out - scale * out).max() > PSEUDO_TOL:
            raise ArithmeticError(
                f"pseudoprojector identity violated at n={n}, d={d}, "
                f"alpha={alpha}, i={i}"
            )
    return out


def mf_sqrt_pi(n: int, d: int, alpha: Partition, i: int) -> np.ndarray:
    """Square root of the port-i block matrix, by eigenvalue scaling."""
    box = add_box(alpha, d)
    scale = 1.0 - box.theta_dim() / ((n - 1) * dim_specht(alpha))
    return mf_pi(n, d, alpha, i) / np.sqrt(scale)


def mf_rho(n: int, d: int, alpha: Partition) -> np.ndarray:
    """Diagonal block matrix of the unnormalized state sum
    eta = sum_i V[(i n)]^(t_n) = d^(n-1) rho: each lambda_nu repeated dim(nu)
    times in (nu, xi, j) order."""
    box = _validate_block_args(n, d, alpha)
    diag = []
    for nu in box.children:
        diag.extend([lambda_eigenvalue(n, d, alpha, nu)] * dim_specht(nu))
    return np.diag(np.array(diag))


def mf_generator(
    n: int, d: int, alpha: Partition, sigma: Perm, transposed: bool
) -> np.ndarray:
    """Block-matrix form of a generator of the algebra.

    Two families cover all generators: permutations fixing the last qudit
    (``transposed`` irrelevant, must have sigma(n) = n), acting as the direct
    sum of irrep matrices over the child diagrams, and the partially
    transposed two-cycles (i n), handled by the rank-structured product
    formula with sqrt(lambda) weights.
    """
    box = _validate_block_args(n, d, alpha)
    if len(sigma) != n:
        raise ValueError("sigma must be a permutation of n points")
    d_alpha = dim_specht(alpha)
    dim = block_dimension(alpha, d)
    if sigma[n - 1] == n - 1:
        sub = tuple(sigma[: n - 1])
        out = np.zeros((dim, dim))
        pos = 0
        for nu in box.children:
            dn = dim_specht(nu)
            out[pos : pos + dn, pos : pos + dn] = yor(nu, sub).matrix
            pos += dn
        return out
    if not transposed:
        raise ValueError(
            "permutations moving the last qudit are only supported in "
            "partially transposed form on the generators (i n)"
        )
    i = _two_cycle_port(sigma, n)
    lam = {nu: lambda_eigenvalue(n, d, alpha, nu) for nu in box.children}
    rows = _alpha_row_blocks(n, d, alpha, i)
    out = np.zeros((dim, dim))
    oa = 0
    for om in box.children:
        ob = oa + dim_specht(om)
        na = 0
        for nu in box.children:
            nb = na + dim_specht(nu)
            c = (
                np.sqrt(dim_specht(nu) * dim_specht(om))
                * np.sqrt(lam[om] * lam[nu])
                / ((n - 1) * d_alpha)
            )
            out[oa:ob, na:nb] = c * (rows[om].T @ rows[nu])
            na = nb
        oa = ob
    return out


def _two_cycle_port(sigma: Perm, n: int) -> int:
    i = sigma[n - 1]
    expected = transposition(i, n - 1, n)
    if tuple(sigma) != expected:
        raise ValueError("generator must be a two-cycle (i n)")
    return i + 1


# ---------------------------------------------------------------------------
# whole-space assembly


@dataclass(frozen=True, eq=False)
class TwistedSchur:
    """All irrep blocks of the ideal for given (n, d), plus the projector onto
    its support subspace."""

    n: int
    d: int
    blocks: tuple[IrrepBlock, ...]
    hm_projector: np.ndarray
    gauge_seed: int

    def block(self, alpha: Partition, r: int) -> IrrepBlock:
        for b in self.blocks:
            if b.alpha == alpha and b.r == r:
                return b
        raise KeyError(f"no block ({alpha}, {r})")

    def hm_dimension(self) -> int:
        return sum(b.dim for b in self.blocks)

    def hs_basis(self) -> np.ndarray:
        """Orthonormal columns spanning the complement of the support subspace,
        from deterministic-pivot diagonalization of the projector."""
        evals, evecs = np.linalg.eigh(self.hm_projector)
        keep = evals < 0.5
        return evecs[:, keep]


@lru_cache(maxsize=None)
def build_twisted(n: int, d: int, gauge_seed: int = 0, validate: bool = True) -> TwistedSchur:
    """Build every (alpha, r) block and the support projector."""
    blocks = []
    proj = np.zeros((d**n, d**n), dtype=complex)
    for alpha in enumerate_partitions(n - 2, d):
        for r in range(1, dim_weyl(alpha, d) + 1):
            if validate:
                twisted_schur_block(n, d, alpha, r, gauge_seed, validate=True)
            blk = f_basis(n, d, alpha, r, gauge_seed)
            blocks.append(blk)
            proj += blk.f @ blk.f.conj().T
    return TwistedSchur(n, d, tuple(blocks), proj, gauge_seed)
