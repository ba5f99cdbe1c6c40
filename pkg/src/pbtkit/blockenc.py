"""Unitary block-encodings of the teleportation Kraus operators.

The target operators decompose into Schur-transform submatrices, port
permutations and scalar coefficients.  Everything non-unitary is encoded by
completing specified first rows or columns to unitaries; coefficient
injection uses a pair of row matrices mixing the irrep-label ancilla states,
and the full Kraus encoding is assembled multiplicatively with the entangling
stage and port-superposition registers, following the circuit layout
faithfully at desk scale.

Two register-sizing modes exist: ``tight`` uses exact register dimensions and
standalone ancillas; ``padded`` rounds register dimensions up to powers of
two and, when d is itself a power of two, stores the central ancilla pair
inside qudits n-1, n during the middle stage, the layout the ledger's
qubit accounting assumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

import numpy as np

from .partitions import Partition, add_box, dim_specht, dim_weyl, enumerate_partitions
from .registers import (
    Branched,
    Composite,
    Gate,
    Layout,
    Op,
    Register,
    controlled_not_gate,
    to_matrix,
)
from .schur import SchurTransform, build_schur, submatrix_U_nu_alpha
from .symrep import embed_perm, tableau_index
from .twisted import (
    TwistedSchur,
    block_dimension,
    lambda_eigenvalue,
    maximally_entangled,
    port_cycle,
)

ROW_TOL = 1e-10
SIGN_TOL = 1e-9


# ---------------------------------------------------------------------------
# generic unitary completion and dilation


def unitary_complete(rows: np.ndarray) -> np.ndarray:
    """Complete k orthonormal rows of C^m to an m x m unitary.

    The remaining rows are an orthonormal basis of the orthogonal complement
    from the SVD, each scaled so its first nonzero entry is real positive.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    k, m = rows.shape
    if k > m:
        raise ValueError("more rows than columns")
    gram = rows @ rows.conj().T
    if np.abs(gram - np.eye(k)).max() > ROW_TOL:
        raise ValueError("rows are not orthonormal")
    if k == m:
        return np.array(rows)
    _, _, vh = np.linalg.svd(rows, full_matrices=True)
    null = vh[k:]
    fixed = []
    for row in null:
        nz = np.flatnonzero(np.abs(row) > SIGN_TOL)
        phase = row[nz[0]] / abs(row[nz[0]]) if nz.size else 1.0
        fixed.append(row / phase)
    out = np.vstack([rows, np.array(fixed)])
    if np.abs(out @ out.conj().T - np.eye(m)).max() > ROW_TOL:
        raise ArithmeticError("completion failed to produce a unitary")
    return out


def unitary_dilation(a: np.ndarray, scale: float) -> np.ndarray:
    """Exact one-ancilla-qubit block-encoding of ``a`` with the given scale.

    Returns the 2x2 block unitary [[B, sqrt(I-BB+)], [sqrt(I-B+B), -B+]] with
    B = a / scale; requires scale >= ||a||.
    """
    b = np.asarray(a, dtype=complex) / scale
    if np.linalg.norm(b, 2) > 1.0 + 1e-12:
        raise ValueError("scale smaller than the operator norm")
    dim = b.shape[0]
    left = _psd_sqrt(np.eye(dim) - b @ b.conj().T)
    right = _psd_sqrt(np.eye(dim) - b.conj().T @ b)
    out = np.block([[b, left], [right, -b.conj().T]])
    err = np.abs(out @ out.conj().T - np.eye(2 * dim)).max()
    if err > 1e-10:
        raise ArithmeticError(f"dilation not unitary, residual {err:.2e}")
    return out


def _psd_sqrt(op: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(op)
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


# ---------------------------------------------------------------------------
# coefficients


def coefficients(n: int, d: int, alpha: Partition, nu: Partition) -> tuple[float, float]:
    """The two superposition weights attached to a child diagram; both lie in
    (0, 1]."""
    box = add_box(alpha, d)
    if nu not in box.children:
        raise ValueError(f"{nu} is not a legal-height addition to {alpha}")
    d_alpha = dim_specht(alpha)
    d_nu = dim_specht(nu)
    lam = lambda_eigenvalue(n, d, alpha, nu)
    base = (n - 1) * d_alpha
    c = (base - box.theta_dim()) ** -0.25 * base**-0.75 * d_nu / np.sqrt(lam)
    cp = d_nu / (lam * base)
    if not (0.0 < c <= 1.0 + 1e-12 and 0.0 < cp <= 1.0 + 1e-12):
        raise ArithmeticError(f"coefficient bound violated at {alpha}, {nu}")
    return float(c), float(cp)


# ---------------------------------------------------------------------------
# register bookkeeping


def _pow2(x: int) -> int:
    return 1 << max(x - 1, 0).bit_length()


@dataclass(frozen=True, eq=False)
class EncodingSpaces:
    """Register sizes, label maps and Schur register unitaries for one (n, d)."""

    n: int
    d: int
    mode: str
    gauge_seed: int
    parts1: tuple[Partition, ...]
    parts2: tuple[Partition, ...]
    n_rnu: int
    n_nu: int
    n_al: int
    n_ka: int
    n_r2: int
    n_k: int
    n_outcome: int
    reuse_qudits: bool
    a13_dim: int
    reg1: np.ndarray = field(repr=False)
    reg2: np.ndarray = field(repr=False)

    @property
    def anc_dim(self) -> int:
        return self.n_rnu * self.n_nu

    @property
    def reg1_dim(self) -> int:
        return self.anc_dim * self.n_al * self.n_ka

    @property
    def reg2_dim(self) -> int:
        return self.n_r2 * self.n_al * self.n_ka

    @property
    def system_dim(self) -> int:
        return self.reg2_dim * self.d**2

    def nu_state(self, nu: Partition) -> int:
        return self.parts1.index(nu)

    def alpha_state(self, alpha: Partition) -> int:
        return self.parts2.index(alpha)

    def system_registers(self) -> list[Register]:
        return [
            Register("r2", self.n_r2),
            Register("al", self.n_al),
            Register("ka", self.n_ka),
            Register("qm", self.d),
            Register("qn", self.d),
        ]

    def system_mask(self) -> np.ndarray:
        """True at system basis states embedding the physical n qudits."""
        reg_part = np.arange(self.reg2_dim) < self.d ** (self.n - 2)
        return np.repeat(reg_part, self.d**2)

    def ledger_logs(self) -> dict[str, int]:
        if self.mode != "padded":
            raise ValueError("qubit accounting only defined in padded mode")
        return {
            "n_rnu": self.n_rnu.bit_length() - 1,
            "n_nu": self.n_nu.bit_length() - 1,
            "n_al": self.n_al.bit_length() - 1,
            "d": _pow2(self.d).bit_length() - 1,
            "ports": self.n_k.bit_length() - 1,
        }


@lru_cache(maxsize=None)
def encoding_spaces(n: int, d: int, mode: str = "tight", gauge_seed: int = 0) -> EncodingSpaces:
    if mode not in ("tight", "padded"):
        raise ValueError("mode must be 'tight' or 'padded'")
    if n < 3:
        raise ValueError("encodings need n >= 3")
    parts1 = tuple(enumerate_partitions(n - 1, d))
    parts2 = tuple(enumerate_partitions(n - 2, d))
    sizes = {
        "n_rnu": max(2, max(dim_weyl(p, d) for p in parts1)),
        "n_nu": max(2, len(parts1)),
        "n_al": len(parts2),
        "n_ka": max(dim_specht(p) for p in parts2),
        "n_r2": max(dim_weyl(p, d) for p in parts2),
        "n_k": n - 1,
        "n_outcome": n - 1,
    }
    if mode == "padded":
        sizes = {k: _pow2(v) for k, v in sizes.items()}
    reuse = mode == "padded" and (d & (d - 1)) == 0
    anc_dim = sizes["n_rnu"] * sizes["n_nu"]
    a13 = anc_dim**2 // d**2 if reuse else 0
    reg1 = _register_schur(
        build_schur(n - 1, d, gauge_seed),
        sizes["n_rnu"],
        sizes["n_nu"],
        sizes["n_al"],
        sizes["n_ka"],
        parts1,
        parts2,
    )
    reg2 = _register_schur_2(
        build_schur(n - 2, d, gauge_seed),
        sizes["n_r2"],
        sizes["n_al"],
        sizes["n_ka"],
        parts2,
    )
    return EncodingSpaces(
        n=n,
        d=d,
        mode=mode,
        gauge_seed=gauge_seed,
        parts1=parts1,
        parts2=parts2,
        reuse_qudits=reuse,
        a13_dim=a13,
        reg1=reg1,
        reg2=reg2,
        **sizes,
    )


def _register_schur(
    sch: SchurTransform,
    n_rnu: int,
    n_nu: int,
    n_al: int,
    n_ka: int,
    parts1: tuple[Partition, ...],
    parts2: tuple[Partition, ...],
) -> np.ndarray:
    """Schur transform as a unitary on the label registers (r, nu, xi, j).

    Columns: the first d^(m) flat indices are the qudit basis, the rest are
    pad columns.  Rows: valid labels sit at their register positions; the
    completion pairs invalid labels with pad columns one to one, in order,
    which keeps conjugated permutations block diagonal over label sectors.
    """
    dim_q = sch.matrix.shape[0]
    total = n_rnu * n_nu * n_al * n_ka
    out = np.zeros((total, total), dtype=complex)
    valid = np.zeros(total, dtype=bool)
    for pos, (lam, r, tab) in enumerate(sch.index):
        xi = tab.restricted_shape()
        j = tableau_index(xi)[tab.growth[:-1]]
        flat = (((r - 1) * n_nu + parts1.index(lam)) * n_al + parts2.index(xi)) * n_ka + j
        out[flat, :dim_q] = sch.matrix[pos]
        valid[flat] = True
    _complete_identity(out, valid, dim_q)
    return out


def _register_schur_2(
    sch: SchurTransform,
    n_r2: int,
    n_al: int,
    n_ka: int,
    parts2: tuple[Partition, ...],
) -> np.ndarray:
    """(n-2)-qudit Schur transform on the (r, alpha, k_alpha) registers."""
    dim_q = sch.matrix.shape[0]
    total = n_r2 * n_al * n_ka
    out = np.zeros((total, total), dtype=complex)
    valid = np.zeros(total, dtype=bool)
    for pos, (lam, r, tab) in enumerate(sch.index):
        j = tableau_index(lam)[tab.growth]
        flat = ((r - 1) * n_al + parts2.index(lam)) * n_ka + j
        out[flat, :dim_q] = sch.matrix[pos]
        valid[flat] = True
    _complete_identity(out, valid, dim_q)
    return out


def _complete_identity(out: np.ndarray, valid: np.ndarray, dim_q: int) -> None:
    total = out.shape[0]
    invalid_rows = np.flatnonzero(~valid)
    pad_cols = np.arange(dim_q, total)
    if len(invalid_rows) != len(pad_cols):
        raise ArithmeticError("label count does not match register dimensions")
    out[invalid_rows, pad_cols] = 1.0


def _embedded_perm(spaces: EncodingSpaces, perm: tuple[int, ...], m: int) -> np.ndarray:
    """V(perm) on the first d^m columns of the m-qudit register space, identity
    on pad columns."""
    from .schur import permutation_operator

    total = spaces.reg1_dim if m == spaces.n - 1 else spaces.reg2_dim
    src = permutation_operator(m, spaces.d, perm).source_index()
    idx = np.arange(total)
    idx[: len(src)] = src
    out = np.zeros((total, total))
    out[np.arange(total), idx] = 1.0
    return out


# ---------------------------------------------------------------------------
# coefficient-injection matrices


@dataclass(frozen=True, eq=False)
class CoefficientMatrices:
    """P_L, P_R and the label-permutation helpers, as dense matrices on the
    (copy x irrep) ancilla tensored with the diagram register."""

    variant: str
    x: float
    p_left: np.ndarray
    p_right: np.ndarray
    p_one: np.ndarray
    p_two: np.ndarray
    c_rem: dict[Partition, float]
    collisions: tuple[tuple[int, int], ...]


def build_PL_PR(
    n: int,
    d: int,
    x: float,
    variant: str = "C",
    mode: str = "tight",
    gauge_seed: int = 0,
    r_choice: dict[Partition, int] | None = None,
) -> CoefficientMatrices:
    """Coefficient-injection unitaries for weight family ``variant``.

    For each diagram alpha the left/right matrices mix the ancilla states
    {(0, e_nu)} for its legal children with the markers (1, 0) and (1, 1);
    their shared first row carries sqrt(weight)/x with the remainder weight on
    one marker each.  ``x**2`` must dominate every per-alpha weight sum.
    Ancilla states colliding with genuine Schur labels are reported, not
    avoided; the completion convention of the register Schur unitaries makes
    them harmless.
    """
    if variant not in ("C", "Cprime"):
        raise ValueError("variant must be 'C' or 'Cprime'")
    spaces = encoding_spaces(n, d, mode, gauge_seed)
    anc = spaces.anc_dim
    dim = anc * spaces.n_al
    p_left = np.eye(dim)
    p_right = np.eye(dim)
    p_two = np.eye(dim)
    c_rem: dict[Partition, float] = {}
    for alpha in spaces.parts2:
        children = add_box(alpha, d).children
        weights = []
        for nu in children:
            c, cp = coefficients(n, d, alpha, nu)
            weights.append(c if variant == "C" else cp)
        rem = 1.0 - sum(weights) / x**2
        if rem < -1e-12:
            raise ValueError(
                f"x = {x} violates the weight constraint at alpha = {alpha}"
            )
        rem = max(rem, 0.0)
        c_rem[alpha] = rem
        states = [spaces.nu_state(nu) for nu in children]  # (0, e_nu) ancilla states
        support = states + [1 * spaces.n_nu + 0, 1 * spaces.n_nu + 1]
        m = len(children)
        first_l = np.zeros(m + 2)
        first_l[:m] = np.sqrt(np.array(weights)) / x
        first_l[m] = np.sqrt(rem)
        first_r = first_l.copy()
        first_r[m] = 0.0
        first_r[m + 1] = np.sqrt(rem)
        # rotate each completed block so its first row sits at (0, e_nu1)
        block_l = _anchored_block(first_l, anchor=0)
        block_r = _anchored_block(first_r, anchor=0)
        e_a = spaces.alpha_state(alpha)
        for bi, si in enumerate(support):
            for bj, sj in enumerate(support):
                p_left[si * spaces.n_al + e_a, sj * spaces.n_al + e_a] = block_l[bi, bj]
                p_right[si * spaces.n_al + e_a, sj * spaces.n_al + e_a] = block_r[bi, bj]
        # swap (0, 0) <-> (0, e_nu1) conditioned on alpha
        first_child = states[0]
        if first_child != 0:
            for a, b in ((0, first_child), (first_child, 0)):
                p_two[a * spaces.n_al + e_a, a * spaces.n_al + e_a] = 0.0
                p_two[a * spaces.n_al + e_a, b * spaces.n_al + e_a] = 1.0
    p_one = _copy_fixing_matrix(spaces, r_choice)
    collisions = _marker_collisions(spaces)
    for mat in (p_left, p_right, p_two):
        if np.abs(mat @ mat.T - np.eye(dim)).max() > 1e-10:
            raise ArithmeticError("coefficient matrix is not orthogonal")
    return CoefficientMatrices(
        variant, float(x), p_left, p_right, p_one, p_two, c_rem, collisions
    )


def _anchored_block(first_row: np.ndarray, anchor: int) -> np.ndarray:
    """Complete ``first_row`` to a unitary whose row ``anchor`` is that row."""
    block = unitary_complete(first_row[None, :]).real
    if anchor:
        order = list(range(block.shape[0]))
        order.insert(anchor, order.pop(0))
        block = block[np.argsort(order)]
    return block


def _copy_fixing_matrix(
    spaces: EncodingSpaces, r_choice: dict[Partition, int] | None
) -> np.ndarray:
    """Swap copy register states 0 <-> chosen copy, conditioned on the irrep
    register; identity under the default first-copy choice."""
    anc = spaces.anc_dim
    out = np.eye(anc)
    for nu in spaces.parts1:
        target = (r_choice or {}).get(nu, 1) - 1
        if target == 0:
            continue
        e_nu = spaces.nu_state(nu)
        a = 0 * spaces.n_nu + e_nu
        b = target * spaces.n_nu + e_nu
        out[a, a] = out[b, b] = 0.0
        out[a, b] = out[b, a] = 1.0
    return out


def _marker_collisions(spaces: EncodingSpaces) -> tuple[tuple[int, int], ...]:
    """Marker ancilla states that coincide with genuine (copy, irrep) labels."""
    hits = []
    for marker in ((1, 0), (1, 1)):
        e_r, e_nu = marker
        if e_nu < len(spaces.parts1) and e_r < dim_weyl(spaces.parts1[e_nu], spaces.d):
            hits.append(marker)
    return tuple(hits)


# ---------------------------------------------------------------------------
# block-encoding container


@dataclass(eq=False)
class BlockEncoding:
    """A unitary (as a structured op) encoding ``target / scale`` in the
    ancilla-zero block, restricted to the valid system states."""

    layout: Layout
    ancillas: tuple[str, ...]
    systems: tuple[str, ...]
    unitary: Op
    scale: float
    error_bound: float
    target: np.ndarray | None = None
    valid_mask: np.ndarray | None = None
    name: str = ""

    def system_dim(self) -> int:
        return prod(self.layout.dim(nm) for nm in self.systems)

    def ancilla_dim(self) -> int:
        return prod(self.layout.dim(nm) for nm in self.ancillas)

    def post_selected_block(self) -> np.ndarray:
        """scale * <0_anc| U |0_anc> over the system registers, restricted to
        the valid mask when one is set."""
        sys_dim = self.system_dim()
        mask = (
            self.valid_mask
            if self.valid_mask is not None
            else np.ones(sys_dim, dtype=bool)
        )
        cols_in = np.flatnonzero(mask)
        batch = np.zeros(self.layout.dims + (len(cols_in),), dtype=complex)
        sys_axes = [self.layout.axis(nm) for nm in self.systems]
        anc_zero = tuple(0 for _ in self.ancillas)
        sys_dims = [self.layout.dim(nm) for nm in self.systems]
        for b, flat in enumerate(cols_in):
            idx = list(np.unravel_index(flat, sys_dims))
            pos = [0] * len(self.layout.dims)
            for ax, v in zip(sys_axes, idx):
                pos[ax] = v
            batch[tuple(pos) + (b,)] = 1.0
        out = self.unitary.apply(batch, self.layout)
        # project ancillas onto zero, flatten system axes
        anc_axes = [self.layout.axis(nm) for nm in self.ancillas]
        slicer: list = [slice(None)] * out.ndim
        for ax in anc_axes:
            slicer[ax] = 0
        rows = out[tuple(slicer)]
        rows = rows.reshape(sys_dim, len(cols_in))
        return self.scale * rows[cols_in, :]

    def verify(self, tol: float | None = None) -> float:
        """Residual ||target - scale * block||; raises above ``tol``.

        Also enforces the declared-scale bound: the scale may exceed the
        target norm but never undercut it by more than the residual.
        """
        if self.target is None:
            raise ValueError("no target stored on this encoding")
        block = self.post_selected_block()
        mask = (
            self.valid_mask
            if self.valid_mask is not None
            else np.ones(self.system_dim(), dtype=bool)
        )
        keep = np.flatnonzero(mask)
        tgt = self.target
        if tgt.shape[0] == self.system_dim():
            tgt = tgt[np.ix_(keep, keep)]
        err = float(np.linalg.norm(tgt - block, 2))
        if self.scale < np.linalg.norm(tgt, 2) - err - 1e-9:
            raise ArithmeticError(f"declared scale of {self.name} undercuts the target norm")
        if tol is not None and err > tol:
            raise ArithmeticError(f"block-encoding {self.name} off by {err:.3e}")
        return err


def adjoint_encoding(enc: BlockEncoding) -> BlockEncoding:
    tgt = None if enc.target is None else enc.target.conj().T
    return BlockEncoding(
        layout=enc.layout,
        ancillas=enc.ancillas,
        systems=enc.systems,
        unitary=enc.unitary.adjoint(),
        scale=enc.scale,
        error_bound=enc.error_bound,
        target=tgt,
        valid_mask=enc.valid_mask,
        name=enc.name + "+",
    )


def product(a: BlockEncoding, b: BlockEncoding) -> BlockEncoding:
    """Encoding of (a.target @ b.target) with concatenated ancillas.

    Scale and error compose multiplicatively and additively respectively:
    (ab_scale, a_err * b_scale + b_err * a_scale).
    """
    if a.systems != b.systems:
        raise ValueError("system registers differ")
    rename_a = {nm: f"a.{nm}" for nm in a.ancillas}
    rename_b = {nm: f"b.{nm}" for nm in b.ancillas}
    regs = (
        [Register(rename_a[nm], a.layout.dim(nm)) for nm in a.ancillas]
        + [Register(rename_b[nm], b.layout.dim(nm)) for nm in b.ancillas]
        + [Register(nm, a.layout.dim(nm)) for nm in a.systems]
    )
    layout = Layout(regs)
    op_a = _rename_op(a.unitary, rename_a)
    op_b = _rename_op(b.unitary, rename_b)
    tgt = None
    if a.target is not None and b.target is not None:
        tgt = a.target @ b.target
    mask = a.valid_mask if a.valid_mask is not None else b.valid_mask
    return BlockEncoding(
        layout=layout,
        ancillas=tuple(rename_a.values()) + tuple(rename_b.values()),
        systems=a.systems,
        unitary=Composite((op_b, op_a)),
        scale=a.scale * b.scale,
        error_bound=a.error_bound * b.scale + b.error_bound * a.scale,
        target=tgt,
        valid_mask=mask,
        name=f"{a.name}*{b.name}",
    )


def _rename_op(op: Op, mapping: dict[str, str]) -> Op:
    if isinstance(op, Gate):
        return Gate(tuple(mapping.get(nm, nm) for nm in op.names), op.matrix)
    if isinstance(op, Composite):
        return Composite(tuple(_rename_op(o, mapping) for o in op.ops))
    if isinstance(op, Branched):
        return Branched(
            tuple(mapping.get(nm, nm) for nm in op.controls),
            tuple((k, _rename_op(o, mapping)) for k, o in op.branches),
        )
    raise TypeError(f"cannot rename {type(op)}")


# ---------------------------------------------------------------------------
# the concrete encodings


def _alpha_copy_matrix(spaces: EncodingSpaces) -> np.ndarray:
    """Permutation on (copy, diagram) registers adding the diagram value into
    the copy register modulo its size."""
    na = spaces.n_al
    out = np.zeros((na * na, na * na))
    for a in range(na):
        for x in range(na):
            out[((a + x) % na) * na + x, a * na + x] = 1.0
    return out


def _sandwich_matrix(
    spaces: EncodingSpaces,
    coeff: CoefficientMatrices,
    perm_a: tuple[int, ...],
    perm_b: tuple[int, ...],
) -> np.ndarray:
    """Dense unitary on (ancilla, diagram-copy, alpha, k_alpha) whose
    ancilla-zero block carries the weighted irrep-block sums for the
    permutation pair, diagonal in the diagram register.

    The diagram-copy wrap pins the final diagram value to the initial one
    under post-selection; without it the coefficient sandwich leaks
    cross-diagram terms whenever two diagrams share a child irrep (any
    n >= 4).  The copy register is trivial when only one diagram exists.
    """
    n, d = spaces.n, spaces.d
    reg = spaces.reg1
    ka_eye = np.eye(spaces.n_ka)
    middle = (
        reg
        @ _embedded_perm(spaces, perm_a, n - 1)
        @ _embedded_perm(spaces, perm_b, n - 1)
        @ reg.conj().T
    )
    p1 = np.kron(coeff.p_one, np.eye(spaces.n_al * spaces.n_ka))
    pl = np.kron(coeff.p_left, ka_eye)
    pr = np.kron(coeff.p_right, ka_eye)
    p2 = np.kron(coeff.p_two, ka_eye)
    core = p2 @ pl @ p1 @ middle @ p1 @ pr.conj().T @ p2
    # lift (anc, al, ka) -> (anc, acopy, al, ka) and wrap with the copy pair
    anc, na, ka = spaces.anc_dim, spaces.n_al, spaces.n_ka
    core4 = core.reshape(anc, na * ka, anc, na * ka)
    lifted = np.einsum("aibj,cd->acibdj", core4, np.eye(na)).reshape(
        anc * na * na * ka, anc * na * na * ka
    )
    copy = np.kron(np.eye(anc), np.kron(_alpha_copy_matrix(spaces), ka_eye))
    return copy.T @ lifted @ copy


def dense_O(
    spaces: EncodingSpaces,
    perm_a: tuple[int, ...],
    perm_b: tuple[int, ...],
    variant: str = "C",
) -> np.ndarray:
    """Direct evaluation of the weighted sum of Schur-submatrix products, as
    an operator on the (alpha, k_alpha) registers (zero outside valid labels)."""
    n, d = spaces.n, spaces.d
    sch = build_schur(n - 1, d, spaces.gauge_seed)
    from .schur import permutation_dense

    va = permutation_dense(n - 1, d, perm_a)
    vb = permutation_dense(n - 1, d, perm_b)
    dim = spaces.n_al * spaces.n_ka
    out = np.zeros((dim, dim), dtype=complex)
    for alpha in spaces.parts2:
        e_a = spaces.alpha_state(alpha)
        d_alpha = dim_specht(alpha)
        acc = np.zeros((d_alpha, d_alpha), dtype=complex)
        for nu in add_box(alpha, d).children:
            c, cp = coefficients(n, d, alpha, nu)
            w = c if variant == "C" else cp
            u_nu = submatrix_U_nu_alpha(sch, nu, alpha)
            acc += w * (u_nu @ va @ vb @ u_nu.conj().T)
        sl = slice(e_a * spaces.n_ka, e_a * spaces.n_ka + d_alpha)
        out[sl, sl] = acc
    return out


def _o_valid_mask(spaces: EncodingSpaces) -> np.ndarray:
    mask = np.zeros(spaces.n_al * spaces.n_ka, dtype=bool)
    for alpha in spaces.parts2:
        e_a = spaces.alpha_state(alpha)
        mask[e_a * spaces.n_ka : e_a * spaces.n_ka + dim_specht(alpha)] = True
    return mask


def encode_O(
    n: int,
    d: int,
    tw: TwistedSchur | None,
    k: int,
    i: int,
    x: float,
    mode: str = "tight",
    gauge_seed: int = 0,
) -> BlockEncoding:
    """Block-encoding of the diagram-conditioned weighted irrep sums for port
    pair (k, i), with scale x**2 and the (copy, irrep) pair as ancilla."""
    spaces = encoding_spaces(n, d, mode, gauge_seed)
    coeff = build_PL_PR(n, d, x, "C", mode, gauge_seed)
    mat = _sandwich_matrix(spaces, coeff, port_cycle(k, n), port_cycle(i, n))
    layout = Layout(
        [
            Register("anc", spaces.anc_dim),
            Register("acopy", spaces.n_al),
            Register("al", spaces.n_al),
            Register("ka", spaces.n_ka),
        ]
    )
    return BlockEncoding(
        layout=layout,
        ancillas=("anc", "acopy"),
        systems=("al", "ka"),
        unitary=Gate(("anc", "acopy", "al", "ka"), mat),
        scale=x**2,
        error_bound=0.0,
        target=dense_O(spaces, port_cycle(k, n), port_cycle(i, n), "C"),
        valid_mask=_o_valid_mask(spaces),
        name=f"O(k={k},i={i})",
    )


def _us_matrix(d: int) -> np.ndarray:
    """Two-qudit unitary sending the maximally entangled state to |00>."""
    return unitary_complete(maximally_entangled(d)[None, :])


def encode_Phi(n: int, d: int, mode: str = "tight", gauge_seed: int = 0) -> BlockEncoding:
    """Block-encoding of the squared-up entangling stage: the register Schur
    transform tensored with the projection of qudits n-1, n onto the
    maximally entangled state, scale sqrt(d), one ancilla qubit."""
    spaces = encoding_spaces(n, d, mode, gauge_seed)
    layout = Layout([Register("A2", 2)] + spaces.system_registers())
    ops = _phi_ops(spaces, "A2")
    us = _us_matrix(d)
    proj = np.zeros((d * d, d * d))
    proj[0, 0] = 1.0
    phi_tilde = np.sqrt(d) * np.kron(spaces.reg2, proj @ us)
    return BlockEncoding(
        layout=layout,
        ancillas=("A2",),
        systems=tuple(r.name for r in spaces.system_registers()),
        unitary=Composite(ops),
        scale=float(np.sqrt(d)),
        error_bound=0.0,
        target=phi_tilde,
        valid_mask=None,
        name="Phi",
    )


def _phi_ops(spaces: EncodingSpaces, flag: str) -> tuple[Op, ...]:
    d = spaces.d
    us = Gate(("qm", "qn"), _us_matrix(d).astype(complex))
    sch = Gate(("r2", "al", "ka"), spaces.reg2)
    mark = Gate((flag, "qm", "qn"), controlled_not_gate(2, [d, d]).astype(complex))
    return (us, sch, mark)


def _vl_gate(spaces: EncodingSpaces, k: int) -> Gate:
    """Port permutation (k, n-1) on the physical qudits, identity on pads."""
    from .schur import permutation_operator

    n, d = spaces.n, spaces.d
    perm = embed_perm(port_cycle(k, n), n)
    src = permutation_operator(n, d, perm).source_index()
    total = spaces.system_dim
    idx = np.arange(total)
    mask = np.flatnonzero(spaces.system_mask())
    idx[mask] = mask[src]
    mat = np.zeros((total, total), dtype=complex)
    mat[np.arange(total), idx] = 1.0
    return Gate(("r2", "al", "ka", "qm", "qn"), mat)


@dataclass(eq=False)
class LedgerRow:
    name: str
    scale: float
    ancilla_qubits: int | None
    ancilla_dim: int
    error: float


def _central_gates(
    spaces: EncodingSpaces,
    mats: tuple[np.ndarray, ...] | np.ndarray,
    primed: bool,
) -> tuple[Op, ...]:
    """The middle stage: coefficient sandwiches on the ancilla pair, wrapped
    in the two nonzero-state markers on qudits n-1, n."""
    d = spaces.d
    mark12 = Gate(("A12", "qm", "qn"), controlled_not_gate(2, [d, d]).astype(complex))
    mark11 = Gate(("A11", "qm", "qn"), controlled_not_gate(2, [d, d]).astype(complex))
    if spaces.reuse_qudits:
        anc_names = ("qm", "qn", "A13", "acopyl", "acopyr", "al", "ka")
        mat = _pair_matrix(spaces, mats if primed else mats[0],
                           None if primed else mats[1])
        gates: tuple[Op, ...] = (Gate(anc_names, mat),)
    else:
        if primed:
            gates = (Gate(("ancl", "acopyl", "al", "ka"), mats),)
        else:
            gates = (
                Gate(("ancr", "acopyr", "al", "ka"), mats[1].conj().T),
                Gate(("ancl", "acopyl", "al", "ka"), mats[0]),
            )
    return (mark12,) + gates + (mark11,)


def _pair_matrix(
    spaces: EncodingSpaces, left: np.ndarray, right: np.ndarray | None
) -> np.ndarray:
    """Two-copy central stage as one dense matrix, with the copy ancilla pair
    flattened so it can be stored in (qm, qn, A13); the adjoint sandwich on
    the second copy is applied first."""
    anc, na, ka = spaces.anc_dim, spaces.n_al, spaces.n_ka
    sub = Layout(
        [
            Register("ancl", anc),
            Register("ancr", anc),
            Register("acopyl", na),
            Register("acopyr", na),
            Register("al", na),
            Register("ka", ka),
        ]
    )
    ops: list[Op] = []
    if right is not None:
        ops.append(Gate(("ancr", "acopyr", "al", "ka"), right.conj().T))
    ops.append(Gate(("ancl", "acopyl", "al", "ka"), left))
    return to_matrix(Composite(tuple(ops)), sub)


def summand_ops(
    spaces: EncodingSpaces,
    coeff: CoefficientMatrices,
    coeff_primed: CoefficientMatrices,
    i: int,
    kl: int,
    kr: int,
    primed: bool,
) -> Composite:
    """One controlled branch body: port permutations, entangling stage,
    central coefficient sandwich, and the reverse entangling stage."""
    n = spaces.n
    if primed:
        mats: tuple[np.ndarray, ...] | np.ndarray = _sandwich_matrix(
            spaces, coeff_primed, port_cycle(kl, n), port_cycle(kr, n)
        )
    else:
        mats = (
            _sandwich_matrix(spaces, coeff, port_cycle(kl, n), port_cycle(i, n)),
            _sandwich_matrix(spaces, coeff, port_cycle(kr, n), port_cycle(i, n)),
        )
    phi_in = _phi_ops(spaces, "A2")
    phi_out = Composite(_phi_ops(spaces, "A3")).adjoint().ops
    center = _central_gates(spaces, mats, primed)
    return Composite(
        (_vl_gate(spaces, kr),)
        + phi_in
        + center
        + phi_out
        + (_vl_gate(spaces, kl),)
    )


def _mixer(first_row: np.ndarray) -> np.ndarray:
    return unitary_complete(first_row[None, :] / np.linalg.norm(first_row))


def port_mixer(spaces: EncodingSpaces) -> np.ndarray:
    """Uniform superposition over the n-1 genuine port states."""
    row = np.zeros(spaces.n_k)
    row[: spaces.n - 1] = 1.0
    return _mixer(row)


def branch_mixers(n: int, d: int, x: float, xp: float) -> tuple[np.ndarray, np.ndarray, float]:
    """The two 4-state mixers weighting the three summand families, and their
    shared normalization."""
    a = (n - 1) ** 1.25 * np.sqrt(d) * x**2
    b = (n - 1) * np.sqrt(d) * xp
    c = (a**2 + b**2 + 1) ** -0.5
    left = np.array([a, b, 1.0, 0.0]) * c
    right = np.array([a, -b, 1.0, 0.0]) * c
    return _mixer(left), _mixer(right), c


def encode_kraus(
    n: int,
    d: int,
    tw: TwistedSchur,
    i: int,
    x: float | None = None,
    xp: float | None = None,
    mode: str = "tight",
    gauge_seed: int = 0,
) -> BlockEncoding:
    """Full block-encoding of the Kraus operator for outcome ``i``.

    The three summand families (support part, complement superposition part,
    identity) are weighted by the 4-state mixers and the port-superposition
    registers; the scale is
    (n-1)^2 d x^4 + (n-1)^(3/2) d x'^2 + (n-1)^(-1/2).
    """
    if x is None:
        x = float(np.sqrt(d))
    if xp is None:
        xp = float(np.sqrt(d))
    spaces = encoding_spaces(n, d, mode, gauge_seed)
    coeff = build_PL_PR(n, d, x, "C", mode, gauge_seed)
    coeffp = build_PL_PR(n, d, xp, "Cprime", mode, gauge_seed)
    layout = Layout(_kraus_registers(spaces))
    u_l, u_r, _ = branch_mixers(n, d, x, xp)
    u_k = port_mixer(spaces)

    branches = []
    for kl in range(n - 1):
        for kr in range(n - 1):
            branches.append(
                ((0, kl, kr), summand_ops(spaces, coeff, coeffp, i, kl + 1, kr + 1, False))
            )
            branches.append(
                ((1, kl, kr), summand_ops(spaces, coeff, coeffp, i, kl + 1, kr + 1, True))
            )
    center = Branched(("A4", "kl", "kr"), tuple(branches))
    ops = (
        Gate(("A4",), u_r.conj().T.astype(complex)),
        Gate(("kl",), u_k.conj().T.astype(complex)),
        Gate(("kr",), u_k.conj().T.astype(complex)),
        center,
        Gate(("kl",), u_k.astype(complex)),
        Gate(("kr",), u_k.astype(complex)),
        Gate(("A4",), u_l.astype(complex)),
    )
    scale = (n - 1) ** 2 * d * x**4 + (n - 1) ** 1.5 * d * xp**2 + (n - 1) ** -0.5
    from .pbt import kraus_from_twisted

    target = kraus_from_twisted(n, d, tw, i)
    mask = spaces.system_mask()
    anc_names = tuple(
        r.name for r in _kraus_registers(spaces) if r.name not in
        {"r2", "al", "ka", "qm", "qn"}
    )
    return BlockEncoding(
        layout=layout,
        ancillas=anc_names,
        systems=("r2", "al", "ka", "qm", "qn"),
        unitary=Composite(ops),
        scale=float(scale),
        error_bound=0.0,
        target=target,
        valid_mask=mask,
        name=f"sqrtPi({i})",
    )


def _kraus_registers(spaces: EncodingSpaces) -> list[Register]:
    regs = [
        Register("A4", 4),
        Register("kl", spaces.n_k),
        Register("kr", spaces.n_k),
        Register("A3", 2),
        Register("A11", 2),
        Register("A12", 2),
    ]
    if spaces.reuse_qudits:
        regs.append(Register("A13", spaces.a13_dim))
    else:
        regs.append(Register("ancl", spaces.anc_dim))
        regs.append(Register("ancr", spaces.anc_dim))
    regs.append(Register("acopyl", spaces.n_al))
    regs.append(Register("acopyr", spaces.n_al))
    regs.append(Register("A2", 2))
    return regs + spaces.system_registers()


def kraus_ledger(
    n: int, d: int, x: float, xp: float, mode: str, gauge_seed: int = 0
) -> list[LedgerRow]:
    """Scale and ancilla accounting for every named encoding stage.

    In padded mode the qubit counts follow the reuse-layout accounting, with the
    central ancilla pair stored in the two freed qudit registers.
    """
    spaces = encoding_spaces(n, d, mode, gauge_seed)
    qubits = spaces.ledger_logs() if mode == "padded" else None

    def q(expr: int | None) -> int | None:
        return expr if mode == "padded" else None

    anc = spaces.anc_dim * spaces.n_al  # includes the diagram-copy register
    central = 4 * spaces.n_al**2 * (
        spaces.a13_dim if spaces.reuse_qudits else spaces.anc_dim**2
    )
    full_anc = prod(
        r.dim
        for r in _kraus_registers(spaces)
        if r.name not in {"r2", "al", "ka", "qm", "qn"}
    )
    alpha = (n - 1) ** 2 * d * x**4 + (n - 1) ** 1.5 * d * xp**2 + (n - 1) ** -0.5
    # the + qubits["n_al"] terms account for the diagram-copy registers; they
    # vanish whenever a single diagram exists (in particular at n = 3)
    rows = [
        LedgerRow(
            "O(alpha,k,i)",
            x**2,
            q(qubits["n_rnu"] + qubits["n_nu"] + qubits["n_al"]) if qubits else None,
            anc,
            0.0,
        ),
        LedgerRow(
            "O_cen(i,kl,kr)",
            x**4,
            q(2 * (qubits["n_rnu"] + qubits["n_nu"] + qubits["n_al"]))
            if qubits
            else None,
            anc**2,
            0.0,
        ),
        LedgerRow("Phi", float(np.sqrt(d)), q(1) if qubits else None, 2, 0.0),
        LedgerRow(
            "O_cen_tilde(i,kl,kr)",
            x**4,
            q(
                2 * qubits["n_rnu"]
                + 2 * qubits["n_nu"]
                + 2 * qubits["n_al"]
                - 2 * qubits["d"]
                + 2
            )
            if qubits
            else None,
            central,
            0.0,
        ),
        LedgerRow(
            "summand(i,kl,kr)",
            d * x**4,
            q(
                2 * qubits["n_rnu"]
                + 2 * qubits["n_nu"]
                + 2 * qubits["n_al"]
                - 2 * qubits["d"]
                + 4
            )
            if qubits
            else None,
            4 * central,
            0.0,
        ),
        LedgerRow(
            "sqrtPi(i)",
            float(alpha),
            q(
                2 * qubits["n_rnu"]
                + 2 * qubits["n_nu"]
                + 2 * qubits["n_al"]
                - 2 * qubits["d"]
                + 2 * qubits["ports"]
                + 6
            )
            if qubits
            else None,
            full_anc,
            0.0,
        ),
    ]
    return rows


# ---------------------------------------------------------------------------
# Naimark dilation


@dataclass(eq=False)
class NaimarkDilation:
    """Outcome-controlled Kraus encodings plus the outcome-superposition
    preparer; applying ``v_op`` to the all-zero ancilla implements the
    measurement dilation up to the shared encoding scale."""

    layout: Layout
    outcome_register: str
    u0: np.ndarray
    uc_op: Op
    v_op: Op
    scale: float
    n_outcomes: int


def naimark_Uc(n: int, d: int, encodings: list[BlockEncoding]) -> NaimarkDilation:
    """Combine per-outcome encodings into the outcome-controlled unitary and
    the uniform-superposition preparer."""
    if len(encodings) != n - 1:
        raise ValueError(f"need {n - 1} encodings")
    base = encodings[0]
    for enc in encodings:
        if enc.layout.names != base.layout.names or enc.scale != base.scale:
            raise ValueError("encodings must share layout and scale")
    n_i = base.layout.dim("kl")  # matches the mode's port-register sizing
    layout = Layout([Register("I", n_i)] + list(base.layout.registers))
    col = np.zeros(n_i)
    col[: n - 1] = 1.0 / np.sqrt(n - 1)
    u0 = unitary_complete(col[None, :]).conj().T  # first column is the superposition
    uc = Branched(
        ("I",), tuple(((idx,), enc.unitary) for idx, enc in enumerate(encodings))
    )
    v = Composite((Gate(("I",), u0.astype(complex)), uc))
    return NaimarkDilation(
        layout=layout,
        outcome_register="I",
        u0=u0,
        uc_op=uc,
        v_op=v,
        scale=base.scale,
        n_outcomes=n - 1,
    )


def naimark_W(kraus: list[np.ndarray], n_i: int) -> np.ndarray:
    """Dense reference dilation unitary on (outcome register x system) whose
    zero-outcome column block stacks the Kraus operators."""
    dim = kraus[0].shape[0]
    cols = np.zeros((n_i * dim, dim), dtype=complex)
    for idx, k in enumerate(kraus):
        cols[idx * dim : (idx + 1) * dim, :] = k
    gram = cols.conj().T @ cols
    if np.abs(gram - np.eye(dim)).max() > 1e-8:
        raise ArithmeticError("Kraus columns are not isometric")
    return unitary_complete(cols.conj().T).conj().T
