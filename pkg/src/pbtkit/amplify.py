"""Oblivious amplitude amplification of the measurement dilation.

The dilation followed by ancilla post-selection implements the target
isometry only with amplitude 1/(scale * sqrt(n-1)).  Inflating the declared
scale until that amplitude equals sin(pi/2m) for an odd m, the alternating
phase sequence boosts it to one; reflections are evaluated through the
involution identity, so no matrix exponentials are ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import asin, ceil, pi, sin

import numpy as np

from .registers import Composite, Layout, Op


@dataclass(frozen=True, eq=False)
class AmplificationPlan:
    """Phase schedule and projectors for one amplification run.

    The first phase is (1-m) pi/2 and the rest are pi/2; the inflated scale
    satisfies sin(pi/2m) * inflated_scale * sqrt(ports) = 1 exactly.
    """

    m: int
    phases: tuple[float, ...]
    inflated_scale: float
    ports: int
    start_projector: np.ndarray | None = None  # diagonal mask over the layout
    end_projector: np.ndarray | None = None

    @property
    def inflated_total(self) -> float:
        return 1.0 / sin(pi / (2 * self.m))


def plan(
    scale_total: float,
    ports: int = 1,
    start_projector: np.ndarray | None = None,
    end_projector: np.ndarray | None = None,
) -> AmplificationPlan:
    """Choose the smallest odd m with sin(pi/2m) <= 1/scale_total and inflate
    the scale so the amplitude condition is met with equality."""
    if scale_total < 1.0 - 1e-12:
        raise ValueError("total scale must be at least 1")
    scale_total = max(scale_total, 1.0)
    tol = 1.0 + 1e-9  # keep exact-boundary cases (e.g. total scale 2) at small m
    m = max(1, ceil(pi / (2 * asin(min(1.0, 1.0 / scale_total)))))
    if m % 2 == 0:
        m += 1
    while m > 2 and sin(pi / (2 * (m - 2))) <= tol / scale_total:
        m -= 2
    phases = ((1 - m) * pi / 2,) + (pi / 2,) * (m - 1)
    inflated = 1.0 / (np.sqrt(ports) * sin(pi / (2 * m)))
    return AmplificationPlan(
        m=m,
        phases=phases,
        inflated_scale=float(inflated),
        ports=ports,
        start_projector=start_projector,
        end_projector=end_projector,
    )


class FullDiagonal(Op):
    """Diagonal over the whole layout (flat values)."""

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=complex)

    def apply(self, arr: np.ndarray, layout: Layout) -> np.ndarray:
        shape = layout.dims + (1,) * (arr.ndim - len(layout.dims))
        return arr * self.values.reshape(shape)

    def adjoint(self) -> "FullDiagonal":
        return FullDiagonal(self.values.conj())


def amplified_V(v: Op, plan_: AmplificationPlan) -> Op:
    """The phase-modulated product boosting the post-selected amplitude.

    v is applied m times in alternation with its adjoint and reflections
    about the start and end projectors; all interior phases are pi/2 and the
    leading end-reflection carries (1-m) pi/2.  m = 1 returns v unchanged.
    """
    if plan_.m == 1:
        return v
    if plan_.start_projector is None or plan_.end_projector is None:
        raise ValueError("plan carries no projectors")
    start = plan_.start_projector.astype(bool)
    end = plan_.end_projector.astype(bool)
    m = plan_.m
    vdag = v.adjoint()
    half = pi / 2
    ops: list[Op] = []
    for _ in range((m - 1) // 2):
        ops.extend([v, _phase_op(end, half), vdag, _phase_op(start, half)])
    ops.append(v)
    ops.append(_phase_op(end, plan_.phases[0]))
    ops.append(_scalar_op((-1.0) ** ((m - 1) // 2)))
    return Composite(tuple(ops))


def _phase_op(mask: np.ndarray, phase: float) -> FullDiagonal:
    vals = np.where(mask, np.exp(1j * phase), np.exp(-1j * phase))
    return FullDiagonal(vals)


class _scalar_op(Op):
    def __init__(self, factor: complex):
        self.factor = factor

    def apply(self, arr: np.ndarray, layout: Layout) -> np.ndarray:
        return self.factor * arr

    def adjoint(self) -> "_scalar_op":
        return _scalar_op(np.conj(self.factor))


# ---------------------------------------------------------------------------
# end-to-end verification against the dense dilation


@dataclass(eq=False)
class EndToEndResult:
    """Reference and amplified protocol states plus every residual of the
    dilation-and-amplification chain."""

    n: int
    d: int
    variant: str
    m: int
    epsilon: float
    w_residual: float  # || W/(scale sqrt(ports)) - P_end V P_start ||
    amplified_residual: float  # || W - P_end V~ P_start ||
    amplified_bound: float  # 2 m epsilon
    rho_g_reference: np.ndarray  # pure-state vector on the protocol layout
    rho_g_amplified: np.ndarray
    # trace distance on the outcome and physical registers, ancillas traced out
    discrepancy: float
    probability_error: float
    ancilla_purity: float
    ancilla_zero_weight: float


def _system_columns(pipe) -> np.ndarray:
    """Batch of initial basis columns: outcome and ancilla registers at zero,
    the physical system running over its basis."""
    layout = pipe.layout
    keep = np.flatnonzero(pipe.system_mask)
    batch = np.zeros(layout.dims + (len(keep),), dtype=complex)
    sys_names = ("r2", "al", "ka", "qm", "qn")
    sys_dims = tuple(layout.dim(nm) for nm in sys_names)
    for b, flat in enumerate(keep):
        pos = dict(zip(sys_names, np.unravel_index(flat, sys_dims)))
        idx = tuple(pos.get(nm, 0) for nm in layout.names) + (b,)
        batch[idx] = 1.0
    return batch


def _w_columns(pipe, kraus: list[np.ndarray]) -> np.ndarray:
    """Columns of the dense dilation embedded in the protocol layout."""
    layout = pipe.layout
    keep = np.flatnonzero(pipe.system_mask)
    dim_h = len(keep)
    out = np.zeros((layout.size, dim_h), dtype=complex)
    sys_names = ("r2", "al", "ka", "qm", "qn")
    strides = _flat_strides(layout)
    i_axis = layout.axis(pipe.naimark.outcome_register)
    sys_flat_offset = [
        sum(p * strides[layout.axis(nm)] for p, nm in zip(np.unravel_index(f, tuple(layout.dim(nm) for nm in sys_names)), sys_names))
        for f in keep
    ]
    for i, k in enumerate(kraus):
        base = (i) * strides[i_axis]
        for col in range(dim_h):
            amps = k[:, col]
            for row, amp in enumerate(amps):
                if amp != 0.0:
                    out[base + sys_flat_offset[row], col] += amp
    return out


def _flat_strides(layout: Layout) -> list[int]:
    strides = [1] * len(layout.dims)
    for a in range(len(layout.dims) - 2, -1, -1):
        strides[a] = strides[a + 1] * layout.dims[a + 1]
    return strides


def dilation_residuals(pipe, kraus: list[np.ndarray]) -> tuple[float, float]:
    """Spectral-norm residuals of the sub-normalized and amplified dilations
    against the dense reference, computed column by column."""
    layout = pipe.layout
    n_ports = pipe.plan.ports
    cols_in = _system_columns(pipe)
    w_cols = _w_columns(pipe, kraus)
    end = pipe.plan.end_projector.reshape(layout.dims + (1,)).astype(float)

    out_v = pipe.naimark.v_op.apply(cols_in, layout) * end
    flat_v = out_v.reshape(layout.size, -1)
    sub = w_cols / (pipe.naimark.scale * np.sqrt(n_ports))
    w_res = float(np.linalg.svd(sub - flat_v, compute_uv=False)[0])

    out_a = pipe.v_amp.apply(cols_in, layout) * end
    flat_a = out_a.reshape(layout.size, -1)
    amp_res = float(np.linalg.svd(w_cols - flat_a, compute_uv=False)[0])
    return w_res, amp_res


def end_to_end(
    n: int, d: int, variant: str = "compressed", mode: str = "tight"
) -> EndToEndResult:
    """Drive the full pipeline at (n, d) and compare against the dense
    dilation: operator residuals, protocol-state trace distance, outcome
    probabilities and ancilla cleanliness."""
    from .pbt import kraus_from_twisted
    from .simulate import ProtocolRun, build_pipeline, initial_state, run
    from .twisted import build_twisted, maximally_entangled

    tw = build_twisted(n, d)
    kraus = [kraus_from_twisted(n, d, tw, i) for i in range(1, n)]

    bare = build_pipeline(n, d, variant, mode, with_bob=False, with_ref=False, tw=tw)
    w_res, amp_res = dilation_residuals(bare, kraus)

    pipe = build_pipeline(n, d, variant, mode, with_bob=True, with_ref=True, tw=tw)
    layout = pipe.layout
    psi0 = initial_state(pipe, maximally_entangled(d))
    v_out = pipe.v_amp.apply(psi0, layout)

    # reference: the dense dilation applied to the same initial state
    w_out = np.zeros_like(psi0)
    i_axis = layout.axis("I")
    zero_slice = [slice(None)] * psi0.ndim
    zero_slice[i_axis] = slice(0, 1)
    start = psi0[tuple(zero_slice)]
    from .registers import Gate

    sys_names = ("r2", "al", "ka", "qm", "qn")
    keep = np.flatnonzero(pipe.system_mask)
    total = int(np.prod([layout.dim(nm) for nm in sys_names]))
    for i, k in enumerate(kraus):
        padded = np.zeros((total, total), dtype=complex)
        padded[np.ix_(keep, keep)] = k
        gate = Gate(sys_names, padded)
        moved = gate.apply(start, layout)
        sl = [slice(None)] * psi0.ndim
        sl[i_axis] = slice(i, i + 1)
        w_out[tuple(sl)] = moved

    discrepancy = _reduced_trace_distance(pipe, w_out, v_out)

    # outcome probabilities against the dense engine
    dense = run(ProtocolRun(n, d, engine="dense-W"))
    ampl = run(ProtocolRun(n, d, engine="amplified-V", variant=variant, mode=mode))
    prob_err = float(
        np.abs(np.array(dense.probabilities) - np.array(ampl.probabilities)).max()
    )

    purity, zero_weight = _ancilla_cleanliness(pipe, v_out)
    return EndToEndResult(
        n=n,
        d=d,
        variant=variant,
        m=pipe.plan.m,
        epsilon=pipe.epsilon,
        w_residual=w_res,
        amplified_residual=amp_res,
        amplified_bound=2 * pipe.plan.m * pipe.epsilon + 1e-9,
        rho_g_reference=w_out,
        rho_g_amplified=v_out,
        discrepancy=discrepancy,
        probability_error=prob_err,
        ancilla_purity=purity,
        ancilla_zero_weight=zero_weight,
    )


def _anc_axes(pipe) -> list[int]:
    layout = pipe.layout
    keep = {"I", "r2", "al", "ka", "qm", "qn", "R"}
    return [
        layout.axis(nm)
        for nm in layout.names
        if nm not in keep and not nm.startswith("B")
    ]


def _reduced_trace_distance(pipe, w: np.ndarray, v: np.ndarray) -> float:
    """Trace distance between the two protocol states after tracing out the
    block-encoding ancillas (the registers the protocol discards)."""
    axes = _anc_axes(pipe)
    rest = [a for a in range(w.ndim) if a not in axes]

    def reduced(state: np.ndarray) -> np.ndarray:
        moved = np.transpose(state, axes + rest)
        mat = moved.reshape(int(np.prod([state.shape[a] for a in axes])), -1)
        return mat.T @ mat.conj()

    diff = reduced(w) - reduced(v)
    evals = np.linalg.eigvalsh(diff)
    return float(np.abs(evals).sum())


def _ancilla_cleanliness(pipe, state: np.ndarray) -> tuple[float, float]:
    """Purity of the reduced ancilla state and its weight on all-zero."""
    layout = pipe.layout
    anc = [
        nm
        for nm in layout.names
        if nm not in {"I", "r2", "al", "ka", "qm", "qn"}
        and not nm.startswith("B")
        and nm != "R"
    ]
    axes = [layout.axis(nm) for nm in anc]
    perm = axes + [a for a in range(state.ndim) if a not in axes]
    moved = np.transpose(state, perm)
    adim = int(np.prod([layout.dim(nm) for nm in anc]))
    mat = moved.reshape(adim, -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    probs = sv**2 / (sv**2).sum()
    purity = float((probs**2).sum())
    zero_weight = float((np.abs(mat[0]) ** 2).sum() / (sv**2).sum())
    return purity, zero_weight
