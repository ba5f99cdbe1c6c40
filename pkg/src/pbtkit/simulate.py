"""End-to-end teleportation runs.

The dense engine evaluates outcome probabilities and post-measurement states
directly from the measurement operators.  The amplified engine drives the
full register pipeline: outcome-controlled Kraus encodings, the
outcome-superposition preparer and the oblivious amplification sequence,
applied to the physical initial state as a structured operator; its
probabilities are conditioned on the block-encoding ancillas returning to
zero, which is the event the amplification boosts to near certainty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod

import numpy as np

from .amplify import AmplificationPlan, amplified_V, plan
from .blockenc import (
    BlockEncoding,
    NaimarkDilation,
    encode_kraus,
    encoding_spaces,
    naimark_Uc,
    unitary_dilation,
)
from .pbt import Povm, _port_resource_state, pgm_dense
from .schur import permutation_dense
from .symrep import embed_perm, transposition
from .registers import Gate, Layout, Op, Register
from .twisted import TwistedSchur, build_twisted, maximally_entangled


@dataclass(frozen=True)
class ProtocolRun:
    """One protocol configuration.

    ``input_state``: a d x d density matrix, or "entangled" for the
    maximally-entangled-with-reference figure-of-merit mode.
    ``engine``: "dense-W" or "amplified-V";  the amplified engine accepts a
    ``variant`` of "honest" (full encoding scale) or "compressed" (direct
    one-qubit dilations at scale sqrt(d), giving a small phase count).
    """

    n: int
    d: int
    input_state: np.ndarray | str = "entangled"
    engine: str = "dense-W"
    seed: int = 0
    variant: str = "compressed"
    mode: str = "tight"


@dataclass(eq=False)
class ProtocolReport:
    n: int
    d: int
    engine: str
    probabilities: list[float]
    outcome_states: list[np.ndarray]
    fidelity: float
    discrepancy: float
    ancilla_weight: float = 1.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "d": self.d,
                "engine": self.engine,
                "probabilities": self.probabilities,
                "fidelity": self.fidelity,
                "discrepancy": self.discrepancy,
            }
        )


def _input_branches(spec: ProtocolRun) -> tuple[list[tuple[float, np.ndarray]], bool]:
    """Pure-state branches of the input, plus whether a reference is used."""
    d = spec.d
    if isinstance(spec.input_state, str):
        if spec.input_state != "entangled":
            raise ValueError(f"unknown input mode {spec.input_state!r}")
        return [(1.0, maximally_entangled(d))], True
    eta = np.asarray(spec.input_state, dtype=complex)
    if eta.shape != (d, d):
        raise ValueError("input state must be d x d")
    if abs(np.trace(eta).real - 1.0) > 1e-9:
        raise ValueError("input state must have unit trace")
    evals, evecs = np.linalg.eigh(eta)
    branches = [
        (float(w), evecs[:, j]) for j, w in enumerate(evals) if w > 1e-12
    ]
    return branches, False


def _dense_probabilities(n: int, d: int, povm: Povm, eta: np.ndarray) -> list[float]:
    """p(i) = tr(Pi_i (I/d^(n-1) (x) eta))."""
    rest = np.eye(d ** (n - 1)) / d ** (n - 1)
    state = np.kron(rest, eta)
    return [float(np.real(np.trace(op @ state))) for op in povm.operators]


def _average_input(spec: ProtocolRun) -> np.ndarray:
    if isinstance(spec.input_state, str):
        return np.eye(spec.d, dtype=complex) / spec.d
    return np.asarray(spec.input_state, dtype=complex)


def run(spec: ProtocolRun) -> ProtocolReport:
    """Execute the protocol and report per-outcome data and fidelity."""
    if spec.engine == "dense-W":
        return _run_dense(spec)
    if spec.engine == "amplified-V":
        return _run_amplified(spec)
    raise ValueError(f"unknown engine {spec.engine!r}")


def _run_dense(spec: ProtocolRun) -> ProtocolReport:
    n, d = spec.n, spec.d
    povm = pgm_dense(n, d)
    probs = _dense_probabilities(n, d, povm, _average_input(spec))
    phi = maximally_entangled(d)
    pair = np.outer(phi, phi.conj())
    states = []
    fidelity = 0.0
    if isinstance(spec.input_state, str):
        # teleport half of a maximally entangled pair; fidelity is the
        # overlap of the joint output with the maximally entangled state
        for i, op in enumerate(povm.operators, start=1):
            out = _entangled_branch(n, d, i, op)
            states.append(out / max(np.trace(out).real, 1e-30))
            fidelity += float(np.real(phi.conj() @ out @ phi))
    else:
        eta = np.asarray(spec.input_state, dtype=complex)
        for i, op in enumerate(povm.operators, start=1):
            joint = np.kron(op, np.eye(d)) @ _port_resource_state(n, d, i, pair, eta)
            out = joint.reshape(d**n, d, d**n, d).trace(axis1=0, axis2=2)
            states.append(out / max(np.trace(out).real, 1e-30))
            fidelity += float(np.real(np.trace(eta @ out)))
    return ProtocolReport(
        n=n,
        d=d,
        engine=spec.engine,
        probabilities=probs,
        outcome_states=states,
        fidelity=fidelity,
        discrepancy=0.0,
    )


def _entangled_branch(n: int, d: int, i: int, op: np.ndarray) -> np.ndarray:
    """Unnormalized joint (receiver, reference) output for one outcome when
    teleporting half of a maximally entangled pair.

    The joint system is (ports 1..n-1, input qudit, receiver qudit,
    reference); the resource entangles port i with the receiver and the input
    with the reference.
    """
    phi = maximally_entangled(d)
    pair = np.outer(phi, phi.conj())
    # four-qudit block on (port n-1, input, receiver, reference): start from
    # (port, receiver) x (input, reference) and swap the middle factors
    four = np.kron(pair, pair).reshape((d,) * 8)
    four = four.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d**4, d**4)
    rest = np.eye(d ** (n - 2)) / d ** (n - 2)
    state = np.kron(rest, four)
    move = permutation_dense(
        n + 2, d, embed_perm(transposition(i - 1, n - 2, n - 1), n + 2)
    )
    state = move @ state @ move.conj().T
    dim = d**n
    full = np.kron(op, np.eye(d * d)) @ state
    return full.reshape(dim, d * d, dim, d * d).trace(axis1=0, axis2=2)


def compressed_encodings(
    n: int, d: int, tw: TwistedSchur, mode: str = "tight"
) -> list[BlockEncoding]:
    """Exact one-qubit dilations of the Kraus operators at scale sqrt(d);
    useful for short amplification schedules."""
    spaces = encoding_spaces(n, d, mode)
    from .pbt import kraus_from_twisted

    encs = []
    sys_regs = spaces.system_registers()
    mask = spaces.system_mask()
    total = spaces.system_dim
    for i in range(1, n):
        k = kraus_from_twisted(n, d, tw, i)
        padded = np.zeros((total, total), dtype=complex)
        keep = np.flatnonzero(mask)
        padded[np.ix_(keep, keep)] = k
        dil = unitary_dilation(padded, float(np.sqrt(d)))
        layout = Layout([Register("danc", 2), Register("kl", spaces.n_k)] + sys_regs)
        unit = Gate(("danc",) + tuple(r.name for r in sys_regs), dil)
        encs.append(
            BlockEncoding(
                layout=layout,
                ancillas=("danc", "kl"),
                systems=tuple(r.name for r in sys_regs),
                unitary=unit,
                scale=float(np.sqrt(d)),
                error_bound=0.0,
                target=k,
                valid_mask=mask,
                name=f"dilated sqrtPi({i})",
            )
        )
    return encs


@dataclass(eq=False)
class Pipeline:
    """Everything needed to drive the amplified engine."""

    n: int
    d: int
    variant: str
    naimark: NaimarkDilation
    layout: Layout  # protocol layout: naimark registers + receiver ports (+ ref)
    plan: AmplificationPlan
    v_amp: Op
    epsilon: float
    with_ref: bool
    system_mask: np.ndarray

    def port_names(self) -> list[str]:
        return [f"B{j}" for j in range(1, self.n)]


def build_pipeline(
    n: int,
    d: int,
    variant: str = "compressed",
    mode: str = "tight",
    with_bob: bool = True,
    with_ref: bool = True,
    tw: TwistedSchur | None = None,
) -> Pipeline:
    """Assemble encodings, the dilation, the amplification plan and the
    protocol layout."""
    tw = tw or build_twisted(n, d)
    if variant == "compressed":
        encs = compressed_encodings(n, d, tw, mode)
    elif variant == "honest":
        encs = [encode_kraus(n, d, tw, i, mode=mode) for i in range(1, n)]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    delta = max(enc.verify() for enc in encs)
    nai = naimark_Uc(n, d, encs)
    regs = list(nai.layout.registers)
    if with_bob:
        regs += [Register(f"B{j}", d) for j in range(1, n)]
    if with_ref:
        regs.append(Register("R", d))
    layout = Layout(regs)
    spaces = encoding_spaces(n, d, mode)
    anc_names = [
        r.name
        for r in nai.layout.registers
        if r.name not in {"I", "r2", "al", "ka", "qm", "qn"}
    ]
    start = _layout_mask(layout, anc_names, i_zero=True, sys_mask=spaces.system_mask())
    end = _layout_mask(layout, anc_names, i_zero=False, sys_mask=None)
    pl = plan(
        nai.scale * np.sqrt(n - 1),
        ports=n - 1,
        start_projector=start,
        end_projector=end,
    )
    v_amp = amplified_V(nai.v_op, pl)
    slack = 1.0 / (nai.scale * np.sqrt(n - 1)) - 1.0 / pl.inflated_total
    eps = float(np.sqrt(n - 1) * delta / nai.scale + max(slack, 0.0))
    return Pipeline(
        n=n,
        d=d,
        variant=variant,
        naimark=nai,
        layout=layout,
        plan=pl,
        v_amp=v_amp,
        epsilon=eps,
        with_ref=with_ref,
        system_mask=spaces.system_mask(),
    )


def _layout_mask(
    layout: Layout,
    anc_names: list[str],
    i_zero: bool,
    sys_mask: np.ndarray | None,
) -> np.ndarray:
    """Boolean mask over the flat layout: ancillas pinned to zero, the
    outcome register optionally pinned, the system restricted to its physical
    embedding when a mask is given, everything else free."""
    sys_regs = ("r2", "al", "ka", "qm", "qn")
    factors: list[np.ndarray] = []
    for reg in layout.registers:
        if reg.name in sys_regs:
            if reg.name == "r2":
                dim = prod(layout.dim(nm) for nm in sys_regs)
                f = np.ones(dim, bool) if sys_mask is None else sys_mask
            else:
                continue
        elif reg.name == "I" and i_zero:
            f = np.zeros(reg.dim, bool)
            f[0] = True
        elif reg.name in anc_names:
            f = np.zeros(reg.dim, bool)
            f[0] = True
        else:
            f = np.ones(reg.dim, bool)
        factors.append(f)
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def initial_state(pipe: Pipeline, branch: np.ndarray) -> np.ndarray:
    """|0>_I |0>_anc (x) Bell pairs between ports and receiver ports (x) the
    input branch on the last qudit (entangled with the reference when the
    branch is a two-qudit vector)."""
    n, d = pipe.n, pipe.d
    layout = pipe.layout
    vec = layout.zeros()
    dim_ports = d ** (n - 1)
    entangled = branch.size == d * d
    norm = 1.0 / np.sqrt(dim_ports)
    sys_keep = np.flatnonzero(pipe.system_mask)
    dims = layout.dims
    idx_names = layout.names
    for a in range(dim_ports):
        digits = np.unravel_index(a, (d,) * (n - 1))
        sys_flat_head = 0
        for t in range(n - 2):
            sys_flat_head = sys_flat_head * d + digits[t]
        for k in range(d):  # input-qudit value
            amp_vec = branch.reshape(d, -1)[k]  # reference part or scalar
            sys_flat = sys_keep[(sys_flat_head * d + digits[n - 2]) * d + k]
            assign = dict.fromkeys(idx_names, 0)
            pos = list(np.unravel_index(sys_flat, tuple(layout.dim(nm) for nm in ("r2", "al", "ka", "qm", "qn"))))
            for nm, v in zip(("r2", "al", "ka", "qm", "qn"), pos):
                assign[nm] = v
            for j in range(1, n):
                assign[f"B{j}"] = digits[j - 1]
            if entangled:
                for r in range(d):
                    assign["R"] = r
                    vec[tuple(assign[nm] for nm in idx_names)] = norm * amp_vec[r]
            else:
                vec[tuple(assign[nm] for nm in idx_names)] = norm * amp_vec[0]
    return vec


def _run_amplified(spec: ProtocolRun) -> ProtocolReport:
    n, d = spec.n, spec.d
    pipe = build_pipeline(
        n, d, spec.variant, spec.mode, with_ref=isinstance(spec.input_state, str)
    )
    branches, with_ref = _input_branches(spec)
    povm = pgm_dense(n, d)
    dense_probs = np.array(_dense_probabilities(n, d, povm, _average_input(spec)))
    layout = pipe.layout
    probs = np.zeros(n - 1)
    anc_weight = 0.0
    states = [np.zeros((d, d) if not with_ref else (d * d, d * d), dtype=complex) for _ in range(n - 1)]
    fidelity = 0.0
    phi = maximally_entangled(d)
    for weight, branch in branches:
        vec = initial_state(pipe, branch if with_ref else branch[:, None].ravel())
        out = pipe.v_amp.apply(vec, layout)
        good = out * pipe.plan.end_projector.reshape(layout.dims).astype(float)
        anc_weight += weight * float(np.vdot(good, good).real)
        for i in range(1, n):
            sel = _select_outcome(layout, good, i)
            p_i = float(np.vdot(sel, sel).real)
            probs[i - 1] += weight * p_i
            rho = _receiver_state(pipe, layout, sel, i)
            states[i - 1] += weight * rho
    probs_cond = probs / anc_weight
    for i in range(1, n):
        tr = np.trace(states[i - 1]).real
        if tr > 1e-30:
            states[i - 1] /= tr
        if with_ref:
            fidelity += probs_cond[i - 1] * float(
                np.real(phi.conj() @ states[i - 1] @ phi)
            )
        else:
            eta = np.asarray(spec.input_state)
            fidelity += probs_cond[i - 1] * float(
                np.real(np.trace(eta @ states[i - 1]))
            )
    discrepancy = float(np.abs(probs_cond - dense_probs).max())
    return ProtocolReport(
        n=n,
        d=d,
        engine=spec.engine,
        probabilities=[float(p) for p in probs_cond],
        outcome_states=states,
        fidelity=fidelity,
        discrepancy=discrepancy,
        ancilla_weight=float(anc_weight),
    )


def _select_outcome(layout: Layout, arr: np.ndarray, i: int) -> np.ndarray:
    idx: list = [slice(None)] * arr.ndim
    idx[layout.axis("I")] = i - 1
    return arr[tuple(idx)]


def _receiver_state(pipe: Pipeline, layout: Layout, sel: np.ndarray, i: int) -> np.ndarray:
    """Reduced state on (port B_i, reference if present), unnormalized."""
    names = [nm for nm in layout.names if nm != "I"]
    keep = [f"B{i}"] + (["R"] if pipe.with_ref else [])
    axes_keep = [names.index(nm) for nm in keep]
    perm = axes_keep + [a for a in range(len(names)) if a not in axes_keep]
    moved = np.transpose(sel, perm)
    kd = prod(moved.shape[: len(keep)])
    rest = moved.reshape(kd, -1)
    return rest @ rest.conj().T


def sample(spec: ProtocolRun, shots: int) -> dict:
    """Multinomial outcome histogram with a chi-square statistic against the
    engine's exact probabilities."""
    if shots < 1:
        raise ValueError("shots must be positive")
    report = run(spec)
    p = np.array(report.probabilities)
    p = p / p.sum()
    rng = np.random.default_rng(spec.seed)
    counts = rng.multinomial(shots, p)
    expected = shots * p
    chi2 = float(((counts - expected) ** 2 / np.where(expected > 0, expected, 1)).sum())
    return {
        "counts": counts.tolist(),
        "expected": expected.tolist(),
        "chi_square": chi2,
        "shots": shots,
        "probabilities": report.probabilities,
    }
