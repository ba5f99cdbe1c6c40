import numpy as np
import pytest

from pbtkit.amplify import amplified_V, end_to_end, plan
from pbtkit.blockenc import unitary_dilation
from pbtkit.registers import Composite, Gate, Layout, Register, to_matrix

RNG = np.random.default_rng(17)


def random_unitary(d):
    z = RNG.standard_normal((d, d)) + 1j * RNG.standard_normal((d, d))
    return np.linalg.qr(z)[0]


def one_qubit_setup(target, scale):
    u = unitary_dilation(target, scale)
    lay = Layout([Register("anc", 2), Register("sys", 2)])
    v = Gate(("anc", "sys"), u)
    mask = np.zeros(4, bool)
    mask[:2] = True  # anc = 0
    return lay, v, mask


def test_plan_examples():
    assert plan(2.0).m == 3
    assert plan(1.0).m == 1
    p = plan(2.0, ports=4)
    assert abs(np.sin(np.pi / (2 * p.m)) * p.inflated_scale * 2 - 1.0) < 1e-12


def test_plan_minimality_and_oddness():
    for scale in (1.5, 3.0, 10.0, 62.25):
        p = plan(scale)
        assert p.m % 2 == 1
        assert np.sin(np.pi / (2 * p.m)) <= 1.0 / scale + 1e-9
        if p.m > 2:
            assert np.sin(np.pi / (2 * (p.m - 2))) > 1.0 / scale


def test_plan_phase_schedule():
    p = plan(10.0)
    assert p.phases[0] == pytest.approx((1 - p.m) * np.pi / 2)
    assert all(phi == pytest.approx(np.pi / 2) for phi in p.phases[1:])
    assert len(p.phases) == p.m


def test_plan_honest_scale_is_hundreds():
    n, d, x = 3, 2, np.sqrt(2)
    alpha = (n - 1) ** 2 * d * x**4 + (n - 1) ** 1.5 * d * x**2 + (n - 1) ** -0.5
    total = alpha * np.sqrt(n - 1)
    p = plan(total)
    assert p.m % 2 == 1
    assert abs(p.m - np.pi * total / 2) <= 2


def test_plan_rejects_subunit_scale():
    with pytest.raises(ValueError):
        plan(0.5)


def test_amplified_m1_is_identity_wrap():
    lay, v, mask = one_qubit_setup(np.eye(2), 1.0)
    p = plan(1.0, 1, mask, mask)
    assert amplified_V(v, p) is v


def test_amplified_exact_case():
    # exact sub-normalization 1/2 and m = 3 recover the target exactly
    w = random_unitary(2)
    lay, v, mask = one_qubit_setup(w, 2.0)
    p = plan(2.0, 1, mask, mask)
    assert p.m == 3
    mat = to_matrix(amplified_V(v, p), lay)
    assert np.abs(mat[np.ix_([0, 1], [0, 1])] - w).max() < 1e-12
    assert np.abs(mat @ mat.conj().T - np.eye(4)).max() < 1e-12


def test_amplified_error_growth_bounded():
    # a perturbed encoding stays within the 2 m epsilon budget
    w = random_unitary(2)
    for eps in (1e-3, 1e-2):
        pert = w + eps * RNG.standard_normal((2, 2))
        v_mat = unitary_dilation(pert / np.linalg.norm(pert, 2) * (1 + eps), 2.0)
        lay = Layout([Register("anc", 2), Register("sys", 2)])
        v = Gate(("anc", "sys"), v_mat)
        mask = np.zeros(4, bool)
        mask[:2] = True
        p = plan(2.0, 1, mask, mask)
        mat = to_matrix(amplified_V(v, p), lay)
        block = mat[np.ix_([0, 1], [0, 1])]
        base = np.abs(2 * v_mat[:2, :2] / 2 - w / 2).max()  # encoding error / scale
        eps_in = np.linalg.norm(2 * v_mat[:2, :2] - w, 2) / 2
        assert np.linalg.norm(block - w, 2) <= 2 * p.m * eps_in + 1e-9


def test_phase_gadget_identity():
    # e^{i phi (2P-1)} equals the controlled-flip gadget's ancilla-zero block
    dim = 6
    diag = RNG.integers(0, 2, dim).astype(bool)
    proj = np.diag(diag.astype(float))
    for phi in (0.3, np.pi / 2, -1.2):
        direct = np.cos(phi) * np.eye(dim) + 1j * np.sin(phi) * (2 * proj - np.eye(dim))
        cnot = np.kron(proj, np.array([[0, 1], [1, 0]])) + np.kron(
            np.eye(dim) - proj, np.eye(2)
        )
        phase = np.kron(np.eye(dim), np.diag([np.exp(-1j * phi), np.exp(1j * phi)]))
        gadget = cnot @ phase @ cnot
        block = gadget.reshape(dim, 2, dim, 2)[:, 0, :, 0]
        assert np.abs(block - direct).max() < 1e-12


def test_amplified_unitarity_compressed():
    from pbtkit.simulate import build_pipeline

    pipe = build_pipeline(3, 2, "compressed", with_bob=False, with_ref=False)
    mat = to_matrix(pipe.v_amp, pipe.layout)
    dim = pipe.layout.size
    assert np.abs(mat @ mat.conj().T - np.eye(dim)).max() < 1e-8


def test_end_to_end_compressed():
    res = end_to_end(3, 2, "compressed")
    assert res.m == 3
    assert res.w_residual <= res.epsilon + 1e-9
    assert res.amplified_residual <= res.amplified_bound
    assert res.discrepancy <= 2 * res.m * res.epsilon + 1e-9
    assert res.probability_error < 1e-10
    assert res.ancilla_purity > 1 - 1e-10
    assert res.ancilla_zero_weight > 1 - 1e-10


@pytest.mark.slow
def test_end_to_end_honest():
    res = end_to_end(3, 2, "honest")
    assert res.m > 50 and res.m % 2 == 1
    assert res.w_residual <= res.epsilon + 1e-9
    assert res.amplified_residual <= res.amplified_bound
    assert res.discrepancy <= 2 * res.m * res.epsilon + 1e-9
    assert res.probability_error < 1e-4
    assert res.ancilla_zero_weight > 0.999
