"""Named verification suites: each runs an oracle comparison over a range of
(n, d) and returns (passed, max residual, detail)."""

from __future__ import annotations

import numpy as np

from .partitions import add_box, dim_specht, enumerate_partitions
from .symrep import compose, yor
from .twisted import (
    block_dimension,
    build_twisted,
    f_basis,
    gram_spectrum,
    lambda_eigenvalue,
    mf_pi,
    psi_vectors,
)

Suite = "callable[[list[int], list[int], int], tuple[bool, float, str]]"


def _suite_gram(ns, ds, seed):
    worst = 0.0
    count = 0
    for n in ns:
        for d in ds:
            for alpha in enumerate_partitions(n - 2, d):
                psi = psi_vectors(n, d, alpha)
                gram = psi.conj().T @ psi
                expected = []
                box = add_box(alpha, d)
                for nu in box.children:
                    expected.extend([lambda_eigenvalue(n, d, alpha, nu)] * dim_specht(nu))
                expected.extend([0.0] * box.theta_dim())
                got = np.linalg.eigvalsh(gram)
                worst = max(worst, float(np.abs(np.sort(np.array(expected)) - got).max()))
                count += 1
    return worst <= 1e-8, worst, f"{count} blocks"


def _suite_yor(ns, ds, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        for d in ds:
            for lam in enumerate_partitions(n, d):
                m = lam.n
                for _ in range(5):
                    p = tuple(rng.permutation(m))
                    q = tuple(rng.permutation(m))
                    lhs = yor(lam, p).matrix @ yor(lam, q).matrix
                    rhs = yor(lam, compose(p, q)).matrix
                    worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst <= 1e-10, worst, "group law"


def _suite_schur(ns, ds, seed):
    from .schur import build_schur, covariance_residual

    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        for d in ds:
            t = build_schur(n, d)
            for _ in range(5):
                worst = max(worst, covariance_residual(t, tuple(rng.permutation(n))))
    return worst <= 1e-10, worst, "covariance"


def _suite_fbasis(ns, ds, seed):
    from .schur import permutation_dense
    from .symrep import embed_perm

    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        for d in ds:
            for alpha in enumerate_partitions(n - 2, d):
                blk = f_basis(n, d, alpha)
                dim = blk.dim
                worst = max(
                    worst,
                    float(np.abs(blk.f.conj().T @ blk.f - np.eye(dim)).max()),
                )
                for _ in range(3):
                    sig = tuple(rng.permutation(n - 1))
                    v = permutation_dense(n, d, embed_perm(sig, n))
                    rep = np.zeros((dim, dim))
                    pos = 0
                    for nu in add_box(alpha, d).children:
                        dn = dim_specht(nu)
                        rep[pos : pos + dn, pos : pos + dn] = yor(nu, sig).matrix
                        pos += dn
                    worst = max(worst, float(np.abs(v @ blk.f - blk.f @ rep).max()))
    return worst <= 1e-9, worst, "orthonormality + covariance"


def _suite_pseudo(ns, ds, seed):
    worst = 0.0
    for n in ns:
        for d in ds:
            for alpha in enumerate_partitions(n - 2, d):
                scale = 1.0 - add_box(alpha, d).theta_dim() / ((n - 1) * dim_specht(alpha))
                for i in range(1, n):
                    m = mf_pi(n, d, alpha, i, check=False)
                    worst = max(worst, float(np.abs(m @ m - scale * m).max()))
    return worst <= 1e-9, worst, "pseudoprojector identity"


def _suite_kraus(ns, ds, seed):
    from .pbt import kraus_from_twisted, pgm_dense, principal_sqrt

    worst = 0.0
    for n in ns:
        for d in ds:
            tw = build_twisted(n, d)
            povm = pgm_dense(n, d)
            for i in range(1, n):
                kt = kraus_from_twisted(n, d, tw, i)
                kd = principal_sqrt(povm.operators[i - 1])
                worst = max(worst, float(np.abs(kt - kd).max()))
    return worst <= 1e-8, worst, "twisted vs dense Kraus"


def _suite_fidelity(ns, ds, seed):
    from .pbt import entanglement_fidelity, pgm_dense

    worst = 0.0
    ok = True
    for d in ds:
        prev = None
        for n in ns:
            f = entanglement_fidelity(n, d, pgm_dense(n, d))
            if prev is not None and f <= prev:
                ok = False
            prev = f
    return ok, worst, "monotone in n"


def _suite_norm(ns, ds, seed):
    from .pbt import sqrt_tilde_norm

    worst = 0.0
    ok = True
    for n in ns:
        for d in ds:
            for i in range(1, n):
                nrm = sqrt_tilde_norm(n, d, i)
                worst = max(worst, nrm)
                if nrm > np.sqrt(d) + 1e-10:
                    ok = False
    return ok, worst, "||sqrt support part|| <= sqrt(d)"


def _suite_encode(ns, ds, seed):
    from .blockenc import encode_kraus
    from .twisted import build_twisted

    worst = 0.0
    for n in ns:
        for d in ds:
            tw = build_twisted(n, d)
            for i in range(1, n):
                enc = encode_kraus(n, d, tw, i)
                worst = max(worst, enc.verify())
    return worst <= 1e-6, worst, "Kraus block-encodings"


SUITES = {
    "gram": _suite_gram,
    "yor": _suite_yor,
    "schur": _suite_schur,
    "fbasis": _suite_fbasis,
    "pseudo": _suite_pseudo,
    "kraus": _suite_kraus,
    "fidelity": _suite_fidelity,
    "norm": _suite_norm,
    "encode": _suite_encode,
}
