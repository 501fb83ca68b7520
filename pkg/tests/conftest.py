"""Shared test helpers: certified instances and independent dense oracles."""

import itertools

import numpy as np
import pytest

import ihtkit as kit


def make_certified_matrix(n: int, seed: int, spread: float = 0.10) -> np.ndarray:
    """Square coefficient array whose every submatrix gram has eigenvalues
    inside [1 - spread, 1].

    Built as Q @ G**(1/2) with Q orthogonal and G = I - spread * P for a unit
    spectral-norm PSD P, so the one-sided near-isometry holds at every
    sparsity with constant at most ``spread``.
    """
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    b = rng.standard_normal((n, n))
    p = b @ b.T
    p /= np.linalg.eigvalsh(p)[-1]
    g = np.eye(n) - spread * p
    w, v = np.linalg.eigh(g)
    return q @ (v * np.sqrt(w)) @ v.T


def make_certified_operator(n: int, seed: int, spread: float = 0.10):
    return kit.DenseOperator(make_certified_matrix(n, seed, spread))


def oracle_beta(matrix: np.ndarray, s: int) -> float:
    """Exhaustive isometry constant straight from dense singular values."""
    n = matrix.shape[1]
    worst = 0.0
    for combo in itertools.combinations(range(n), s):
        sv = np.linalg.svd(matrix[:, list(combo)], compute_uv=False)
        worst = max(worst, 1.0 - sv[-1] ** 2, sv[0] ** 2 - 1.0)
    return max(worst, 0.0)


def random_sparse(n: int, s: int, rng, low: float = 1.0, high: float = 2.0) -> np.ndarray:
    """Exactly s-sparse vector with nonzero magnitudes in [low, high]."""
    y = np.zeros(n)
    supp = rng.choice(n, size=s, replace=False)
    y[supp] = rng.uniform(low, high, size=s) * rng.choice([-1.0, 1.0], size=s)
    return y


class CertifiedInstance:
    """A small operator together with its exactly computed beta_{3s}."""

    def __init__(self, op, sparsity, beta_3s):
        self.op = op
        self.sparsity = sparsity
        self.beta_3s = beta_3s


@pytest.fixture(scope="session")
def certified_instances():
    """100 square n=12 operators with exact_beta-certified beta_{3s} < 1/8."""
    instances = []
    seed = 0
    while len(instances) < 100:
        op = make_certified_operator(12, seed)
        est = kit.exact_beta(op, 6)
        if est.beta < 1 / 8:
            instances.append(CertifiedInstance(op, 2, est.beta))
        seed += 1
    return instances
