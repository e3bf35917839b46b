"""Random states, unitaries and POVMs for property checks and sweeps."""

import numpy as np

from .matcore import hermitian


def haar_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None):
    """Hilbert-Schmidt (``rank=d``) or induced measure of the given rank."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return hermitian(rho / np.trace(rho).real)


def random_commuting_pair(d, rng):
    """Two full-rank states diagonal in a common random basis."""
    u = haar_unitary(d, rng)
    p = rng.dirichlet(np.ones(d))
    q = rng.dirichlet(np.ones(d))
    return hermitian((u * p) @ u.conj().T), hermitian((u * q) @ u.conj().T), p, q


def random_povm(d, n_outcomes, rng):
    """POVM built as ``S^{-1/2} G_k S^{-1/2}`` from random PSD seeds ``G_k``."""
    seeds = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        seeds.append(g @ g.conj().T)
    total = sum(seeds)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return [hermitian(inv_sqrt @ g @ inv_sqrt) for g in seeds]


def random_ball_point(rng, radius=1.0):
    """Uniform point in the 3-ball."""
    v = rng.normal(size=3)
    return radius * rng.random() ** (1.0 / 3.0) * v / np.linalg.norm(v)
