import numpy as np

from relasym.extremal import EnsembleSpec, random_density, random_perturbation


def random_hermitian(rng, d, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (g + g.conj().T) / 2


def random_unitary(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pd(rng, d, floor):
    """Unit-trace positive definite matrix with smallest eigenvalue >= floor."""
    return random_density(EnsembleSpec("min_eig_conditioned", d, int(rng.integers(2**62)), floor)).data


def random_state(rng, d):
    return random_density(EnsembleSpec("hilbert_schmidt", d, int(rng.integers(2**62)))).data


def random_direction(rng, d):
    return random_perturbation(d, int(rng.integers(2**62))).data


def kl(p, q):
    p, q = np.asarray(p), np.asarray(q)
    m = p > 0
    return float(np.sum(p[m] * np.log(p[m] / q[m])))
