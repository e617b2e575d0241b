"""Quantum relative entropy, its symmetrization and its asymmetry."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InfiniteAsymmetryError
from .spectral import as_density

SUPPORT_WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class DivergenceResult:
    """Value of a divergence, possibly ``+inf``.

    ``support_ok`` records whether the support of the first argument lies in
    the support of the second; an infinite value always has it ``False``.
    """

    value: float
    finite: bool
    support_ok: bool

    def __float__(self):
        return self.value

    @classmethod
    def infinite(cls):
        return cls(math.inf, False, False)


def relative_entropy(rho, sigma) -> DivergenceResult:
    """``S(ρ‖σ) = tr ρ (log ρ − log σ)`` in nats.

    Both logarithms are taken spectrally. Eigenvalues of ``ρ`` at or below
    zero contribute nothing (``0 log 0 = 0``). Eigenvectors of ``σ`` whose
    eigenvalue is below ``psd_tol`` are not floored: if ``ρ`` puts weight of
    at least ``1e-10`` on them the result is infinite, otherwise they are
    dropped.
    """
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"dimensions differ: {rho.dim} vs {sigma.dim}")

    p = rho.spectrum.eigenvalues
    pos = p > 0
    neg_entropy = float(np.sum(p[pos] * np.log(p[pos])))

    q = sigma.spectrum.eigenvalues
    V = sigma.spectrum.eigenvectors
    # <v_j| rho |v_j> for each eigenvector of sigma
    weights = np.einsum("ij,ik,kj->j", V.conj(), rho.data, V).real
    kernel = q < sigma.tol.psd_tol
    if np.any(weights[kernel] >= SUPPORT_WEIGHT_TOL):
        return DivergenceResult.infinite()
    cross = float(np.sum(weights[~kernel] * np.log(q[~kernel])))
    return DivergenceResult(neg_entropy - cross, True, True)


def j_divergence(rho, sigma) -> DivergenceResult:
    """Jeffreys divergence ``S(ρ‖σ) + S(σ‖ρ)``; exactly symmetric."""
    a = relative_entropy(rho, sigma)
    b = relative_entropy(sigma, rho)
    if not (a.finite and b.finite):
        return DivergenceResult.infinite()
    return DivergenceResult(a.value + b.value, True, True)


def asymmetry(rho, sigma) -> float:
    """``|S(σ‖ρ) − S(ρ‖σ)|``.

    Raises
    ------
    InfiniteAsymmetryError
        If either relative entropy is infinite.
    """
    a = relative_entropy(rho, sigma)
    b = relative_entropy(sigma, rho)
    if not (a.finite and b.finite):
        raise InfiniteAsymmetryError(
            f"S(rho||sigma)={a.value}, S(sigma||rho)={b.value}: asymmetry undefined"
        )
    return abs(b.value - a.value)
