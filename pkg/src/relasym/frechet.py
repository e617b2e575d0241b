"""
Derivatives of the matrix logarithm
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
First derivative ``T_A(Δ) = d/dt log(A + tΔ)|_0`` and negative second
derivative ``R_A(Δ) = -d²/dt² log(A + tΔ)|_0``, each by two routes:

* spectral divided differences in the eigenbasis of ``A``;
* Gauss-Legendre quadrature of the resolvent integrals

      log A  = ∫_0^∞ ((1+s)^{-1} I - (A+s)^{-1}) ds
      T_A(Δ) = ∫_0^∞ (A+s)^{-1} Δ (A+s)^{-1} ds
      R_A(Δ) = 2 ∫_0^∞ (A+s)^{-1} Δ (A+s)^{-1} Δ (A+s)^{-1} ds

The semi-infinite range is mapped onto [0, 1) by ``s = c u / (1 - u)``,
where ``c = sqrt(λ_min λ_max)`` centres the spectrum of ``A`` on 1 in
log scale. With ``c = 1`` this is the plain ``u/(1-u)`` map; the centring
keeps the 200-node rule accurate for condition numbers around 1e4 and
beyond.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidStateError, PreconditionError, SingularLogError
from .spectral import (
    DEFAULT_TOLERANCES,
    HermitianMatrix,
    ToleranceProfile,
    as_density,
    as_hermitian,
    positive_part,
    trace_distance,
)

DEFAULT_NODES = 200
CONFLUENT_RTOL = 1e-8


def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1].

    Nodes come from :func:`numpy.polynomial.legendre.leggauss`; the weights
    are recomputed from them as ``2 / ((1-x)(1+x) P_n'(x)^2)`` with the
    three-term recurrence. numpy's own weights lose relative accuracy like
    ``n^2 eps`` near the endpoints (about 3e-11 at n = 200), which shows up
    as a floor of a few 1e-13 in resolvent integrals over ill-conditioned
    spectra; the recomputed ones are good to about 3e-13.
    """
    x, _ = np.polynomial.legendre.leggauss(n)
    if n == 1:
        return x, np.array([2.0])
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    one_minus_x2 = (1.0 - x) * (1.0 + x)
    dp = n * (p0 - x * p1) / one_minus_x2
    return x, 2.0 / (one_minus_x2 * dp * dp)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [0, 1] for integrals over s in [0, ∞)."""

    n_nodes: int = DEFAULT_NODES
    u: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        x, w = gauss_legendre(self.n_nodes)
        u, w = (x + 1.0) / 2.0, w / 2.0
        for name, arr in (("u", u), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def s_nodes(self, scale: float = 1.0):
        """Nodes and weights in ``s`` for the map ``s = scale * u / (1 - u)``."""
        v = 1.0 - self.u
        return scale * self.u / v, scale * self.weights / v**2

    def integrate_log(self, x: float) -> float:
        """Quadrature of ``∫ (1/(1+s) - 1/(x+s)) ds``, which equals ``log x``."""
        s, w = self.s_nodes()
        return float(np.sum(w * (x - 1.0) / ((1.0 + s) * (x + s))))


DEFAULT_RULE = QuadratureRule()


def _pd_spectrum_scale(A: HermitianMatrix) -> float:
    lam = A.spectrum.eigenvalues
    if lam[0] <= 0:
        raise SingularLogError(float(lam[0]), 0.0)
    return float(np.sqrt(lam[0] * lam[-1]))


def _resolvents(A: HermitianMatrix, rule: QuadratureRule):
    """Stack of ``(A + s_k I)^{-1}`` with the scaled nodes and weights."""
    c = _pd_spectrum_scale(A)
    s, w = rule.s_nodes(c)
    eye = np.eye(A.dim)
    shifted = A.data[None, :, :] + s[:, None, None] * eye
    return np.linalg.inv(shifted), s, w, c


def _weighted_sum(w, stack):
    return np.sum(w[:, None, None] * stack, axis=0)


def _herm(a) -> HermitianMatrix:
    # exact Hermitian by construction; remove rounding asymmetry of inv/matmul
    return HermitianMatrix((a + a.conj().T) / 2)


# -- Perturbations ------------------------------------------------------------


class Perturbation:
    """Traceless Hermitian direction ``Δ = Δ₊ - Δ₋`` with ``Δ₊Δ₋ = 0``."""

    def __init__(self, delta, tol: ToleranceProfile = DEFAULT_TOLERANCES):
        self.delta = as_hermitian(delta, tol)
        tr = float(np.trace(self.delta.data).real)
        scale = max(1.0, float(np.max(np.abs(self.delta.data))))
        if abs(tr) > tol.trace_tol * scale:
            raise InvalidStateError(f"perturbation must be traceless, trace is {tr:.3g}")

    @property
    def dim(self):
        return self.delta.dim

    @property
    def data(self):
        return self.delta.data

    @cached_property
    def positive_part(self) -> HermitianMatrix:
        return positive_part(self.delta)

    @cached_property
    def negative_part(self) -> HermitianMatrix:
        return positive_part(-self.delta.data)

    @property
    def trace_plus(self) -> float:
        return float(np.sum(np.clip(self.delta.spectrum.eigenvalues, 0, None)))

    @property
    def trace_minus(self) -> float:
        return float(-np.sum(np.clip(self.delta.spectrum.eigenvalues, None, 0)))

    def is_normalized(self, atol: float = 1e-10) -> bool:
        return abs(self.trace_plus - 1.0) <= atol and abs(self.trace_minus - 1.0) <= atol

    def normalized(self) -> Perturbation:
        """Rescale so that ``tr Δ₊ = tr Δ₋ = 1``."""
        tp = self.trace_plus
        if tp <= 0:
            raise PreconditionError("cannot normalize the zero perturbation")
        return Perturbation(self.delta.data / tp, self.delta.tol)

    @classmethod
    def from_states(cls, rho, sigma) -> Perturbation:
        """``Δ = (ρ - σ)/T``; its positive and negative parts are states."""
        rho, sigma = as_density(rho), as_density(sigma)
        T = trace_distance(rho, sigma)
        if T <= 0:
            raise PreconditionError("states coincide; direction undefined")
        return cls((rho.data - sigma.data) / T, rho.tol)

    def __repr__(self):
        return f"Perturbation(dim={self.dim}, tr+={self.trace_plus:.6g})"


def _as_direction(delta) -> np.ndarray:
    if isinstance(delta, Perturbation):
        return delta.data
    return as_hermitian(delta).data


# -- First derivative -----------------------------------------------------------


def log_divided_differences(lam: np.ndarray) -> np.ndarray:
    """Matrix of first divided differences ``(log λ_i - log λ_j)/(λ_i - λ_j)``.

    Off-diagonal entries use ``log1p(δ/λ_j)/δ``; pairs closer than
    ``1e-8 λ_i`` use the series of the same expression around ``δ = 0``,
    whose leading term is ``1/λ``.
    """
    li = lam[:, None]
    lj = lam[None, :]
    delta = li - lj
    r = delta / lj
    confluent = np.abs(delta) < CONFLUENT_RTOL * li
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.log1p(r) / delta
    series = (1.0 - r / 2.0 + r * r / 3.0) / lj
    return np.where(confluent, series, exact)


def t_op_spectral(A, delta) -> HermitianMatrix:
    """First Fréchet derivative of ``log`` at ``A`` in direction ``Δ``, spectrally."""
    A = as_hermitian(A)
    lam = A.spectrum.eigenvalues
    if lam[0] <= 0:
        raise SingularLogError(float(lam[0]), 0.0)
    U = A.spectrum.eigenvectors
    D = U.conj().T @ _as_direction(delta) @ U
    return _herm(U @ (log_divided_differences(lam) * D) @ U.conj().T)


def t_op_quadrature(A, delta, rule: QuadratureRule = DEFAULT_RULE) -> HermitianMatrix:
    """``∫ (A+s)^{-1} Δ (A+s)^{-1} ds`` by quadrature."""
    A = as_hermitian(A)
    R, _, w, _ = _resolvents(A, rule)
    D = _as_direction(delta)
    return _herm(_weighted_sum(w, R @ D @ R))


def matrix_log_quadrature(A, rule: QuadratureRule = DEFAULT_RULE) -> HermitianMatrix:
    """``log A`` from its resolvent integral; independent of any eigenvector.

    Integrates ``(1+s)^{-1} - (A+s)^{-1} = (A - I)(1+s)^{-1}(A+s)^{-1}`` for
    the rescaled matrix ``A/c`` and adds back ``log c``.
    """
    A = as_hermitian(A)
    c = _pd_spectrum_scale(A)
    B = A.data / c
    s, w = rule.s_nodes()
    eye = np.eye(A.dim)
    R = np.linalg.inv(B[None, :, :] + s[:, None, None] * eye)
    terms = ((B - eye)[None, :, :] @ R) / (1.0 + s)[:, None, None]
    return _herm(_weighted_sum(w, terms) + np.log(c) * eye)


# -- Second derivative ----------------------------------------------------------


def r_op_quadrature(A, delta, rule: QuadratureRule = DEFAULT_RULE) -> HermitianMatrix:
    """``R_A(Δ) = 2 ∫ (A+s)^{-1} Δ (A+s)^{-1} Δ (A+s)^{-1} ds`` by quadrature."""
    A = as_hermitian(A)
    R, _, w, _ = _resolvents(A, rule)
    D = _as_direction(delta)
    RD = R @ D
    return _herm(2.0 * _weighted_sum(w, RD @ RD @ R))


def r_form_cubic(A, delta, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """``tr Δ R_A(Δ)`` as ``2 ∫ tr(Δ (A+s)^{-1})^3 ds``, in the eigenbasis of ``A``."""
    A = as_hermitian(A)
    lam = A.spectrum.eigenvalues
    c = _pd_spectrum_scale(A)
    U = A.spectrum.eigenvectors
    D = U.conj().T @ _as_direction(delta) @ U
    s, w = rule.s_nodes(c)
    inv = 1.0 / (lam[None, :] + s[:, None])
    B = D[None, :, :] * inv[:, None, :]
    cubes = np.einsum("kij,kjl,kli->k", B, B, B).real
    return float(2.0 * np.sum(w * cubes))


def r_form(A, delta, rule: QuadratureRule = DEFAULT_RULE, method: str = "operator") -> float:
    """Quadratic form ``tr Δ R_A(Δ)``.

    ``method="operator"`` contracts ``Δ`` with :func:`r_op_quadrature`;
    ``method="cubic"`` uses :func:`r_form_cubic`.
    """
    if method == "cubic":
        return r_form_cubic(A, delta, rule)
    if method != "operator":
        raise ValueError(f"unknown method {method!r}")
    D = _as_direction(delta)
    return float(np.real(np.trace(D @ r_op_quadrature(A, D, rule).data)))
