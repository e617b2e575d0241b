"""
Hermitian spectral calculus
~~~~~~~~~~~~~~~~~~~~~~~~~~~
Validated Hermitian / density-matrix containers, eigendecomposition,
functional calculus (log, positive part), the trace-norm distance and
the JSON matrix format used by the command line tools.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatchError,
    EigensolverError,
    InvalidStateError,
    NotHermitianError,
    SingularLogError,
)


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical tolerances threaded through constructors and checks.

    ``herm_tol`` is relative to the largest entry magnitude; the others are
    absolute.
    """

    herm_tol: float = 1e-12
    trace_tol: float = 1e-10
    psd_tol: float = 1e-10
    eig_tol: float = 1e-10

    def as_dict(self):
        return {
            "herm_tol": self.herm_tol,
            "trace_tol": self.trace_tol,
            "psd_tol": self.psd_tol,
            "eig_tol": self.eig_tol,
        }


DEFAULT_TOLERANCES = ToleranceProfile()


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _digest(a):
    return hashlib.sha1(np.ascontiguousarray(a).tobytes()).hexdigest()[:12]


class HermitianMatrix:
    """Dense complex Hermitian matrix.

    The input is symmetrized as ``(H + H^*)/2``; the pre-symmetrization
    defect ``max|H - H^*|`` is kept in :attr:`defect`. Instances are
    immutable and the underlying array is read-only.
    """

    def __init__(self, entries, tol: ToleranceProfile = DEFAULT_TOLERANCES):
        if isinstance(entries, HermitianMatrix):
            entries = entries.data
        a = np.asarray(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")
        defect = float(np.max(np.abs(a - a.conj().T)))
        scale = float(np.max(np.abs(a)))
        if defect > tol.herm_tol * max(scale, np.finfo(float).tiny):
            raise NotHermitianError(
                f"Hermiticity defect {defect:.3g} exceeds {tol.herm_tol:.1g} * max|H| = "
                f"{tol.herm_tol * scale:.3g}"
            )
        self.data = _frozen((a + a.conj().T) / 2)
        self.defect = defect
        self.tol = tol

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        return eig_hermitian(self)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class DensityMatrix(HermitianMatrix):
    """Hermitian, positive semidefinite, unit-trace matrix.

    Construction never renormalizes; see :func:`normalized`.
    """

    def __init__(self, entries, tol: ToleranceProfile = DEFAULT_TOLERANCES):
        super().__init__(entries, tol)
        tr = float(np.trace(self.data).real)
        if abs(tr - 1.0) > tol.trace_tol:
            raise InvalidStateError(f"trace {tr!r} differs from 1 by more than {tol.trace_tol:.1g}")
        lmin = float(self.spectrum.eigenvalues[0])
        if lmin < -tol.psd_tol:
            raise InvalidStateError(
                f"smallest eigenvalue {lmin:.3g} is below -psd_tol = {-tol.psd_tol:.1g}"
            )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order, eigenvectors as unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Return ``U f(Λ) U^*``."""
        U = self.eigenvectors
        return (U * f(self.eigenvalues)) @ U.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda lam: lam)


def as_hermitian(H, tol: ToleranceProfile = DEFAULT_TOLERANCES) -> HermitianMatrix:
    return H if isinstance(H, HermitianMatrix) else HermitianMatrix(H, tol)


def as_density(rho, tol: ToleranceProfile = DEFAULT_TOLERANCES) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho, tol)


def normalized(H, tol: ToleranceProfile = DEFAULT_TOLERANCES) -> DensityMatrix:
    """Divide a PSD matrix by its trace and validate the result."""
    a = np.asarray(as_hermitian(H, tol).data)
    tr = np.trace(a).real
    if tr <= 0:
        raise InvalidStateError(f"cannot normalize a matrix with trace {tr:.3g}")
    return DensityMatrix(a / tr, tol)


def eig_hermitian(H) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Raises
    ------
    EigensolverError
        If LAPACK fails to converge or the decomposition does not reconstruct
        the input to ``eig_tol``. The message carries a hash of the input.
    """
    H = as_hermitian(H)
    a = H.data
    try:
        w, U = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh did not converge: {exc}", _digest(a)) from exc
    eig_tol = H.tol.eig_tol
    scale = max(float(np.max(np.abs(a))), 1.0)
    recon = float(np.max(np.abs((U * w) @ U.conj().T - a)))
    ortho = float(np.max(np.abs(U.conj().T @ U - np.eye(H.dim))))
    if recon > eig_tol * scale or ortho > eig_tol:
        raise EigensolverError(
            f"inconsistent decomposition (reconstruction {recon:.2g}, orthogonality {ortho:.2g})",
            _digest(a),
        )
    w.setflags(write=False)
    U.setflags(write=False)
    return SpectralDecomposition(w, U)


def matrix_function(H, f) -> HermitianMatrix:
    return HermitianMatrix(as_hermitian(H).spectrum.apply(f))


def matrix_log(A, floor: float = 0.0) -> HermitianMatrix:
    """Natural logarithm of a positive definite matrix, ``U diag(log λ) U^*``.

    Raises :class:`SingularLogError` if any eigenvalue is ``<= floor``.
    """
    A = as_hermitian(A)
    lam = A.spectrum.eigenvalues
    if lam[0] <= floor:
        raise SingularLogError(float(lam[0]), floor)
    return HermitianMatrix(A.spectrum.apply(np.log), A.tol)


def positive_part(X) -> HermitianMatrix:
    """``X_+ = (X + |X|)/2``: negative eigenvalues set to zero."""
    X = as_hermitian(X)
    return HermitianMatrix(X.spectrum.apply(lambda lam: np.where(lam > 0, lam, 0.0)), X.tol)


def _check_same_dim(a: HermitianMatrix, b: HermitianMatrix):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")


def trace_distance(rho, sigma) -> float:
    """``T(ρ, σ) = ½‖ρ - σ‖₁ = tr(ρ - σ)_+``."""
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same_dim(rho, sigma)
    # fixed argument order makes the result bitwise symmetric
    if rho.data.tobytes() > sigma.data.tobytes():
        rho, sigma = sigma, rho
    w = np.linalg.eigvalsh(rho.data - sigma.data)
    return float(np.sum(w[w > 0]))


def min_eigenvalue(rho) -> float:
    return float(as_hermitian(rho).spectrum.eigenvalues[0])


# -- JSON matrix I/O ---------------------------------------------------------


def matrix_to_json(H) -> dict:
    a = np.asarray(H.data if isinstance(H, HermitianMatrix) else H, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj, kind=HermitianMatrix, tol: ToleranceProfile = DEFAULT_TOLERANCES):
    """Parse ``{"dim": d, "re": [[...]], "im": [[...]]}`` (row-major).

    ``im`` may be omitted for real matrices. Hermiticity is validated, and
    density-matrix invariants too when ``kind`` is :class:`DensityMatrix`.
    """
    try:
        d = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValueError(f"matrix JSON declares dim={d} but has shapes {re.shape} / {im.shape}")
    return kind(re + 1j * im, tol)


def read_matrix(path, kind=HermitianMatrix, tol: ToleranceProfile = DEFAULT_TOLERANCES):
    with open(path, encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh), kind, tol)


def write_matrix(path, H):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json(H), fh)
        fh.write("\n")
