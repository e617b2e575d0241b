"""
Unitary-orbit extremal search and random ensembles
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
The objective is the quadratic form ``f(U) = tr Δ R_ρ(Δ)`` with
``Δ = U Δ₀ U^*`` and ``ρ`` fixed. Its maximizers commute with ``ρ``, with
the eigenvalues of ``Δ`` paired in decreasing order against the ascending
spectrum of ``ρ``.

Randomness
----------
Every sampler takes a 64-bit integer seed and draws from a Philox
(counter-based) bit generator keyed by it. Sweeps derive per-sample seeds
with :func:`child_seed`, a ``SeedSequence`` hash of ``(base, *keys)``, so a
sample depends only on its own keys and not on how work is split.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, RejectionBudgetError
from .frechet import DEFAULT_RULE, Perturbation, QuadratureRule, _pd_spectrum_scale
from .spectral import DensityMatrix, as_density, as_hermitian

log = logging.getLogger(__name__)

REJECTION_BUDGET = 100_000
_EPS = np.finfo(float).eps
ENSEMBLE_KINDS = ("hilbert_schmidt", "commuting_dirichlet", "min_eig_conditioned")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def child_seed(base: int, *keys: int) -> int:
    """Deterministic 64-bit seed for the stream named by ``(base, *keys)``."""
    ss = np.random.SeedSequence([int(base), *(int(k) for k in keys)])
    return int(ss.generate_state(1, np.uint64)[0])


# -- Ensembles --------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    d: int
    seed: int
    min_eig_floor: float = 0.0

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if not (0.0 <= self.min_eig_floor < 1.0 / self.d):
            raise ValueError(f"min_eig_floor must lie in [0, 1/d) = [0, {1 / self.d:.4g})")


def _ginibre(rng, d):
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)


def _hs_state(rng, d):
    G = _ginibre(rng, d)
    W = G @ G.conj().T
    return W / np.trace(W).real


def random_density(spec: EnsembleSpec) -> DensityMatrix:
    """Draw one state from the ensemble described by ``spec``.

    ``hilbert_schmidt``: ``G G^*/tr(G G^*)`` for complex Ginibre ``G``.
    ``commuting_dirichlet``: diagonal state with flat-Dirichlet spectrum.
    ``min_eig_conditioned``: Hilbert-Schmidt, rejected until ``λ_min`` is at
    least ``min_eig_floor``. A positive floor on the other kinds is enforced
    the same way.
    """
    rng = make_rng(spec.seed)
    draw = {
        "hilbert_schmidt": lambda: _hs_state(rng, spec.d),
        "min_eig_conditioned": lambda: _hs_state(rng, spec.d),
        "commuting_dirichlet": lambda: np.diag(rng.dirichlet(np.ones(spec.d))).astype(complex),
    }[spec.kind]
    floor = spec.min_eig_floor
    for _ in range(REJECTION_BUDGET):
        a = draw()
        if floor <= 0 or np.linalg.eigvalsh(a)[0] >= floor:
            return DensityMatrix(a)
    raise RejectionBudgetError(
        f"no state with lambda_min >= {floor} after {REJECTION_BUDGET} draws (d={spec.d})"
    )


def random_unitary(d: int, seed: int) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    Q, R = np.linalg.qr(_ginibre(make_rng(seed), d))
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_perturbation(d: int, seed: int) -> Perturbation:
    """Traceless Hermitian direction with ``tr Δ₊ = tr Δ₋ = 1``."""
    if d < 2:
        raise ValueError("a traceless non-zero perturbation needs d >= 2")
    rng = make_rng(seed)
    while True:
        G = _ginibre(rng, d)
        H = (G + G.conj().T) / 2
        H -= np.trace(H).real / d * np.eye(d)
        if np.max(np.abs(H)) > 1e-8:
            return Perturbation(H).normalized()


def feasible_t_max(sigma, delta, rtol: float = 1e-14) -> float:
    """``sup{t >= 0 : λ_min(σ + tΔ) >= 0}`` by bisection."""
    s = as_hermitian(sigma).data
    D = delta.data if isinstance(delta, Perturbation) else as_hermitian(delta).data

    def ok(t):
        return np.linalg.eigvalsh(s + t * D)[0] >= 0

    if not ok(0.0):
        return 0.0
    hi = 1.0
    while ok(hi):
        hi *= 2.0
        if hi > 1e12:
            return np.inf
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def sample_pair(d: int, seed: int, floor: float = 1e-3):
    """``(ρ, σ)``: ``σ`` conditioned on ``λ_min(σ) >= floor``, ``ρ`` plain Hilbert-Schmidt."""
    kind = "min_eig_conditioned" if floor > 0 else "hilbert_schmidt"
    sigma = random_density(EnsembleSpec(kind, d, child_seed(seed, 0), floor))
    rho = random_density(EnsembleSpec("hilbert_schmidt", d, child_seed(seed, 1)))
    return rho, sigma


def sample_conditioned_pair(d: int, seed: int, z: float):
    """``(ρ, σ)`` with both states conditioned on ``λ_min >= z``."""
    rho = random_density(EnsembleSpec("min_eig_conditioned", d, child_seed(seed, 0), z))
    sigma = random_density(EnsembleSpec("min_eig_conditioned", d, child_seed(seed, 1), z))
    return rho, sigma


def sample_triple(d: int, seed: int, floor: float = 1e-3, t_fraction: float = 0.95):
    """Feasible ``(σ, Δ, t)``: independent ``σ`` and ``Δ``, then ``t ~ U[0, t_fraction t_max]``."""
    kind = "min_eig_conditioned" if floor > 0 else "hilbert_schmidt"
    sigma = random_density(EnsembleSpec(kind, d, child_seed(seed, 0), floor))
    delta = random_perturbation(d, child_seed(seed, 1))
    t_max = feasible_t_max(sigma, delta)
    t = float(make_rng(child_seed(seed, 2)).uniform(0.0, t_fraction * t_max))
    return sigma, delta, t


def saturating_pair(x: float, T: float, d: int = 2):
    """``(ρ, σ) = (diag(x+T, 1-x-T), diag(x, 1-x))``, which attains the bound.

    Only ``d = 2`` is supported: no equality case with ``λ_min(σ) = x`` is
    known in higher dimension.
    """
    if d != 2:
        raise PreconditionError("saturating pairs are only constructed for d = 2")
    if not (0.0 < x <= 0.5):
        raise PreconditionError(f"x={x!r} must lie in (0, 1/2]")
    if not (0.0 <= T < 1.0 - x):
        raise PreconditionError(f"T={T!r} must lie in [0, 1 - x)")
    sigma = DensityMatrix(np.diag([x, 1.0 - x]))
    rho = DensityMatrix(np.diag([x + T, 1.0 - x - T]))
    return rho, sigma


# -- Orbit objective ---------------------------------------------------------------


def _eigenbasis_nodes(lam, rule: QuadratureRule, scale: float):
    s, w = rule.s_nodes(scale)
    return 1.0 / (lam[None, :] + s[:, None]), w


def _objective_and_gradient(D, inv, w, need_grad=True):
    """Objective ``2 Σ w tr(D M)^3`` and its Riesz gradient, ``M`` diagonal.

    ``inv[k]`` holds the diagonal of ``M_k``. The gradient is the
    skew-Hermitian ``R`` with ``d/dε f(e^{εK} D e^{-εK}) = Re tr(R^* K)``.
    """
    DM = D[None, :, :] * inv[:, None, :]
    DM2 = DM @ DM
    DM3 = DM2 @ DM
    f = 2.0 * float(np.sum(w * np.trace(DM3, axis1=1, axis2=2).real))
    if not need_grad:
        return f, None
    # (M D)^3 is the adjoint of (D M)^3
    G = DM3 - np.conj(np.swapaxes(DM3, 1, 2))
    R = -6.0 * np.sum(w[:, None, None] * G, axis=0)
    return f, (R - R.conj().T) / 2


def _plane_curvature(D, inv, w):
    """Second-order coefficients ``h_ij`` of the orbit objective at ``diag(D)``.

    For ``Δ = diag(δ)`` commuting with ``ρ``, ``f(e^{εK} Δ e^{-εK}) = f + ε² Σ_{i<j}
    h_ij |K_ij|² + O(ε³)``; the rotation planes decouple. Evaluated at the
    diagonal of a non-commuting ``D`` this is a model Hessian.
    """
    delta = np.diag(D).real
    di, dj = delta[:, None], delta[None, :]
    mi, mj = inv[:, :, None], inv[:, None, :]
    gap = di - dj
    c = -gap * (di**2 * mi**3 - dj**2 * mj**3) + gap**2 * mi * mj * (mi * di + mj * dj)
    return 6.0 * np.sum(w[:, None, None] * c, axis=0)


MAX_PLANE_ANGLE = 0.25


def _preconditioned(R, D, inv, w):
    """Newton-like direction ``R_ij / |h_ij|``, at most ``MAX_PLANE_ANGLE`` per plane.

    Away from commuting points the model curvature of a plane can be far too
    small; the cap keeps such a plane from dominating the step, so that the
    line search does not shrink the step in every other plane with it.
    Also returns the largest uncapped Newton angle.
    """
    h = np.abs(_plane_curvature(D, inv, w))
    np.fill_diagonal(h, np.inf)
    floor = 1e-10 * max(float(np.max(h[np.isfinite(h)], initial=0.0)), _EPS)
    h = np.maximum(h, floor)
    newton_angle = float(np.max(np.abs(R) / h))
    return R / np.maximum(h, np.abs(R) / MAX_PLANE_ANGLE), newton_angle


def orbit_objective(rho, delta, rule: QuadratureRule = DEFAULT_RULE) -> float:
    rho = as_hermitian(rho)
    lam, V = rho.spectrum.eigenvalues, rho.spectrum.eigenvectors
    inv, w = _eigenbasis_nodes(lam, rule, _pd_spectrum_scale(rho))
    D = V.conj().T @ _direction(delta) @ V
    return _objective_and_gradient(D, inv, w, need_grad=False)[0]


def orbit_gradient(rho, delta, rule: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """Gradient of ``tr Δ R_ρ(Δ)`` over the unitary orbit of ``Δ``.

    Returns the skew-Hermitian ``R = 6 ∫ ((MΔ)^3 - (ΔM)^3) ds`` with
    ``M = (ρ + s)^{-1}``, so that moving ``Δ`` to ``e^{εK} Δ e^{-εK}``
    changes the objective by ``ε Re tr(R^* K) + O(ε²)``.
    """
    rho = as_hermitian(rho)
    lam, V = rho.spectrum.eigenvalues, rho.spectrum.eigenvectors
    inv, w = _eigenbasis_nodes(lam, rule, _pd_spectrum_scale(rho))
    D = V.conj().T @ _direction(delta) @ V
    R = _objective_and_gradient(D, inv, w)[1]
    return V @ R @ V.conj().T


def _direction(delta):
    return delta.data if isinstance(delta, Perturbation) else as_hermitian(delta).data


def _expm_skew(K):
    # K skew-Hermitian: K = i H with H Hermitian
    theta, Q = np.linalg.eigh(-1j * K)
    return (Q * np.exp(1j * theta)) @ Q.conj().T


def _polar(W):
    u, _, vh = np.linalg.svd(W)
    return u @ vh


# -- Commuting maximum -------------------------------------------------------------


@dataclass(frozen=True)
class OrbitMax:
    """Maximum of ``Σ δ_{π(i)}^3 / λ_i^2``; ``pairing[i]`` indexes the δ put on ``λ_i``."""

    value: float
    pairing: tuple
    exhaustive: bool


def commuting_orbit_max(rho, delta_spectrum) -> OrbitMax:
    """Maximize the commuting objective over all pairings of the two spectra.

    ``rho`` may be a state or its eigenvalues. Up to ``d = 8`` every
    permutation is enumerated. Beyond that the anti-aligned pairing (largest
    δ on the smallest λ) is returned with ``exhaustive=False``.
    """
    if isinstance(rho, np.ndarray) and rho.ndim == 1:
        lam = np.sort(rho.astype(float))
    else:
        lam = as_hermitian(rho).spectrum.eigenvalues
    delta = np.asarray(delta_spectrum, dtype=float)
    d = lam.size
    if delta.size != d:
        raise ValueError("spectra have different lengths")
    coef = lam**-2.0
    if d > 8:
        order = tuple(int(i) for i in np.argsort(-delta, kind="stable"))
        return OrbitMax(float(np.sum(delta[list(order)] ** 3 * coef)), order, False)
    perms = np.array(list(itertools.permutations(range(d))))
    values = (delta[perms] ** 3) @ coef
    k = int(np.argmax(values))
    return OrbitMax(float(values[k]), tuple(int(i) for i in perms[k]), True)


# -- Ascent ------------------------------------------------------------------------


@dataclass
class AscentState:
    """Result of :func:`unitary_ascent`.

    ``U`` is the accumulated unitary, ``delta`` the final ``U Δ₀ U^*``.
    ``kicks`` counts escapes from non-maximal commuting stationary points.
    """

    U: np.ndarray
    delta: np.ndarray
    objective: float
    initial_objective: float
    gradient_norm: float
    step: float
    iteration: int
    converged: bool
    kicks: int = 0
    jitter: np.ndarray | None = None
    trajectory: list = field(default_factory=list)

    def commutator_defect(self, rho) -> float:
        r = as_hermitian(rho).data
        return float(np.max(np.abs(self.delta @ r - r @ self.delta)))

    def trajectory_records(self):
        return [
            {"iteration": i, "objective": f, "gradient_norm": g} for i, f, g in self.trajectory
        ]


def _misordered_pair(D, atol):
    """First ``(i, j)``, ``i < j``, with ``D_jj > D_ii`` beyond ``atol`` (ascending-λ basis)."""
    diag = np.diag(D).real
    for i in range(diag.size - 1):
        for j in range(i + 1, diag.size):
            if diag[j] > diag[i] + atol:
                return i, j
    return None


def unitary_ascent(
    rho,
    delta0,
    rule: QuadratureRule = DEFAULT_RULE,
    max_iter: int = 5000,
    tol: float = 1e-10,
    eta0: float = 1.0,
    armijo: float = 1e-4,
    kick_angle: float = 0.1,
    seed: int = 0,
    record: bool = False,
) -> AscentState:
    """Riemannian ascent of ``tr Δ R_ρ(Δ)`` over ``Δ = U Δ₀ U^*``.

    Works in the eigenbasis of ``ρ``. The gradient is preconditioned
    plane by plane with the exact curvature of the commuting model (see
    :func:`_plane_curvature`), which makes the unit step a Newton step near
    the maximum. Steps retract with ``U <- exp(η P) U`` and backtrack from
    ``η = eta0``, halving until the Armijo increase
    ``f_new >= f + armijo η <R, P>`` holds; once increases fall below the
    rounding level of ``f`` a step is accepted if the slope along ``P`` is
    still non-negative at its end. The objective therefore never decreases.
    Iteration stops once the largest Newton rotation angle is below ``tol``
    radians, or when the gradient or the objective stop being resolvable in
    floating point.

    When the gradient vanishes at a commuting point whose diagonal is not
    anti-ordered against ``ρ`` (a saddle), a Givens rotation of
    ``kick_angle`` in the offending plane restarts the ascent.

    Nearly degenerate ``ρ`` (eigenvalue gap below 1e-10) is split by a
    zero-trace diagonal jitter of size 1e-9, returned in ``jitter``.
    """
    rho = as_density(rho)
    lam = rho.spectrum.eigenvalues.copy()
    V = rho.spectrum.eigenvectors
    jitter = None
    if lam.size > 1 and np.min(np.diff(lam)) < 1e-10:
        jitter = 1e-9 * make_rng(seed).standard_normal(lam.size)
        jitter -= jitter.mean()
        lam = lam + jitter
        log.debug("degenerate rho: applied diagonal jitter %s", jitter)
    inv, w = _eigenbasis_nodes(lam, rule, float(np.sqrt(lam[0] * lam[-1])))

    D0 = V.conj().T @ _direction(delta0) @ V
    D0 = (D0 + D0.conj().T) / 2
    W = np.eye(lam.size, dtype=complex)
    D = D0
    f, R = _objective_and_gradient(D, inv, w)
    f_init = f
    gnorm = float(np.linalg.norm(R))
    eta = eta0
    kicks = 0
    trajectory = [(0, f, gnorm)] if record else []
    max_kicks = 4 * lam.size**2
    it = 0
    scale = max(1.0, float(np.max(np.abs(D0))))
    P, angle = _preconditioned(R, D, inv, w)
    at_floor = False

    def stationary():
        return at_floor or angle <= tol or gnorm <= 64 * _EPS * max(1.0, abs(f))

    while it < max_iter:
        if stationary():
            bad = _misordered_pair(D, 1e-8 * scale)
            if bad is None or kicks >= max_kicks:
                break
            i, j = bad
            G = np.eye(lam.size, dtype=complex)
            c, s = np.cos(kick_angle), np.sin(kick_angle)
            G[i, i], G[i, j], G[j, i], G[j, j] = c, -s, s, c
            W = _polar(G @ W)
            D = W @ D0 @ W.conj().T
            f, R = _objective_and_gradient(D, inv, w)
            gnorm = float(np.linalg.norm(R))
            P, angle = _preconditioned(R, D, inv, w)
            at_floor = False
            kicks += 1
            continue
        it += 1
        slope = float(np.real(np.vdot(R, P)))
        eta = eta0
        accepted = False
        while eta > 1e-30:
            Q = _expm_skew(eta * P)
            W_new = _polar(Q @ W)
            D_new = W_new @ D0 @ W_new.conj().T
            f_new, R_new = _objective_and_gradient(D_new, inv, w)
            if f_new >= f + armijo * eta * slope:
                accepted = True
                break
            # increase below the resolution of f: certify it with the slope at
            # the trial point, which is still accurate there
            if abs(f_new - f) <= 64 * _EPS * max(1.0, abs(f)) and np.real(np.vdot(R_new, P)) >= 0:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            # no representable increase left: stationary to rounding
            at_floor = True
            continue
        W, D, f, R = W_new, D_new, f_new, R_new
        gnorm = float(np.linalg.norm(R))
        P, angle = _preconditioned(R, D, inv, w)
        if record:
            trajectory.append((it, f, gnorm))
    converged = stationary() and _misordered_pair(D, 1e-8 * scale) is None

    U = V @ W @ V.conj().T
    delta = U @ _direction(delta0) @ U.conj().T
    return AscentState(
        U=U,
        delta=(delta + delta.conj().T) / 2,
        objective=f,
        initial_objective=f_init,
        gradient_norm=gnorm,
        step=eta,
        iteration=it,
        converged=converged,
        kicks=kicks,
        jitter=jitter,
        trajectory=trajectory,
    )
