import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relasym.errors import InvalidStateError, PreconditionError, SingularLogError
from relasym.frechet import (
    Perturbation,
    QuadratureRule,
    log_divided_differences,
    matrix_log_quadrature,
    r_form,
    r_op_quadrature,
    t_op_quadrature,
    t_op_spectral,
)
from relasym.spectral import matrix_log, trace_distance

from helpers import random_direction, random_pd, random_state, random_unitary

# sixth-order central stencil for the second derivative
STENCIL7 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def random_spd(rng, d):
    """Positive definite with eigenvalues in [0.5, 2], where h = 1e-5 differences resolve 1e-8."""
    U = random_unitary(rng, d)
    return U @ np.diag(rng.uniform(0.5, 2.0, d)) @ U.conj().T


def second_difference(A, D, h, stencil):
    k = (len(stencil) - 1) // 2
    logs = [matrix_log(A + j * h * D).data for j in range(-k, k + 1)]
    return -sum(c * L for c, L in zip(stencil, logs)) / h**2


def test_t_op_identity_and_commuting(rng):
    D = random_direction(rng, 3)
    assert np.allclose(t_op_spectral(np.eye(3), D).data, D, atol=1e-14)
    assert np.allclose(t_op_quadrature(np.eye(3), D).data, D, atol=1e-12)
    A, Dd = np.diag([0.3, 0.7]), np.diag([0.5, -0.5])
    expected = np.diag([0.5 / 0.3, -0.5 / 0.7])
    assert np.allclose(t_op_spectral(A, Dd).data, expected, atol=1e-14)
    assert np.allclose(t_op_quadrature(A, Dd).data, expected, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_t_op_finite_difference(rng, d):
    for _ in range(10):
        A, D = random_spd(rng, d), random_direction(rng, d)
        h = 1e-5
        fd = (matrix_log(A + h * D).data - matrix_log(A - h * D).data) / (2 * h)
        assert np.max(np.abs(t_op_spectral(A, D).data - fd)) <= 1e-8


@pytest.mark.parametrize("d", [2, 3, 5])
def test_t_op_routes_agree(rng, d):
    for _ in range(10):
        A, D = random_pd(rng, d, 0.05), random_direction(rng, d)
        diff = t_op_spectral(A, D).data - t_op_quadrature(A, D).data
        assert np.max(np.abs(diff)) <= 1e-8


def test_t_op_directional_derivative(rng):
    A, D = random_spd(rng, 4), random_direction(rng, 4)
    h = 1e-5
    g = lambda t: np.trace(D @ matrix_log(A + t * D).data).real
    fd = (g(h) - g(-h)) / (2 * h)
    assert np.trace(D @ t_op_spectral(A, D).data).real == pytest.approx(fd, abs=1e-8)


def test_t_op_singular():
    with pytest.raises(SingularLogError):
        t_op_spectral(np.diag([1.0, 0.0]), np.diag([1.0, -1.0]))


def test_divided_differences_confluent():
    lam = np.array([0.2, 0.2 * (1 + 1e-12), 0.5])
    dd = log_divided_differences(lam)
    assert dd[0, 1] == pytest.approx(1 / 0.2, rel=1e-10)
    assert dd[0, 0] == pytest.approx(5.0)
    assert dd[0, 2] == pytest.approx((math.log(0.2) - math.log(0.5)) / (0.2 - 0.5), rel=1e-14)
    assert np.allclose(dd, dd.T, rtol=1e-14)


def test_t_op_ill_conditioned(rng):
    U = random_unitary(rng, 3)
    A = U @ np.diag([1e-4, 0.3, 1 - 0.3 - 1e-4]) @ U.conj().T
    D = random_direction(rng, 3)
    diff = t_op_spectral(A, D).data - t_op_quadrature(A, D).data
    assert np.max(np.abs(diff)) / np.max(np.abs(t_op_spectral(A, D).data)) <= 1e-8


def test_r_op_examples():
    D = np.diag([1.0, -1.0])
    assert np.allclose(r_op_quadrature(np.eye(2), D).data, np.eye(2), atol=1e-12)
    A = np.diag([0.25, 0.75])
    assert np.allclose(r_op_quadrature(A, D).data, np.diag([16.0, 16 / 9]), atol=1e-10)


def test_r_form_examples():
    A, D = np.diag([0.25, 0.75]), np.diag([1.0, -1.0])
    assert r_form(A, D) == pytest.approx(128 / 9, abs=1e-10)
    assert r_form(A, D, method="cubic") == pytest.approx(128 / 9, abs=1e-10)
    assert r_form(A, np.zeros((2, 2))) == 0.0
    with pytest.raises(ValueError):
        r_form(A, D, method="bogus")


def test_r_op_second_difference_well_conditioned(rng):
    A, D = random_pd(rng, 3, 0.2), random_direction(rng, 3)
    fd = second_difference(A, D, 1e-4, [1.0, -2.0, 1.0])
    assert np.max(np.abs(r_op_quadrature(A, D).data - fd)) <= 1e-6


@pytest.mark.parametrize("d", [2, 3, 5])
def test_r_op_second_difference(rng, d):
    for _ in range(5):
        A, D = random_pd(rng, d, 0.05), random_direction(rng, d)
        fd = second_difference(A, D, 1e-3, STENCIL7)
        assert np.max(np.abs(r_op_quadrature(A, D).data - fd)) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_r_form_unitary_invariance_and_routes(d, seed):
    rng = np.random.default_rng(seed)
    A, D = random_pd(rng, d, 0.01), random_direction(rng, d)
    U = random_unitary(rng, d)
    base = r_form(A, D)
    rotated = r_form(U @ A @ U.conj().T, U @ D @ U.conj().T)
    assert rotated == pytest.approx(base, abs=1e-9 * max(1.0, abs(base)))
    assert r_form(A, D, method="cubic") == pytest.approx(base, rel=1e-10, abs=1e-10)


def test_r_form_positive_direction_commuting(rng):
    for _ in range(20):
        lam = rng.dirichlet(np.ones(3)) + 0.01
        pos = np.diag(rng.random(3))
        assert r_form(np.diag(lam), pos) >= 0


def test_log_quadrature_scalar_and_convergence():
    for x in (0.1, 2.0, 50.0):
        assert abs(QuadratureRule(200).integrate_log(x) - math.log(x)) < 1e-10
    x = 50.0
    errors = [abs(QuadratureRule(n).integrate_log(x) - math.log(x)) for n in (8, 16, 32, 64)]
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse / 4 or fine <= 1e-12


def test_matrix_log_quadrature(rng):
    A = random_pd(rng, 4, 1e-4)
    assert np.max(np.abs(matrix_log_quadrature(A).data - matrix_log(A).data)) <= 1e-8


def test_quadrature_rule_validation():
    with pytest.raises(ValueError):
        QuadratureRule(0)
    rule = QuadratureRule(10)
    assert rule.weights.sum() == pytest.approx(1.0)


def test_perturbation_parts(rng):
    rho, sigma = random_state(rng, 3), random_state(rng, 3)
    delta = Perturbation.from_states(rho, sigma)
    assert delta.is_normalized()
    assert delta.trace_plus == pytest.approx(1.0, abs=1e-10)
    P, N = delta.positive_part.data, delta.negative_part.data
    assert np.max(np.abs(P @ N)) <= 1e-10
    assert np.allclose(P - N, delta.data)
    T = trace_distance(rho, sigma)
    assert np.allclose(sigma + T * delta.data, rho, atol=1e-12)


def test_perturbation_errors():
    with pytest.raises(InvalidStateError, match="traceless"):
        Perturbation(np.diag([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        Perturbation(np.zeros((2, 2))).normalized()
    with pytest.raises(PreconditionError):
        Perturbation.from_states(np.eye(2) / 2, np.eye(2) / 2)
    scaled = Perturbation(np.diag([3.0, -3.0])).normalized()
    assert scaled.is_normalized()
