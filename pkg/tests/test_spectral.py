import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import fractional_matrix_power, logm

from genbregman.config import DEFAULTS
from genbregman.errors import DimensionError, DomainError, ValidationError
from genbregman.potentials import PotentialSpec
from genbregman.spectral import (INDEFINITE, MATRIX_FAMILIES, POSITIVE_SEMIDEFINITE,
                                 STRICTLY_POSITIVE, HermitianMatrix, _umegaki, as_hermitian,
                                 eigen_nonincreasing, family_potential, logdet_via_h,
                                 matrix_div, matrix_div_generic, matrix_function,
                                 parse_matrix_family, positivity_class, spectral_grad,
                                 spectral_potential_eval)

from matgen import (non_commuting_pair, random_hermitian, random_positive, random_unitary,
                    random_with_spectrum)

FAMILIES = [("umegaki", None), ("logdet", None), ("fermi", None), ("gammanorm", 0.5),
            ("gammanorm", 0.3), ("alpha", 0.5), ("alpha", -1.0)]


def fid(f):
    return f[0] if f[1] is None else f"{f[0]}({f[1]})"


# --- Hermitian matrices and eigendecomposition -------------------------------------------


def test_constructor_symmetrizes_and_records_correction():
    X = HermitianMatrix([[1.0, 2.0 + 1e-10], [2.0, 3.0]])
    assert np.allclose(X.data, [[1.0, 2.0 + 5e-11], [2.0 + 5e-11, 3.0]], atol=1e-16)
    assert X.correction == pytest.approx(1e-10, rel=1e-5)


def test_constructor_rejects_non_hermitian_and_non_square():
    with pytest.raises(ValidationError):
        HermitianMatrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DimensionError):
        HermitianMatrix([[1.0, 2.0, 3.0]])


def test_matrix_json_round_trip_complex_and_real():
    rng = np.random.default_rng(0)
    Z = HermitianMatrix(random_hermitian(rng, 3))
    back = HermitianMatrix.from_json(json.loads(json.dumps(Z.to_json())))
    assert np.array_equal(back.data, Z.data)
    R = HermitianMatrix([[1.0, 0.5], [0.5, 2.0]])
    assert "im" not in R.to_json()
    assert np.array_equal(HermitianMatrix.from_json({"re": [[1.0, 0.5], [0.5, 2.0]]}).data, R.data)
    with pytest.raises(ValidationError):
        HermitianMatrix.from_json({"re": [[1.0]], "junk": 1})


@pytest.mark.parametrize("X,expected", [
    (np.diag([1.0, 3.0, 2.0]), [3.0, 2.0, 1.0]),
    (np.eye(2), [1.0, 1.0]),
    (np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, -1.0]),
])
def test_eigen_examples(X, expected):
    eig = eigen_nonincreasing(X)
    assert np.allclose(eig.eigenvalues, expected, atol=1e-14)
    assert np.linalg.norm(eig.reconstruct() - X) <= 1e-10 * max(1.0, np.linalg.norm(X))


@pytest.mark.parametrize("complex_", [False, True])
def test_eigen_invariants_on_random_matrices(complex_):
    rng = np.random.default_rng(1)
    for n in range(1, 9):
        X = random_hermitian(rng, n, complex_)
        eig = eigen_nonincreasing(X)
        U = eig.vectors
        assert np.all(np.diff(eig.eigenvalues) <= 0)
        assert np.linalg.norm(U.conj().T @ U - np.eye(n)) <= 1e-10
        assert np.linalg.norm(eig.reconstruct() - X) <= 1e-10 * np.linalg.norm(X)
        # phase convention: largest-magnitude entry is real and positive
        for k in range(n):
            j = int(np.argmax(np.abs(U[:, k])))
            assert abs(np.imag(U[j, k])) < 1e-14 and np.real(U[j, k]) > 0


def test_eigen_is_deterministic():
    rng = np.random.default_rng(2)
    X = random_hermitian(rng, 5)
    a, b = eigen_nonincreasing(X), eigen_nonincreasing(X.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.vectors, b.vectors)


def test_positivity_classes():
    assert positivity_class(np.diag([1.0, 1e-3])) == STRICTLY_POSITIVE
    assert positivity_class(np.diag([1.0, 0.0])) == POSITIVE_SEMIDEFINITE
    assert positivity_class(np.diag([1.0, -5e-13])) == POSITIVE_SEMIDEFINITE
    assert positivity_class(np.diag([1.0, -1e-6])) == INDEFINITE
    assert positivity_class(np.diag([1.0, 5e-13])) == POSITIVE_SEMIDEFINITE


def test_matrix_function_matches_scipy_logm():
    rng = np.random.default_rng(3)
    X = random_positive(rng, 4)
    assert np.allclose(matrix_function(X, np.log), logm(X), atol=1e-12)


# --- spectral potential and gradient --------------------------------------------------------


def test_spectral_potential_examples():
    assert spectral_potential_eval(PotentialSpec.make("neg-entropy", 1), np.eye(2)) == \
        pytest.approx(-2.0, abs=1e-14)
    assert spectral_potential_eval(PotentialSpec.make("burg", 1), np.eye(3)) == 0.0
    pauli = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert spectral_potential_eval(PotentialSpec.make("gamma-norm", 1, gamma=0.5), pauli) == \
        pytest.approx(1.0, abs=1e-14)


def test_spectral_potential_is_infinite_off_domain():
    assert spectral_potential_eval(PotentialSpec.make("burg", 1), np.diag([1.0, -1.0])) == math.inf


def test_spectral_grad_examples():
    e = math.e
    g = spectral_grad(PotentialSpec.make("neg-entropy", 1), np.diag([e, e * e]))
    assert np.allclose(g, np.diag([1.0, 2.0]), atol=1e-14)
    rng = np.random.default_rng(4)
    X = random_hermitian(rng, 3)
    assert np.allclose(spectral_grad(PotentialSpec.make("gamma-norm", 1, gamma=0.5), X), X,
                       atol=1e-12)
    g = spectral_grad(PotentialSpec.make("burg", 1), np.diag([2.0, 4.0]))
    assert np.allclose(g, np.diag([-0.5, -0.25]), atol=1e-15)


def test_spectral_grad_domain_error():
    with pytest.raises(DomainError):
        spectral_grad(PotentialSpec.make("burg", 1), np.diag([1.0, 0.0]))


def test_spectral_grad_is_primary_matrix_function():
    rng = np.random.default_rng(5)
    X = random_positive(rng, 4)
    assert np.allclose(spectral_grad(PotentialSpec.make("neg-entropy", 1), X), logm(X),
                       atol=1e-11)


@pytest.mark.parametrize("family", FAMILIES, ids=fid)
def test_spectral_grad_against_directional_differences(family):
    rng = np.random.default_rng(6)
    spec = family_potential(*family)
    lo, hi = (0.1, 0.9) if family[0] == "fermi" else (0.3, 3.0)
    h = 1e-5
    for _ in range(5):
        X = random_with_spectrum(rng, rng.uniform(lo, hi, 3))
        G = spectral_grad(spec, X)
        for _ in range(20):
            E = random_hermitian(rng, 3)
            E /= np.linalg.norm(E)
            fd = (spectral_potential_eval(spec, X + h * E)
                  - spectral_potential_eval(spec, X - h * E)) / (2 * h)
            exact = float(np.real(np.trace(G @ E)))
            assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


# --- closed-form matrix divergences --------------------------------------------------------


def oracle_div(name, param, xi, zeta):
    """Independent evaluation with scipy matrix functions."""
    n = xi.shape[0]
    tr = lambda M: float(np.real(np.trace(M)))
    if name == "umegaki":
        return tr(xi @ logm(xi) - xi @ logm(zeta) - xi + zeta)
    if name == "logdet":
        M = xi @ np.linalg.inv(zeta)
        return tr(M) - float(np.real(np.log(np.linalg.det(M)))) - n
    if name == "fermi":
        I = np.eye(n)
        return tr(xi @ (logm(xi) - logm(zeta)) + (I - xi) @ (logm(I - xi) - logm(I - zeta)))
    p = lambda M, a: fractional_matrix_power(M, a)
    if name == "gammanorm":
        g = param
        return tr(g * p(xi, 1 / g) + (1 - g) * p(zeta, 1 / g) - xi @ p(zeta, 1 / g - 1))
    a = param
    d = tr(p(zeta, a) - p(xi, a) / (1 - a) + a / (1 - a) * xi @ p(zeta, a - 1))
    return d if a > 0 else -d


@pytest.mark.parametrize("family,xi,zeta,expected", [
    ("umegaki", np.diag([0.5, 0.5]), np.diag([0.5, 0.5]), 0.0),
    ("logdet", np.diag([2.0]), np.diag([1.0]), 1.0 - math.log(2.0)),
    ("alpha(0.5)", np.diag([4.0]), np.diag([1.0]), 1.0),
    ("gammanorm(0.5)", np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2), 2.0),
])
def test_matrix_div_examples(family, xi, zeta, expected):
    assert matrix_div(family, xi, zeta) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("family", FAMILIES, ids=fid)
def test_matrix_div_against_scipy_oracle(family):
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        for _ in range(5):
            xi, zeta = non_commuting_pair(rng, family[0], n)
            val = matrix_div(family[0], xi, zeta, family[1])
            ref = oracle_div(family[0], family[1], xi, zeta)
            assert val == pytest.approx(ref, rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("family", FAMILIES, ids=fid)
def test_closed_form_matches_generic_on_non_commuting_pairs(family):
    rng = np.random.default_rng(8)
    spec = family_potential(*family)
    for n in range(2, 7):
        for _ in range(10):
            xi, zeta = non_commuting_pair(rng, family[0], n)
            a = matrix_div(family[0], xi, zeta, family[1])
            b = matrix_div_generic(spec, xi, zeta)
            assert abs(a - b) <= 1e-8 * (1.0 + abs(a))


def test_flipped_umegaki_sign_breaks_the_identity():
    rng = np.random.default_rng(9)
    xi, zeta = non_commuting_pair(rng, "umegaki", 3)
    spec = PotentialSpec.make("neg-entropy", 3)
    generic = matrix_div_generic(spec, xi, zeta)
    flipped = _umegaki(as_hermitian(xi), as_hermitian(zeta), DEFAULTS.spectral_threshold, -1.0)
    assert abs(flipped - generic) > 1e-3
    assert _umegaki(as_hermitian(xi), as_hermitian(xi), 1e-12, -1.0) < -1e-3


def test_generic_examples():
    spec = PotentialSpec.make("neg-entropy", 2)
    xi, zeta = np.diag([0.3, 1.7]), np.diag([1.2, 0.4])
    assert matrix_div_generic(spec, xi, zeta) == pytest.approx(matrix_div("umegaki", xi, zeta),
                                                               abs=1e-10)
    rng = np.random.default_rng(10)
    A, B = random_hermitian(rng, 3), random_hermitian(rng, 3)
    gn = PotentialSpec.make("gamma-norm", 3, gamma=0.5)
    assert matrix_div_generic(gn, A, B) == pytest.approx(0.5 * np.linalg.norm(A - B) ** 2,
                                                         rel=1e-12)
    assert matrix_div_generic(spec, zeta, zeta) == 0.0


@pytest.mark.parametrize("family", FAMILIES, ids=fid)
def test_unitary_invariance(family):
    rng = np.random.default_rng(11)
    for n in (2, 4):
        xi, zeta = non_commuting_pair(rng, family[0], n)
        V = random_unitary(rng, n)
        a = matrix_div(family[0], xi, zeta, family[1])
        b = matrix_div(family[0], V @ xi @ V.conj().T, V @ zeta @ V.conj().T, family[1])
        assert b == pytest.approx(a, abs=1e-9)


@pytest.mark.parametrize("family", FAMILIES, ids=fid)
def test_information_axiom_on_matrices(family):
    rng = np.random.default_rng(12)
    for n in range(2, 7):
        for _ in range(20):
            xi, zeta = non_commuting_pair(rng, family[0], n)
            assert matrix_div(family[0], xi, zeta, family[1]) > 0.0
            assert abs(matrix_div(family[0], xi, xi, family[1])) <= 1e-10


def test_logdet_identity():
    rng = np.random.default_rng(13)
    for n in range(2, 7):
        xi, zeta = non_commuting_pair(rng, "logdet", n)
        assert logdet_via_h(xi, zeta) == pytest.approx(matrix_div("logdet", xi, zeta), abs=1e-9)


@pytest.mark.parametrize("family,xi,zeta", [
    ("umegaki", np.diag([1.0, -0.1]), np.eye(2)),
    ("umegaki", np.eye(2), np.diag([1.0, 0.0])),
    ("logdet", np.diag([1.0, 0.0]), np.eye(2)),
    ("fermi", np.diag([0.5, 1.2]), 0.5 * np.eye(2)),
    ("fermi", 0.5 * np.eye(2), np.diag([0.5, 1.0])),
    ("gammanorm(0.5)", np.eye(2), np.diag([1.0, 0.0])),
    ("alpha(0.5)", np.diag([1.0, -0.5]), np.eye(2)),
    ("alpha(-1)", np.diag([1.0, 0.0]), np.eye(2)),
])
def test_outside_domain_is_infinite(family, xi, zeta):
    assert matrix_div(family, xi, zeta) == math.inf


def test_boundary_first_arguments_are_finite():
    assert math.isfinite(matrix_div("umegaki", np.diag([1.0, 0.0]), np.eye(2)))
    assert math.isfinite(matrix_div("fermi", np.diag([1.0, 0.0]), 0.5 * np.eye(2)))
    assert math.isfinite(matrix_div("gammanorm", np.diag([1.0, -2.0]), np.eye(2), 0.5))
    assert math.isfinite(matrix_div("alpha(0.5)", np.diag([1.0, 0.0]), np.eye(2)))


def test_matrix_div_dimension_mismatch():
    with pytest.raises(DimensionError):
        matrix_div("logdet", np.eye(2), np.eye(3))


def test_parse_matrix_family():
    assert parse_matrix_family("alpha(0.25)") == ("alpha", 0.25)
    assert parse_matrix_family("gammanorm") == ("gammanorm", 0.5)
    assert parse_matrix_family("Umegaki") == ("umegaki", None)
    assert set(MATRIX_FAMILIES) == {"umegaki", "logdet", "fermi", "gammanorm", "alpha"}
    for bad in [("alpha", None), ("alpha", 1.5), ("gammanorm", 1.0), ("nope", None)]:
        with pytest.raises(ValidationError):
            parse_matrix_family(*bad)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 3.0), min_size=2, max_size=4),
       st.lists(st.floats(0.2, 3.0), min_size=2, max_size=4))
def test_commuting_pairs_reduce_to_vector_divergence(a, b):
    n = min(len(a), len(b))
    a, b = np.array(a[:n]), np.array(b[:n])
    vec = PotentialSpec.make("burg", n)
    from genbregman.bregman import bregman_div
    assert matrix_div("logdet", np.diag(a), np.diag(b)) == pytest.approx(
        bregman_div(vec, a, b), rel=1e-10, abs=1e-12)
