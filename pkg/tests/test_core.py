from fractions import Fraction

import numpy as np
import pytest

from locc_hyptest.core import (
    HermitianOperator,
    InstanceError,
    MeasurementClass,
    SchmidtSpectrum,
    TestInstance,
    beta_global,
    invert_tradeoff,
    schmidt_vector,
    tensor_power,
    validate_instance,
)


@pytest.mark.parametrize("bad, message", [
    ([0.25, 0.75], "unsorted spectrum"),
    ([0.6, 0.5], "sum != 1"),
    ([-0.1, 1.1], "negative entry"),
])
def test_spectrum_validation(bad, message):
    with pytest.raises(InstanceError, match=message):
        validate_instance(TestInstance.from_lambdas(bad, 2, 2))


def test_dimension_mismatch():
    with pytest.raises(InstanceError, match="dimension mismatch"):
        validate_instance(TestInstance.from_lambdas([0.5, 0.3, 0.2], 2, 2))


def test_schmidt_vector_and_state():
    spec = SchmidtSpectrum((0.75, 0.25))
    assert np.allclose(schmidt_vector(spec), [np.sqrt(0.75), 0.5])
    psi = TestInstance.from_lambdas([0.75, 0.25], 2, 2).state_vector()
    assert np.allclose(psi, [np.sqrt(0.75), 0, 0, 0.5])
    assert np.isclose(np.linalg.norm(psi), 1)


def test_tensor_power_exact_and_float(fig1, fig1_exact):
    sq = tensor_power(fig1, 2)
    assert (sq.d_a, sq.d_b) == (4, 4)
    assert np.allclose(sq.lambdas, [9 / 16, 3 / 16, 3 / 16, 1 / 16])
    exact = tensor_power(fig1_exact, 2)
    assert exact.spectrum.lambdas[0] == Fraction(9, 16)
    assert sum(exact.spectrum.lambdas) == 1


def test_tensor_power_cap(fig1):
    with pytest.raises(InstanceError):
        tensor_power(fig1, 7)


@pytest.mark.parametrize("alpha, want", [(0.0, 1.0), (0.1, 0.6), (0.25, 0.0), (0.9, 0.0)])
def test_beta_global(fig1, alpha, want):
    assert beta_global(fig1, alpha) == pytest.approx(want, abs=1e-12)


def test_class_parse_aliases():
    assert MeasurementClass.parse("one_way") is MeasurementClass.ONE_WAY
    assert MeasurementClass.parse("separable") is MeasurementClass.SEPARABLE
    with pytest.raises(ValueError):
        MeasurementClass.parse("nonsense")


def test_invert_tradeoff_linear():
    alpha = invert_tradeoff(lambda a: max(0.0, 1 - 2 * a), 0.5)
    assert alpha == pytest.approx(0.25, abs=1e-9)
    assert invert_tradeoff(lambda a: max(0.0, 1 - 2 * a), 1.0) == pytest.approx(0.0, abs=1e-9)


def test_hermitian_operator(fig1):
    P = HermitianOperator.projector(fig1.state_vector(), (2, 2))
    assert P.trace() == pytest.approx(1)
    assert P.expectation(fig1.state_vector()) == pytest.approx(1)
    assert np.allclose(sorted(P.eigenvalues()), [0, 0, 0, 1])
    assert P.complement().trace() == pytest.approx(3)
    # partial transpose of an entangled projector has a negative eigenvalue
    assert min(P.partial_transpose().eigenvalues()) < -0.1
    assert np.allclose(P.swap_parties().matrix, P.matrix)
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0, 1], [0, 0]]), (1, 2))
