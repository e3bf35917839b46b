import numpy as np
import pytest
from hypothesis import given, settings

from maxfdiv.bloch import from_bloch
from maxfdiv.ensembles import haar_unitary, random_commuting_pair, random_density, random_povm
from maxfdiv.errors import DimensionMismatch, NotOperatorConvex, SingularState, UnsupportedDimension
from maxfdiv.fdiv import alpha_function, f_divergence, kl_function, total_variation, tv_function
from maxfdiv.qdiv import (
    dmax_operator_convex,
    helstrom_measurement,
    measured_divergence,
    measurement_gap_scan,
    trace_distance,
)
from maxfdiv.reverse_test import POVM, measure
from reference import R3, S3
from strategies import seeds, state_pairs

KL = kl_function()
SQRT = alpha_function(0.5)
OPERATOR_CONVEX = [KL, SQRT, alpha_function(-0.5)]
RHO_Z, SIGMA_X = from_bloch([0, 0, 0.5]), from_bloch([0.5, 0, 0])

# tr rho log(rho^1/2 sigma^-1 rho^1/2), via scipy.linalg.sqrtm/logm
KL_MAX_ZX = 0.30061988740123397
KL_MAX_R3_S3 = 1.778617306134597
# sup over all projective qubit measurements, Nelder-Mead from 64 starts
KL_MEASURED_ZX = 0.26191202266315206


def test_closed_form_examples():
    rho, sigma = np.diag([0.7, 0.3]), np.diag([0.4, 0.6])
    assert dmax_operator_convex(rho, sigma, KL) == pytest.approx(0.18378689738681223, abs=1e-14)
    assert dmax_operator_convex(rho, rho, KL) == pytest.approx(0.0, abs=1e-15)
    assert dmax_operator_convex(RHO_Z, SIGMA_X, KL) == pytest.approx(KL_MAX_ZX, abs=1e-12)
    assert dmax_operator_convex(R3, S3, KL) == pytest.approx(KL_MAX_R3_S3, abs=1e-11)


def test_closed_form_errors():
    with pytest.raises(NotOperatorConvex):
        dmax_operator_convex(RHO_Z, SIGMA_X, tv_function())
    with pytest.raises(SingularState):
        dmax_operator_convex(np.diag([1.0, 0.0]), SIGMA_X, KL)
    with pytest.raises(SingularState):
        dmax_operator_convex(RHO_Z, np.diag([1.0, 0.0]), KL)
    with pytest.raises(DimensionMismatch):
        dmax_operator_convex(RHO_Z, np.eye(3) / 3, KL)


def test_closed_form_dominates_random_measurements(rng):
    rho, sigma = random_density(2, rng), random_density(2, rng)
    bound = dmax_operator_convex(rho, sigma, KL)
    for _ in range(50):
        povm = POVM(tuple(random_povm(2, int(rng.integers(2, 5)), rng)))
        assert measured_divergence(rho, sigma, povm, KL) <= bound + 1e-9


@pytest.mark.parametrize("f", OPERATOR_CONVEX, ids=lambda f: f.name)
@settings(max_examples=25)
@given(pair=state_pairs(max_dim=5), seed=seeds)
def test_unitary_invariance_and_measure_decrease(f, pair, seed):
    rho, sigma = pair
    rng = np.random.default_rng(seed)
    u = haar_unitary(len(rho), rng)
    base = dmax_operator_convex(rho, sigma, f)
    assert dmax_operator_convex(u @ rho @ u.conj().T, u @ sigma @ u.conj().T, f) == pytest.approx(base, abs=1e-9)
    povm = POVM(tuple(random_povm(len(rho), int(rng.integers(2, 6)), rng)))
    assert measured_divergence(rho, sigma, povm, f) <= base + 1e-9


@pytest.mark.parametrize("f", OPERATOR_CONVEX, ids=lambda f: f.name)
@given(seed=seeds)
def test_commuting_reduction(f, seed):
    rng = np.random.default_rng(seed)
    rho, sigma, p, q = random_commuting_pair(int(rng.integers(2, 7)), rng)
    assert dmax_operator_convex(rho, sigma, f) == pytest.approx(f_divergence(p, q, f), abs=1e-10)


def test_trace_distance_examples():
    rho = random_density(3, np.random.default_rng(1))
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == 2.0
    c = 0.2 - 0.1j
    rho = np.array([[0.6, np.conj(c)], [c, 0.4]])
    sigma = np.array([[0.6, -np.conj(c)], [-c, 0.4]])
    assert trace_distance(rho, sigma) == pytest.approx(4 * abs(c), abs=1e-15)
    with pytest.raises(DimensionMismatch):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


@given(pair=state_pairs())
def test_trace_distance_identity(pair):
    rho, sigma = pair
    plus = np.linalg.eigvalsh(rho - sigma)
    assert abs(trace_distance(rho, sigma) - 2 * plus[plus > 0].sum()) <= 1e-11


def test_helstrom_examples():
    m = helstrom_measurement(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
    np.testing.assert_allclose(m.elements[0], np.diag([1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(m.elements[1], np.diag([0.0, 1.0]), atol=1e-15)
    rho = random_density(2, np.random.default_rng(2))
    m = helstrom_measurement(rho, rho)
    assert total_variation(measure(rho, m), measure(rho, m)) == 0.0


def test_helstrom_attains_trace_distance(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        m = helstrom_measurement(rho, sigma)
        assert abs(total_variation(measure(rho, m), measure(sigma, m)) - trace_distance(rho, sigma)) <= 1e-9


def test_measured_divergence_examples():
    rho, sigma = np.diag([0.7, 0.3]), np.diag([0.4, 0.6])
    for f in (KL, SQRT, tv_function()):
        assert measured_divergence(rho, sigma, POVM((np.eye(2),)), f) == f.f_at_1
    basis = POVM.from_basis(np.eye(2))
    assert measured_divergence(rho, sigma, basis, KL) == pytest.approx(0.18378689738681223, abs=1e-15)
    other = POVM(tuple(random_povm(2, 3, np.random.default_rng(3))))
    assert measured_divergence(rho, rho, other, KL) == pytest.approx(0.0, abs=1e-15)


def test_gap_scan_examples():
    rep = measurement_gap_scan(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]), KL, 100)
    assert rep.commuting and abs(rep.gap) <= 1e-9 and rep.grid_size == 10_000
    rho = random_density(2, np.random.default_rng(4))
    rep = measurement_gap_scan(rho, rho, KL, 20)
    assert rep.dmax == pytest.approx(0.0, abs=1e-14)
    assert rep.best_measured == pytest.approx(0.0, abs=1e-14)
    assert rep.gap == pytest.approx(0.0, abs=1e-14)


def test_gap_scan_noncommuting_reference():
    rep = measurement_gap_scan(RHO_Z, SIGMA_X, KL, 100)
    assert not rep.commuting
    assert rep.dmax == pytest.approx(KL_MAX_ZX, abs=1e-12)
    # the grid optimum can approach but never beat the continuous optimum
    assert KL_MEASURED_ZX - 1e-3 <= rep.best_measured <= KL_MEASURED_ZX + 1e-12
    assert rep.gap >= KL_MAX_ZX - KL_MEASURED_ZX - 1e-12
    assert measured_divergence(RHO_Z, SIGMA_X, rep.best_measurement, KL) == pytest.approx(rep.best_measured, abs=1e-12)


def test_gap_scan_tv_routes_to_sdp():
    rep = measurement_gap_scan(RHO_Z, SIGMA_X, tv_function(), 30)
    assert rep.dmax == pytest.approx(trace_distance(RHO_Z, SIGMA_X), abs=2e-8)
    assert rep.gap == pytest.approx(0.0, abs=2e-8)


def test_gap_scan_rejects_higher_dims():
    with pytest.raises(UnsupportedDimension):
        measurement_gap_scan(np.eye(3) / 3, np.eye(3) / 3, KL, 10)


def test_gap_scan_is_deterministic():
    a = measurement_gap_scan(RHO_Z, SIGMA_X, KL, 40)
    b = measurement_gap_scan(RHO_Z, SIGMA_X, KL, 40)
    assert a.best_measured == b.best_measured
    for x, y in zip(a.best_measurement.elements, b.best_measurement.elements):
        assert np.array_equal(x, y)
