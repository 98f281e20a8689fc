import math

import numpy as np
import pytest
from scipy.optimize import minimize

from qcorr.errors import (
    DegeneracyError,
    DimensionError,
    InvalidMeasurementError,
    UnsupportedDimensionError,
)
from qcorr.measures import (
    Kind,
    Measurement,
    apply_measurement,
    block_measurement,
    block_quadratic_form,
    closed_forms,
    distances_from_vectors,
    eigenspaces,
    gd_candidate_3x3,
    gd_exact_2xn,
    gd_lower_bound,
    marginal,
    min_exact,
    min_exact_2d_block,
    min_exact_nondegenerate,
    min_upper_bound,
    normalized_distance,
    preserves_marginal,
    qubit_measurement,
    reference_measurements,
)
from qcorr.optimizer import haar_unitaries
from qcorr.states import (
    DensityMatrix,
    StateSpec,
    benatti_4x4,
    horodecki_2x4,
    horodecki_3x3,
    horodecki_4x4_key,
    reinterpret,
    upb_pyramid,
    upb_tiles,
    validate,
    werner,
)

from conftest import random_state

SQ5 = math.sqrt(5)


def basis_measurement(*vectors):
    cols = [np.asarray(v, dtype=float) for v in vectors]
    if len(cols) == 2 and len(cols[0]) == 3:
        cols.append(np.cross(cols[0], cols[1]))
    return Measurement.from_vectors(np.array(cols).T)


PYRAMID_WITNESS = basis_measurement(
    np.array([math.sqrt(3), 1, math.sqrt(2)]) / math.sqrt(6), np.array([0, -math.sqrt(2), 1]) / math.sqrt(3)
)
TRIAL_3X3 = basis_measurement(np.ones(3) / math.sqrt(3), np.array([1, 1, -2]) / math.sqrt(6))
KEY_PAIRED = Measurement.from_vectors(
    np.array([[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]]) / math.sqrt(2)
)


# -- Measurement -------------------------------------------------------------

def test_measurement_rejects_non_projectors():
    with pytest.raises(InvalidMeasurementError):
        Measurement(np.array([np.eye(2), np.zeros((2, 2))]))
    with pytest.raises(InvalidMeasurementError):
        Measurement.from_vectors(np.array([[1, 1], [0, 1]]))
    with pytest.raises(InvalidMeasurementError):
        Measurement(np.eye(3))


def test_measurement_same_as_ignores_order():
    a = qubit_measurement([0, 1, 0])
    b = qubit_measurement([0, -1, 0])
    assert a.same_as(b)
    assert not a.same_as(qubit_measurement([1, 0, 0]))


# -- applying measurements ---------------------------------------------------

def test_pinching_is_idempotent_and_keeps_state_valid(factory_state):
    rng = np.random.default_rng(3)
    meas = Measurement.from_vectors(haar_unitaries(factory_state.dim_a, 1, rng)[0])
    once = apply_measurement(factory_state, meas)
    twice = apply_measurement(DensityMatrix(once, *factory_state.dims), meas)
    np.testing.assert_allclose(twice, once, atol=1e-14)
    assert validate(DensityMatrix(once, *factory_state.dims)).ok()


def test_maximally_mixed_is_unchanged():
    rho = DensityMatrix(np.eye(12) / 12, 3, 4)
    meas = Measurement.from_vectors(haar_unitaries(3, 1, np.random.default_rng(0))[0])
    np.testing.assert_allclose(apply_measurement(rho, meas), rho.data, atol=1e-15)
    assert normalized_distance(rho, meas) < 1e-28


def test_apply_measurement_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_measurement(upb_tiles(), Measurement.computational(2))


def test_batched_distances_agree_with_direct(factory_state):
    us = haar_unitaries(factory_state.dim_a, 25, np.random.default_rng(11))
    batched = distances_from_vectors(factory_state, us)
    direct = [normalized_distance(factory_state, Measurement.from_vectors(u)) for u in us]
    np.testing.assert_allclose(batched, direct, atol=1e-13)


def test_benatti_computational_basis_distance():
    assert abs(normalized_distance(benatti_4x4(), Measurement.computational(4)) - 1 / 9) < 1e-12


def test_pyramid_witness_distance():
    assert abs(normalized_distance(upb_pyramid(), PYRAMID_WITNESS) - (19 - 7 * SQ5) / 32) < 1e-12


@pytest.mark.parametrize("beta", [0.0, 1.3, 2.5, 4.1, 5.0])
def test_horodecki_3x3_trial_measurement(beta):
    value = normalized_distance(horodecki_3x3(beta), TRIAL_3X3)
    assert abs(value - (49 - 25 * beta + 5 * beta**2) / 294) < 1e-12


def test_key_state_paired_measurement():
    assert abs(normalized_distance(horodecki_4x4_key(), KEY_PAIRED) - 0.142977) < 1e-6


# -- bounds ------------------------------------------------------------------

def test_gd_lower_bound_values():
    assert abs(gd_lower_bound(horodecki_4x4_key()).value - (29 / 12 - 5 * math.sqrt(2) / 3)) < 1e-12
    assert abs(gd_lower_bound(upb_pyramid()).value - (19 - 7 * SQ5) / 32) < 1e-12
    assert abs(gd_lower_bound(horodecki_3x3(2.5)).value - 11 / 196) < 1e-12
    theta = math.atan(9 * math.sqrt(1319) / 244) / 3
    tiles = (65 - 2 * math.sqrt(55) * math.cos(theta)) / 576
    assert abs(gd_lower_bound(upb_tiles()).value - tiles) < 1e-12
    assert round(gd_lower_bound(upb_tiles()).value, 5) == 0.08832
    assert gd_lower_bound(upb_tiles()).kind is Kind.LOWER_BOUND


def test_min_upper_bound_values():
    assert abs(min_upper_bound(upb_pyramid()).value - 5 * SQ5 / 48 * (3 - SQ5)) < 1e-12
    assert abs(min_upper_bound(horodecki_4x4_key()).value - (47 / 12 - 8 * math.sqrt(2) / 3)) < 1e-12
    assert abs(min_upper_bound(benatti_4x4()).value - 1 / 9) < 1e-12
    assert min_upper_bound(benatti_4x4()).kind is Kind.UPPER_BOUND


def test_bounds_refuse_larger_first_factor():
    rho = reinterpret(werner(4, 0.2), 8, 2)
    with pytest.raises(DimensionError):
        gd_lower_bound(rho)
    with pytest.raises(DimensionError):
        min_upper_bound(rho)


def test_bound_ordering_on_random_measurements(factory_state):
    """lower bound <= any distance; admissible distances <= MIN bound."""
    lower = gd_lower_bound(factory_state).value
    upper = min_upper_bound(factory_state).value
    rho_a = marginal(factory_state)
    us = haar_unitaries(factory_state.dim_a, 300, np.random.default_rng(5))
    for u in us:
        meas = Measurement.from_vectors(u)
        d = normalized_distance(factory_state, meas)
        assert d >= lower - 1e-9
        if preserves_marginal(meas, rho_a):
            assert d <= upper + 1e-9
    # admissible measurements built from the eigenspaces
    spaces = eigenspaces(rho_a)
    for u in us[:50]:
        cols = []
        for _, basis in spaces:
            k = basis.shape[1]
            cols.append(basis @ u[:k, :k] if k > 1 else basis)
        vecs = np.hstack(cols)
        q, _ = np.linalg.qr(vecs)
        meas = Measurement.from_vectors(q)
        if preserves_marginal(meas, rho_a):
            assert normalized_distance(factory_state, meas) <= upper + 1e-9


# -- exact GD ----------------------------------------------------------------

def _brute_force_qubit_gd(rho, starts=40):
    """Minimize the distance over the Bloch sphere directly (no use of G)."""
    def f(angles):
        t, p = angles
        e = [math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)]
        return normalized_distance(rho, qubit_measurement(e))

    rng = np.random.default_rng(0)
    best = math.inf
    for t0, p0 in zip(rng.uniform(0, math.pi, starts), rng.uniform(0, 2 * math.pi, starts)):
        res = minimize(f, [t0, p0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        best = min(best, res.fun)
    return best


@pytest.mark.parametrize("a", [0.0, 0.2, 1 / 3, 0.6, 1.0])
def test_gd_exact_2xn_matches_brute_force(a):
    rho = horodecki_2x4(a)
    est = gd_exact_2xn(rho)
    assert est.kind is Kind.EXACT
    assert abs(est.value - _brute_force_qubit_gd(rho, starts=10)) < 1e-9
    assert abs(normalized_distance(rho, est.witness) - est.value) < 1e-12


def test_gd_exact_2xn_known_points():
    assert abs(gd_exact_2xn(horodecki_2x4(0.2)).value - 12 * 0.04 / 2.4**2) < 1e-12
    assert abs(gd_exact_2xn(horodecki_2x4(1.0)).value - 3 / 32) < 1e-12
    assert abs(gd_exact_2xn(reinterpret(benatti_4x4(), 2, 8)).value - 1 / 9) < 1e-12
    for z in (-1.0, 0.0, 0.6):
        value = gd_exact_2xn(reinterpret(werner(4, z), 2, 8)).value
        assert abs(value - ((4 * z - 1) / 15) ** 2) < 1e-12


def test_gd_exact_2xn_witness_on_random_states():
    rng = np.random.default_rng(21)
    for n in (2, 3, 4):
        for _ in range(5):
            rho = random_state(2, n, rng)
            est = gd_exact_2xn(rho)
            assert abs(normalized_distance(rho, est.witness) - est.value) < 1e-12
            assert abs(est.value - _brute_force_qubit_gd(rho, starts=6)) < 1e-8


def test_gd_exact_2xn_requires_qubit():
    with pytest.raises(UnsupportedDimensionError):
        gd_exact_2xn(upb_tiles())


def test_gd_candidate_3x3_computational_basis_at_zero():
    est = gd_candidate_3x3(horodecki_3x3(0.0))
    assert est is not None and est.kind is Kind.EXACT
    assert abs(est.value - 4 / 49) < 1e-12
    assert est.witness.same_as(Measurement.computational(3))
    assert abs(normalized_distance(horodecki_3x3(0.0), est.witness) - 4 / 49) < 1e-12


def test_gd_candidate_3x3_fails_where_bound_is_open():
    assert gd_candidate_3x3(horodecki_3x3(2.5)) is None
    assert gd_candidate_3x3(upb_pyramid()) is None


def test_gd_candidate_3x3_requires_qutrit():
    with pytest.raises(UnsupportedDimensionError):
        gd_candidate_3x3(benatti_4x4())


# -- marginals ---------------------------------------------------------------

@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_marginal_spectrum_horodecki_2x4(a):
    w = np.sort(np.linalg.eigvalsh(marginal(horodecki_2x4(a))))
    np.testing.assert_allclose(w, sorted([4 * a / (1 + 7 * a), (1 + 3 * a) / (1 + 7 * a)]), atol=1e-14)


def test_marginal_of_product_state():
    v = np.zeros(4)
    v[1] = 1  # |01>
    rho = DensityMatrix(np.outer(v, v), 2, 2)
    np.testing.assert_array_equal(marginal(rho), [[1, 0], [0, 0]])


def test_preserves_marginal():
    rho_a = marginal(upb_tiles())
    w, v = np.linalg.eigh(rho_a)
    assert preserves_marginal(Measurement.from_vectors(v), rho_a)
    assert np.abs(rho_a - np.diag(np.diag(rho_a))).max() > 1e-3
    assert not preserves_marginal(Measurement.computational(3), rho_a)
    u = haar_unitaries(3, 1, np.random.default_rng(1))[0]
    assert preserves_marginal(Measurement.from_vectors(u), np.eye(3) / 3)


def test_eigenspaces_grouping():
    spaces = eigenspaces(np.diag([0.2, 0.4, 0.4 + 1e-12]))
    assert [b.shape[1] for _, b in spaces] == [1, 2]
    spaces = eigenspaces(np.diag([0.2, 0.4, 0.4 + 1e-6]))
    assert [b.shape[1] for _, b in spaces] == [1, 1, 1]


# -- exact MIN ---------------------------------------------------------------

def test_min_exact_nondegenerate_values():
    est = min_exact_nondegenerate(upb_tiles())
    assert abs(est.value - 95 / 704) < 1e-12
    assert preserves_marginal(est.witness, marginal(upb_tiles()))
    assert abs(min_exact_nondegenerate(horodecki_2x4(0.5)).value - 3 / 20.25) < 1e-12
    with pytest.raises(DegeneracyError):
        min_exact_nondegenerate(horodecki_2x4(1.0))


def test_nondegenerate_min_dominates_admissible_measurements():
    rng = np.random.default_rng(8)
    for _ in range(20):
        rho = random_state(3, 3, rng)
        exact = min_exact_nondegenerate(rho).value
        w, v = np.linalg.eigh(marginal(rho))
        for _ in range(10):
            phases = np.exp(2j * np.pi * rng.random(3))
            meas = Measurement.from_vectors(v * phases)
            assert normalized_distance(rho, meas) <= exact + 1e-9


def test_pyramid_block_distance_formula():
    rho = upb_pyramid()
    block = np.eye(3)[:, :2]
    fixed = np.eye(3)[:, 2:]
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        raw = normalized_distance(rho, block_measurement(x, block, fixed)) * 2 / 3
        assert abs(raw - (SQ5 - 2) * (3 + x[1] ** 2) / 8) < 1e-10


def test_pyramid_min_exact():
    est = min_exact_2d_block(upb_pyramid())
    assert abs(est.value - 0.75 * (SQ5 - 2)) < 1e-12
    sy = np.array([[0, -1j], [1j, 0]])
    expected = np.zeros((3, 3, 3), dtype=complex)
    expected[0, :2, :2] = (np.eye(2) + sy) / 2
    expected[1, :2, :2] = (np.eye(2) - sy) / 2
    expected[2, 2, 2] = 1
    assert est.witness.same_as(Measurement(expected))
    assert abs(normalized_distance(upb_pyramid(), est.witness) - est.value) < 1e-12


def test_block_quadratic_form_predicts_direct_distance():
    rng = np.random.default_rng(4)
    for rho in (upb_pyramid(), horodecki_2x4(1.0), reinterpret(benatti_4x4(), 2, 8)):
        spaces = eigenspaces(marginal(rho))
        block = next(b for _, b in spaces if b.shape[1] == 2)
        fixed = [b for _, b in spaces if b.shape[1] == 1]
        fixed = np.hstack(fixed) if fixed else None
        mat = block_quadratic_form(rho, block, fixed)
        for _ in range(20):
            x = rng.standard_normal(3)
            x /= np.linalg.norm(x)
            direct = normalized_distance(rho, block_measurement(x, block, fixed))
            assert abs(x @ mat @ x - direct) < 1e-10


def test_2d_block_on_qubit_saturates_bound():
    rho = horodecki_2x4(1.0)
    est = min_exact_2d_block(rho)
    assert abs(est.value - 3 / 16) < 1e-12
    assert abs(est.value - min_upper_bound(rho).value) < 1e-12


def test_2d_block_rejects_other_patterns():
    with pytest.raises(DegeneracyError):
        min_exact_2d_block(upb_tiles())
    with pytest.raises(DegeneracyError):
        min_exact_2d_block(benatti_4x4())


def test_min_exact_dispatch():
    assert min_exact(upb_tiles()).value == min_exact_nondegenerate(upb_tiles()).value
    assert abs(min_exact(upb_pyramid()).value - 0.75 * (SQ5 - 2)) < 1e-12
    assert min_exact(benatti_4x4()) is None


# -- closed forms and reference measurements ---------------------------------

def test_closed_forms():
    gd, mn = closed_forms(StateSpec.parse("horodecki2x4:a=0.333333333333333333"))
    assert abs(gd.value - 3 / 25) < 1e-12
    gd, mn = closed_forms(StateSpec.parse("werner:m=4,z=1"))
    assert abs(gd.value - 1 / 25) < 1e-15 and abs(mn.value - 1 / 25) < 1e-15
    gd, mn = closed_forms(StateSpec.parse("benatti"))
    assert gd.value == mn.value == 1 / 9
    assert closed_forms(StateSpec.parse("tiles")) is None
    assert closed_forms(StateSpec.parse("horodecki4x4key")) is None
    assert closed_forms(StateSpec.parse("horodecki3x3:beta=1")) is None


@pytest.mark.parametrize("a", np.linspace(0, 1, 11))
def test_closed_forms_agree_with_machinery_2x4(a):
    gd, mn = closed_forms(StateSpec.parse(f"horodecki2x4:a={float(a)!r}"))
    rho = horodecki_2x4(a)
    assert abs(gd.value - gd_exact_2xn(rho).value) < 1e-12
    assert abs(mn.value - min_exact(rho).value) < 1e-12


def test_reference_measurements_are_valid():
    for text in ("horodecki3x3:beta=1", "pyramid", "horodecki4x4key", "benatti", "tiles"):
        for label, meas in reference_measurements(StateSpec.parse(text)):
            assert isinstance(label, str) and meas.dim in (3, 4)


# -- duality of the 3x3 family -----------------------------------------------

@pytest.mark.parametrize("beta", [0.0, 0.5, 4.5, 5.0])
def test_duality_outside_window(beta):
    rho = horodecki_3x3(beta)
    gd = gd_candidate_3x3(rho)
    assert gd is not None and abs(gd.value - 4 / 49) < 1e-12
    assert abs(min_upper_bound(rho).value - (9 - 5 * beta + beta**2) / 49) < 1e-12
    assert abs(normalized_distance(rho, TRIAL_3X3) - (49 - 25 * beta + 5 * beta**2) / 294) < 1e-12


@pytest.mark.parametrize("beta", [1.5, 2.5, 3.5])
def test_duality_inside_window(beta):
    rho = horodecki_3x3(beta)
    assert gd_candidate_3x3(rho) is None
    assert abs(gd_lower_bound(rho).value - (9 - 5 * beta + beta**2) / 49) < 1e-12
    assert abs(min_upper_bound(rho).value - 4 / 49) < 1e-12


def test_measure_estimate_reporting_clamps_only_display():
    from qcorr.measures import MeasureEstimate
    est = MeasureEstimate(-1e-17, Kind.EXACT)
    assert est.reported_value == 0.0 and est.value < 0
