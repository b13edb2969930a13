import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qerase.core import (
    DensityMatrix,
    DimensionMismatchError,
    InvalidStateError,
    SeededRng,
    StateVector,
    UnitaryOperator,
    apply,
    fidelity,
    haar_random_state,
    inner_product,
    measure_projective,
    nonselective_measure,
    partial_trace,
    tensor_density,
    tensor_state,
    trace_distance,
)
from qerase.protocols import swap_operator

SQRT_HALF = 1 / math.sqrt(2)

ket0 = StateVector.basis(0, 2)
ket1 = StateVector.basis(1, 2)
plus = StateVector.from_amplitudes([SQRT_HALF, SQRT_HALF])

seeds = st.integers(min_value=0, max_value=2**64 - 1)
small_dims = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3)


def random_unitary(d, rng):
    # QR of a complex Ginibre matrix with the phase fix gives a Haar unitary
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return UnitaryOperator(q * (np.diag(r) / np.abs(np.diag(r))))


def kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def brute_force_partial_trace(rho, dims, keep):
    """Sum rho[(i, t), (j, t)] over all traced-out labels t."""
    ranges = [range(d) for d in dims]
    d_keep = dims[keep]
    out = np.zeros((d_keep, d_keep), dtype=complex)
    flat = lambda labels: np.ravel_multi_index(labels, dims)
    for row in itertools.product(*ranges):
        for col in itertools.product(*ranges):
            same_elsewhere = all(row[k] == col[k] for k in range(len(dims)) if k != keep)
            if same_elsewhere:
                out[row[keep], col[keep]] += rho[flat(row), flat(col)]
    return out


def projector_sum(rho, dims, subsystem):
    total = np.zeros_like(rho)
    for k in range(dims[subsystem]):
        factors = [np.eye(d) for d in dims]
        factors[subsystem] = np.zeros((dims[subsystem],) * 2)
        factors[subsystem][k, k] = 1.0
        P = kron_all(factors)
        total += P @ rho @ P
    return total


# --------------------------------------------------------------------------
# types


def test_state_rejects_unnormalized():
    with pytest.raises(InvalidStateError):
        StateVector((2,), np.array([1.0, 1.0]))


def test_state_rejects_wrong_length():
    with pytest.raises(InvalidStateError):
        StateVector((2, 2), np.array([1.0, 0.0]))


def test_state_rejects_nan():
    with pytest.raises(InvalidStateError):
        StateVector((2,), np.array([np.nan, 0.0]))


def test_state_is_read_only():
    with pytest.raises(ValueError):
        ket0.amplitudes[0] = 0.5


def test_dimension_cap():
    with pytest.raises(InvalidStateError):
        StateVector.basis(0, (2,) * 11)


def test_density_rejects_non_hermitian():
    with pytest.raises(InvalidStateError):
        DensityMatrix((2,), np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_density_rejects_bad_trace():
    with pytest.raises(InvalidStateError):
        DensityMatrix((2,), np.eye(2))


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(InvalidStateError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))


def test_unitary_rejects_non_unitary():
    with pytest.raises(InvalidStateError):
        UnitaryOperator(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_rng_reproducible_and_seed_range():
    a, b = SeededRng(42), SeededRng(42)
    assert [a.uniform() for _ in range(5)] == [b.uniform() for _ in range(5)]
    with pytest.raises(ValueError):
        SeededRng(-1)
    with pytest.raises(ValueError):
        SeededRng(2**64)


def test_rng_child_depends_only_on_seed_and_lane():
    parent = SeededRng(9)
    first = parent.child(3).uniform()
    parent.uniform()
    assert parent.child(3).uniform() == first
    assert SeededRng(9).child(4).uniform() != first


# --------------------------------------------------------------------------
# inner product / tensor / apply


def test_inner_product_examples():
    assert inner_product(ket0, ket0) == 1
    assert inner_product(ket0, ket1) == 0
    assert inner_product(plus, ket0) == pytest.approx(0.7071067811865476, abs=1e-15)


def test_inner_product_is_conjugate_linear_in_first_argument():
    a = StateVector.from_amplitudes([1j, 0])
    assert inner_product(a, ket0) == pytest.approx(-1j)


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product(ket0, StateVector.basis(0, 3))


def test_tensor_examples():
    np.testing.assert_array_equal(tensor_state(ket1, ket0).amplitudes, [0, 0, 1, 0])
    np.testing.assert_array_equal(tensor_state(ket0, ket0).amplitudes, [1, 0, 0, 0])
    alpha, beta = 0.6, 0.8j
    phi = StateVector.from_amplitudes([alpha, beta])
    joint = tensor_state(phi, ket0)
    np.testing.assert_array_equal(joint.amplitudes, [alpha, 0, beta, 0])
    assert joint.dims == (2, 2)


def test_apply_examples():
    phi = haar_random_state(2, SeededRng(1))
    np.testing.assert_array_equal(apply(UnitaryOperator.identity(2), phi).amplitudes, phi.amplitudes)
    s = StateVector.basis(2, (2, 2))
    np.testing.assert_array_equal(apply(swap_operator(2), s).amplitudes, [0, 1, 0, 0])


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(UnitaryOperator.identity(4), ket0)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, dims=small_dims)
def test_unitaries_preserve_norm_and_inner_products(seed, dims):
    rng = SeededRng(seed)
    d = math.prod(dims)
    U = random_unitary(d, rng)
    a = haar_random_state(dims, rng)
    b = haar_random_state(dims, rng)
    Ua, Ub = apply(U, a), apply(U, b)
    assert abs(np.linalg.norm(Ua.amplitudes) - 1) <= 1e-12
    assert abs(inner_product(Ua, Ub) - inner_product(a, b)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_swap_squared_acts_as_identity(seed):
    s = haar_random_state((2, 2), SeededRng(seed))
    U = swap_operator(2)
    np.testing.assert_allclose(apply(U, apply(U, s)).amplitudes, s.amplitudes, atol=1e-15)
    np.testing.assert_array_equal(U.entries @ U.entries, np.eye(4))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, da=st.integers(1, 3), db=st.integers(1, 3), dc=st.integers(1, 3))
def test_tensor_associative(seed, da, db, dc):
    rng = SeededRng(seed)
    a, b, c = (haar_random_state(d, rng) for d in (da, db, dc))
    left = tensor_state(tensor_state(a, b), c)
    right = tensor_state(a, tensor_state(b, c))
    assert left.dims == right.dims == (da, db, dc)
    np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-15)


# --------------------------------------------------------------------------
# partial trace


def test_partial_trace_product_basis_state():
    rho = tensor_state(ket0, ket1).density()
    np.testing.assert_array_equal(partial_trace(rho, 0).entries, ket0.density().entries)
    np.testing.assert_array_equal(partial_trace(rho, 1).entries, ket1.density().entries)


def test_partial_trace_bell_state_is_maximally_mixed():
    bell = StateVector.from_amplitudes([SQRT_HALF, 0, 0, SQRT_HALF], dims=(2, 2))
    for keep in (0, 1):
        np.testing.assert_allclose(partial_trace(bell.density(), keep).entries, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_invalid_index():
    rho = tensor_state(ket0, ket1).density()
    with pytest.raises(IndexError):
        partial_trace(rho, 2)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dims=st.lists(st.integers(1, 3), min_size=2, max_size=3))
def test_partial_trace_matches_brute_force(seed, dims):
    rho = haar_random_state(dims, SeededRng(seed)).density()
    for keep in range(len(dims)):
        expected = brute_force_partial_trace(rho.entries, tuple(dims), keep)
        got = partial_trace(rho, keep)
        np.testing.assert_allclose(got.entries, expected, atol=1e-14)
        assert abs(np.trace(got.entries) - 1) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, da=st.integers(1, 4), db=st.integers(1, 4))
def test_partial_trace_of_product_returns_factor(seed, da, db):
    rng = SeededRng(seed)
    # mixed factors, to exercise more than rank one
    ra = partial_trace(haar_random_state((da, 2), rng).density(), 0)
    rb = partial_trace(haar_random_state((db, 3), rng).density(), 0)
    joint = tensor_density(ra, rb)
    np.testing.assert_allclose(partial_trace(joint, 0).entries, ra.entries, atol=1e-12)
    np.testing.assert_allclose(partial_trace(joint, 1).entries, rb.entries, atol=1e-12)


# --------------------------------------------------------------------------
# measurement


def test_measure_basis_state():
    m = measure_projective(ket0, 0, SeededRng(0))
    assert (m.outcome, m.probability) == (0, 1.0)
    np.testing.assert_array_equal(m.post.amplitudes, ket0.amplitudes)
    m = measure_projective(ket1, 0, SeededRng(0))
    assert (m.outcome, m.probability) == (1, 1.0)


def test_measure_reports_exact_born_weight():
    phi = StateVector.from_amplitudes([0.6, 0.8])
    rng = SeededRng(5)
    seen = {}
    for _ in range(200):
        m = measure_projective(phi, 0, rng)
        seen[m.outcome] = m.probability
        assert abs(abs(m.post.amplitudes[m.outcome]) - 1) <= 1e-12
    assert seen[0] == pytest.approx(0.36, abs=1e-15)
    assert seen[1] == pytest.approx(0.64, abs=1e-15)


def test_measure_subsystem_of_joint_state():
    bell = StateVector.from_amplitudes([SQRT_HALF, 0, 0, SQRT_HALF], dims=(2, 2))
    m = measure_projective(bell, 1, SeededRng(3))
    assert m.probability == pytest.approx(0.5)
    expected = np.zeros(4)
    expected[3 * m.outcome] = 1.0
    np.testing.assert_allclose(m.post.amplitudes, expected, atol=1e-15)


def test_measure_never_selects_zero_weight_outcome():
    phi = StateVector.from_amplitudes([0, 1, 0])
    rng = SeededRng(0)
    assert {measure_projective(phi, 0, rng).outcome for _ in range(100)} == {1}


@pytest.mark.parametrize(
    "amps, seed",
    [([SQRT_HALF, SQRT_HALF], 11), ([0.6, 0.8], 12), ([0.5, 0.5, SQRT_HALF], 13)],
)
def test_measurement_frequencies_within_four_sigma(amps, seed):
    phi = StateVector.from_amplitudes(amps)
    rng = SeededRng(seed)
    n = 20_000
    counts = np.bincount([measure_projective(phi, 0, rng).outcome for _ in range(n)], minlength=len(amps))
    for k, a in enumerate(amps):
        p = abs(a) ** 2
        assert abs(counts[k] / n - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_nonselective_examples():
    diag = DensityMatrix((2,), np.diag([0.3, 0.7]))
    np.testing.assert_array_equal(nonselective_measure(diag, 0).entries, diag.entries)
    np.testing.assert_allclose(nonselective_measure(plus.density(), 0).entries, np.eye(2) / 2, atol=1e-15)
    with pytest.raises(IndexError):
        nonselective_measure(diag, 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, dims=st.lists(st.integers(1, 3), min_size=1, max_size=3), data=st.data())
def test_nonselective_equals_projector_sum(seed, dims, data):
    sub = data.draw(st.integers(0, len(dims) - 1))
    rho = haar_random_state(dims, SeededRng(seed)).density()
    got = nonselective_measure(rho, sub).entries
    np.testing.assert_allclose(got, projector_sum(rho.entries, tuple(dims), sub), atol=1e-12, rtol=0)
    np.testing.assert_array_equal(np.diag(got), np.diag(rho.entries))


# --------------------------------------------------------------------------
# random states, fidelity, trace distance


@settings(max_examples=30, deadline=None)
@given(seed=seeds, dims=small_dims)
def test_haar_state_normalized(seed, dims):
    s = haar_random_state(dims, SeededRng(seed))
    assert abs(np.linalg.norm(s.amplitudes) - 1) <= 1e-12


def test_haar_state_reproducible():
    a = haar_random_state(4, SeededRng(42))
    b = haar_random_state(4, SeededRng(42))
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)


def test_haar_mean_population_is_half():
    rng = SeededRng(2024)
    pops = [abs(haar_random_state(2, rng).amplitudes[0]) ** 2 for _ in range(100_000)]
    assert abs(np.mean(pops) - 0.5) <= 0.005


def test_fidelity_examples():
    phi = haar_random_state(3, SeededRng(8))
    assert fidelity(phi, phi.density()) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(ket0, ket1.density()) == 0.0
    with pytest.raises(DimensionMismatchError):
        fidelity(ket0, StateVector.basis(0, 3).density())


def test_trace_distance_examples():
    assert trace_distance(ket0.density(), DensityMatrix.maximally_mixed(2)) == pytest.approx(0.5, abs=1e-15)
    assert trace_distance(ket0.density(), ket1.density()) == pytest.approx(1.0, abs=1e-15)
    assert trace_distance(plus.density(), plus.density()) == 0.0
