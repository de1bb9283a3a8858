import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubitmix.model import (
    COMPONENTS,
    BiHarmonicDrive,
    BlochTensor,
    BlochVector,
    SystemParams,
    drive_values,
    occupation_probability,
    reconstruct_density_matrix,
    rhs,
    tensor_from_product,
)
from qubitmix.oracle import pauli_decompose

finite = st.floats(-5, 5, allow_nan=False)
rate = st.floats(0, 1, allow_nan=False)
unit = st.floats(-1, 1, allow_nan=False)


@st.composite
def params_st(draw):
    return SystemParams(draw(finite), draw(finite), draw(finite), draw(rate), draw(rate),
                        draw(rate), draw(rate), draw(unit), draw(unit))


@st.composite
def drive_st(draw):
    return BiHarmonicDrive(draw(finite), draw(finite), draw(st.floats(0.1, 10)),
                           draw(st.floats(0.1, 10)), draw(st.floats(0, 2 * math.pi)),
                           draw(st.sampled_from([1, 2])))


state_st = st.lists(unit, min_size=15, max_size=15).map(np.array)


class TestDriveValues:
    def test_zero_time_zero_phase(self):
        assert drive_values(0.0, BiHarmonicDrive(7, 10, 1.0, 3.0, 0.0)) == (0.0, 0.0)

    def test_quarter_phase(self):
        _, e2 = drive_values(0.0, BiHarmonicDrive(0, 10, 1.0, 3.0, math.pi / 2))
        assert e2 == 10.0

    def test_against_high_precision(self):
        w1 = 2 * math.sqrt(2)
        e1, e2 = drive_values(0.2, BiHarmonicDrive(10, 10, w1, 2 * w1, 0.0))
        mpmath.mp.dps = 40
        w = 2 * mpmath.sqrt(2)
        ref1 = 10 * mpmath.sin(w * mpmath.mpf("0.2"))
        ref2 = 10 * mpmath.sin(2 * w * mpmath.mpf("0.2"))
        assert e1 == pytest.approx(float(ref1), rel=1e-14)
        assert e2 == pytest.approx(float(ref2), rel=1e-14)
        assert e1 == pytest.approx(10 * math.sin(0.5657), abs=1e-3)
        assert e2 == pytest.approx(10 * math.sin(1.1314), abs=1e-3)

    def test_phase_on_first_signal(self):
        d = BiHarmonicDrive(3, 4, 1.0, 2.0, math.pi / 2, phase_on=1)
        assert drive_values(0.0, d) == (3.0, 0.0)

    @pytest.mark.parametrize("kw", [dict(omega1=0.0), dict(omega2=-1.0), dict(a1=math.inf),
                                    dict(phase_on=3)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            BiHarmonicDrive(**kw)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(gamma_phi1=-1e-3), dict(gamma_r2=-1.0),
                                    dict(z_t1=1.5), dict(delta1=math.nan), dict(g=math.inf)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SystemParams(**kw)

    def test_level_spacing(self):
        assert SystemParams.identical(1.0, 1.0).level_spacing == pytest.approx(math.sqrt(2) - 1)


class TestRhs:
    def test_zero_everything(self):
        params = SystemParams(1.0, 1.0, 1.0)
        out = rhs(0.0, BlochTensor.zeros(), params, BiHarmonicDrive())
        assert np.array_equal(out, np.zeros(15))

    def test_equilibrium_product_hand_values(self):
        state = BlochTensor.from_components(pi_0z=1, pi_z0=1, zz=1)
        out = rhs(0.0, state, SystemParams(1, 1, 1), BiHarmonicDrive())
        expected = np.zeros(15)
        expected[COMPONENTS.index("xy")] = -2.0
        expected[COMPONENTS.index("yx")] = -2.0
        assert np.array_equal(out, expected)

    def test_accepts_array_and_tensor(self):
        arr = np.linspace(-1, 1, 15)
        p, d = SystemParams(1.2, 0.7, 0.3, 0.1), BiHarmonicDrive(2, 3, 1, 2, 0.5)
        assert np.array_equal(rhs(1.5, arr, p, d), rhs(1.5, BlochTensor(arr), p, d))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            rhs(0.0, np.zeros(16), SystemParams(), BiHarmonicDrive())

    @settings(max_examples=200, deadline=None)
    @given(state_st, state_st, params_st(), drive_st(), st.floats(-50, 50))
    def test_affine(self, a, b, params, drive, t):
        lhs = rhs(t, a + b, params, drive) + rhs(t, np.zeros(15), params, drive)
        rhs_sum = rhs(t, a, params, drive) + rhs(t, b, params, drive)
        np.testing.assert_allclose(lhs, rhs_sum, atol=1e-11)

    @settings(max_examples=200, deadline=None)
    @given(state_st, params_st(), drive_st(), st.floats(-50, 50))
    def test_qubit_swap_symmetry(self, pi, params, drive, t):
        state = BlochTensor(pi)
        direct = BlochTensor(rhs(t, state, params, drive)).transpose().values
        swapped = rhs(t, state.transpose(), params.swapped(), drive.swapped())
        np.testing.assert_allclose(direct, swapped, atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(params_st(), st.floats(-50, 50))
    def test_decay_pattern(self, params, t):
        """With the Hamiltonian switched off each Pi_ab decays with rate(a) + rate(b)."""
        p = SystemParams(0.0, 0.0, 0.0, params.gamma_phi1, params.gamma_phi2,
                         params.gamma_r1, params.gamma_r2, params.z_t1, params.z_t2)
        undriven = BiHarmonicDrive()
        r1 = {"0": 0.0, "x": p.gamma_phi1, "y": p.gamma_phi1, "z": p.gamma_r1}
        r2 = {"0": 0.0, "x": p.gamma_phi2, "y": p.gamma_phi2, "z": p.gamma_r2}
        offset = rhs(t, np.zeros(15), p, undriven)
        expected_offset = np.zeros(15)
        expected_offset[COMPONENTS.index("0z")] = p.gamma_r2 * p.z_t2
        expected_offset[COMPONENTS.index("z0")] = p.gamma_r1 * p.z_t1
        expected_offset[COMPONENTS.index("zz")] = (p.gamma_r1 + p.gamma_r2) * p.z_t1 * p.z_t2
        np.testing.assert_allclose(offset, expected_offset, atol=1e-15)
        for i, label in enumerate(COMPONENTS):
            unit_vec = np.zeros(15)
            unit_vec[i] = 1.0
            linear = rhs(t, unit_vec, p, undriven) - offset
            expected = np.zeros(15)
            expected[i] = -(r1[label[0]] + r2[label[1]])
            np.testing.assert_allclose(linear, expected, atol=1e-15, err_msg=label)

    def test_trace_component_never_enters(self):
        # Pi_00 is implicit: a pure offset in rho does not exist in the state vector.
        assert len(COMPONENTS) == 15 and "00" not in COMPONENTS


class TestDensityMatrix:
    def test_maximally_mixed(self):
        np.testing.assert_array_equal(reconstruct_density_matrix(BlochTensor.zeros()), np.eye(4) / 4)

    def test_joint_up_state(self):
        rho = reconstruct_density_matrix(BlochTensor.from_components(pi_0z=1, pi_z0=1, zz=1))
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_array_equal(rho, expected)

    def test_first_index_is_first_factor(self):
        rho = reconstruct_density_matrix(BlochTensor.from_components(pi_z0=1))
        np.testing.assert_array_equal(np.diag(rho).real, [0.5, 0.5, 0, 0])

    @settings(max_examples=100, deadline=None)
    @given(state_st)
    def test_round_trip_and_unit_trace(self, pi):
        rho = reconstruct_density_matrix(pi)
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-16)
        pi00, back = pauli_decompose(rho)
        assert pi00 == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(back.values, pi, atol=1e-14)


class TestProductStates:
    def test_mixed_product(self):
        assert tensor_from_product(BlochVector(), BlochVector()) == BlochTensor.zeros()

    def test_pure_up_product(self):
        t = tensor_from_product(BlochVector(0, 0, 1), BlochVector(0, 0, 1))
        assert t == BlochTensor.from_components(pi_0z=1, pi_z0=1, zz=1)

    def test_thermal_matches_product(self):
        assert BlochTensor.thermal(0.3, -0.4) == tensor_from_product(
            BlochVector(0, 0, 0.3), BlochVector(0, 0, -0.4))

    def test_random_unit_vectors_match_kron(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            u, v = rng.normal(size=3), rng.normal(size=3)
            q1, q2 = BlochVector(*(u / np.linalg.norm(u))), BlochVector(*(v / np.linalg.norm(v)))
            rho = reconstruct_density_matrix(tensor_from_product(q1, q2))
            np.testing.assert_allclose(rho, np.kron(q1.density_matrix(), q2.density_matrix()),
                                       atol=1e-14)

    def test_qubit_accessors(self):
        t = tensor_from_product(BlochVector(0.1, 0.2, 0.3), BlochVector(0.4, 0.5, 0.6))
        assert t.qubit(1) == pytest.approx((0.1, 0.2, 0.3))
        assert t.qubit(2) == pytest.approx((0.4, 0.5, 0.6))
        assert t["xz"] == pytest.approx(0.1 * 0.6)


class TestBlochTensor:
    def test_immutable(self):
        t = BlochTensor.zeros()
        with pytest.raises(ValueError):
            t.values[0] = 1.0

    def test_physicality(self):
        assert BlochTensor.thermal().is_physical()
        bad = BlochTensor.from_components(xx=1.01)
        assert bad.physicality_violation() == pytest.approx(0.01)
        assert not bad.is_physical()

    def test_transpose_involution(self):
        t = BlochTensor(np.arange(15.0))
        assert t.transpose().transpose() == t
        assert t.transpose()["0x"] == t["x0"]


class TestOccupation:
    def test_ground(self):
        assert occupation_probability(1.0, "upper") == 0.0

    def test_equal_mixture(self):
        assert occupation_probability(0.0, "upper") == 0.5

    @given(st.floats(-1, 1))
    def test_complementary(self, z):
        assert occupation_probability(z, "upper") + occupation_probability(z, "lower") == pytest.approx(1.0)

    def test_clamped(self):
        assert occupation_probability(1.2, "upper") == 0.0
        assert occupation_probability(1.2, "upper", clamp=False) == pytest.approx(-0.1)

    def test_conclusion_swing(self):
        # a swing of <Z1> from -0.16 to +0.06 (amplitude ~0.1 around a small mean)
        lo, hi = occupation_probability(0.06), occupation_probability(-0.16)
        assert (lo, hi) == pytest.approx((0.47, 0.58))
        assert (0.06 - -0.16) / 2 == pytest.approx(0.1, abs=0.015)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            occupation_probability(0.0, "middle")
