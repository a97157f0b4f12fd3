import numpy as np
import pytest

import focklab as fl
from conftest import V_MIN, random_density_matrix


class TestQuadraturePdf:
    def test_vacuum_is_unit_gaussian_over_two(self):
        # ground-state wavefunction squared: variance 1/2, peak 1/sqrt(pi)
        assert fl.quadrature_pdf(fl.vacuum(8), 0.0, 0.0) == pytest.approx(
            1 / np.sqrt(np.pi), abs=1e-12)
        x = np.linspace(-5, 5, 101)
        gauss = np.exp(-x ** 2) / np.sqrt(np.pi)
        assert np.max(np.abs(fl.quadrature_pdf(fl.vacuum(8), 1.3, x) - gauss)) <= 1e-12

    def test_single_photon_node_at_origin(self):
        one = np.zeros((4, 4), dtype=complex)
        one[1, 1] = 1.0
        assert fl.quadrature_pdf(one, 0.7, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_squeezed_thermal_marginal_is_gaussian(self, measured_params):
        # Gaussian state -> Gaussian marginal (dim 48 keeps truncation below tol)
        rho = fl.squeezed_thermal(measured_params, 48)
        x = np.linspace(-4, 4, 801)
        pdf = fl.quadrature_pdf(rho, 0.0, x)
        v = fl.variance(rho, 0.0)
        gauss = np.exp(-x ** 2 / (2 * v)) / np.sqrt(2 * np.pi * v)
        assert np.max(np.abs(pdf - gauss)) <= 1e-6
        ks = np.max(np.abs(np.cumsum(pdf - gauss))) * (x[1] - x[0])
        assert ks <= 1e-6
        assert v == pytest.approx(V_MIN, rel=1e-4)

    def test_normalization_over_grid(self, rng):
        x = np.linspace(-9, 9, 2001)
        for _ in range(3):
            rho = random_density_matrix(10, rng)
            for theta in np.linspace(0, 2 * np.pi, 36, endpoint=False)[::6]:
                pdf = fl.quadrature_pdf(rho, theta, x)
                assert np.trapezoid(pdf, x) == pytest.approx(1.0, abs=1e-6)

    def test_second_moment_matches_variance(self, rng):
        x = np.linspace(-9, 9, 4001)
        rho = random_density_matrix(8, rng)
        for theta in (0.0, 0.9, 2.4):
            pdf = fl.quadrature_pdf(rho, theta, x)
            second = np.trapezoid(pdf * x ** 2, x)
            mean = np.trapezoid(pdf * x, x)
            assert second == pytest.approx(
                fl.variance(rho, theta) + mean ** 2, abs=1e-6)

    def test_pi_phase_symmetry(self, rng):
        x = np.linspace(-6, 6, 301)
        rho = random_density_matrix(9, rng)
        for theta in (0.0, 0.4, 1.7):
            lhs = fl.quadrature_pdf(rho, theta + np.pi, x)
            rhs = fl.quadrature_pdf(rho, theta, -x)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10


class TestPhaseSchedule:
    def test_single_sweep_covers_range(self):
        phases = fl.PhaseSchedule().phases(1000)
        assert phases[0] == 0.0
        assert np.all((phases >= 0) & (phases < 2 * np.pi))
        assert np.all(np.diff(phases) > 0)

    def test_repeat_count(self):
        phases = fl.PhaseSchedule(count=4).phases(1000)
        # four identical ramps
        assert np.allclose(phases[:250], phases[250:500])

    def test_validation(self):
        with pytest.raises(ValueError):
            fl.PhaseSchedule(1.0, 0.5)
        with pytest.raises(ValueError):
            fl.PhaseSchedule(count=0)


class TestSample:
    def test_vacuum_statistics(self):
        n = 1_000_000
        ds = fl.sample(fl.vacuum(8), n_samples=n, seed=3)
        band = 3 * np.sqrt(2 / n) * 0.5
        assert np.var(ds.values, ddof=1) == pytest.approx(0.5, abs=band)
        assert len(ds) == n

    def test_squeezed_window_variance(self, input_state_16):
        n = 200_000
        ds = fl.sample(input_state_16, n_samples=n, seed=7)
        window = ds.values[: n // 100]  # phases within the first 1% of the ramp
        thetas = ds.phases[: n // 100]
        expected = np.mean([fl.variance(input_state_16, t) for t in thetas[::50]])
        band = 3 * np.sqrt(2 / window.size) * expected
        assert np.var(window, ddof=1) == pytest.approx(expected, abs=band)

    def test_deterministic_for_fixed_seed(self, input_state_16):
        a = fl.sample(input_state_16, n_samples=20_000, seed=42)
        b = fl.sample(input_state_16, n_samples=20_000, seed=42)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.phases, b.phases)
        c = fl.sample(input_state_16, n_samples=20_000, seed=43)
        assert not np.array_equal(a.values, c.values)

    def test_chunk_size_does_not_change_output(self, monkeypatch, input_state_16):
        a = fl.sample(input_state_16, n_samples=5_000, seed=9)
        monkeypatch.setattr("focklab.homodyne.SAMPLE_CHUNK", 777)
        b = fl.sample(input_state_16, n_samples=5_000, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_fixed_phase_bands(self):
        # narrow schedule pins the phase; mean/variance within 4 sigma
        rho = fl.squeezed_vacuum_pure(0.4, 0.0, 16)
        n = 100_000
        for theta in (0.0, np.pi / 2):
            v = fl.variance(rho, theta)
            for seed in range(6):
                sched = fl.PhaseSchedule(theta, theta + 1e-9)
                ds = fl.sample(rho, sched, n_samples=n, seed=seed)
                assert np.mean(ds.values) == pytest.approx(0.0, abs=4 * np.sqrt(v / n))
                assert np.var(ds.values, ddof=1) == pytest.approx(
                    v, abs=4 * np.sqrt(2 / n) * v)

    def test_grid_exhaustion(self, input_state_16):
        with pytest.raises(fl.GridExhaustionError):
            fl.sample(input_state_16, n_samples=100, seed=0, x_max=2.0)


class TestDigitize:
    def test_added_quantization_variance(self):
        n = 1_000_000
        ds = fl.sample(fl.vacuum(8), n_samples=n, seed=5)
        value_range = 4.0
        delta = 2 * value_range / 2 ** 8
        dq = fl.digitize(ds, bits=8, value_range=value_range)
        added = np.var(dq.values) - np.var(ds.values)
        # Sheppard correction Delta^2/12, within the noise of the
        # difference estimator (dominated by the 2*Cov(x, e) term)
        noise = 4 * 2 * np.sqrt(0.5) * delta / np.sqrt(12 * n)
        assert added == pytest.approx(delta ** 2 / 12, abs=noise)

    def test_sixteen_bits_negligible(self):
        ds = fl.sample(fl.vacuum(8), n_samples=100_000, seed=6)
        dq = fl.digitize(ds, bits=16, value_range=4.0)
        assert abs(np.var(dq.values) / np.var(ds.values) - 1) <= 1e-6

    def test_half_to_even_ties(self):
        # boundaries fall on half-integers of the index scale
        phases = np.zeros(4)
        delta = 2 * 1.0 / 4
        boundary = -1.0 + delta  # between levels 0 and 1
        ds = fl.QuadratureDataset(phases, np.full(4, boundary))
        dq = fl.digitize(ds, bits=2, value_range=1.0)
        # index 0.5 rounds to 0 (even), so the lower level center is chosen
        assert np.all(dq.values == -1.0 + 0.5 * delta)

    def test_clipping_and_metadata(self):
        ds = fl.QuadratureDataset(np.zeros(3), np.array([-9.0, 0.0, 9.0]))
        dq = fl.digitize(ds, bits=4, value_range=2.0)
        assert dq.values.min() >= -2.0
        assert dq.values.max() <= 2.0
        assert dq.meta["digitizer_bits"] == 4
        assert dq.meta["digitizer_range"] == 2.0

    def test_validation(self):
        ds = fl.QuadratureDataset(np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            fl.digitize(ds, bits=1)
        with pytest.raises(ValueError):
            fl.digitize(ds, bits=8, value_range=-1.0)


class TestDetectionEfficiency:
    def test_unit_visibility_identity(self, input_state_16):
        out = fl.detection_efficiency(input_state_16, 1.0)
        assert np.max(np.abs(out - input_state_16)) <= 1e-12

    @pytest.mark.parametrize("visibility,eta_det", [(0.885, 0.783225), (0.903, 0.815409)])
    def test_visibility_squared_loss(self, visibility, eta_det, input_state_32):
        out = fl.detection_efficiency(input_state_32, visibility)
        expected = fl.apply_loss(input_state_32, eta_det)
        assert np.max(np.abs(out - expected)) <= 1e-12
        v_in = fl.variance(input_state_32, 0.0)
        assert fl.variance(out, 0.0) == pytest.approx(
            eta_det * v_in + (1 - eta_det) / 2, abs=1e-8)

    def test_validation(self, input_state_16):
        with pytest.raises(ValueError):
            fl.detection_efficiency(input_state_16, 0.0)
        with pytest.raises(ValueError):
            fl.detection_efficiency(input_state_16, 1.1)


class TestQuadratureDataset:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            fl.QuadratureDataset(np.array([]), np.array([]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            fl.QuadratureDataset(np.zeros(2), np.array([0.0, np.inf]))

    def test_rejects_phase_out_of_range(self):
        with pytest.raises(ValueError):
            fl.QuadratureDataset(np.array([0.0, 7.0]), np.zeros(2))

    def test_rejects_bad_calibration(self):
        meta = fl.homodyne.default_meta()
        meta["vacuum_variance"] = 0.0
        with pytest.raises(ValueError):
            fl.QuadratureDataset(np.zeros(2), np.zeros(2), meta)
