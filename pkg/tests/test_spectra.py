import numpy as np
import pytest

from fvring import spectra, states
from fvring.errors import NotTwoLevelError, ResolutionWarning, ResourceLimitError
from fvring.model import Interaction, ModelSpec, build_hamiltonian


class TestEigenDecompose:
    def test_classical_spectrum(self):
        # diagonal model: eigenvalues are the sorted configuration energies
        H = build_hamiltonian(ModelSpec(L=6, g=0.0, h=0.0))
        eig = spectra.eigen_decompose(H)
        assert np.allclose(eig.energies, np.sort(H.diag), atol=1e-12)

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(4)
        H = build_hamiltonian(ModelSpec(L=8, g=rng.uniform(0.1, 0.8), h=rng.uniform(0, 1)))
        eig = spectra.eigen_decompose(H)
        dense = H.dense()
        residual = np.linalg.norm(dense @ eig.vectors - eig.vectors * eig.energies)
        assert residual <= 1e-9 * np.linalg.norm(dense, 2)

    def test_orthonormal_vectors(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.3, h=0.2))
        eig = spectra.eigen_decompose(H)
        gram = eig.vectors.T @ eig.vectors
        assert np.max(np.abs(gram - np.eye(64))) < 1e-12

    def test_cap_points_to_fft_path(self):
        H = build_hamiltonian(ModelSpec(L=15, g=0.1, h=0.1))
        with pytest.raises(ResourceLimitError, match="fft"):
            spectra.eigen_decompose(H)


class TestOverlapSpectrum:
    @pytest.fixture(scope="class")
    def eig8(self):
        return spectra.eigen_decompose(build_hamiltonian(ModelSpec(L=8, g=0.11, h=0.67)))

    def test_eigenstate_has_unit_weight(self, eig8):
        psi = eig8.vectors[:, 5].astype(complex)
        s = spectra.overlap_spectrum(psi, eig8)
        assert s.weights[0] == pytest.approx(1.0, abs=1e-12)
        assert s.weights[1] == pytest.approx(0.0, abs=1e-12)
        assert spectra.sub_leading(s) == pytest.approx(0.0, abs=1e-12)

    def test_equal_superposition(self, eig8):
        psi = (eig8.vectors[:, 3] + eig8.vectors[:, 9]) / np.sqrt(2)
        s = spectra.overlap_spectrum(psi.astype(complex), eig8)
        assert s.weights[0] == pytest.approx(0.5, abs=1e-12)
        assert spectra.sub_leading(s) == pytest.approx(0.5, abs=1e-12)

    def test_weights_sum_to_one(self, eig8):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=256) + 1j * rng.normal(size=256)
        psi /= np.linalg.norm(psi)
        s = spectra.overlap_spectrum(psi, eig8)
        assert abs(s.weights.sum() - 1.0) < 1e-8

    def test_phase_invariance(self, eig8):
        spec = ModelSpec(L=8, g=0.11, h=0.67)
        psi = states.false_vacuum(spec)
        a = spectra.overlap_spectrum(psi, eig8)
        b = spectra.overlap_spectrum(psi * np.exp(0.7j), eig8)
        assert np.allclose(a.weights, b.weights, atol=1e-14)

    def test_dimension_mismatch(self, eig8):
        with pytest.raises(ValueError):
            spectra.overlap_spectrum(np.zeros(16, dtype=complex), eig8)


class TestTwoLevelFit:
    def test_synthetic_pair(self):
        s = spectra.OverlapSpectrum(
            energies=np.array([-1.0, -1.3]), weights=np.array([0.5, 0.5])
        )
        fit = spectra.two_level_fit(s)
        assert fit.omega == pytest.approx(0.3, abs=1e-12)
        assert fit.nu_g == pytest.approx(-1.15, abs=1e-12)
        assert fit.fidelity == pytest.approx(1.0, abs=1e-12)
        t = np.linspace(0, 50, 11)
        expected = 1 - np.sin(0.3 * t / 2) ** 2
        assert np.allclose(fit.predicted_return(t), expected, atol=1e-12)

    def test_precondition_carries_weights(self):
        s = spectra.OverlapSpectrum(
            energies=np.array([0.0, 1.0, 2.0]), weights=np.array([0.5, 0.3, 0.2])
        )
        with pytest.raises(NotTwoLevelError) as err:
            spectra.two_level_fit(s)
        assert err.value.weights == (0.5, 0.3)

    def test_single_state_rejected(self):
        s = spectra.OverlapSpectrum(
            energies=np.array([0.0, 1.0]), weights=np.array([1.0, 0.0])
        )
        with pytest.raises(NotTwoLevelError):
            spectra.two_level_fit(s)

    def test_reconstruction_tracks_dynamics(self):
        # on resonance the truncated P_ret follows the engine within
        # 1 - fidelity + 0.02, and the revival period matches 2*pi/omega
        from fvring import loschmidt_series, TimeGrid
        from fvring import states as st

        spec = ModelSpec(L=8, g=0.11, h=0.67015)
        H = build_hamiltonian(spec)
        psi0 = st.false_vacuum(spec)
        fit = spectra.two_level_fit(
            spectra.overlap_spectrum(psi0, spectra.eigen_decompose(H))
        )
        series = loschmidt_series(H, psi0, TimeGrid(750.0, 0.5))
        predicted = fit.predicted_return(series.times)
        max_dev = np.max(np.abs(predicted - series.values["p_ret"]))
        assert max_dev <= 1.0 - fit.fidelity + 0.02
        pr = series.values["p_ret"]
        period_dyn = 2.0 * series.times[int(np.argmin(pr))]
        assert abs(period_dyn - fit.period) / fit.period < 0.02


class TestSpectralWeightsFFT:
    def test_classical_basis_state_single_peak(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.0, h=0.3))
        psi = states.all_up_state(6)
        s = spectra.spectral_weights_fft(H, psi, t_max=256.0)
        assert s.weights.size == 1
        assert s.weights[0] == pytest.approx(1.0, abs=1e-3)
        assert s.energies[0] == pytest.approx(H.diag[63], abs=1e-6)

    def test_matches_dense_at_resonance(self):
        # three states carry weight here; the closest pair is ~3.5e-3 apart,
        # so the series must be long enough to resolve it
        spec = ModelSpec(L=10, g=0.11, h=0.6706)
        H = build_hamiltonian(spec)
        psi = states.false_vacuum(spec)
        dense = spectra.overlap_spectrum(psi, spectra.eigen_decompose(H))
        fft = spectra.spectral_weights_fft(H, psi, t_max=12288.0)
        assert abs(fft.weights[0] - dense.weights[0]) < 0.02
        assert abs(spectra.sub_leading(fft) - spectra.sub_leading(dense)) < 0.02
        assert np.allclose(fft.weights[:3], dense.weights[:3], atol=0.02)
        assert abs(fft.weights.sum() - 1.0) < 0.05

    def test_squeeze_variant_smoke(self):
        spec = ModelSpec(
            L=8, g=0.2, h=0.65, interaction=Interaction.squeeze(0.2)
        )
        H = build_hamiltonian(spec)
        psi = states.false_vacuum(spec)
        dense = spectra.overlap_spectrum(psi, spectra.eigen_decompose(H))
        fft = spectra.spectral_weights_fft(H, psi, t_max=2048.0)
        assert abs(fft.weights[0] - dense.weights[0]) < 0.02

    def test_warns_when_pair_unresolved(self):
        # resonant pair split by ~2*pi/680; a short series cannot separate it
        spec = ModelSpec(L=8, g=0.11, h=0.6701)
        H = build_hamiltonian(spec)
        psi = states.false_vacuum(spec)
        with pytest.warns(ResolutionWarning, match="t_max"):
            spectra.spectral_weights_fft(H, psi, t_max=800.0)

    def test_method_label(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.1, h=0.3))
        s = spectra.spectral_weights_fft(H, states.all_up_state(6), t_max=256.0)
        assert s.method == "fft"
