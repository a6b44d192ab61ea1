import numpy as np
import pytest

from fvring import states
from fvring.dynamics import (
    TimeGrid,
    evolve,
    loschmidt_series,
    min_return,
    observable_series,
    quench_series,
)
from fvring.model import ModelSpec, build_hamiltonian


def dense_evolve(H, psi0, t):
    """Oracle: eigendecomposition propagation of the dense matrix."""
    w, v = np.linalg.eigh(H.dense())
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))


@pytest.fixture(scope="module")
def resonant_8():
    spec = ModelSpec(L=8, g=0.11, h=0.67)
    H = build_hamiltonian(spec)
    psi0 = states.false_vacuum(spec)
    return H, psi0


class TestEvolve:
    def test_zero_time_identity(self, resonant_8):
        H, psi0 = resonant_8
        out = evolve(H, psi0, 0.0)
        assert np.array_equal(out, psi0.astype(complex))

    def test_basis_eigenstate_picks_up_phase_only(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.0, h=0.4))
        psi0 = states.all_up_state(6)
        t = 37.0
        out = evolve(H, psi0, t)
        c = 63
        expected = np.exp(-1j * H.diag[c] * t)
        assert abs(out[c] - expected) < 1e-10
        assert abs(abs(np.vdot(psi0, out)) - 1.0) < 1e-12

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        L = int(rng.integers(5, 10))
        spec = ModelSpec(L=L, g=rng.uniform(0.05, 0.9), h=rng.uniform(0.0, 1.5))
        H = build_hamiltonian(spec)
        psi0 = rng.normal(size=1 << L) + 1j * rng.normal(size=1 << L)
        psi0 /= np.linalg.norm(psi0)
        t = 100.0
        assert np.linalg.norm(evolve(H, psi0, t) - dense_evolve(H, psi0, t)) < 1e-8

    def test_norm_and_energy_conserved(self, resonant_8):
        H, psi0 = resonant_8
        tol = 1e-8
        e0 = H.expectation(psi0)
        psi_t = evolve(H, psi0, 250.0, tol=tol)
        assert abs(np.linalg.norm(psi_t) - 1.0) <= tol
        assert abs(H.expectation(psi_t) - e0) <= 10 * tol * H.halfwidth_bound()

    def test_time_reversal(self, resonant_8):
        H, psi0 = resonant_8
        tol = 1e-8
        back = evolve(H, evolve(H, psi0, 83.0, tol=tol), -83.0, tol=tol)
        assert np.linalg.norm(back - psi0) <= 2 * tol

    def test_composition(self, resonant_8):
        H, psi0 = resonant_8
        tol = 1e-8
        one = evolve(H, psi0, 111.0, tol=tol)
        two = evolve(H, evolve(H, psi0, 60.0, tol=tol), 51.0, tol=tol)
        assert np.linalg.norm(one - two) <= 2 * tol

    def test_rejects_bad_tol(self, resonant_8):
        H, psi0 = resonant_8
        with pytest.raises(ValueError):
            evolve(H, psi0, 1.0, tol=1e-3)
        with pytest.raises(ValueError):
            evolve(H, psi0, 1.0, tol=0.0)

    def test_dimension_mismatch(self, resonant_8):
        H, _ = resonant_8
        with pytest.raises(ValueError):
            evolve(H, np.zeros(16, dtype=complex), 1.0)


class TestLoschmidt:
    def test_eigenstate_returns_unity(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.0, h=0.4))
        series = loschmidt_series(H, states.all_up_state(6), TimeGrid(50.0, 1.0))
        assert np.allclose(series.values["p_ret"], 1.0, atol=1e-10)

    def test_initial_value_and_range(self, resonant_8):
        H, psi0 = resonant_8
        series = loschmidt_series(H, psi0, TimeGrid(400.0, 0.5))
        pr = series.values["p_ret"]
        assert pr[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(pr >= 0.0)
        assert np.all(pr <= 1.0 + 1e-8)

    def test_amplitude_matches_dense(self, resonant_8):
        H, psi0 = resonant_8
        grid = TimeGrid(200.0, 2.0)
        series = loschmidt_series(H, psi0, grid)
        w, v = np.linalg.eigh(H.dense())
        c = v.conj().T @ psi0
        ref = np.array([np.vdot(c, np.exp(-1j * w * t) * c) for t in grid.times()])
        assert np.max(np.abs(series.values["g"] - ref)) < 1e-9

    def test_negative_time_conjugates(self, resonant_8):
        # real Hamiltonian matrix: G(-t) = conj(G(t))
        H, psi0 = resonant_8
        fwd = np.vdot(psi0, evolve(H, psi0, 40.0))
        bwd = np.vdot(psi0, evolve(H, psi0, -40.0))
        assert abs(bwd - np.conj(fwd)) < 1e-9


class TestObservables:
    def test_initial_ferromagnet(self, resonant_8):
        H, psi0 = resonant_8
        series = observable_series(H, psi0, TimeGrid(1.0, 0.5), observables=("m",))
        assert series.values["m"][0] == pytest.approx(1.0, abs=0.02)

    def test_values_match_direct_weights(self, resonant_8):
        H, psi0 = resonant_8
        grid = TimeGrid(30.0, 10.0)
        series = quench_series(H, psi0, grid, observables=("m", "z", "zz"))
        L = 8
        idx = np.arange(1 << L)
        for i, t in enumerate(grid.times()):
            psi_t = evolve(H, psi0, float(t))
            w = np.abs(psi_t) ** 2
            pops = np.bitwise_count(idx.astype(np.uint64)).astype(float)
            assert series.values["m"][i] == pytest.approx(
                float(w @ (2 * pops - L)) / L, abs=1e-9
            )
            for site in range(L):
                z = 2.0 * ((idx >> site) & 1) - 1
                assert series.values["z"][i, site] == pytest.approx(
                    float(w @ z), abs=1e-9
                )
            z0 = 2.0 * (idx & 1) - 1
            for r in range(1, L // 2 + 1):
                zr = 2.0 * ((idx >> r) & 1) - 1
                assert series.values["zz"][i, r - 1] == pytest.approx(
                    float(w @ (z0 * zr)), abs=1e-9
                )

    def test_reference_site_equals_site_average_for_clean_model(self, resonant_8):
        # translation-invariant initial state + clean H
        H, psi0 = resonant_8
        psi_t = evolve(H, psi0, 170.0)
        w = np.abs(psi_t) ** 2
        idx = np.arange(1 << 8)
        for r in range(1, 5):
            ref = float(w @ ((2.0 * (idx & 1) - 1) * (2.0 * ((idx >> r) & 1) - 1)))
            avg = np.mean(
                [
                    float(
                        w
                        @ (
                            (2.0 * ((idx >> i) & 1) - 1)
                            * (2.0 * ((idx >> ((i + r) % 8)) & 1) - 1)
                        )
                    )
                    for i in range(8)
                ]
            )
            assert ref == pytest.approx(avg, abs=1e-10)

    def test_unknown_observable_rejected(self, resonant_8):
        H, psi0 = resonant_8
        with pytest.raises(ValueError):
            observable_series(H, psi0, TimeGrid(1.0, 0.5), observables=("energy",))


class TestMinReturn:
    def test_eigenstate_is_one(self):
        H = build_hamiltonian(ModelSpec(L=6, g=0.0, h=0.4))
        got = min_return(H, states.all_up_state(6), window=50.0, dt=0.5)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_off_resonance_stays_high(self):
        spec = ModelSpec(L=8, g=0.05, h=0.5)
        H = build_hamiltonian(spec)
        psi0 = states.false_vacuum(spec)
        assert min_return(H, psi0, window=400.0, dt=0.25) > 0.9


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.5)
    with pytest.raises(ValueError):
        TimeGrid(10.0, 0.0)
    grid = TimeGrid(4.0, 0.5)
    assert np.allclose(grid.times(), np.arange(9) * 0.5)
