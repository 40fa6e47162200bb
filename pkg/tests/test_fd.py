import numpy as np
import pytest

from nanobeam import BeamParams, build_fd, compare_spectra, propagate
from nanobeam.fdcheck import _fractional_power, neumann_mode_basis
from nanobeam.model import sigma_grid


class TestNeumannLaplacian:
    def test_eigenvalues_second_order(self, ones):
        # low eigenvalues approximate sigma_n^2 with O(h^2) error
        errs = {}
        for M in (50, 100):
            w, _ = neumann_mode_basis(M, ones.l / M)
            target = sigma_grid(6, ones.l) ** 2
            errs[M] = np.abs(w[1:7] - target) / target
        # classical expansion: rel error ~ (sigma_n h)^2 / 12, mode 6 at
        # M=100 gives 2.96e-3
        assert errs[100].max() < 4e-3
        ratio = errs[50] / errs[100]
        assert np.all((ratio > 3.5) & (ratio < 4.5))

    def test_symmetric_stencil(self, ones):
        from nanobeam.fdcheck import _neumann_laplacian
        A = _neumann_laplacian(32, ones.l / 32).toarray()
        assert np.array_equal(A, A.T)

    def test_zero_row_sums(self, ones):
        # ghost-cell closure preserves constants (pure Neumann null space)
        from nanobeam.fdcheck import _neumann_laplacian
        A = _neumann_laplacian(24, ones.l / 24)
        assert np.abs(A @ np.ones(24)).max() < 1e-10


class TestFractionalPower:
    def test_zero_exponent_is_meanfree_projection(self, ones):
        M = 20
        P = _fractional_power(M, ones.l / M, 0.0).toarray()
        v = np.arange(M, dtype=float)
        v -= v.mean()
        assert np.allclose(P @ v, v, atol=1e-12)
        assert np.abs(P @ np.ones(M)).max() < 1e-12

    def test_half_power_squares_to_laplacian(self, ones):
        M = 20
        h = ones.l / M
        half = _fractional_power(M, h, 0.5).toarray()
        full = _fractional_power(M, h, 1.0).toarray()
        v = np.sin(np.arange(M))  # generic, then mean-freed
        v -= v.mean()
        assert np.allclose(half @ (half @ v), full @ v, rtol=1e-10, atol=1e-12)


class TestBuildFd:
    def test_rejects_small_grid(self, ones):
        with pytest.raises(ValueError):
            build_fd(ones, 4)

    def test_dimension(self, ones):
        op = build_fd(ones, 16)
        assert op.dim == 8 * 16 - 4
        assert op.h == pytest.approx(ones.l / 16)

    def test_discrete_dissipativity(self, ones, rng):
        op = build_fd(ones, 40)
        X = rng.standard_normal((op.dim, 1000)) + 1j * rng.standard_normal((op.dim, 1000))
        HB = (op.energy_weight @ op.generator).toarray()
        lhs = np.einsum("it,it->t", X.conj(), HB @ X).real
        quad = np.einsum("it,it->t", X.conj(), op.dissipation_weight @ X).real
        assert np.all(quad >= 0.0)
        assert np.abs(lhs + quad).max() <= 1e-10 * quad.max()

    def test_energy_weight_spd_on_states(self, ones, rng):
        op = build_fd(ones, 24)
        X = rng.standard_normal((op.dim, 50))
        quad = np.einsum("it,it->t", X, (op.energy_weight @ X))
        assert np.all(quad > 0.0)

    def test_decoupled_limit_has_no_cross_blocks(self, ones):
        op = build_fd(ones.replace(m=1e-300), 16)
        nv = 15
        A = op.generator.toarray()
        beam2 = slice(op.dim // 2, op.dim)
        beam1 = slice(0, op.dim // 2)
        assert np.abs(A[beam1, beam2]).max() < 1e-250
        assert np.abs(A[beam2, beam1]).max() < 1e-250

    def test_fd_energy_nonincreasing_along_flow(self, ones, rng):
        # FD trajectory by dense matrix exponential of the FD generator
        import scipy.linalg
        op = build_fd(ones, 24)
        x = rng.standard_normal(op.dim)
        H = op.energy_weight.toarray()
        E = scipy.linalg.expm(op.generator.toarray() * 0.25)
        energies = []
        for _ in range(30):
            energies.append(0.5 * x @ H @ x)
            x = E @ x
        energies = np.array(energies)
        assert np.all(np.diff(energies) <= 1e-12 * energies[0])


class TestCompareSpectra:
    def test_second_order_convergence(self, ones):
        p = BeamParams(alpha=1.0, beta=1.0)
        c100 = compare_spectra(p, 100, 5)
        c200 = compare_spectra(p, 200, 5)
        ratio = c100.max_mismatch / c200.max_mismatch
        assert 3.5 < ratio < 4.5
        assert c200.max_mismatch < 1e-3

    def test_mode_one_tight_agreement(self, ones):
        comp = compare_spectra(ones, 200, 3)
        assert comp.rel_mismatch[0] <= 1e-4

    def test_fractional_exponents_supported(self):
        p = BeamParams(alpha=0.3, beta=0.8)
        comp = compare_spectra(p, 100, 3)
        assert comp.max_mismatch < 1e-3

    def test_heterogeneous_beams(self):
        p = BeamParams(rho3=1.6, kappa2=0.8, b2=1.9, gamma3=0.5, gamma4=1.3,
                       alpha=1.0, beta=0.25)
        comp = compare_spectra(p, 120, 4)
        assert comp.max_mismatch < 2e-3

    def test_requires_scale_separation(self, ones):
        with pytest.raises(ValueError):
            compare_spectra(ones, 30, 5)
