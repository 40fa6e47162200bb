import numpy as np
import pytest
from hypothesis import given, settings

from nanobeam import (
    BeamParams,
    ModalState,
    assemble_block,
    build_stack,
    gram_block,
    timoshenko_block,
)
from nanobeam.resolvent import apply_shifted

from test_model import params_strategy


def dissipativity_residuals(block, X):
    """Relative residual of Re(x* H B x) + x* D x, normalized by the natural
    magnitude ||Hx|| ||Bx|| + x*Dx of the computed quantities."""
    HX = X @ block.H.T
    BX = X @ block.B.T
    lhs = np.einsum("ij,ij->i", HX.conj(), BX).real
    quad = np.einsum("ij,ij->i", (X @ block.D.T).conj(), X).real
    den = np.linalg.norm(HX, axis=1) * np.linalg.norm(BX, axis=1) + quad
    return np.abs(lhs + quad) / den


class TestAssembleBlock:
    def test_velocity_damping_entry(self):
        p = BeamParams(alpha=1.0)
        blk = assemble_block(p, 1)
        # -(gamma1 + gamma2 * sigma^(2 alpha)) / rho2 at sigma = 1
        assert blk.B[3, 3] == pytest.approx(-2.0, rel=1e-15)

    def test_coupling_entry(self, ones):
        blk = assemble_block(ones, 1)
        assert blk.B[1, 4] == pytest.approx(1.0, rel=1e-15)  # m / rho1

    def test_first_order_reduction_rows(self, ones):
        blk = assemble_block(ones, 9)
        for pos, vel in ((0, 1), (2, 3), (4, 5), (6, 7)):
            row = np.zeros(8)
            row[vel] = 1.0
            assert np.array_equal(blk.B[pos], row)

    def test_matrix_dissipativity_identity(self, ones):
        for n in (1, 3, 17, 64, 256):
            blk = assemble_block(ones, n)
            S = blk.H @ blk.B + blk.B.T @ blk.H
            assert np.abs(S + 2.0 * blk.D).max() <= 1e-12 * np.abs(blk.D).max()

    @given(params_strategy())
    @settings(max_examples=50, deadline=None)
    def test_dissipativity_identity_random_params(self, p):
        rng = np.random.default_rng(7)
        for n in (1, 5, 40):
            blk = assemble_block(p, n)
            X = rng.standard_normal((50, 8)) + 1j * rng.standard_normal((50, 8))
            assert dissipativity_residuals(blk, X).max() <= 1e-12

    def test_block_diagonality(self, ones, rng):
        # the assembled operator maps a single-mode state to the same mode
        U = ModalState.single_mode(16, 11, rng.standard_normal(8))
        out = apply_shifted(ones, 16, 0.0, U)
        mask = np.ones(16, dtype=bool)
        mask[10] = False
        assert not out.coeffs[mask].any()
        assert out.coeffs[10].any()


class TestGramBlock:
    def test_coupling_cross_entry(self):
        p = BeamParams(m=3.5)
        H, _ = gram_block(p, 2)
        assert H[0, 4] == pytest.approx(-3.5, rel=1e-15)
        assert H[4, 0] == pytest.approx(-3.5, rel=1e-15)

    def test_unit_velocity_norm(self, ones):
        H, _ = gram_block(ones, 1)
        x = np.zeros(8)
        x[1] = 1.0
        assert x @ H @ x == pytest.approx(1.0, rel=1e-15)

    def test_quadratic_identity_many_vectors(self, ones, rng):
        blk = assemble_block(ones, 12)
        X = rng.standard_normal((1200, 8)) + 1j * rng.standard_normal((1200, 8))
        assert dissipativity_residuals(blk, X).max() <= 1e-12

    def test_gram_symmetry_and_definiteness(self, ones):
        stack = build_stack(ones, 128)
        assert np.array_equal(stack.H, np.transpose(stack.H, (0, 2, 1)))
        assert np.array_equal(stack.D, np.transpose(stack.D, (0, 2, 1)))
        assert np.linalg.eigvalsh(stack.H).min() > 0.0
        d_eigs = np.linalg.eigvalsh(stack.D)
        assert d_eigs.min() >= -1e-12 * np.abs(stack.D).max()


class TestTimoshenkoBlock:
    def test_equals_subblock_in_decoupled_limit(self, ones):
        p0 = ones.replace(m=1e-300)
        for n in (1, 4, 33):
            full = assemble_block(p0, n)
            single = timoshenko_block(p0, n)
            sub = np.ix_(range(4), range(4))
            assert np.allclose(full.B[sub], single.B, rtol=1e-13, atol=0.0)
            assert np.allclose(full.D[sub], single.D, rtol=1e-13, atol=0.0)
            # H differs only by the coupling entry m |y - u|^2, here 1e-300
            assert np.allclose(full.H[sub], single.H, rtol=1e-13, atol=1e-299)

    def test_dissipativity_identity_alpha_zero(self, rng):
        blk = timoshenko_block(BeamParams(alpha=0.0), 1)
        X = rng.standard_normal((500, 4)) + 1j * rng.standard_normal((500, 4))
        assert dissipativity_residuals(blk, X).max() <= 1e-12
        # D restricted to gamma1 |s u' - v'|^2 + gamma2 |v'|^2
        expect = np.zeros((4, 4))
        expect[1, 1] = 1.0
        expect[1, 3] = expect[3, 1] = -1.0
        expect[3, 3] = 2.0
        assert np.allclose(blk.D, expect, rtol=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_negative_abscissa_all_modes(self, alpha):
        p = BeamParams(alpha=alpha)
        worst = -np.inf
        for n in range(1, 257):
            ev = np.linalg.eigvals(timoshenko_block(p, n).B)
            worst = max(worst, ev.real.max())
        assert worst < 0.0

    def test_m_to_zero_spectrum_splits(self, ones):
        p0 = ones.replace(rho3=2.0, kappa2=3.0, m=1e-300)
        full = np.sort_complex(np.linalg.eigvals(assemble_block(p0, 3).B))
        beam1 = np.linalg.eigvals(timoshenko_block(p0, 3).B)
        p_beam2 = p0.swapped_beams()
        beam2 = np.linalg.eigvals(timoshenko_block(p_beam2, 3).B)
        union = np.sort_complex(np.concatenate([beam1, beam2]))
        assert np.allclose(full, union, rtol=1e-8, atol=1e-12)
