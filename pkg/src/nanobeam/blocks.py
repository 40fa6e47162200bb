"""Per-mode generator blocks and their energy/dissipation Gram matrices.

Projecting the coupled-beam equations on the sine/cosine eigenmodes turns the
evolution operator into a direct sum of 8x8 blocks (one per mode), because
differentiation maps each sine mode to the matching cosine mode and back.
Each block B_n drives the first-order modal system

    rho1 u''  + kappa1 s (s u  - v ) - m (y - u) + gamma1 s (s u' - v')            = 0
    rho2 v''  + b1 s^2 v - kappa1 (s u - v) - gamma1 (s u' - v') + gamma2 s^2a v'  = 0
    rho3 y''  + kappa2 s (s y  - z ) + m (y - u) + gamma3 s (s y' - z')            = 0
    rho4 z''  + b2 s^2 z - kappa2 (s y - z) - gamma3 (s y' - z') + gamma4 s^2b z'  = 0

with s = sigma_n, s^2a = s^(2*alpha), s^2b = s^(2*beta), in the state order
(u, u', v, v', y, y', z, z').  The Gram H_n carries the energy quadratic form
(||x||_H^2 = 2 * modal energy) and D_n the dissipation form; the blocks obey
Re(x* H B x) = -x* D x exactly for every complex x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    BeamParams,
    frac_power,
    sigma_grid,
    validate_params,
)


@dataclass(frozen=True)
class ModeBlock:
    """One mode's generator block with its energy and dissipation Grams."""

    n: int
    sigma: float
    B: np.ndarray
    H: np.ndarray
    D: np.ndarray


def generator_stack(p: BeamParams, sig: np.ndarray) -> np.ndarray:
    """Generator blocks for an array of wavenumbers, shape (len(sig), 8, 8)."""
    sig = np.asarray(sig, dtype=float)
    N = sig.shape[0]
    s2 = sig * sig
    sa = frac_power(sig, p.alpha)
    sb = frac_power(sig, p.beta)
    B = np.zeros((N, 8, 8))
    B[:, 0, 1] = 1.0
    B[:, 1, 0] = -(p.kappa1 * s2 + p.m) / p.rho1
    B[:, 1, 1] = -p.gamma1 * s2 / p.rho1
    B[:, 1, 2] = p.kappa1 * sig / p.rho1
    B[:, 1, 3] = p.gamma1 * sig / p.rho1
    B[:, 1, 4] = p.m / p.rho1
    B[:, 2, 3] = 1.0
    B[:, 3, 0] = p.kappa1 * sig / p.rho2
    B[:, 3, 1] = p.gamma1 * sig / p.rho2
    B[:, 3, 2] = -(p.b1 * s2 + p.kappa1) / p.rho2
    B[:, 3, 3] = -(p.gamma1 + p.gamma2 * sa) / p.rho2
    B[:, 4, 5] = 1.0
    B[:, 5, 0] = p.m / p.rho3
    B[:, 5, 4] = -(p.kappa2 * s2 + p.m) / p.rho3
    B[:, 5, 5] = -p.gamma3 * s2 / p.rho3
    B[:, 5, 6] = p.kappa2 * sig / p.rho3
    B[:, 5, 7] = p.gamma3 * sig / p.rho3
    B[:, 6, 7] = 1.0
    B[:, 7, 4] = p.kappa2 * sig / p.rho4
    B[:, 7, 5] = p.gamma3 * sig / p.rho4
    B[:, 7, 6] = -(p.b2 * s2 + p.kappa2) / p.rho4
    B[:, 7, 7] = -(p.gamma3 + p.gamma4 * sb) / p.rho4
    return B


def gram_stack(p: BeamParams, sig: np.ndarray):
    """Energy and dissipation Grams for an array of wavenumbers."""
    sig = np.asarray(sig, dtype=float)
    N = sig.shape[0]
    s2 = sig * sig
    sa = frac_power(sig, p.alpha)
    sb = frac_power(sig, p.beta)
    H = np.zeros((N, 8, 8))
    H[:, 0, 0] = p.kappa1 * s2 + p.m
    H[:, 0, 2] = H[:, 2, 0] = -p.kappa1 * sig
    H[:, 0, 4] = H[:, 4, 0] = -p.m
    H[:, 2, 2] = p.kappa1 + p.b1 * s2
    H[:, 4, 4] = p.kappa2 * s2 + p.m
    H[:, 4, 6] = H[:, 6, 4] = -p.kappa2 * sig
    H[:, 6, 6] = p.kappa2 + p.b2 * s2
    H[:, 1, 1] = p.rho1
    H[:, 3, 3] = p.rho2
    H[:, 5, 5] = p.rho3
    H[:, 7, 7] = p.rho4
    D = np.zeros((N, 8, 8))
    D[:, 1, 1] = p.gamma1 * s2
    D[:, 1, 3] = D[:, 3, 1] = -p.gamma1 * sig
    D[:, 3, 3] = p.gamma1 + p.gamma2 * sa
    D[:, 5, 5] = p.gamma3 * s2
    D[:, 5, 7] = D[:, 7, 5] = -p.gamma3 * sig
    D[:, 7, 7] = p.gamma3 + p.gamma4 * sb
    return H, D


def assemble_block(p: BeamParams, n: int) -> ModeBlock:
    """Full 8x8 block of mode n, with energy and dissipation Grams."""
    validate_params(p)
    sig = sigma_grid(n, p.l)[n - 1 : n]
    B = generator_stack(p, sig)[0]
    H, D = gram_block(p, n)
    return ModeBlock(n=n, sigma=float(sig[0]), B=B, H=H, D=D)


def gram_block(p: BeamParams, n: int):
    """(H, D) of mode n: H symmetric positive definite, D positive
    semidefinite."""
    validate_params(p)
    sig = sigma_grid(n, p.l)[n - 1 : n]
    H, D = gram_stack(p, sig)
    return H[0], D[0]


def timoshenko_block(p: BeamParams, n: int) -> ModeBlock:
    """4x4 single-beam block for state (u, u', v, v'), obtained by dropping
    the inter-beam coupling.  Coincides with the beam-1 sub-block of
    assemble_block in the m -> 0 limit."""
    validate_params(p)
    s = float(sigma_grid(n, p.l)[n - 1])
    s2 = s * s
    sa = float(frac_power(np.array([s]), p.alpha)[0])
    B = np.zeros((4, 4))
    B[0, 1] = 1.0
    B[1, 0] = -p.kappa1 * s2 / p.rho1
    B[1, 1] = -p.gamma1 * s2 / p.rho1
    B[1, 2] = p.kappa1 * s / p.rho1
    B[1, 3] = p.gamma1 * s / p.rho1
    B[2, 3] = 1.0
    B[3, 0] = p.kappa1 * s / p.rho2
    B[3, 1] = p.gamma1 * s / p.rho2
    B[3, 2] = -(p.b1 * s2 + p.kappa1) / p.rho2
    B[3, 3] = -(p.gamma1 + p.gamma2 * sa) / p.rho2
    H = np.zeros((4, 4))
    H[0, 0] = p.kappa1 * s2
    H[0, 2] = H[2, 0] = -p.kappa1 * s
    H[2, 2] = p.kappa1 + p.b1 * s2
    H[1, 1] = p.rho1
    H[3, 3] = p.rho2
    D = np.zeros((4, 4))
    D[1, 1] = p.gamma1 * s2
    D[1, 3] = D[3, 1] = -p.gamma1 * s
    D[3, 3] = p.gamma1 + p.gamma2 * sa
    return ModeBlock(n=n, sigma=s, B=B, H=H, D=D)


@dataclass(frozen=True)
class BlockStack:
    """All blocks of modes 1..N as stacked arrays, with the Cholesky factors
    of the energy Grams (H = L L^T) used for energy-norm computations."""

    params: BeamParams
    sigma: np.ndarray   # (N,)
    B: np.ndarray       # (N, 8, 8)
    H: np.ndarray       # (N, 8, 8)
    D: np.ndarray       # (N, 8, 8)
    Lt: np.ndarray      # (N, 8, 8) upper-triangular L^T
    Lt_inv: np.ndarray  # (N, 8, 8) inverse of L^T

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0]


def build_stack(p: BeamParams, n_modes: int) -> BlockStack:
    """Assemble modes 1..n_modes.  Raises on invalid parameters; Cholesky
    failure of an energy Gram likewise signals invalid parameters."""
    validate_params(p)
    sig = sigma_grid(n_modes, p.l)
    B = generator_stack(p, sig)
    H, D = gram_stack(p, sig)
    L = np.linalg.cholesky(H)
    Lt = np.transpose(L, (0, 2, 1)).copy()
    Lt_inv = np.linalg.inv(Lt)
    return BlockStack(params=p, sigma=sig, B=B, H=H, D=D, Lt=Lt, Lt_inv=Lt_inv)
