"""Physical parameters, modal state vectors, and the quadratic energy forms.

The model couples two damped Timoshenko beams through a Van der Waals-type
restoring force m*(y - u).  Transverse deflections (u, y) vanish at both ends
and expand in sine modes; rotation fields (v, z) carry zero-slope ends with a
null-mean constraint and expand in cosine modes (n >= 1, never a constant
mode).  Everything downstream works on the per-mode coefficient vectors

    (u, u', v, v', y, y', z, z')        for modes n = 1..N,

with sigma_n = n*pi/l the mode wavenumber.  Units are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

# Index layout of the 8-component per-mode coefficient vector.
STATE_LABELS = ("u", "ut", "v", "vt", "y", "yt", "z", "zt")
IU, IUT, IV, IVT, IY, IYT, IZ, IZT = range(8)

_POSITIVE_FIELDS = (
    "rho1", "rho2", "rho3", "rho4",
    "kappa1", "kappa2", "b1", "b2",
    "gamma1", "gamma2", "gamma3", "gamma4",
    "m", "l",
)


class ParameterError(ValueError):
    """A parameter set violates the model constraints."""


@dataclass(frozen=True)
class BeamParams:
    """Coefficients of the coupled-beam system.

    rho1/rho2 (rho3/rho4) are the translational/rotational mass densities of
    beam 1 (beam 2); kappa* the shear stiffnesses, b* the bending stiffnesses,
    gamma1/gamma3 the viscoelastic (strain-rate) damping coefficients,
    gamma2/gamma4 the fractional damping coefficients with exponents
    alpha/beta, m the inter-beam coupling and l the beam length.
    """

    rho1: float = 1.0
    rho2: float = 1.0
    rho3: float = 1.0
    rho4: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    b1: float = 1.0
    b2: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    gamma3: float = 1.0
    gamma4: float = 1.0
    m: float = 1.0
    l: float = math.pi
    alpha: float = 0.5
    beta: float = 0.5

    def replace(self, **changes) -> "BeamParams":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(changes)
        return BeamParams(**vals)

    def swapped_beams(self) -> "BeamParams":
        """Parameter set with the two beams' roles exchanged (and alpha<->beta)."""
        return BeamParams(
            rho1=self.rho3, rho2=self.rho4, rho3=self.rho1, rho4=self.rho2,
            kappa1=self.kappa2, kappa2=self.kappa1,
            b1=self.b2, b2=self.b1,
            gamma1=self.gamma3, gamma2=self.gamma4,
            gamma3=self.gamma1, gamma4=self.gamma2,
            m=self.m, l=self.l, alpha=self.beta, beta=self.alpha,
        )


def validate_params(p: BeamParams) -> BeamParams:
    """Return ``p`` unchanged if it satisfies all constraints.

    Raises ParameterError naming the first violated constraint: every
    coefficient must be strictly positive and the fractional exponents must
    lie in [0, 1].
    """
    for name in _POSITIVE_FIELDS:
        value = getattr(p, name)
        if not (math.isfinite(value) and value > 0.0):
            raise ParameterError(f"{name} must be positive")
    for name in ("alpha", "beta"):
        value = getattr(p, name)
        if not (math.isfinite(value) and 0.0 <= value <= 1.0):
            raise ParameterError(f"{name} must lie in [0,1]")
    return p


def sigma(n: int, l: float) -> float:
    """Wavenumber of mode n on a beam of length l: n*pi/l."""
    if n < 1:
        raise ParameterError("mode index must be >= 1")
    if not l > 0.0:
        raise ParameterError("l must be positive")
    return n * math.pi / l


def sigma_grid(n_modes: int, l: float) -> np.ndarray:
    """Wavenumbers of modes 1..n_modes as an array."""
    if n_modes < 1:
        raise ParameterError("n_modes must be >= 1")
    return np.arange(1, n_modes + 1) * (math.pi / l)


def frac_power(sig, exponent: float):
    """sigma^(2*exponent), the diagonal action of the fractional derivative.

    The exponent endpoints are treated exactly (0 -> 1, 1 -> sigma^2) so that
    the limiting damping models are reproduced without pow() corner error.
    """
    sig = np.asarray(sig, dtype=float)
    if exponent == 0.0:
        out = np.ones_like(sig)
    elif exponent == 1.0:
        out = sig * sig
    else:
        out = np.exp(2.0 * exponent * np.log(sig))
    return out if out.shape else float(out)


@dataclass(frozen=True)
class ModalState:
    """Truncated modal coefficients, one 8-vector per mode.

    ``coeffs`` has shape (n_modes, 8) in the STATE_LABELS ordering; real for
    time-domain states, complex for frequency-domain data.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 2 or c.shape[1] != 8 or c.shape[0] < 1:
            raise ParameterError("coeffs must have shape (n_modes, 8)")
        if not np.all(np.isfinite(c.view(float) if c.dtype.kind == "c" else c)):
            raise ParameterError("coeffs must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, n_modes: int, dtype=float) -> "ModalState":
        return cls(np.zeros((n_modes, 8), dtype=dtype))

    @classmethod
    def single_mode(cls, n_modes: int, mode: int, vec, dtype=None) -> "ModalState":
        """State supported on one mode (1-based index)."""
        vec = np.asarray(vec)
        if dtype is None:
            dtype = vec.dtype
        c = np.zeros((n_modes, 8), dtype=dtype)
        c[mode - 1] = vec
        return cls(c)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy split into kinetic, shear, coupling and bending parts."""

    kinetic: float
    shear: float
    coupling: float
    bending: float

    @property
    def total(self) -> float:
        return self.kinetic + self.shear + self.coupling + self.bending

    @property
    def potential(self) -> float:
        return self.shear + self.coupling + self.bending


def _mode_quadratics(state: ModalState, p: BeamParams):
    """Per-mode energy pieces (kinetic, shear, coupling, bending), no 1/2."""
    c = state.coeffs
    sig = sigma_grid(state.n_modes, p.l)
    a2 = lambda x: np.abs(x) ** 2
    kinetic = (p.rho1 * a2(c[:, IUT]) + p.rho2 * a2(c[:, IVT])
               + p.rho3 * a2(c[:, IYT]) + p.rho4 * a2(c[:, IZT]))
    shear = (p.kappa1 * a2(sig * c[:, IU] - c[:, IV])
             + p.kappa2 * a2(sig * c[:, IY] - c[:, IZ]))
    coupling = p.m * a2(c[:, IY] - c[:, IU])
    bending = sig * sig * (p.b1 * a2(c[:, IV]) + p.b2 * a2(c[:, IZ]))
    return kinetic, shear, coupling, bending


def energy(state: ModalState, p: BeamParams) -> EnergyBreakdown:
    """Total mechanical energy of a modal state, one half the squared
    energy norm of the phase-space vector."""
    kin, she, cou, ben = _mode_quadratics(state, p)
    return EnergyBreakdown(
        kinetic=0.5 * float(kin.sum()),
        shear=0.5 * float(she.sum()),
        coupling=0.5 * float(cou.sum()),
        bending=0.5 * float(ben.sum()),
    )


def energy_norm(state: ModalState, p: BeamParams) -> float:
    """Energy norm ||U||_H = sqrt(2 * total energy)."""
    kin, she, cou, ben = _mode_quadratics(state, p)
    return math.sqrt(float(kin.sum() + she.sum() + cou.sum() + ben.sum()))


def dissipation(state: ModalState, p: BeamParams) -> float:
    """Instantaneous energy dissipation rate -dE/dt of a modal state.

    Sums the viscoelastic strain-rate terms and the fractional friction
    terms; nonnegative for every state.
    """
    c = state.coeffs
    sig = sigma_grid(state.n_modes, p.l)
    a2 = lambda x: np.abs(x) ** 2
    out = (p.gamma1 * a2(sig * c[:, IUT] - c[:, IVT])
           + p.gamma2 * frac_power(sig, p.alpha) * a2(c[:, IVT])
           + p.gamma3 * a2(sig * c[:, IYT] - c[:, IZT])
           + p.gamma4 * frac_power(sig, p.beta) * a2(c[:, IZT]))
    return float(out.sum())
