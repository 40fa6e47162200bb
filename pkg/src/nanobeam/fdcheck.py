"""Independent finite-difference cross-check of the modal engine.

Discretizes the coupled-beam PDE system directly with second-order stencils
on a staggered grid, never touching the modal reduction: deflections u, y
live on interior vertices (clamped ends drop out), rotations v, z on cell
midpoints (zero-slope ends via ghost cells).  Forward differences map the
vertex grid onto the midpoint grid, so the shear strain u_x - v is collocated
without interpolation and the discrete energy mirrors the continuous one
term by term; the semidiscrete generator is then exactly dissipative for the
discrete energy form.

The null-mean constraint on v, z is imposed by projecting onto the
mean-free subspace: fractional powers of the midpoint Neumann Laplacian are
built by eigendecomposition with the constant mode zeroed, which leaves the
(physically spurious) spatially uniform rotation dynamics decoupled; its two
oscillator pairs are recognized by their mean-dominated eigenvectors and
excluded from spectra comparisons.

This module is an oracle: it runs at modest grid sizes to corroborate the
modal blocks (eigenvalues, dissipativity, trajectories) with the classical
O(h^2) accuracy, and is not a production simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .blocks import build_stack
from .errors import NumericsError
from .model import BeamParams, validate_params

_DENSE_EIG_DIM = 1700
_DENSE_VALS_DIM = 3300
_IM_TOL = 1e-7
_MEAN_DOMINANCE = 0.5


@dataclass(frozen=True)
class FdOperator:
    """Semidiscrete finite-difference generator and its energy form.

    State layout: (u, u_t, v, v_t, y, y_t, z, z_t) with u, y of size M-1
    (interior vertices) and v, z of size M (cell midpoints); total dimension
    8M - 4.  `generator` is sparse except for the fractional-power blocks,
    `energy_weight` is the SPD matrix of the discrete energy quadratic form
    and `dissipation_weight` the PSD form of the discrete dissipation rate.
    """

    params: BeamParams
    M: int
    h: float
    generator: sp.csr_matrix
    energy_weight: sp.csr_matrix
    dissipation_weight: sp.csr_matrix
    slices: tuple

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def mean_fraction(self, vec: np.ndarray) -> float:
        """Share of a state vector's squared length carried by the spatial
        means of the rotation components (identifies spurious modes)."""
        total = float(np.vdot(vec, vec).real)
        if total == 0.0:
            return 0.0
        out = 0.0
        for name, sl in zip(_SLOT_NAMES, self.slices):
            if name in ("v", "vt", "z", "zt"):
                seg = vec[sl]
                out += abs(seg.mean()) ** 2 * seg.shape[0]
        return out / total


_SLOT_NAMES = ("u", "ut", "v", "vt", "y", "yt", "z", "zt")


def _neumann_laplacian(M: int, h: float) -> sp.csr_matrix:
    """Midpoint-grid -d^2/dx^2 with ghost-cell Neumann closure (M x M)."""
    main = 2.0 * np.ones(M)
    main[0] = main[-1] = 1.0
    off = -np.ones(M - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / (h * h)


def _forward_difference(M: int, h: float) -> sp.csr_matrix:
    """Interior vertices -> midpoints first derivative with clamped ends
    (M x (M-1))."""
    rows, cols, vals = [], [], []
    for c in range(M):
        if c + 1 <= M - 1:        # +u_{c+1}
            rows.append(c); cols.append(c); vals.append(1.0 / h)
        if 1 <= c <= M - 1:       # -u_c
            rows.append(c); cols.append(c - 1); vals.append(-1.0 / h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(M, M - 1)) / 1.0


def neumann_mode_basis(M: int, h: float):
    """Eigendecomposition of the midpoint Neumann Laplacian, ascending.

    Returns (eigenvalues, eigenvectors); the first eigenvalue is 0 (constant
    mode), the rest approximate sigma_n^2 with O(h^2) error for n << M.
    """
    A = _neumann_laplacian(M, h).toarray()
    w, Q = np.linalg.eigh(A)
    w[np.abs(w) < 1e-10 / (h * h)] = np.maximum(w[np.abs(w) < 1e-10 / (h * h)], 0.0)
    w[0] = 0.0
    return w, Q


def _fractional_power(M: int, h: float, exponent: float):
    """A_N^exponent on the mean-free subspace (constant mode zeroed)."""
    w, Q = neumann_mode_basis(M, h)
    scaled = np.zeros_like(w)
    pos = w > 0
    if exponent == 0.0:
        scaled[pos] = 1.0
    elif exponent == 1.0:
        scaled[pos] = w[pos]
    else:
        scaled[pos] = np.exp(exponent * np.log(w[pos]))
    dense = (Q * scaled) @ Q.T
    if exponent == 1.0:
        return _neumann_laplacian(M, h)  # keep exact sparsity at the endpoint
    return sp.csr_matrix(dense)


def build_fd(p: BeamParams, M: int) -> FdOperator:
    """Assemble the semidiscrete generator on an M-cell grid (M >= 8)."""
    validate_params(p)
    if M < 8:
        raise ValueError("M must be >= 8")
    h = p.l / M
    nv = M - 1
    nc = M
    D = _forward_difference(M, h)
    AN = _neumann_laplacian(M, h)
    ANa = _fractional_power(M, h, p.alpha)
    ANb = _fractional_power(M, h, p.beta)
    Iv = sp.identity(nv, format="csr")
    Ic = sp.identity(nc, format="csr")
    DtD = (D.T @ D).tocsr()

    off = 2 * nv + 2 * nc
    starts = {"u": 0, "ut": nv, "v": 2 * nv, "vt": 2 * nv + nc,
              "y": off, "yt": off + nv, "z": off + 2 * nv,
              "zt": off + 2 * nv + nc}
    sizes = {"u": nv, "ut": nv, "v": nc, "vt": nc,
             "y": nv, "yt": nv, "z": nc, "zt": nc}
    slices = tuple(slice(starts[k], starts[k] + sizes[k]) for k in _SLOT_NAMES)
    dim = off * 2

    grid8 = {name: {} for name in _SLOT_NAMES}
    grid8["u"]["ut"] = Iv
    grid8["ut"]["u"] = -(p.kappa1 * DtD + p.m * Iv) / p.rho1
    grid8["ut"]["v"] = (p.kappa1 / p.rho1) * D.T
    grid8["ut"]["y"] = (p.m / p.rho1) * Iv
    grid8["ut"]["ut"] = -(p.gamma1 / p.rho1) * DtD
    grid8["ut"]["vt"] = (p.gamma1 / p.rho1) * D.T
    grid8["v"]["vt"] = Ic
    grid8["vt"]["v"] = -(p.b1 * AN + p.kappa1 * Ic) / p.rho2
    grid8["vt"]["u"] = (p.kappa1 / p.rho2) * D
    grid8["vt"]["ut"] = (p.gamma1 / p.rho2) * D
    grid8["vt"]["vt"] = -(p.gamma1 * Ic + p.gamma2 * ANa) / p.rho2
    grid8["y"]["yt"] = Iv
    grid8["yt"]["y"] = -(p.kappa2 * DtD + p.m * Iv) / p.rho3
    grid8["yt"]["z"] = (p.kappa2 / p.rho3) * D.T
    grid8["yt"]["u"] = (p.m / p.rho3) * Iv
    grid8["yt"]["yt"] = -(p.gamma3 / p.rho3) * DtD
    grid8["yt"]["zt"] = (p.gamma3 / p.rho3) * D.T
    grid8["z"]["zt"] = Ic
    grid8["zt"]["z"] = -(p.b2 * AN + p.kappa2 * Ic) / p.rho4
    grid8["zt"]["y"] = (p.kappa2 / p.rho4) * D
    grid8["zt"]["yt"] = (p.gamma3 / p.rho4) * D
    grid8["zt"]["zt"] = -(p.gamma3 * Ic + p.gamma4 * ANb) / p.rho4
    B = sp.bmat([[grid8[r].get(c) for c in _SLOT_NAMES] for r in _SLOT_NAMES],
                format="csr")

    def selector(name):
        s0 = starts[name]
        n = sizes[name]
        return sp.csr_matrix((np.ones(n), (np.arange(n), np.arange(s0, s0 + n))),
                             shape=(n, dim))

    sel = {name: selector(name) for name in _SLOT_NAMES}

    # Energy form: h * [rho |velocities|^2 + kappa1 |Du - v|^2 + m |y - u|^2
    #                   + kappa2 |Dy - z|^2 + b1 v^T AN v + b2 z^T AN z]
    def sq(T):
        return (T.T @ T).tocsr()

    Hq = (p.rho1 * h * sq(sel["ut"]) + p.rho2 * h * sq(sel["vt"])
          + p.rho3 * h * sq(sel["yt"]) + p.rho4 * h * sq(sel["zt"])
          + p.kappa1 * h * sq(D @ sel["u"] - sel["v"])
          + p.kappa2 * h * sq(D @ sel["y"] - sel["z"])
          + p.m * h * sq(sel["y"] - sel["u"])
          + p.b1 * h * (sel["v"].T @ AN @ sel["v"])
          + p.b2 * h * (sel["z"].T @ AN @ sel["z"]))

    Dq = (p.gamma1 * h * sq(D @ sel["ut"] - sel["vt"])
          + p.gamma3 * h * sq(D @ sel["yt"] - sel["zt"])
          + p.gamma2 * h * (sel["vt"].T @ ANa @ sel["vt"])
          + p.gamma4 * h * (sel["zt"].T @ ANb @ sel["zt"]))

    return FdOperator(params=p, M=M, h=h, generator=B,
                      energy_weight=Hq.tocsr(),
                      dissipation_weight=Dq.tocsr(),
                      slices=slices)


def _mean_oscillator_roots(p: BeamParams) -> np.ndarray:
    """Eigenvalues of the decoupled spatially-uniform rotation dynamics.

    The mean components of v and z evolve as independent damped oscillators
    (rho2 s^2 + gamma1 s + kappa1 = 0 and rho4 s^2 + gamma3 s + kappa2 = 0);
    these live outside the null-mean state space and are excluded from
    spectra comparisons.
    """
    r1 = np.roots([p.rho2, p.gamma1, p.kappa1])
    r2 = np.roots([p.rho4, p.gamma3, p.kappa2])
    return np.concatenate([r1, r2])


def _filter_physical(op: FdOperator, vals, vecs, value_filter: bool):
    """Upper-half-plane eigenvalues with mean-dominated (spurious) modes
    removed; `value_filter` additionally drops values Krylov noise may have
    split off the (often multiple) mean-oscillator roots."""
    spurious = _mean_oscillator_roots(op.params)
    keep = []
    for val, vec in zip(vals, vecs.T):
        if val.imag <= _IM_TOL:
            continue
        if op.mean_fraction(vec) >= _MEAN_DOMINANCE:
            continue
        if value_filter and np.min(np.abs(spurious - val)) < 0.05 * abs(val):
            continue
        keep.append(complex(val))
    return keep


def _drop_mean_modes_by_value(op: FdOperator, vals: np.ndarray) -> list:
    """Remove the spurious mean-oscillator eigenvalues by exact value.

    The mean dynamics decouple exactly in the assembled matrix, so a dense
    eigensolve reproduces their eigenvalues to roundoff; each quadratic root
    removes one match."""
    vals = list(vals[vals.imag > _IM_TOL])
    for root in _mean_oscillator_roots(op.params):
        if root.imag <= _IM_TOL:
            continue
        dist = np.array([abs(v - root) for v in vals])
        j = int(dist.argmin())
        if dist[j] < 1e-6 * abs(root):
            vals.pop(j)
    return [complex(v) for v in vals]


def _arpack_pairs(op: FdOperator, n_pairs: int) -> list:
    """Shift-invert eigenvalues near the low wave frequencies.

    One roomy window is tried first; if ARPACK stalls (its Krylov window
    touching the dense eigenvalue accumulation on the negative real axis),
    fall back to small windows marching up the imaginary axis.
    """
    p = op.params
    speed = max(np.sqrt(p.kappa1 / p.rho1), np.sqrt(p.b1 / p.rho2),
                np.sqrt(p.kappa2 / p.rho3), np.sqrt(p.b2 / p.rho4))
    base = speed * np.pi / p.l
    A = op.generator.tocsc()
    try:
        vals, vecs = spla.eigs(A, k=16, sigma=1j * base, ncv=128,
                               tol=1e-12, maxiter=600)
        keep = _filter_physical(op, vals, vecs, value_filter=True)
        keep.sort(key=lambda z: z.imag)
        if len(keep) >= n_pairs and keep[n_pairs - 1].imag < 0.9 * keep[-1].imag:
            return keep
    except spla.ArpackNoConvergence:
        pass
    found: dict = {}
    covered = 0.0
    for j in range(14):
        shift = 1j * base * (0.45 + 0.8 * j)
        try:
            vals, vecs = spla.eigs(A, k=8, sigma=shift, ncv=96,
                                   tol=1e-12, maxiter=300)
        except spla.ArpackNoConvergence as exc:
            vals = np.asarray(exc.eigenvalues)
            vecs = np.asarray(exc.eigenvectors)
            if vals.size == 0:
                continue
        covered = shift.imag
        for val in _filter_physical(op, vals, vecs, value_filter=True):
            found[(round(val.real, 9), round(val.imag, 9))] = val
        ordered = sorted(found.values(), key=lambda z: z.imag)
        if len(ordered) >= n_pairs and ordered[n_pairs - 1].imag < covered:
            break
    return [z for z in found.values() if z.imag < covered]


def _physical_pairs(op: FdOperator, n_pairs: int) -> np.ndarray:
    """Lowest-frequency upper-half-plane eigenvalues of the FD generator,
    spurious mean-rotation modes excluded, sorted by imaginary part."""
    if op.dim <= _DENSE_EIG_DIM:
        vals, vecs = scipy.linalg.eig(op.generator.toarray())
        keep = _filter_physical(op, vals, vecs, value_filter=False)
    elif op.dim <= _DENSE_VALS_DIM:
        vals = scipy.linalg.eigvals(op.generator.toarray())
        keep = _drop_mean_modes_by_value(op, vals)
    else:
        keep = _arpack_pairs(op, n_pairs)
    keep.sort(key=lambda z: z.imag)
    if len(keep) < n_pairs:
        raise NumericsError(
            f"found only {len(keep)} physical eigenvalue pairs, need {n_pairs}")
    return np.array(keep[:n_pairs])


@dataclass(frozen=True)
class SpectraComparison:
    """Pairing of FD eigenvalues with modal-block eigenvalues."""

    M: int
    h: float
    fd_values: np.ndarray
    modal_values: np.ndarray
    rel_mismatch: np.ndarray

    @property
    def max_mismatch(self) -> float:
        return float(self.rel_mismatch.max())


def compare_spectra(p: BeamParams, M: int, N_low: int) -> SpectraComparison:
    """Match the N_low lowest-frequency FD eigenvalue pairs against the
    union of modal-block eigenvalues.

    The mismatch decays like h^2 for modes well below the grid cutoff.
    Raises NumericsError when pairing is ambiguous (eigenvalue clusters
    closer to each other than to their match).
    """
    validate_params(p)
    if not N_low * 8 < M:
        raise ValueError("need N_low << M")
    op = build_fd(p, M)
    fd_vals = _physical_pairs(op, N_low)
    n_union = max(32, 4 * N_low)
    stack = build_stack(p, n_union)
    modal = np.linalg.eigvals(stack.B).ravel()
    modal = modal[modal.imag > _IM_TOL]
    matched = np.empty(N_low, dtype=complex)
    mism = np.empty(N_low)
    used = set()
    for i, z in enumerate(fd_vals):
        dist = np.abs(modal - z)
        j = int(dist.argmin())
        rel = dist[j] / abs(modal[j])
        if rel > 0.2:
            raise NumericsError(
                f"eigenvalue pairing failed: fd value {z:.6g} is {rel:.1%} "
                "from the nearest modal eigenvalue")
        if j in used:
            order = np.argsort(dist)
            second = next((int(jj) for jj in order if int(jj) not in used), None)
            if second is None or dist[second] > 0.5 * abs(modal[j] - modal[second]):
                raise NumericsError("eigenvalue clusters overlap; pairing ambiguous")
            j = second
            rel = dist[j] / abs(modal[j])
        used.add(j)
        matched[i] = modal[j]
        mism[i] = rel
    return SpectraComparison(M=M, h=op.h, fd_values=fd_vals,
                             modal_values=matched, rel_mismatch=mism)
