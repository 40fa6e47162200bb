"""Command-line interface: config parsing, CSV/SVG emission, verification.

Subcommands

* ``spectrum``   eigenvalues of every mode block -> spectrum.csv
* ``resolvent``  analyticity scan over a frequency grid -> resolvent.csv
* ``simulate``   exact trajectory with energy budget -> simulate.csv
* ``sweep``      (alpha, beta) grid of stability/analyticity -> sweep.csv
* ``lemmas``     empirical a-priori-estimate constants -> lemmas.csv
* ``oracle``     finite-difference spectra cross-check -> oracle.csv
* ``verify``     run the invariant suite, print a pass/fail table

Configuration is a flat ``key = value`` text file with ``#`` comments; CLI
flags override file values.  Identical config and seed produce byte-identical
CSV output (floats serialized at 17 significant digits).  The environment
variable NANOBEAM_THREADS caps parallelism of the sweep.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import evolution, fdcheck, resolvent
from .blocks import assemble_block, build_stack, timoshenko_block
from .errors import NumericsError
from .model import (
    BeamParams,
    ModalState,
    ParameterError,
    energy,
    validate_params,
)

_PARAM_KEYS = ("rho1", "rho2", "rho3", "rho4", "kappa1", "kappa2", "b1", "b2",
               "gamma1", "gamma2", "gamma3", "gamma4", "m", "l", "alpha", "beta")


@dataclass
class RunConfig:
    """Everything a subcommand needs, resolved from file + flags."""

    params: BeamParams = field(default_factory=BeamParams)
    n_modes: int = 256
    lambda_min: float = 1e-1
    lambda_max: float = 1e6
    lambda_count: int = 200
    lambda_log: bool = True
    alpha_grid: tuple = (0.0, 0.5, 1.0)
    beta_grid: tuple = (0.0, 0.5, 1.0)
    t_max: float = 10.0
    t_count: int = 201
    init: str = "random"        # random | eigenmode | zero
    init_mode: int = 1
    trials: int = 100
    lemma_lambdas: tuple = (1.0, 10.0, 1e3, 1e6)
    oracle_m: int = 200
    oracle_pairs: int = 5
    seed: int = 0
    out_dir: str = "out"
    svg: bool = False

    def lambda_grid(self) -> np.ndarray:
        return resolvent.default_lambda_grid(self.lambda_min, self.lambda_max,
                                             self.lambda_count, self.lambda_log)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


_CONFIG_PARSERS = {
    "n_modes": int, "lambda_min": float, "lambda_max": float,
    "lambda_count": int, "lambda_log": _parse_bool,
    "alpha_grid": _parse_float_list, "beta_grid": _parse_float_list,
    "t_max": float, "t_count": int, "init": str.strip, "init_mode": int,
    "trials": int, "lemma_lambdas": _parse_float_list,
    "oracle_m": int, "oracle_pairs": int,
    "seed": int, "out": str.strip, "svg": _parse_bool,
}


def load_config(path: str | None) -> RunConfig:
    """Parse a flat key = value config file into a RunConfig."""
    cfg = RunConfig()
    if path is None:
        return cfg
    file = Path(path)
    if not file.is_file():
        raise ParameterError(f"config file not found: {path}")
    param_values: dict = {}
    for lineno, raw in enumerate(file.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _PARAM_KEYS:
                param_values[key] = float(value)
            elif key in _CONFIG_PARSERS:
                parsed = _CONFIG_PARSERS[key](value)
                attr = "out_dir" if key == "out" else key
                setattr(cfg, attr, parsed)
            else:
                raise ParameterError(f"unknown config key: {key}")
        except ValueError as exc:
            raise ParameterError(f"{path}:{lineno}: {exc}") from None
    if param_values:
        cfg.params = cfg.params.replace(**param_values)
    return cfg


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _ensure_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _plot_lines(path: Path, x, ys, labels, xlabel, ylabel, logx=False, logy=False):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for y, label in zip(ys, labels):
        ax.plot(x, y, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_heatmap(path: Path, values, alpha_grid, beta_grid, title):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    im = ax.imshow(values, origin="lower", aspect="auto",
                   extent=(beta_grid[0], beta_grid[-1], alpha_grid[0], alpha_grid[-1]))
    ax.set_xlabel("beta")
    ax.set_ylabel("alpha")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def run_spectrum(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    stack = build_stack(cfg.params, cfg.n_modes)
    ev = np.linalg.eigvals(stack.B)
    rows = []
    for n in range(cfg.n_modes):
        vals = ev[n][np.lexsort((ev[n].imag, ev[n].real))]
        for z in vals:
            rows.append((n + 1, stack.sigma[n], z.real, z.imag))
    write_csv(out / "spectrum.csv", "mode,sigma,re_lambda,im_lambda", rows)
    return 0


def run_resolvent(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    scan = resolvent.analyticity_scan(cfg.params, cfg.n_modes, cfg.lambda_grid())
    rows = [(lam, nrm, lam * nrm, int(mode))
            for lam, nrm, mode in zip(scan.lambda_grid, scan.resolvent_norms,
                                      scan.argmax_modes)]
    write_csv(out / "resolvent.csv",
              "lambda,resolvent_norm,analyticity_value,argmax_mode", rows)
    if cfg.svg:
        _plot_lines(out / "analyticity.svg", scan.lambda_grid,
                    [scan.analyticity_values], ["lambda * resolvent norm"],
                    "lambda", "analyticity value", logx=True, logy=True)
    print(f"sup resolvent {scan.sup_resolvent:.6g}, "
          f"sup analyticity {scan.sup_analyticity:.6g}")
    return 0


def _initial_state(cfg: RunConfig) -> ModalState:
    if cfg.init == "zero":
        return ModalState.zeros(cfg.n_modes)
    if cfg.init == "eigenmode":
        state, _ = evolution.eigenmode_state(cfg.params, cfg.n_modes, cfg.init_mode)
        return state
    if cfg.init == "random":
        return evolution.random_unit_state(cfg.params, cfg.n_modes, seed=cfg.seed)
    raise ParameterError(f"unknown init kind: {cfg.init}")


def run_simulate(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    times = np.linspace(0.0, cfg.t_max, cfg.t_count)
    traj = evolution.propagate(cfg.params, _initial_state(cfg), times)
    rows = [(t, tot, kin, tot - kin, dis)
            for t, tot, kin, dis in zip(traj.times, traj.total, traj.kinetic,
                                        traj.dissipations)]
    write_csv(out / "simulate.csv",
              "t,energy_total,energy_kinetic,energy_potential,dissipation", rows)
    if cfg.svg:
        _plot_lines(out / "energy.svg", traj.times,
                    [traj.total, traj.kinetic, traj.total - traj.kinetic],
                    ["total", "kinetic", "potential"],
                    "t", "energy")
    return 0


def run_sweep(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    report = resolvent.sweep_alpha_beta(cfg.params, cfg.n_modes, cfg.alpha_grid,
                                        cfg.beta_grid, cfg.lambda_grid())
    rows = []
    for i, a in enumerate(report.alpha_grid):
        for j, b in enumerate(report.beta_grid):
            rows.append((a, b, report.spectral_abscissa[i, j],
                         report.sup_resolvent[i, j], report.sup_analyticity[i, j]))
    write_csv(out / "sweep.csv",
              "alpha,beta,spectral_abscissa,sup_resolvent,sup_analyticity", rows)
    for idx, msg in sorted(report.failures.items()):
        print(f"cell alpha={report.alpha_grid[idx[0]]:g} "
              f"beta={report.beta_grid[idx[1]]:g} failed: {msg}", file=sys.stderr)
    if cfg.svg:
        _plot_heatmap(out / "sweep_abscissa.svg", report.spectral_abscissa,
                      report.alpha_grid, report.beta_grid, "spectral abscissa")
        _plot_heatmap(out / "sweep_analyticity.svg", report.sup_analyticity,
                      report.alpha_grid, report.beta_grid,
                      "sup lambda * resolvent norm")
    return 0 if not report.failures else 2


def run_lemmas(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    scan = resolvent.lemma_scan(cfg.params, cfg.n_modes,
                                np.array(cfg.lemma_lambdas), cfg.trials,
                                seed=cfg.seed)
    rows = []
    for k, lam in enumerate(scan.lambda_grid):
        for q, name in enumerate(scan.quantities):
            rows.append((lam, name, scan.ratios[k, q]))
    write_csv(out / "lemmas.csv", "lambda,quantity,ratio_max", rows)
    return 0


def run_oracle(cfg: RunConfig) -> int:
    out = _ensure_out(cfg)
    comp = fdcheck.compare_spectra(cfg.params, cfg.oracle_m, cfg.oracle_pairs)
    rows = [(k + 1, comp.M, comp.fd_values[k].real, comp.fd_values[k].imag,
             comp.modal_values[k].real, comp.modal_values[k].imag,
             comp.rel_mismatch[k])
            for k in range(len(comp.fd_values))]
    write_csv(out / "oracle.csv",
              "pair,grid_cells,fd_re,fd_im,modal_re,modal_im,rel_mismatch", rows)
    print(f"max mismatch {comp.max_mismatch:.3e} at M={comp.M}")
    return 0


# ---------------------------------------------------------------------------
# verification suite

def _verify_checks(cfg: RunConfig):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)

    def dissipativity():
        worst = 0.0
        for a in (0.0, 0.5, 1.0):
            for b in (0.0, 0.5, 1.0):
                stack = build_stack(p.replace(alpha=a, beta=b), 32)
                X = rng.standard_normal((32, 8, 200)) + 1j * rng.standard_normal((32, 8, 200))
                HX = stack.H @ X
                BX = stack.B @ X
                lhs = np.einsum("nit,nit->nt", HX.conj(), BX).real
                dq = np.einsum("nit,nit->nt", (stack.D @ X).conj(), X).real
                den = (np.linalg.norm(HX, axis=1) * np.linalg.norm(BX, axis=1) + dq)
                worst = max(worst, float(np.max(np.abs(lhs + dq) / den)))
        return worst <= 1e-12, f"max rel residual {worst:.2e}"

    def gram_definiteness():
        stack = build_stack(p, 128)
        h_min = float(np.linalg.eigvalsh(stack.H).min())
        d_min = float(np.linalg.eigvalsh(stack.D).min())
        d_scale = float(np.abs(stack.D).max())
        ok = h_min > 0 and d_min >= -1e-12 * d_scale
        return ok, f"min eig H {h_min:.2e}, min eig D {d_min:.2e}"

    def spectrum_left():
        omega, mode = resolvent.spectral_abscissa(p, 128)
        return omega < 0, f"abscissa {omega:.6f} at mode {mode}"

    def round_trip():
        worst = 0.0
        for lam in (0.0, 1.0, 137.0):
            F = ModalState(rng.standard_normal((64, 8)) + 1j * rng.standard_normal((64, 8)))
            U = resolvent.resolve(p, 64, lam, F)
            back = resolvent.apply_shifted(p, 64, lam, U)
            num = np.linalg.norm(back.coeffs - F.coeffs)
            worst = max(worst, float(num / np.linalg.norm(F.coeffs)))
        return worst <= 1e-10, f"max rel round-trip {worst:.2e}"

    def conjugate_symmetry():
        stack = build_stack(p, 64)
        pos, _ = resolvent._grid_norms(stack, np.array([3.7]))
        neg, _ = resolvent._grid_norms(stack, np.array([-3.7]))
        rel = abs(pos[0] - neg[0]) / pos[0]
        return rel <= 1e-12, f"rel asymmetry {rel:.2e}"

    def energy_additivity():
        v1 = rng.standard_normal(8)
        v2 = rng.standard_normal(8)
        s1 = ModalState.single_mode(4, 1, v1)
        s2 = ModalState.single_mode(4, 3, v2)
        both = ModalState(s1.coeffs + s2.coeffs)
        lhs = energy(both, p).total
        rhs = energy(s1, p).total + energy(s2, p).total
        rel = abs(lhs - rhs) / rhs
        return rel <= 1e-13, f"rel {rel:.2e}"

    def timoshenko_subblock():
        p0 = p.replace(m=1e-300)
        sub = assemble_block(p0, 5)
        tim = timoshenko_block(p0, 5)
        idx = np.ix_(range(4), range(4))
        db = np.abs(sub.B[idx] - tim.B).max() / np.abs(tim.B).max()
        dh = np.abs(sub.H[idx] - tim.H).max() / np.abs(tim.H).max()
        dd = np.abs(sub.D[idx] - tim.D).max() / np.abs(tim.D).max()
        worst = max(db, dh, dd)
        return worst <= 1e-12, f"max rel sub-block gap {worst:.2e}"

    def semigroup():
        U0 = evolution.random_unit_state(p, 8, seed=cfg.seed)
        one = evolution.propagate(p, U0, [1.3]).coeffs[0]
        two = evolution.propagate(p, evolution.propagate(p, U0, [0.8]).state_at(0),
                                  [0.5]).coeffs[0]
        rel = np.abs(one - two).max() / np.abs(one).max()
        return rel <= 1e-10, f"rel {rel:.2e}"

    def energy_identity():
        # single-mode data keeps the O(dt^2 * omega^3) differencing error small
        U0 = ModalState.single_mode(4, 1, rng.standard_normal(8))
        dt = 1e-3
        traj = evolution.propagate(p, U0, np.arange(0.0, 1.0 + dt / 2, dt))
        monotone = bool(np.all(np.diff(traj.total) <= 1e-10 * traj.total[0]))
        rep = evolution.check_energy_identity(traj, p)
        ok = monotone and rep.max_residual <= 1e-4
        return ok, f"residual {rep.max_residual:.2e}, monotone {monotone}"

    def fd_dissipative():
        op = fdcheck.build_fd(p, 64)
        X = rng.standard_normal((op.dim, 100)) + 1j * rng.standard_normal((op.dim, 100))
        HB = (op.energy_weight @ op.generator).toarray()
        lhs = np.einsum("it,it->t", X.conj(), HB @ X).real
        quad = np.einsum("it,it->t", X.conj(), op.dissipation_weight @ X).real
        rel = float(np.abs(lhs + quad).max() / quad.max())
        return rel <= 1e-10, f"max rel residual {rel:.2e}"

    def fd_spectra():
        comp = fdcheck.compare_spectra(p, 120, 3)
        return comp.max_mismatch <= 1e-3, f"max mismatch {comp.max_mismatch:.2e}"

    def sweep_symmetry():
        grid = np.array([0.5, 2.0, 40.0])
        rep = resolvent.sweep_alpha_beta(p, 24, (0.0, 1.0), (0.25, 0.5), grid)
        rep_sw = resolvent.sweep_alpha_beta(p.swapped_beams(), 24,
                                            (0.25, 0.5), (0.0, 1.0), grid)
        gap = max(
            np.abs(rep.spectral_abscissa - rep_sw.spectral_abscissa.T).max(),
            np.abs(rep.sup_analyticity - rep_sw.sup_analyticity.T).max()
            / rep.sup_analyticity.max(),
        )
        return gap <= 1e-9, f"max transposed gap {gap:.2e}"

    return [
        ("dissipativity identity", dissipativity),
        ("gram definiteness", gram_definiteness),
        ("spectrum in left half-plane", spectrum_left),
        ("resolvent round trip", round_trip),
        ("resolvent conjugate symmetry", conjugate_symmetry),
        ("energy additivity over modes", energy_additivity),
        ("single-beam sub-block equality", timoshenko_subblock),
        ("semigroup property", semigroup),
        ("energy identity along flow", energy_identity),
        ("fd generator dissipative", fd_dissipative),
        ("fd spectra agreement", fd_spectra),
        ("beam-swap sweep symmetry", sweep_symmetry),
    ]


def run_verify(cfg: RunConfig) -> int:
    checks = _verify_checks(cfg)
    width = max(len(name) for name, _ in checks)
    all_ok = True
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # surface, keep running the rest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        print(f"{name:<{width}}  {'pass' if ok else 'FAIL'}  {detail}")
    print("verification:", "all checks passed" if all_ok else "FAILURES present")
    return 0 if all_ok else 2


_SUBCOMMANDS = {
    "spectrum": run_spectrum,
    "resolvent": run_resolvent,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "lemmas": run_lemmas,
    "verify": run_verify,
    "oracle": run_oracle,
}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="key = value config file")
    shared.add_argument("--out", metavar="DIR", help="output directory")
    shared.add_argument("--modes", type=int, metavar="N", help="modal truncation")
    shared.add_argument("--seed", type=int, metavar="S", help="random seed")
    shared.add_argument("--svg", action="store_true", help="emit SVG plots")
    parser = argparse.ArgumentParser(
        prog="nanobeam",
        description="Spectral analysis of two damped Timoshenko beams coupled "
                    "by a Van der Waals force.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sub.add_parser(name, parents=[shared])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.out_dir = args.out
        if args.modes is not None:
            cfg.n_modes = args.modes
        if args.seed is not None:
            cfg.seed = args.seed
        if args.svg:
            cfg.svg = True
        validate_params(cfg.params)
        if cfg.n_modes < 1 or cfg.lambda_count < 1 or cfg.t_count < 1 or cfg.trials < 1:
            raise ParameterError("grid counts must be >= 1")
        return _SUBCOMMANDS[args.command](cfg)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericsError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
