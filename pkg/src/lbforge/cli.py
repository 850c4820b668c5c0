"""Command-line entry point: ``lbforge <command> [options]``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure (no root, blow-up,
a check exceeding its tolerance).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import moments
from .equilibrium import build_projector, discrete_equilibrium
from .lattice import PRESETS, LatticeModel, ModelSpec
from .moments import MacroState, all_multi_indices, maxwellian_moment
from .profiles import read_csv, write_csv
from .riemann import (DEFAULT_SMEAR, GAMMA_3D, PrimitiveState, compare, detect_plateaus, exact_profile,
                      plateau_windows, solve_star)
from .sim import DEFAULT_STEPS, ScenarioConfig, ShockTube, SimulationBlowup
from .solver import RankDeficientError, solve, verify

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- omega-table -------------------------------------------------------------------

def omega_table(max_m: int = 7, max_d: int = 4, as_csv: bool = False) -> str:
    if not (0 <= max_m <= 16) or not (1 <= max_d <= 4):
        raise ValueError("omega-table supports 0 <= max_m <= 16 and 1 <= max_d <= 4")
    grid = [[moments.equation_count(m, D) for m in range(max_m + 1)] for D in range(1, max_d + 1)]
    if as_csv:
        lines = ["D," + ",".join(f"m={m}" for m in range(max_m + 1))]
        lines += [f"{D}," + ",".join(str(x) for x in row) for D, row in enumerate(grid, start=1)]
        return "\n".join(lines) + "\n"
    width = max(len(str(grid[-1][-1])), 3) + 2
    head = "     " + "".join(f"{'m=' + str(m):>{width}}" for m in range(max_m + 1))
    rows = [f"D={D:<3}" + "".join(f"{x:>{width}}" for x in row) for D, row in enumerate(grid, start=1)]
    return "\n".join([head] + rows) + "\n"


def cmd_omega_table(args) -> int:
    print(omega_table(args.max_m, args.max_d, args.csv), end="")
    return EXIT_OK


# -- solve / verify ------------------------------------------------------------------

def cmd_solve(args) -> int:
    if args.preset:
        spec = PRESETS[args.preset]
    else:
        if args.dim is None or args.order is None or args.generators is None:
            raise UsageError("solve needs --preset or all of --dim, --order, --generators")
        spec = ModelSpec.parse(args.dim, args.order, args.generators)
    report = solve(spec, z_max=args.zmax, tolerance=args.tol)
    for line in report.log_lines():
        print(line)
    if not report.solutions:
        raise NumericalFailure("no acceptable model in the search interval")
    if args.out:
        out = Path(args.out)
        for k, sol in enumerate(report.solutions):
            path = out if k == 0 else out.with_name(f"{out.stem}_{k}{out.suffix}")
            sol.model.save(path)
            print(f"wrote {path}")
    else:
        print(report.solutions[0].model.to_json(), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = LatticeModel.load(args.model)
    m = args.order if args.order is not None else model.order
    rep = verify(model, m)
    print(f"max relative residual {rep.max_relative:.3e} at {rep.worst_index}")
    print(f"max odd-moment residual {rep.max_odd:.3e} at {rep.worst_odd_index}")
    if not rep.passed(args.tol, args.odd_tol):
        raise NumericalFailure(f"model fails quadrature checks at tolerance {args.tol:g}")
    print("ok")
    return EXIT_OK


# -- eq-check ------------------------------------------------------------------------

def random_state(rng: np.random.Generator, D: int, umax: float, theta_range: tuple[float, float],
                 rho_range: tuple[float, float] = (0.5, 2.0)) -> MacroState:
    direction = rng.standard_normal(D)
    direction /= np.linalg.norm(direction)
    speed = umax * rng.uniform() ** (1.0 / D)
    return MacroState(rng.uniform(*rho_range), tuple(speed * direction), rng.uniform(*theta_range))


def moment_contract_violation(proj, state: MacroState) -> tuple[float, tuple]:
    """Worst relative mismatch between discrete and Maxwellian moments of order <= N.

    Moments whose exact value is below 1e-8 * rho are compared absolutely (scaled by rho).
    """
    f = discrete_equilibrium(proj, state)
    v = proj.velocities.velocities
    worst, worst_a = 0.0, ()
    for a in all_multi_indices(proj.N, proj.dimension):
        disc = math.fsum(f * np.prod(v ** np.array(a, dtype=float), axis=1))
        ref = maxwellian_moment(a, state)
        scale = abs(ref) if abs(ref) > 1e-8 * state.rho else state.rho
        err = abs(disc - ref) / scale
        if err > worst or not worst_a:
            worst, worst_a = err, a
    return worst, worst_a


def cmd_eq_check(args) -> int:
    model = LatticeModel.load(args.model)
    proj = build_projector(model, args.order)
    rng = np.random.default_rng(args.seed)
    worst, where = 0.0, None
    for _ in range(args.samples):
        state = random_state(rng, model.dimension, args.umax, (args.theta_min, args.theta_max))
        err, a = moment_contract_violation(proj, state)
        if where is None or err > worst:
            worst, where = err, (a, state)
    print(f"worst moment-contract violation {worst:.3e} at index {where[0]} for {where[1]}")
    if worst > args.tol:
        raise NumericalFailure(f"violation exceeds {args.tol:g}")
    print("ok")
    return EXIT_OK


# -- shocktube / riemann / compare ------------------------------------------------

def _state_triplet(text: str) -> PrimitiveState:
    try:
        rho, u, p = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected 'rho,u,p', got {text!r}") from None
    return PrimitiveState(rho, u, p)


def run_shocktube(args):
    model = LatticeModel.load(args.model)
    D = model.dimension
    zero = (0.0,) * D
    cfg = ScenarioConfig(
        model, omega=args.omega, steps=args.steps,
        left=MacroState(args.rho_left, zero, args.theta_left),
        right=MacroState(args.rho_right, zero, args.theta_right),
        nx=args.nx, ny=args.ny, nz=args.nz, snapshot_every=args.snapshot_every, backend=args.backend,
    )
    tube = ShockTube(cfg)
    return cfg, tube, tube.run()


def cmd_shocktube(args) -> int:
    if args.compare and args.steps == 0:
        raise UsageError("comparison needs steps > 0 (the exact solution is undefined at t = 0)")
    try:
        cfg, tube, result = run_shocktube(args)
    except SimulationBlowup as exc:
        if exc.last_good is not None and args.out:
            write_csv([exc.last_good], args.out)
        raise NumericalFailure(str(exc)) from None
    write_csv(result.snapshots, args.out)
    print(f"{cfg.steps} steps in {result.seconds:.2f} s "
          f"({result.stats['node_updates_per_second']:.3g} node updates/s, {result.stats['backend']} kernels, "
          f"{result.stats['threads']} threads); profiles -> {args.out}")
    if not args.compare:
        return EXIT_OK
    last = result.snapshots[-1]
    sol = solve_star(PrimitiveState(cfg.left.rho, 0.0, cfg.left.pressure),
                     PrimitiveState(cfg.right.rho, 0.0, cfg.right.pressure), args.gamma)
    exact = exact_profile(sol, float(last.step), last.z_index, last.z_phys, step=last.step)
    exact_path = args.exact_out or str(Path(args.out).with_name(Path(args.out).stem + "_exact.csv"))
    write_csv([exact], exact_path)
    report = compare(last, exact, plateau_windows(sol, float(last.step), last.z_phys, args.smear))
    print(f"exact profile -> {exact_path}")
    return _finish_compare(report, args.tol)


def _finish_compare(report, tol) -> int:
    for line in report.lines():
        print(line)
    if not report.windows:
        raise NumericalFailure("no plateau windows found")
    if report.plateau_linf > tol:
        raise NumericalFailure(f"plateau error {report.plateau_linf:.3e} exceeds {tol:g}")
    print(f"plateau agreement within {tol:g}")
    return EXIT_OK


def cmd_riemann(args) -> int:
    left, right = _state_triplet(args.left), _state_triplet(args.right)
    if args.nodes < 1:
        raise UsageError("--nodes must be positive")
    sol = solve_star(left, right, args.gamma)
    z = np.linspace(args.zmin, args.zmax, args.nodes)
    prof = exact_profile(sol, args.time, np.arange(1, args.nodes + 1), z, step=0)
    text = write_csv([prof], args.out)
    if not args.out:
        print(text, end="")
    print(f"p_star={sol.p_star:.12g} u_star={sol.u_star:.12g} waves: {sol.left_wave}/{sol.right_wave}",
          file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    sims = read_csv(args.sim)
    sim = next((p for p in sims if p.step == args.step), None) if args.step is not None else sims[-1]
    if sim is None:
        raise UsageError(f"no snapshot at step {args.step} in {args.sim}")
    if args.exact:
        exact = read_csv(args.exact)[-1]
        windows = detect_plateaus(exact, args.smear)
    else:
        if not (args.left and args.right):
            raise UsageError("compare needs --exact or both --left and --right")
        if sim.step <= 0:
            raise UsageError("comparison needs a snapshot with step > 0")
        sol = solve_star(_state_triplet(args.left), _state_triplet(args.right), args.gamma)
        exact = exact_profile(sol, float(sim.step), sim.z_index, sim.z_phys, step=sim.step)
        windows = plateau_windows(sol, float(sim.step), sim.z_phys, args.smear)
    return _finish_compare(compare(sim, exact, windows), args.tol)


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lbforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("omega-table", help="number of moment equations per (m, D)")
    p.add_argument("--max-m", type=int, default=7)
    p.add_argument("--max-d", type=int, default=4)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_omega_table)

    p = sub.add_parser("solve", help="solve for weights and lattice scale of a generator set")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--dim", type=int)
    p.add_argument("--order", type=int)
    p.add_argument("--generators", help='semicolon-separated integer tuples, e.g. "0,0;1,0;1,1"')
    p.add_argument("--zmax", type=float, default=4.0, help="upper end of the c^2 search interval")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a model file against the Gaussian moments")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--odd-tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eq-check", help="sample random states and check the equilibrium moments")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, help="expansion order N (default: model order)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--umax", type=float, default=0.3)
    p.add_argument("--theta-min", type=float, default=0.8)
    p.add_argument("--theta-max", type=float, default=1.2)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_eq_check)

    p = sub.add_parser("shocktube", help="run the thermal shock tube")
    p.add_argument("--model", required=True)
    p.add_argument("--nx", type=int, default=11)
    p.add_argument("--ny", type=int, default=11)
    p.add_argument("--nz", type=int, default=800)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--omega", type=float, default=1.5)
    p.add_argument("--rho-left", type=float, default=4.0)
    p.add_argument("--rho-right", type=float, default=1.0)
    p.add_argument("--theta-left", type=float, default=1.0)
    p.add_argument("--theta-right", type=float, default=1.0)
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["compiled", "python"])
    p.add_argument("--compare", action="store_true", help="also solve the Riemann problem and compare plateaus")
    p.add_argument("--exact-out")
    p.add_argument("--gamma", type=float, default=GAMMA_3D)
    p.add_argument("--smear", type=int, default=DEFAULT_SMEAR)
    p.add_argument("--tol", type=float, default=0.02)
    p.set_defaults(func=cmd_shocktube)

    p = sub.add_parser("riemann", help="exact Riemann profile as CSV")
    p.add_argument("--gamma", type=float, default=GAMMA_3D)
    p.add_argument("--left", required=True, help="rho,u,p")
    p.add_argument("--right", required=True, help="rho,u,p")
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--zmin", type=float, required=True)
    p.add_argument("--zmax", type=float, required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_riemann)

    p = sub.add_parser("compare", help="plateau errors of a simulated profile against the exact one")
    p.add_argument("--sim", required=True)
    p.add_argument("--exact")
    p.add_argument("--left", help="rho,u,p (used when --exact is absent)")
    p.add_argument("--right", help="rho,u,p")
    p.add_argument("--gamma", type=float, default=GAMMA_3D)
    p.add_argument("--step", type=int)
    p.add_argument("--smear", type=int, default=DEFAULT_SMEAR)
    p.add_argument("--tol", type=float, default=0.02)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, RankDeficientError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
