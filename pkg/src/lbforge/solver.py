"""Assemble and solve the even-moment quadrature system for a set of velocity orbits.

With ``v_i = c * xi_i`` every constraint of order ``n`` reads
``z^(n/2) * sum_g w_g S_g(a) = R(a)`` with ``z = c^2``, where ``S_g(a)`` is the integer
sum of ``xi^a`` over orbit ``g`` and ``R(a)`` the normalized Gaussian moment. For a fixed
``z`` the system is linear in the weights, so a square model (one more constraint than
orbits) reduces to a scalar closure equation in ``z``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _exact
from .lattice import LatticeModel, ModelSpec, VelocitySet, orbit, published_scale
from .moments import all_multi_indices, enumerate_constraints, gaussian_moment

log = logging.getLogger(__name__)

SCAN_POINTS = 4000
Z_TOL = 1e-14
PUBLISHED_MATCH_TOL = 1e-4


class RankDeficientError(ValueError):
    """The orbit sums of a spec do not give enough independent equations."""

    def __init__(self, message: str, dependent: list):
        super().__init__(message)
        self.dependent = dependent


def orbit_moment_sum(generator, a) -> int:
    return sum(math.prod(x ** e for x, e in zip(v, a)) for v in orbit(generator))


@dataclass
class MomentSystem:
    spec: ModelSpec
    constraints: list[tuple[int, ...]]
    sums: list[list[int]]          # [constraint][group]
    targets: list[Fraction]
    pivot_rows: list[int] = field(default_factory=list)
    closure_rows: list[int] = field(default_factory=list)
    # exact inverse of the pivot-row submatrix; weights(z) = inv @ (targets[pivot] * z^-(n/2))
    pivot_inverse: list[list[Fraction]] = field(default_factory=list)

    @property
    def half_orders(self) -> list[int]:
        return [sum(a) // 2 for a in self.constraints]

    @property
    def is_square(self) -> bool:
        return len(self.constraints) == len(self.spec.generators) + 1

    def weights(self, z: float) -> np.ndarray:
        h = self.half_orders
        rhs = np.array([float(self.targets[j]) * z ** (-h[j]) for j in self.pivot_rows])
        return np.array([[float(x) for x in row] for row in self.pivot_inverse]) @ rhs

    def closure_polynomials(self) -> list[dict[int, Fraction]]:
        """For each closure row, exact coefficients of its residual as a Laurent polynomial
        in ``z`` (power -> coefficient)."""
        h = self.half_orders
        polys = []
        for r in self.closure_rows:
            coeffs: dict[int, Fraction] = {0: -self.targets[r]}
            row = self.sums[r]
            for k, j in enumerate(self.pivot_rows):
                lam = sum((row[g] * self.pivot_inverse[g][k] for g in range(len(row))), Fraction(0))
                power = h[r] - h[j]
                coeffs[power] = coeffs.get(power, Fraction(0)) + lam * self.targets[j]
            polys.append({p: c for p, c in coeffs.items() if c != 0})
        return polys


def assemble(spec: ModelSpec) -> MomentSystem:
    """Orbit-sum matrix and normalized targets for every canonical even constraint of
    order <= 2m (the expansion order is taken equal to m)."""
    constraints = enumerate_constraints(spec.order, spec.dimension)
    sums = [[orbit_moment_sum(g, a) for g in spec.generators] for a in constraints]
    targets = [gaussian_moment(a) for a in constraints]
    system = MomentSystem(spec, constraints, sums, targets)

    ngroups = len(spec.generators)
    pivots = _exact.independent_rows(sums, limit=ngroups)
    if len(pivots) == ngroups:
        system.pivot_rows = pivots
        system.closure_rows = [i for i in range(len(constraints)) if i not in pivots]
        system.pivot_inverse = _exact.inverse([sums[i] for i in pivots])
    return system


def _require_full_rank(system: MomentSystem) -> None:
    if system.pivot_inverse:
        return
    pivots = _exact.independent_rows(system.sums)
    dependent = [system.constraints[i] for i in range(len(system.constraints)) if i not in pivots]
    raise RankDeficientError(
        f"orbit sums have rank {len(pivots)} < {len(system.spec.generators)} groups; "
        f"constraints dependent on earlier ones: {dependent}",
        dependent,
    )


@dataclass
class Residual:
    closure: float       # sum of |closure-row residuals| with pivot rows solved exactly
    least_squares: float  # full-system least-squares residual norm (cross-check)
    signed: float         # first closure row residual, used for bracketing


def _eval_laurent(poly: dict[int, Fraction], z: float) -> float:
    return math.fsum(float(c) * z ** p for p, c in poly.items())


def consistency_residual(system: MomentSystem, z: float) -> Residual:
    """Residual of the remaining constraints after solving the pivot subsystem at ``z = c^2``.

    Raises :class:`RankDeficientError` when no independent square subsystem exists.
    """
    if not (z > 0):
        raise ValueError("z = c^2 must be positive")
    _require_full_rank(system)
    vals = [_eval_laurent(p, z) for p in system.closure_polynomials()]

    h = np.array(system.half_orders)
    A = np.array(system.sums, dtype=float) * (z ** h)[:, None]
    R = np.array([float(t) for t in system.targets])
    w_ls, *_ = np.linalg.lstsq(A, R, rcond=None)
    ls = float(np.linalg.norm(A @ w_ls - R))
    return Residual(sum(abs(v) for v in vals), ls, vals[0] if vals else 0.0)


@dataclass
class VerifyReport:
    max_relative: float              # worst |sum - target| / target over even-all indices
    worst_index: tuple[int, ...]
    max_odd: float                   # worst |sum| / sum(w |v^a|) over indices with an odd exponent
    worst_odd_index: tuple[int, ...] | None

    def passed(self, tol: float, odd_tol: float = 1e-12) -> bool:
        return self.max_relative < tol and self.max_odd < odd_tol


def verify(model: LatticeModel, m: int) -> VerifyReport:
    """Check ``sum_i w_i v_i^a`` against the normalized Gaussian for every multi-index
    of total order <= 2m (all parities, not just canonical ones)."""
    vs = VelocitySet.from_model(model)
    worst, worst_idx = 0.0, ()
    worst_odd, worst_odd_idx = 0.0, None
    for a in all_multi_indices(2 * m, model.dimension):
        mono = np.prod(vs.velocities ** np.array(a, dtype=float), axis=1)
        terms = vs.weights * mono
        total = math.fsum(terms)
        if all(x % 2 == 0 for x in a):
            target = float(gaussian_moment(a))
            err = abs(total - target) / target
            if not worst_idx or err > worst:
                worst, worst_idx = err, a
        else:
            scale = math.fsum(np.abs(terms)) or 1.0
            err = abs(total) / scale
            if worst_odd_idx is None or err > worst_odd:
                worst_odd, worst_odd_idx = err, a
    return VerifyReport(worst, worst_idx, worst_odd, worst_odd_idx)


@dataclass
class Solution:
    model: LatticeModel
    z: float
    closure_residual: float
    max_residual: float
    matches_published: bool = False

    @property
    def min_weight(self) -> float:
        return min(self.model.weights)


@dataclass
class SolveReport:
    solutions: list[Solution]
    rejected_roots: list[tuple[float, str]]
    brackets: int

    def log_lines(self) -> list[str]:
        lines = []
        for s in self.solutions:
            flag = "  [published]" if s.matches_published else ""
            lines.append(f"accepted z={s.z:.15g} c={s.model.c:.15g} residual={s.max_residual:.3e} "
                         f"min_weight={s.min_weight:.6e}{flag}")
        for z, reason in self.rejected_roots:
            lines.append(f"rejected z={z:.15g} c={math.sqrt(z):.15g} reason: {reason}")
        if not self.solutions and not self.rejected_roots:
            lines.append("no root of the closure equation in the search interval")
        return lines


def _bisect(f, lo: float, hi: float, flo: float) -> float:
    while hi - lo > Z_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve(spec: ModelSpec, z_max: float = 4.0, tolerance: float = 1e-9,
          scan_points: int = SCAN_POINTS) -> SolveReport:
    """Find every ``z = c^2`` in ``(0, z_max]`` where the square system is consistent
    and all weights are positive.

    The closure residual is sampled on ``scan_points`` uniform points, sign changes are
    bisected to ``|dz| < 1e-14`` and the recovered model must satisfy every monomial of
    order <= 2m to ``tolerance`` (relative).
    """
    system = assemble(spec)
    if not system.is_square:
        raise ValueError(f"spec has {len(spec.generators)} groups but {len(system.constraints)} "
                         f"constraints; a square solve needs exactly one more constraint than groups")
    _require_full_rank(system)
    poly = system.closure_polynomials()[0]

    def f(z):
        return _eval_laurent(poly, z)

    zs = [z_max * k / scan_points for k in range(1, scan_points + 1)]
    vals = [f(z) for z in zs]
    roots = []
    for k, (z, v) in enumerate(zip(zs, vals)):
        if v == 0.0:
            roots.append(z)
        elif k + 1 < len(zs) and vals[k + 1] != 0.0 and (v > 0) != (vals[k + 1] > 0):
            roots.append(_bisect(f, z, zs[k + 1], v))

    ref_c = published_scale(spec)
    solutions, rejected = [], []
    for z in roots:
        w = system.weights(z)
        if not np.all(w > 0):
            rejected.append((z, f"non-positive weight (min {w.min():.3e})"))
            continue
        model = LatticeModel.from_weights(spec.dimension, spec.order, math.sqrt(z), spec.generators, w)
        report = verify(model, spec.order)
        if not report.passed(tolerance):
            rejected.append((z, f"residual {report.max_relative:.3e} at {report.worst_index} "
                                f"(odd {report.max_odd:.3e})"))
            continue
        match = ref_c is not None and abs(math.sqrt(z) - ref_c) <= PUBLISHED_MATCH_TOL
        solutions.append(Solution(model, z, abs(f(z)), report.max_relative, match))
    result = SolveReport(solutions, rejected, len(roots))
    for line in result.log_lines():
        log.info(line)
    return result
