"""Exact Riemann solver for the 1D Euler equations of an ideal gas, plus profile comparison.

Pressure follows the lattice convention ``p = rho * theta / 2`` so the sound speed is
``sqrt(gamma * p / rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import Profile

GAMMA_3D = 5.0 / 3.0
NEWTON_TOL = 1e-12
MAX_NEWTON = 100


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    p: float

    def __post_init__(self):
        if not (self.rho > 0 and self.p > 0):
            raise ValueError(f"density and pressure must be positive, got rho={self.rho}, p={self.p}")

    def sound_speed(self, gamma: float) -> float:
        return math.sqrt(gamma * self.p / self.rho)

    @property
    def theta(self) -> float:
        return 2.0 * self.p / self.rho


@dataclass(frozen=True)
class RiemannSolution:
    left: PrimitiveState
    right: PrimitiveState
    gamma: float
    p_star: float
    u_star: float
    left_wave: str    # "shock" or "rarefaction"
    right_wave: str
    iterations: int

    def star_density(self, side: str) -> float:
        s = self.left if side == "left" else self.right
        g = self.gamma
        ratio = self.p_star / s.p
        if ratio > 1.0:
            k = (g - 1) / (g + 1)
            return s.rho * (ratio + k) / (k * ratio + 1)
        return s.rho * ratio ** (1.0 / g)

    def shock_speed(self, side: str) -> float:
        g = self.gamma
        if side == "left":
            s = self.left
            return s.u - s.sound_speed(g) * math.sqrt((g + 1) / (2 * g) * self.p_star / s.p + (g - 1) / (2 * g))
        s = self.right
        return s.u + s.sound_speed(g) * math.sqrt((g + 1) / (2 * g) * self.p_star / s.p + (g - 1) / (2 * g))

    def wave_speeds(self) -> list[float]:
        """Characteristic speeds bounding each wave, left to right (fans contribute head and tail)."""
        g = self.gamma
        speeds = []
        if self.left_wave == "shock":
            speeds.append(self.shock_speed("left"))
        else:
            a_star = self.left.sound_speed(g) * (self.p_star / self.left.p) ** ((g - 1) / (2 * g))
            speeds += [self.left.u - self.left.sound_speed(g), self.u_star - a_star]
        speeds.append(self.u_star)
        if self.right_wave == "shock":
            speeds.append(self.shock_speed("right"))
        else:
            a_star = self.right.sound_speed(g) * (self.p_star / self.right.p) ** ((g - 1) / (2 * g))
            speeds += [self.u_star + a_star, self.right.u + self.right.sound_speed(g)]
        return speeds


def _pressure_branch(p: float, s: PrimitiveState, gamma: float) -> tuple[float, float]:
    """Velocity jump across one wave as a function of star pressure, and its derivative."""
    a = s.sound_speed(gamma)
    if p > s.p:
        A = 2.0 / ((gamma + 1) * s.rho)
        B = (gamma - 1) / (gamma + 1) * s.p
        root = math.sqrt(A / (p + B))
        return (p - s.p) * root, root * (1 - 0.5 * (p - s.p) / (p + B))
    ex = (gamma - 1) / (2 * gamma)
    val = 2 * a / (gamma - 1) * ((p / s.p) ** ex - 1)
    return val, (p / s.p) ** (-(gamma + 1) / (2 * gamma)) / (s.rho * a)


def _pressure_function(p, left, right, gamma):
    fl, dl = _pressure_branch(p, left, gamma)
    fr, dr = _pressure_branch(p, right, gamma)
    return fl + fr + (right.u - left.u), dl + dr


def solve_star(left: PrimitiveState, right: PrimitiveState, gamma: float) -> RiemannSolution:
    """Star-region pressure and velocity by Newton iteration on the pressure function."""
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    aL, aR = left.sound_speed(gamma), right.sound_speed(gamma)
    du = right.u - left.u
    if 2 * (aL + aR) / (gamma - 1) <= du:
        raise ValueError("initial states generate a vacuum; no star region exists")

    def classify(p):
        return ("shock" if p > left.p else "rarefaction", "shock" if p > right.p else "rarefaction")

    if left == right:
        return RiemannSolution(left, right, gamma, left.p, left.u, *classify(left.p), iterations=0)

    z = (gamma - 1) / (2 * gamma)
    p = ((aL + aR - 0.5 * (gamma - 1) * du) / (aL / left.p ** z + aR / right.p ** z)) ** (1 / z)
    iterations = 0
    converged = False
    for iterations in range(1, MAX_NEWTON + 1):
        f, df = _pressure_function(p, left, right, gamma)
        p_new = p - f / df
        if not (p_new > 0) or not math.isfinite(p_new):
            break
        if abs(p_new - p) < NEWTON_TOL * p_new:
            p = p_new
            converged = True
            break
        p = p_new
    if not converged:
        p = _bisect_pressure(left, right, gamma)
    fl, _ = _pressure_branch(p, left, gamma)
    fr, _ = _pressure_branch(p, right, gamma)
    u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl)
    return RiemannSolution(left, right, gamma, p, u, *classify(p), iterations=iterations)


def _bisect_pressure(left, right, gamma):
    lo, hi = 1e-300, max(left.p, right.p)
    while _pressure_function(hi, left, right, gamma)[0] < 0:
        hi *= 2.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _pressure_function(mid, left, right, gamma)[0] < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sample(sol: RiemannSolution, xi: float) -> PrimitiveState:
    """State at similarity coordinate ``xi = x / t``."""
    g = sol.gamma
    if xi <= sol.u_star:
        s, sign, wave = sol.left, -1.0, sol.left_wave
    else:
        s, sign, wave = sol.right, 1.0, sol.right_wave
    side = "left" if sign < 0 else "right"
    star = PrimitiveState(sol.star_density(side), sol.u_star, sol.p_star)
    a = s.sound_speed(g)
    if wave == "shock":
        S = sol.shock_speed(side)
        outside = xi <= S if sign < 0 else xi >= S
        return s if outside else star
    a_star = a * (sol.p_star / s.p) ** ((g - 1) / (2 * g))
    head = s.u + sign * a
    tail = sol.u_star + sign * a_star
    if (sign < 0 and xi <= head) or (sign > 0 and xi >= head):
        return s
    if (sign < 0 and xi >= tail) or (sign > 0 and xi <= tail):
        return star
    # inside the fan
    u = 2 / (g + 1) * (-sign * a + (g - 1) / 2 * s.u + xi)
    c = 2 / (g + 1) * (a - sign * (g - 1) / 2 * (s.u - xi))
    rho = s.rho * (c / a) ** (2 / (g - 1))
    return PrimitiveState(rho, u, s.p * (c / a) ** (2 * g / (g - 1)))


def profile(left: PrimitiveState, right: PrimitiveState, gamma: float, t: float, positions,
            solution: RiemannSolution | None = None) -> list[PrimitiveState]:
    if not t > 0:
        raise ValueError("time must be positive")
    sol = solution if solution is not None else solve_star(left, right, gamma)
    return [sample(sol, x / t) for x in positions]


def exact_profile(sol: RiemannSolution, t: float, z_index, z_phys, step: int = 0) -> Profile:
    """The exact solution sampled at the given positions, as a :class:`Profile`."""
    states = profile(sol.left, sol.right, sol.gamma, t, z_phys, solution=sol)
    rho = np.array([s.rho for s in states])
    p = np.array([s.p for s in states])
    return Profile(step, np.asarray(z_index), np.asarray(z_phys, dtype=float), rho,
                   np.array([s.u for s in states]), 2 * p / rho, p)


# -- comparison ----------------------------------------------------------------

DEFAULT_SMEAR = 30


def plateau_windows(sol: RiemannSolution, t: float, z_phys, smear: int = DEFAULT_SMEAR) -> list[tuple[int, int]]:
    """Index ranges ``[lo, hi)`` of the two star-region plateaus (either side of the
    contact), with ``smear`` nodes trimmed next to every wave. Equal states give the
    whole domain."""
    z = np.asarray(z_phys, dtype=float)
    if sol.left == sol.right:
        return [(0, len(z))]  # no waves: the whole domain is one plateau
    speeds = sol.wave_speeds()
    contact = 1 if sol.left_wave == "shock" else 2
    bounds = [(speeds[contact - 1] * t, sol.u_star * t), (sol.u_star * t, speeds[contact + 1] * t)]
    windows = []
    for a, b in bounds:
        idx = np.nonzero((z > a) & (z < b))[0]
        if len(idx) > 2 * smear:
            windows.append((int(idx[0]) + smear, int(idx[-1]) + 1 - smear))
    return windows


def detect_plateaus(exact: Profile, smear: int = DEFAULT_SMEAR, rtol: float = 1e-12) -> list[tuple[int, int]]:
    """Plateau windows found from a sampled exact profile: maximal runs of constant state
    that touch neither end of the domain."""
    n = len(exact)
    same = [all(abs(col[k + 1] - col[k]) <= rtol * max(abs(col[k]), 1.0)
                for col in (exact.rho, exact.uz, exact.p)) for k in range(n - 1)]
    runs, start = [], 0
    for k in range(n - 1):
        if not same[k]:
            runs.append((start, k + 1))
            start = k + 1
    runs.append((start, n))
    windows = []
    for lo, hi in runs:
        if lo == 0 or hi == n or hi - lo <= 2 * smear:
            continue
        windows.append((lo + smear, hi - smear))
    return windows


@dataclass
class CompareReport:
    windows: list[tuple[int, int]]
    rho_linf: float
    rho_l1: float
    theta_linf: float
    theta_l1: float
    full_rho_l1: float
    full_theta_l1: float

    @property
    def plateau_linf(self) -> float:
        return max(self.rho_linf, self.theta_linf)

    def lines(self) -> list[str]:
        return [
            f"plateau windows (node index ranges): {self.windows}",
            f"rho   plateau rel Linf {self.rho_linf:.4e}  rel L1 {self.rho_l1:.4e}  full-domain rel L1 {self.full_rho_l1:.4e}",
            f"theta plateau rel Linf {self.theta_linf:.4e}  rel L1 {self.theta_l1:.4e}  full-domain rel L1 {self.full_theta_l1:.4e}",
        ]


def _rel_l1(a, b):
    denom = np.sum(np.abs(b))
    return float(np.sum(np.abs(a - b)) / denom) if denom else 0.0


def compare(sim: Profile, exact: Profile, windows: list[tuple[int, int]]) -> CompareReport:
    """Relative errors of rho and theta on the plateau windows and over the full domain."""
    if len(sim) != len(exact) or not np.allclose(sim.z_phys, exact.z_phys, rtol=0, atol=1e-9):
        raise ValueError("simulation and exact profiles are not sampled at the same positions")
    rl, r1, tl, t1 = 0.0, 0.0, 0.0, 0.0
    if windows:
        idx = np.concatenate([np.arange(lo, hi) for lo, hi in windows])
        rl = float(np.max(np.abs(sim.rho[idx] - exact.rho[idx]) / np.abs(exact.rho[idx])))
        tl = float(np.max(np.abs(sim.theta[idx] - exact.theta[idx]) / np.abs(exact.theta[idx])))
        r1 = _rel_l1(sim.rho[idx], exact.rho[idx])
        t1 = _rel_l1(sim.theta[idx], exact.theta[idx])
    return CompareReport(windows, rl, r1, tl, t1, _rel_l1(sim.rho, exact.rho), _rel_l1(sim.theta, exact.theta))


def primitive_from_macro(rho: float, uz: float, theta: float) -> PrimitiveState:
    return PrimitiveState(rho, uz, 0.5 * rho * theta)
