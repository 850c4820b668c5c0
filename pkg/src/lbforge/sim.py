"""BGK lattice Boltzmann shock tube on a rectangular on-lattice grid.

Lattice units: one time step per update and node spacing ``c``, so velocity ``c * g``
moves exactly ``g`` nodes per step. The tube runs along the last velocity axis (z);
transverse axes are periodic. The z ends carry ghost slabs, as deep as the largest
shift, held at the left/right boundary equilibria.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .kernels import python_backend as python_kernels
from .equilibrium import EquilibriumProjector, build_projector, conservative_feq_matrix
from .lattice import LatticeModel
from .moments import MacroState
from .profiles import Profile

log = logging.getLogger(__name__)

DEFAULT_STEPS = 120


class SimulationBlowup(RuntimeError):
    def __init__(self, message: str, step: int, node: tuple[int, int, int] | None, last_good: Profile | None):
        super().__init__(message)
        self.step = step
        self.node = node
        self.last_good = last_good


@dataclass
class ScenarioConfig:
    model: LatticeModel | str | Path
    omega: float = 1.5
    steps: int = DEFAULT_STEPS
    left: MacroState | None = None
    right: MacroState | None = None
    nx: int = 11
    ny: int = 11
    nz: int = 800
    snapshot_every: int = 0           # 0: initial and final profile only
    z_boundary: str = "equilibrium"  # or "periodic"
    backend: str | None = None
    threads: int | None = None

    def __post_init__(self):
        if not isinstance(self.model, LatticeModel):
            self.model = LatticeModel.load(self.model)
        D = self.model.dimension
        if D not in (2, 3):
            raise ValueError(f"the shock tube needs a 2D or 3D model, got D = {D}")
        if self.left is None:
            self.left = MacroState(4.0, (0.0,) * D, 1.0)
        if self.right is None:
            self.right = MacroState(1.0, (0.0,) * D, 1.0)
        for s in (self.left, self.right):
            s.validate()
            if s.dimension != D:
                raise ValueError("boundary state dimension does not match the model")
        if not (0.0 < self.omega < 2.0):
            raise ValueError(f"omega must lie in (0, 2), got {self.omega}")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.z_boundary not in ("equilibrium", "periodic"):
            raise ValueError(f"unknown z boundary {self.z_boundary!r}")
        if D == 2:
            self.ny = 1
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("grid dimensions must be positive")
        if self.z_boundary == "equilibrium" and self.nz < 2 * self.model.max_shift:
            raise ValueError(f"nz must be at least twice the largest shift ({self.model.max_shift})")


@dataclass
class RunResult:
    snapshots: list[Profile]
    seconds: float
    steps: int
    stats: dict = field(default_factory=dict)


class ShockTube:
    """Two-buffer population field plus the collide/stream update."""

    def __init__(self, config: ScenarioConfig, projector: EquilibriumProjector | None = None):
        self.config = config
        self.model = config.model
        self.proj = projector if projector is not None else build_projector(self.model)
        self.kernels = kernels.get_backend(config.backend)
        self.threads = config.threads or kernels.thread_count()

        vs = self.proj.velocities
        self.Q = vs.Q
        self.velocities = np.ascontiguousarray(vs.velocities)
        # invariant-exact rows keep mass, momentum and energy from drifting over long runs
        self.feq_matrix = np.ascontiguousarray(conservative_feq_matrix(self.proj))
        self.basis = np.ascontiguousarray(self.proj.basis, dtype=np.int64)
        # (gx, gy, gz) per velocity; a 2D model has no y axis
        shifts = np.zeros((self.Q, 3), dtype=np.int64)
        if self.model.dimension == 3:
            shifts[:] = vs.shifts
        else:
            shifts[:, 0] = vs.shifts[:, 0]
            shifts[:, 2] = vs.shifts[:, 1]
        self.shifts = shifts

        self.ghost = 0 if config.z_boundary == "periodic" else self.model.max_shift
        self.zlo = self.ghost
        self.zhi = self.ghost + config.nz
        self.shape = (config.nz + 2 * self.ghost, config.ny, config.nx, self.Q)
        self.feq_left = self.equilibrium(config.left)
        self.feq_right = self.equilibrium(config.right)
        self.f = np.empty(self.shape)
        self._tmp = np.empty(self.shape)
        self.step_count = 0
        self.initialize()

    @property
    def dx(self) -> float:
        return self.model.c

    @property
    def interior(self) -> np.ndarray:
        return self.f[self.zlo:self.zhi]

    def initialize(self) -> None:
        """Left half (z_index <= nz/2) at the left equilibrium, the rest at the right one."""
        half = self.zlo + self.config.nz // 2
        self.f[:half] = self.feq_left
        self.f[half:] = self.feq_right
        self.step_count = 0

    def equilibrium(self, state: MacroState) -> np.ndarray:
        """Equilibrium populations of one state, as the collision kernel computes them."""
        u = np.asarray(state.u, dtype=float)[None, :]
        return python_kernels.equilibrium(np.array([state.rho]), u, np.array([state.theta]),
                                          self.feq_matrix, self.basis, self.proj.N)[0]

    def set_macro(self, rho, u, theta) -> None:
        """Fill the interior with equilibria of the given fields, shaped (nz, ny, nx) and
        (nz, ny, nx, D) for ``u``."""
        cfg = self.config
        n = cfg.nz * cfg.ny * cfg.nx
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (cfg.nz, cfg.ny, cfg.nx)).reshape(n)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), (cfg.nz, cfg.ny, cfg.nx)).reshape(n)
        u = np.broadcast_to(np.asarray(u, dtype=float),
                            (cfg.nz, cfg.ny, cfg.nx, self.model.dimension)).reshape(n, -1)
        feq = python_kernels.equilibrium(rho, u, theta, self.feq_matrix, self.basis, self.proj.N)
        self.f[self.zlo:self.zhi] = feq.reshape(cfg.nz, cfg.ny, cfg.nx, self.Q)

    def collide(self) -> None:
        slab = self.f[self.zlo:self.zhi].reshape(-1, self.Q)
        bad = self.kernels.collide(slab, self.velocities, self.feq_matrix, self.basis,
                                   self.proj.N, float(self.config.omega), self.threads)
        if bad:
            node = self._first_bad_node()
            raise SimulationBlowup(f"non-finite or non-positive state at step {self.step_count}, "
                                   f"node (x, y, z_index) = {node}", self.step_count, node, None)

    def _first_bad_node(self):
        rho = self.interior.sum(axis=3)
        bad = ~(np.isfinite(rho) & (rho > 0))
        if not bad.any():
            return None
        z, y, x = np.argwhere(bad)[0]
        return int(x), int(y), int(z) + 1

    def stream(self) -> None:
        # interior nodes pull at most `ghost` slabs away, so ghosts are only read, never wrapped
        self.kernels.stream(self.f, self._tmp, self.shifts, self.zlo, self.zhi, self.threads)
        self.f, self._tmp = self._tmp, self.f
        if self.ghost:
            self.f[:self.zlo] = self.feq_left
            self.f[self.zhi:] = self.feq_right

    def step(self) -> None:
        self.collide()
        self.stream()
        self.step_count += 1

    def node_macro(self, f: np.ndarray):
        """rho, u (n, D) and theta for a stack of nodes ``f`` of shape (n, Q)."""
        rho = f.sum(axis=1)
        u = (f @ self.velocities) / rho[:, None]
        energy = f @ np.einsum("qd,qd->q", self.velocities, self.velocities) / rho
        theta = 2.0 / self.model.dimension * (energy - np.einsum("nd,nd->n", u, u))
        return rho, u, theta

    def extract_profile(self) -> Profile:
        cfg = self.config
        column = self.f[self.zlo:self.zhi, cfg.ny // 2, cfg.nx // 2, :]
        rho, u, theta = self.node_macro(column)
        z_index = np.arange(1, cfg.nz + 1)
        z_phys = (z_index - (cfg.nz + 1) / 2.0) * self.dx
        return Profile(self.step_count, z_index, z_phys, rho, u[:, -1].copy(), theta, 0.5 * rho * theta)

    def totals(self) -> tuple[float, np.ndarray, float]:
        """Interior mass, momentum vector and energy (sum of f |v|^2), summed in a fixed order."""
        f = self.interior.reshape(-1, self.Q)
        per_q = f.sum(axis=0)
        vsq = np.einsum("qd,qd->q", self.velocities, self.velocities)
        return float(per_q.sum()), per_q @ self.velocities, float(per_q @ vsq)

    def run(self) -> RunResult:
        cfg = self.config
        start = time.perf_counter()
        snapshots = [self.extract_profile()]
        while self.step_count < cfg.steps:
            try:
                self.step()
            except SimulationBlowup as exc:
                exc.last_good = snapshots[-1]
                raise
            every = cfg.snapshot_every
            if (every and self.step_count % every == 0) or self.step_count == cfg.steps:
                prof = self.extract_profile()
                if not np.all(np.isfinite(prof.rho)):
                    raise SimulationBlowup(f"non-finite profile at step {self.step_count}",
                                           self.step_count, None, snapshots[-1])
                if prof.step != snapshots[-1].step:
                    snapshots.append(prof)
        elapsed = time.perf_counter() - start
        nodes = cfg.nx * cfg.ny * cfg.nz
        stats = {
            "backend": "compiled" if self.kernels is kernels.compiled_backend else "python",
            "threads": self.threads,
            "node_updates_per_second": nodes * cfg.steps / elapsed if elapsed > 0 else float("inf"),
        }
        if self.ghost:
            self._check_wave_reach(snapshots[-1])
        return RunResult(snapshots, elapsed, cfg.steps, stats)

    def _check_wave_reach(self, prof: Profile) -> None:
        # disturbances must stay at least a ghost depth away from the z ends
        edge = self.ghost
        left_dev = np.abs(prof.rho[:edge] - self.config.left.rho) / self.config.left.rho
        right_dev = np.abs(prof.rho[-edge:] - self.config.right.rho) / self.config.right.rho
        if left_dev.max() > 1e-6 or right_dev.max() > 1e-6:
            msg = (f"waves reached the z boundaries by step {prof.step}; "
                   f"reduce steps or enlarge nz for a clean Riemann comparison")
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            log.warning(msg)


def run(config: ScenarioConfig) -> RunResult:
    return ShockTube(config).run()
