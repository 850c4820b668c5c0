import numpy as np
import pytest

from lbforge import kernels
from lbforge.equilibrium import build_projector, discrete_equilibrium
from lbforge.kernels import python_backend
from lbforge.moments import MacroState

compiled = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")
BACKENDS = [python_backend] + ([compiled] if compiled is not None else [])


@pytest.fixture(scope="module")
def setup3d(d3v95):
    proj = build_projector(d3v95)
    vel = np.ascontiguousarray(proj.velocities.velocities)
    return proj, vel, np.ascontiguousarray(proj.feq_matrix), np.ascontiguousarray(proj.basis, dtype=np.int64)


def random_populations(proj, n, seed=0):
    """Near-equilibrium nodes: equilibria of random states plus a small positive perturbation."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        state = MacroState(rng.uniform(0.5, 2), tuple(rng.uniform(-0.2, 0.2, proj.dimension)), rng.uniform(0.8, 1.2))
        feq = discrete_equilibrium(proj, state)
        rows.append(feq * (1 + 0.05 * rng.standard_normal(feq.shape)))
    return np.ascontiguousarray(rows)


def invariants(f, vel):
    return f.sum(axis=1), f @ vel, f @ np.einsum("qd,qd->q", vel, vel)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_collision_invariants_per_node(setup3d, backend):
    proj, vel, mat, basis = setup3d
    f = random_populations(proj, 200)
    before = invariants(f, vel)
    assert backend.collide(f, vel, mat, basis, proj.N, 1.5, 2) == 0
    after = invariants(f, vel)
    scale = np.abs(f).sum(axis=1)
    for a, b in zip(before, after):
        diff = np.abs(a - b)
        if diff.ndim > 1:
            diff = diff.max(axis=1)
        assert np.max(diff / scale) < 1e-13


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_omega_limits(setup3d, backend):
    proj, vel, mat, basis = setup3d
    f0 = random_populations(proj, 20, seed=1)
    f = f0.copy()
    backend.collide(f, vel, mat, basis, proj.N, 0.0, 1)
    assert np.array_equal(f, f0)
    backend.collide(f, vel, mat, basis, proj.N, 1.0, 1)
    rho, u, e = invariants(f0, vel)
    for k in range(len(f0)):
        uk = u[k] / rho[k]
        theta = 2.0 / 3.0 * (e[k] / rho[k] - uk @ uk)
        feq = discrete_equilibrium(proj, MacroState(rho[k], tuple(uk), theta))
        np.testing.assert_allclose(f[k], feq, rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_bad_nodes_are_counted_and_left_alone(setup3d, backend):
    proj, vel, mat, basis = setup3d
    f = random_populations(proj, 5, seed=2)
    f[1] = np.nan
    f[3] = -f[3]
    bad_rows = f[[1, 3]].copy()
    assert backend.collide(f, vel, mat, basis, proj.N, 1.5, 1) == 2
    np.testing.assert_array_equal(f[[1, 3]], bad_rows)


@needs_compiled
def test_collide_backends_agree(setup3d):
    proj, vel, mat, basis = setup3d
    f = random_populations(proj, 300, seed=3)
    g = f.copy()
    python_backend.collide(f, vel, mat, basis, proj.N, 1.5, 1)
    compiled.collide(g, vel, mat, basis, proj.N, 1.5, 4)
    assert np.max(np.abs(f - g) / np.abs(f).max()) < 1e-14


@needs_compiled
def test_collide_thread_count_is_bit_identical(setup3d):
    proj, vel, mat, basis = setup3d
    f = random_populations(proj, 257, seed=4)
    g = f.copy()
    compiled.collide(f, vel, mat, basis, proj.N, 1.5, 1)
    compiled.collide(g, vel, mat, basis, proj.N, 1.5, 3)
    assert np.array_equal(f, g)


def _shifts(rows):
    return np.ascontiguousarray(rows, dtype=np.int64)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_stream_pure_advection(backend):
    rng = np.random.default_rng(5)
    src = np.ascontiguousarray(rng.random((12, 3, 4, 4)))
    dst = np.zeros_like(src)
    shifts = _shifts([(0, 0, 0), (0, 0, 2), (1, -1, 0), (-2, 1, -3)])
    backend.stream(src, dst, shifts, 0, 12, 2)
    for q, (gx, gy, gz) in enumerate(shifts):
        expected = np.roll(src[..., q], (gz, gy, gx), axis=(0, 1, 2))
        np.testing.assert_array_equal(dst[..., q], expected)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_stream_interior_only(backend):
    src = np.ascontiguousarray(np.arange(10 * 2 * 2 * 2, dtype=float).reshape(10, 2, 2, 2))
    dst = np.full_like(src, -1.0)
    backend.stream(src, dst, _shifts([(0, 0, 1), (0, 0, -1)]), 2, 8, 1)
    assert np.all(dst[:2] == -1) and np.all(dst[8:] == -1)
    np.testing.assert_array_equal(dst[2:8, ..., 0], src[1:7, ..., 0])
    np.testing.assert_array_equal(dst[2:8, ..., 1], src[3:9, ..., 1])


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.rsplit(".", 1)[-1])
def test_stream_uniform_field_unchanged(d3v95, backend):
    proj = build_projector(d3v95)
    shifts = _shifts(proj.velocities.shifts)
    src = np.ascontiguousarray(np.broadcast_to(np.arange(proj.velocities.Q, dtype=float), (9, 5, 5, proj.velocities.Q)))
    dst = np.empty_like(src)
    backend.stream(src, dst, shifts, 0, 9, 2)
    np.testing.assert_array_equal(dst, src)


@needs_compiled
def test_stream_backends_agree(d2v33):
    proj = build_projector(d2v33)
    sh = proj.velocities.shifts
    shifts = _shifts([(gx, 0, gz) for gx, gz in sh])
    rng = np.random.default_rng(6)
    src = np.ascontiguousarray(rng.random((30, 1, 7, proj.velocities.Q)))
    a, b = np.zeros_like(src), np.zeros_like(src)
    python_backend.stream(src, a, shifts, 4, 26, 1)
    compiled.stream(src, b, shifts, 4, 26, 3)
    np.testing.assert_array_equal(a, b)


def test_get_backend():
    assert kernels.get_backend("python") is python_backend
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
    if compiled is not None:
        assert kernels.get_backend("compiled") is compiled


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("LBFORGE_THREADS", "3")
    assert kernels.thread_count() == 3
    monkeypatch.setenv("LBFORGE_THREADS", "zero")
    with pytest.raises(ValueError):
        kernels.thread_count()
