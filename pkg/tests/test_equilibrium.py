from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lbforge.equilibrium import (NonPhysicalStateWarning, build_projector, conservative_feq_matrix, discrete_equilibrium,
                                 equilibrium_coefficients, macro_from_populations, monomial_basis)
from lbforge.lattice import PRESETS, VelocitySet
from lbforge.moments import MacroState, all_multi_indices, maxwellian_moment
from lbforge.solver import solve


@pytest.fixture(scope="module")
def d1v3():
    return solve(PRESETS["d1v3"]).solutions[0].model


@pytest.fixture(scope="module")
def projectors(d2v33, d3v95):
    return {"d2v33": build_projector(d2v33), "d3v95": build_projector(d3v95)}


def test_gram_matrix_1d(d1v3):
    proj = build_projector(d1v3, 2)
    assert [tuple(b) for b in proj.basis] == [(0,), (1,), (2,)]
    assert np.array_equal(proj.gram, [[1, 0, 0.5], [0, 0.5, 0], [0.5, 0, 0.75]])
    assert np.allclose(proj.gram_inverse @ proj.gram, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("u, theta", [(0.0, 1.0), (0.2, 0.9), (-0.3, 1.3)])
def test_coefficients_1d_closed_form(d1v3, u, theta):
    proj = build_projector(d1v3, 2)
    p = equilibrium_coefficients(proj, MacroState(1.0, (u,), theta))
    expected = [1 - u * u - (theta - 1) / 2, 2 * u, 2 * u * u + theta - 1]
    assert p == pytest.approx(expected, abs=1e-14)


def test_order_zero_projection_is_constant(d3v95):
    proj = build_projector(d3v95, 0)
    p = equilibrium_coefficients(proj, MacroState(2.0, (0.1, -0.2, 0.05), 1.2))
    assert p == pytest.approx([1.0])


def test_basis_sizes(projectors):
    assert projectors["d3v95"].basis.shape == (35, 3)
    assert projectors["d2v33"].basis.shape == (15, 2)
    assert len(monomial_basis(4, 3)) == 35


def test_gram_inverse_identity(projectors):
    for proj in projectors.values():
        assert np.allclose(proj.gram_inverse @ proj.gram, np.eye(len(proj.basis)), atol=1e-12)
        assert np.array_equal(proj.gram, proj.gram.T)
        assert np.all(np.linalg.eigvalsh(proj.gram) > 0)


def test_expansion_order_above_model_order_rejected(d2v33):
    with pytest.raises(ValueError, match="exceeds"):
        build_projector(d2v33, 5)


@pytest.mark.parametrize("name", ["d2v33", "d3v95"])
def test_rest_state_identity(projectors, name):
    proj = projectors[name]
    D = proj.dimension
    p = equilibrium_coefficients(proj, MacroState(1.0, (0.0,) * D, 1.0))
    assert p[0] == pytest.approx(1.0, abs=1e-14) and np.abs(p[1:]).max() < 1e-14
    f = discrete_equilibrium(proj, MacroState(4.0, (0.0,) * D, 1.0))
    assert f == pytest.approx(4.0 * proj.velocities.weights, rel=1e-13, abs=1e-16)


def _state(draw_u, D, theta, rho):
    return MacroState(rho, tuple(draw_u[:D]), theta)


states = st.tuples(st.lists(st.floats(-0.28, 0.28), min_size=3, max_size=3),
                   st.floats(0.5, 1.5), st.floats(0.3, 3.0))


@settings(max_examples=40, deadline=None)
@given(states)
@pytest.mark.parametrize("name", ["d2v33", "d3v95"])
def test_moment_contract(projectors, name, params):
    u, theta, rho = params
    proj = projectors[name]
    state = _state(u, proj.dimension, theta, rho)
    f = discrete_equilibrium(proj, state)
    v = proj.velocities.velocities
    for a in all_multi_indices(proj.N, proj.dimension):
        disc = float(np.sum(f * np.prod(v ** np.array(a, float), axis=1)))
        ref = maxwellian_moment(a, state)
        assert disc == pytest.approx(ref, rel=1e-10, abs=1e-12 * rho)


@settings(max_examples=30, deadline=None)
@given(states)
def test_low_moments_and_mass(projectors, params):
    u, theta, rho = params
    proj = projectors["d3v95"]
    state = _state(u, 3, theta, rho)
    f = discrete_equilibrium(proj, state)
    v = proj.velocities.velocities
    assert f.sum() == pytest.approx(rho, rel=1e-13)
    assert f @ v == pytest.approx(rho * np.array(state.u), abs=1e-13 * rho)
    energy = f @ np.einsum("qd,qd->q", v, v)
    assert energy == pytest.approx(rho * (np.dot(state.u, state.u) + 1.5 * theta), rel=1e-12)
    # mass of P against the normalized Gaussian
    p = equilibrium_coefficients(proj, state)
    assert proj.gram[0] @ p == pytest.approx(1.0, rel=1e-13)


def test_projection_idempotence(projectors):
    proj = projectors["d3v95"]
    p = equilibrium_coefficients(proj, MacroState(1.3, (0.2, -0.1, 0.25), 0.85))
    again = proj.gram_inverse @ (proj.gram @ p)
    assert np.abs(again - p).max() < 1e-12


@pytest.mark.parametrize("name", ["d2v33", "d3v95"])
def test_galilean_reflection(projectors, name):
    proj = projectors[name]
    D = proj.dimension
    u = np.array([0.21, -0.13, 0.27][:D])
    shifts = [tuple(s) for s in proj.velocities.shifts]
    opposite = [shifts.index(tuple(-x for x in s)) for s in shifts]
    f_plus = discrete_equilibrium(proj, MacroState(1.1, tuple(u), 1.05))
    f_minus = discrete_equilibrium(proj, MacroState(1.1, tuple(-u), 1.05))
    assert np.abs(f_minus - f_plus[opposite]).max() < 1e-12


def test_macro_roundtrip(projectors, d3v95):
    proj = projectors["d3v95"]
    st0 = macro_from_populations(d3v95, discrete_equilibrium(proj, MacroState(4.0, (0, 0, 0), 1.0)))
    assert st0.rho == pytest.approx(4.0, abs=1e-12) and np.abs(st0.u).max() < 1e-12
    assert st0.theta == pytest.approx(1.0, abs=1e-12)
    st1 = macro_from_populations(VelocitySet.from_model(d3v95),
                                 discrete_equilibrium(proj, MacroState(1.0, (0, 0, 0.2), 1.1)))
    assert st1.rho == pytest.approx(1.0, abs=1e-10)
    assert st1.u == pytest.approx((0, 0, 0.2), abs=1e-10)
    assert st1.theta == pytest.approx(1.1, abs=1e-10)


def test_macro_rejects_zero_populations(d3v95):
    with pytest.raises(ValueError):
        macro_from_populations(d3v95, np.zeros(95))


def test_macro_flags_nonpositive_temperature(d1v3):
    # one moving population with small negative neighbours: |u|^2 exceeds the mean energy
    f = np.array([-1e-3, 1.0, -1e-3])
    with pytest.warns(NonPhysicalStateWarning):
        state = macro_from_populations(d1v3, f)
    assert state.theta <= 0


@pytest.mark.parametrize("name", ["d2v33", "d3v95"])
def test_conservative_matrix_fixes_invariant_rows(solved_models, name):
    proj = build_projector(solved_models[name])
    raw, fixed = proj.feq_matrix, conservative_feq_matrix(proj)
    assert np.max(np.abs(fixed - raw)) < 1e-14
    v = proj.velocities.velocities
    D = proj.dimension
    basis = [tuple(a) for a in proj.basis]
    target = np.zeros((D + 2, len(basis)))
    target[0, basis.index((0,) * D)] = 1
    for d in range(D):
        e = tuple(int(i == d) for i in range(D))
        target[1 + d, basis.index(e)] = 1
        target[D + 1, basis.index(tuple(2 * x for x in e))] = 1
    phi = [[Fraction(1)] + [Fraction(x) for x in row] + [sum(Fraction(x) ** 2 for x in row)] for row in v]

    def defect(mat):
        # exact sums over the float entries; only the final rounding of the matrix remains
        return max(abs(sum(phi[q][i] * Fraction(mat[q, b]) for q in range(len(phi))) - Fraction(target[i, b]))
                   for i in range(D + 2) for b in range(len(basis)))

    assert defect(fixed) < 1e-15
    assert defect(raw) > 1e-15
