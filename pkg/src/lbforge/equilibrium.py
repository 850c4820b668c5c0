"""Discrete equilibria by Gaussian moment projection.

The order-N equilibrium polynomial ``P`` is the unique polynomial of degree <= N whose
moments against the normalized Gaussian match the Maxwellian's moments through order N.
This is the order-N Hermite truncation written in the monomial basis. On a model whose
quadrature is exact to degree 2m >= m + N the discrete populations
``f_i = rho * w_i * P(v_i)`` then carry the same moments.
"""
from __future__ import annotations

import math
import warnings
from fractions import Fraction
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _exact
from .lattice import LatticeModel, VelocitySet
from .moments import MacroState, gaussian_moment, raw_gaussian_moments, sort_key


class NonPhysicalStateWarning(RuntimeWarning):
    pass


def monomial_basis(N: int, D: int) -> list[tuple[int, ...]]:
    """All exponent vectors of order <= N in canonical order; C(N+D, D) of them."""
    basis = [a for a in product(range(N + 1), repeat=D) if sum(a) <= N]
    return sorted(basis, key=sort_key)


@dataclass(frozen=True)
class EquilibriumProjector:
    model: LatticeModel
    N: int
    basis: np.ndarray          # (K, D) int exponents
    gram: np.ndarray           # (K, K) normalized Gaussian moments of v^(a+b)
    gram_inverse: np.ndarray   # (K, K), from the exact rational inverse
    monomials: np.ndarray      # (Q, K) v_i^b
    velocities: VelocitySet

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def feq_matrix(self) -> np.ndarray:
        """``W V G^-1`` so that ``f_eq = rho * (feq_matrix @ t)`` with ``t`` the
        Maxwellian moments per unit density."""
        return self.velocities.weights[:, None] * (self.monomials @ self.gram_inverse)


def build_projector(model: LatticeModel, N: int | None = None) -> EquilibriumProjector:
    if N is None:
        N = model.order
    if N < 0:
        raise ValueError("expansion order must be non-negative")
    if N > model.order:
        raise ValueError(f"expansion order N={N} exceeds model order m={model.order}; "
                         f"the quadrature is only exact to degree {2 * model.order}")
    D = model.dimension
    basis = monomial_basis(N, D)
    gram_exact = [[gaussian_moment(tuple(x + y for x, y in zip(a, b))) for b in basis] for a in basis]
    inv_exact = _exact.inverse(gram_exact)
    gram = np.array([[float(x) for x in row] for row in gram_exact])
    gram_inverse = np.array([[float(x) for x in row] for row in inv_exact])
    vs = VelocitySet.from_model(model)
    exps = np.array(basis, dtype=float).reshape(len(basis), D)
    monomials = np.prod(vs.velocities[:, None, :] ** exps[None, :, :], axis=2)
    return EquilibriumProjector(model, N, np.array(basis, dtype=np.int64).reshape(len(basis), D),
                               gram, gram_inverse, monomials, vs)


def conservative_feq_matrix(proj: EquilibriumProjector) -> np.ndarray:
    """``feq_matrix`` with its mass, momentum and energy rows made exact for the stored
    float velocities and weights.

    A solved model integrates the Gaussian moments only to roughly 1e-14, so
    ``feq_matrix`` shifts the collision invariants by that much on every update. Over
    thousands of steps the bias accumulates linearly. Here the smallest weighted
    correction ``W Phi A`` (Phi = 1, v, |v|^2) removes it in exact arithmetic before
    rounding back to floats.
    """
    D, N = proj.dimension, proj.N
    basis = [tuple(int(x) for x in a) for a in proj.basis]
    vel = _exact.to_fractions(proj.velocities.velocities)
    w = [Fraction(x) for x in proj.velocities.weights]
    mat = _exact.to_fractions(proj.feq_matrix)
    K = len(basis)

    def unit(*ks):
        row = [Fraction(0)] * K
        for k in ks:
            row[basis.index(k)] += 1
        return row

    zero = (0,) * D
    axes = [tuple(int(i == d) for i in range(D)) for d in range(D)]
    phis = [lambda v: Fraction(1)]
    targets = [unit(zero)]
    if N >= 1:
        phis += [lambda v, d=d: v[d] for d in range(D)]
        targets += [unit(a) for a in axes]
    if N >= 2:
        phis.append(lambda v: sum(x * x for x in v))
        targets.append(unit(*(tuple(2 * x for x in a) for a in axes)))
    phi = [[f(v) for f in phis] for v in vel]            # (Q, C)
    C = len(phis)
    gram = [[sum(w[q] * phi[q][i] * phi[q][j] for q in range(len(w))) for j in range(C)] for i in range(C)]
    defect = [[targets[i][b] - sum(phi[q][i] * mat[q][b] for q in range(len(w))) for b in range(K)]
              for i in range(C)]
    A = _exact.matmul(_exact.inverse(gram), defect)     # (C, K)
    out = [[mat[q][b] + w[q] * sum(phi[q][i] * A[i][b] for i in range(C)) for b in range(K)]
           for q in range(len(w))]
    return np.array([[float(x) for x in row] for row in out])


def maxwellian_moments_per_density(proj: EquilibriumProjector, state: MacroState) -> np.ndarray:
    """Maxwellian moments of every basis monomial divided by rho."""
    var = 0.5 * state.theta
    tables = [raw_gaussian_moments(u, var, proj.N) for u in state.u]
    return np.array([math.prod(tables[d][k] for d, k in enumerate(a)) for a in proj.basis])


def equilibrium_coefficients(proj: EquilibriumProjector, state: MacroState) -> np.ndarray:
    """Monomial coefficients ``p`` of the equilibrium polynomial, ``P(v) = sum_b p_b v^b``."""
    state.validate()
    if state.dimension != proj.dimension:
        raise ValueError("state and model dimensions differ")
    return proj.gram_inverse @ maxwellian_moments_per_density(proj, state)


def discrete_equilibrium(proj: EquilibriumProjector, state: MacroState) -> np.ndarray:
    p = equilibrium_coefficients(proj, state)
    return state.rho * proj.velocities.weights * (proj.monomials @ p)


def macro_from_populations(vs: VelocitySet | LatticeModel, f) -> MacroState:
    """Density, velocity and temperature from the first moments of ``f``.

    Raises ``ValueError`` for non-positive density; a non-positive temperature is
    returned with a :class:`NonPhysicalStateWarning`.
    """
    if isinstance(vs, LatticeModel):
        vs = VelocitySet.from_model(vs)
    f = np.asarray(f, dtype=float)
    rho = float(f.sum())
    if not (rho > 0):
        raise ValueError(f"non-positive density {rho}")
    u = f @ vs.velocities / rho
    energy = float(f @ np.einsum("qd,qd->q", vs.velocities, vs.velocities)) / rho
    theta = 2.0 / vs.velocities.shape[1] * (energy - float(u @ u))
    if not (theta > 0):
        warnings.warn(f"non-positive temperature {theta}", NonPhysicalStateWarning, stacklevel=2)
    return MacroState(rho, tuple(u), theta)
