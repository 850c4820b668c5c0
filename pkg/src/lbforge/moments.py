"""Partition counting, moment-constraint enumeration and closed-form Gaussian moments.

All Gaussian quantities use the normalized measure ``exp(-|v|^2) / pi^(D/2)``,
so the zeroth moment is 1 and a discrete model's weights sum to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

MultiIndex = tuple[int, ...]


@dataclass(frozen=True)
class MacroState:
    """Dimensionless macroscopic state at a node: density, flow velocity, temperature."""

    rho: float
    u: tuple[float, ...]
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))

    @property
    def dimension(self) -> int:
        return len(self.u)

    @property
    def pressure(self) -> float:
        # kinetic pressure: trace of the second central moment over D
        return 0.5 * self.rho * self.theta

    def validate(self) -> "MacroState":
        if not (self.rho > 0):
            raise ValueError(f"density must be positive, got {self.rho}")
        if not (self.theta > 0):
            raise ValueError(f"temperature must be positive, got {self.theta}")
        return self


def order(a: Sequence[int]) -> int:
    return sum(a)


def canonical(a: Sequence[int]) -> MultiIndex:
    """Sorted non-increasing form of an exponent vector."""
    return tuple(sorted((int(x) for x in a), reverse=True))


def sort_key(a: Sequence[int]) -> tuple:
    """Total order first, then lexicographically descending."""
    return (sum(a), tuple(-x for x in a))


# -- partitions ---------------------------------------------------------------

def partitions(q: int, max_parts: int | None = None, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield the partitions of ``q`` as non-increasing tuples, largest first part first.

    ``max_parts`` bounds the number of parts and ``max_part`` the size of each part.
    The empty tuple is the single partition of 0.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    if max_part is None:
        max_part = q
    if q == 0:
        yield ()
        return
    if max_parts is not None and max_parts <= 0:
        return
    rest_parts = None if max_parts is None else max_parts - 1
    for first in range(min(q, max_part), 0, -1):
        for rest in partitions(q - first, rest_parts, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _count_largest_at_most(q: int, k: int) -> int:
    # partitions of q with every part <= k
    if q == 0:
        return 1
    if k == 0:
        return 0
    if k > q:
        return _count_largest_at_most(q, q)
    return _count_largest_at_most(q, k - 1) + _count_largest_at_most(q - k, k)


def partition_count(q: int) -> int:
    """Number of partitions of ``q``; ``partition_count(0) == 1``.

    Python integers do not overflow, so no range check is needed.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    return _count_largest_at_most(q, q)


def partition_count_restricted(q: int, D: int) -> int:
    """Partitions of ``q`` into at most ``D`` parts.

    Counted as partitions with largest part at most ``D``; the two are equinumerous
    by conjugating the Ferrers diagram.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    if D < 1:
        raise ValueError("D must be at least 1")
    return _count_largest_at_most(q, D)


def equation_count(m: int, D: int) -> int:
    """Number of independent even-moment constraints for accuracy order ``m`` in ``D`` dimensions."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return sum(partition_count_restricted(q, D) for q in range(m + 1))


def enumerate_constraints(m: int, D: int) -> list[MultiIndex]:
    """Canonical even multi-indices of order <= 2m: every partition of q <= m into
    at most D parts, doubled and zero-padded to length D."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if D not in (1, 2, 3, 4):
        raise ValueError(f"dimension must be 1..4, got {D}")
    out: list[MultiIndex] = []
    for q in range(m + 1):
        level = [tuple(2 * p for p in part) + (0,) * (D - len(part))
                 for part in partitions(q, max_parts=D)]
        out.extend(sorted(level, key=sort_key))
    return out


def all_multi_indices(max_order: int, D: int) -> list[MultiIndex]:
    """Every exponent vector (not just canonical ones) of total order <= max_order."""
    out = [a for a in product(range(max_order + 1), repeat=D) if sum(a) <= max_order]
    return sorted(out, key=sort_key)


# -- Gaussian and Maxwellian moments ------------------------------------------

def double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    return math.prod(range(n, 0, -2))


def gaussian_moment(a: Sequence[int]) -> Fraction:
    """Normalized Gaussian moment of ``v^a``, exact.

    Equals ``prod((a_k - 1)!! / 2^(a_k/2))`` when every exponent is even and zero
    otherwise.
    """
    result = Fraction(1)
    for ak in a:
        if ak < 0:
            raise ValueError("exponents must be non-negative")
        if ak % 2:
            return Fraction(0)
        result *= Fraction(double_factorial(ak - 1), 2 ** (ak // 2))
    return result


def raw_gaussian_moments(mean: float, var: float, kmax: int) -> list[float]:
    """Raw moments ``E[x^k]``, ``k = 0..kmax``, of a 1D normal distribution."""
    mu = [1.0, mean]
    for k in range(2, kmax + 1):
        mu.append(mean * mu[k - 1] + (k - 1) * var * mu[k - 2])
    return mu[: kmax + 1]


def maxwellian_moment(a: Sequence[int], state: MacroState) -> float:
    """Moment ``v^a`` of the Maxwellian with density ``rho``, velocity ``u`` and
    temperature ``theta`` (variance ``theta/2`` per component)."""
    if len(a) != state.dimension:
        raise ValueError("multi-index and state dimensions differ")
    if not (state.theta > 0):
        raise ValueError(f"temperature must be positive, got {state.theta}")
    var = 0.5 * state.theta
    result = state.rho
    for ak, uk in zip(a, state.u):
        result *= raw_gaussian_moments(uk, var, ak)[ak]
    return result
