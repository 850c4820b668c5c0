"""Hyperoctahedral velocity orbits, model representation and the model JSON file."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations, product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .moments import canonical

Generator = tuple[int, ...]

ORBIT_SIZES = {1: (1, 2), 2: (1, 4, 8), 3: (1, 6, 8, 12, 24, 48)}


def _check_dimension(D: int) -> None:
    if D == 4:
        raise ValueError("orbit classes for D = 4 are not implemented (supported: D = 1, 2, 3)")
    if D not in ORBIT_SIZES:
        raise ValueError(f"unsupported dimension {D}; expected 1, 2 or 3")


def orbit(generator: Sequence[int]) -> list[tuple[int, ...]]:
    """All images of ``generator`` under coordinate permutations and sign flips,
    sorted lexicographically."""
    g = tuple(int(x) for x in generator)
    _check_dimension(len(g))
    members = set()
    for perm in set(permutations(g)):
        for signs in product((1, -1), repeat=len(g)):
            members.add(tuple(s * x for s, x in zip(signs, perm)))
    return sorted(members)


def orbit_size(generator: Sequence[int]) -> int:
    """Orbit cardinality: 2^(nonzero count) * D! / prod(multiplicity!)."""
    g = canonical(generator)
    _check_dimension(len(g))
    nonzero = sum(1 for x in g if x != 0)
    perms = math.factorial(len(g))
    for mult in Counter(abs(x) for x in g).values():
        perms //= math.factorial(mult)
    return 2 ** nonzero * perms


@dataclass(frozen=True)
class VelocityGroup:
    generator: Generator
    weight: float

    @property
    def orbit_size(self) -> int:
        return orbit_size(self.generator)


@dataclass(frozen=True)
class ModelSpec:
    """Dimension, accuracy order and orbit generators of a model whose weights are unknown."""

    dimension: int
    order: int
    generators: tuple[Generator, ...]

    def __post_init__(self):
        _check_dimension(self.dimension)
        gens = tuple(canonical(g) for g in self.generators)
        for g in gens:
            if len(g) != self.dimension:
                raise ValueError(f"generator {g} does not have {self.dimension} components")
            if any(x < 0 for x in g):
                raise ValueError(f"generator {g} has negative components")
        dupes = [g for g, n in Counter(gens).items() if n > 1]
        if dupes:
            raise ValueError(f"duplicate generators (same orbit): {dupes}")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def parse(cls, dimension: int, order: int, text: str) -> "ModelSpec":
        """Build from ``"0,0;1,0;1,1"`` style text (semicolon-separated tuples)."""
        gens = []
        for chunk in text.split(";"):
            chunk = chunk.strip().strip("()")
            if not chunk:
                continue
            try:
                gens.append(tuple(int(x) for x in chunk.split(",")))
            except ValueError:
                raise ValueError(f"cannot parse generator {chunk!r}") from None
        return cls(dimension, order, tuple(gens))


@dataclass(frozen=True)
class LatticeModel:
    dimension: int
    order: int
    c: float
    groups: tuple[VelocityGroup, ...] = field(default_factory=tuple)

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not (self.c > 0):
            raise ValueError(f"lattice scale c must be positive, got {self.c}")
        groups = tuple(VelocityGroup(canonical(g.generator), float(g.weight)) for g in self.groups)
        ModelSpec(self.dimension, self.order, tuple(g.generator for g in groups))
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_weights(cls, dimension: int, order: int, c: float,
                     generators: Iterable[Sequence[int]], weights: Iterable[float]) -> "LatticeModel":
        groups = tuple(VelocityGroup(tuple(g), w) for g, w in zip(generators, weights, strict=True))
        return cls(dimension, order, float(c), groups)

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.dimension, self.order, tuple(g.generator for g in self.groups))

    @property
    def weights(self) -> list[float]:
        return [g.weight for g in self.groups]

    @property
    def max_shift(self) -> int:
        return max(max(g.generator) for g in self.groups)

    def to_json(self) -> str:
        doc = {
            "dimension": self.dimension,
            "order": self.order,
            "c": self.c,
            "groups": [{"generator": list(g.generator), "weight": g.weight} for g in self.groups],
        }
        # json writes floats with repr, i.e. shortest round-trip (17 significant digits max)
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LatticeModel":
        doc = json.loads(text)
        try:
            return cls.from_weights(
                int(doc["dimension"]), int(doc["order"]), float(doc["c"]),
                [g["generator"] for g in doc["groups"]],
                [float(g["weight"]) for g in doc["groups"]],
            )
        except KeyError as exc:
            raise ValueError(f"model file is missing key {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LatticeModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def velocity_count(model: ModelSpec | LatticeModel) -> int:
    gens = model.generators if isinstance(model, ModelSpec) else [g.generator for g in model.groups]
    return sum(orbit_size(g) for g in gens)


def build_velocities(model: LatticeModel) -> list[tuple[tuple[float, ...], float, tuple[int, ...]]]:
    """Flattened ``(velocity, weight, integer_shift)`` list; groups in listed order,
    orbit members lexicographic."""
    out = []
    for group in model.groups:
        for shift in orbit(group.generator):
            out.append((tuple(model.c * s for s in shift), group.weight, shift))
    return out


@dataclass(frozen=True)
class VelocitySet:
    """Array view of a model's discrete velocities, used by the equilibrium and the solver kernels."""

    velocities: np.ndarray  # (Q, D) float
    weights: np.ndarray     # (Q,)
    shifts: np.ndarray      # (Q, D) int

    @classmethod
    def from_model(cls, model: LatticeModel) -> "VelocitySet":
        entries = build_velocities(model)
        vel = np.array([e[0] for e in entries], dtype=float).reshape(len(entries), model.dimension)
        w = np.array([e[1] for e in entries], dtype=float)
        shifts = np.array([e[2] for e in entries], dtype=np.int64).reshape(len(entries), model.dimension)
        return cls(vel, w, shifts)

    @property
    def Q(self) -> int:
        return len(self.weights)


# Published fourth-order models: generators, weights and scale as printed (6 significant digits).
D2V33_GENERATORS = ((0, 0), (1, 0), (1, 1), (2, 0), (2, 2), (3, 0), (2, 1), (4, 4))
D2V33_WEIGHTS = (0.161987, 0.143204, 0.0338840, 0.00556112, 8.44799e-5, 0.00113254, 0.0128169, 3.45552e-6)
D2V33_C = 0.819381

D3V95_GENERATORS = ((0, 0, 0), (2, 0, 0), (2, 2, 0), (2, 2, 2), (3, 0, 0), (3, 3, 0), (3, 3, 3),
                    (5, 2, 2), (4, 4, 0), (5, 0, 0))
D3V95_WEIGHTS = (0.206847, 0.00442257, 0.0333341, 0.0128902, 0.0287920, 0.00264319, 0.000927908,
                 0.00106078, 0.000804376, 0.00274697)
D3V95_C = 0.421803

PRESETS = {
    "d2v33": ModelSpec(2, 4, D2V33_GENERATORS),
    "d3v95": ModelSpec(3, 4, D3V95_GENERATORS),
    "d1v3": ModelSpec(1, 2, ((0,), (1,))),
}


def published_model(name: str) -> LatticeModel:
    """The published (rounded) model for ``"d2v33"`` or ``"d3v95"``."""
    if name == "d2v33":
        return LatticeModel.from_weights(2, 4, D2V33_C, D2V33_GENERATORS, D2V33_WEIGHTS)
    if name == "d3v95":
        return LatticeModel.from_weights(3, 4, D3V95_C, D3V95_GENERATORS, D3V95_WEIGHTS)
    raise KeyError(name)


def published_scale(spec: ModelSpec) -> float | None:
    """Printed lattice scale for a spec that matches a published model, else None."""
    for name, c in (("d2v33", D2V33_C), ("d3v95", D3V95_C)):
        ref = PRESETS[name]
        if spec.dimension == ref.dimension and spec.order == ref.order \
                and sorted(spec.generators) == sorted(ref.generators):
            return c
    return None
