"""
Test functions f = additive core + perturbation.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from stability.choices import CoreKind, DirectionMode, NormKind, PerturbationKind
from stability.exceptions import DimensionMismatch, SingularPoint
from stability.space import CVector, NormedSpace

logger = logging.getLogger(__name__)

QUANTIZATION_STEP = 2.0 ** -20


def quantize_key(x: CVector, step: float = QUANTIZATION_STEP) -> bytes:
    grid = np.round(np.concatenate([x.real, x.imag]) / step) + 0.0
    return grid.astype(np.float64).tobytes()


def _unit_direction(space: NormedSpace, rng: np.random.Generator) -> CVector:
    gaussian = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return gaussian / space.norm(gaussian)


@lru_cache(maxsize=256)
def _fixed_direction(seed: int, dim: int, norm_kind: NormKind) -> tuple:
    rng = np.random.default_rng([seed, 0])
    return tuple(_unit_direction(NormedSpace(dim, norm_kind), rng))


@dataclass(frozen=True, eq=False)
class AdditiveCore:
    kind: CoreKind
    matrix: np.ndarray

    def __post_init__(self):
        kind = CoreKind(self.kind)
        dtype = np.complex128 if kind == CoreKind.COMPLEX_LINEAR else np.float64
        matrix = np.array(self.matrix, dtype=dtype)
        matrix.setflags(write=False)

        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("Core matrix must be square.")
        if kind == CoreKind.REAL_LINEAR and matrix.shape[0] % 2:
            raise DimensionMismatch("Real-linear cores act on 2d real coordinates.")

        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        if self.kind == CoreKind.REAL_LINEAR:
            return self.matrix.shape[0] // 2
        return self.matrix.shape[0]

    @property
    def scale(self) -> float:
        """Spectral norm of the matrix, used to scale additivity tolerances."""
        return float(np.linalg.norm(self.matrix, 2))

    def __call__(self, x: CVector) -> CVector:
        if self.kind == CoreKind.COMPLEX_LINEAR:
            return self.matrix @ x

        realified = self.matrix @ np.concatenate([x.real, x.imag])
        return realified[:self.dim] + 1j * realified[self.dim:]

    @classmethod
    def identity(cls, dim: int) -> "AdditiveCore":
        return cls(CoreKind.COMPLEX_LINEAR, np.eye(dim, dtype=np.complex128))

    @classmethod
    def random(
        cls,
        dim: int,
        seed: int,
        kind: CoreKind = CoreKind.COMPLEX_LINEAR,
    ) -> "AdditiveCore":
        rng = np.random.default_rng(seed)

        if CoreKind(kind) == CoreKind.REAL_LINEAR:
            return cls(kind, rng.standard_normal((2 * dim, 2 * dim)))

        matrix = (
            rng.standard_normal((dim, dim))
            + 1j * rng.standard_normal((dim, dim))
        )
        return cls(kind, matrix)


@dataclass(frozen=True, eq=False)
class Perturbation:
    """
    Deterministic perturbation p(x).

    - bounded: ``||p(x)|| <= epsilon``
    - power: ``||p(x)|| = theta * ||x|| ** r``
    - tabulated: table lookup on the quantized point, ``default`` otherwise

    Directions are unit vectors in the space norm, hashed from the quantized
    point and ``direction_seed`` (``hashed`` mode) or drawn once from
    ``direction_seed`` (``fixed`` mode).
    """
    kind: PerturbationKind = PerturbationKind.NONE
    epsilon: float = 0.0
    theta: float = 0.0
    r: float = 0.0
    table: Mapping[bytes, CVector] = field(default_factory=dict)
    default: CVector | None = None
    direction_seed: int = 0
    direction_mode: DirectionMode = DirectionMode.HASHED
    quantization_step: float = QUANTIZATION_STEP

    def __post_init__(self):
        object.__setattr__(self, "kind", PerturbationKind(self.kind))
        object.__setattr__(self, "direction_mode", DirectionMode(self.direction_mode))
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))

        if self.epsilon < 0 or self.theta < 0:
            raise ValueError("Perturbation scales must be nonnegative.")

    @classmethod
    def tabulated(
        cls,
        entries: Iterable[tuple],
        default=None,
        step: float = QUANTIZATION_STEP,
    ) -> "Perturbation":
        table = {
            quantize_key(np.asarray(point, dtype=np.complex128), step):
                np.asarray(value, dtype=np.complex128)
            for point, value in entries
        }
        if default is not None:
            default = np.asarray(default, dtype=np.complex128)

        return cls(
            kind=PerturbationKind.TABULATED,
            table=table,
            default=default,
            quantization_step=step,
        )

    def _generator(self, x: CVector) -> np.random.Generator:
        digest = hashlib.blake2b(
            quantize_key(x, self.quantization_step), digest_size=8
        ).digest()
        return np.random.default_rng(
            [self.direction_seed, int.from_bytes(digest, "little")]
        )

    def _direction(self, space: NormedSpace, rng: np.random.Generator) -> CVector:
        if self.direction_mode == DirectionMode.FIXED:
            return np.array(
                _fixed_direction(self.direction_seed, space.dim, space.norm_kind)
            )
        return _unit_direction(space, rng)

    def __call__(self, space: NormedSpace, x: CVector) -> CVector:
        if self.kind == PerturbationKind.NONE:
            return space.zero()

        if self.kind == PerturbationKind.TABULATED:
            value = self.table.get(quantize_key(x, self.quantization_step))
            if value is None:
                value = self.default if self.default is not None else space.zero()
            return space.vector(value)

        rng = self._generator(x)
        direction = self._direction(space, rng)

        if self.kind == PerturbationKind.BOUNDED:
            return self.epsilon * rng.uniform(0.0, 1.0) * direction

        size = space.norm(x)
        if size == 0.0:
            if self.r > 0:
                return space.zero()
            if self.r < 0:
                raise SingularPoint("Power perturbation with r < 0 at the origin.")
            return self.theta * direction

        return self.theta * size ** self.r * direction


@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False

    space: NormedSpace
    core: AdditiveCore
    perturbation: Perturbation = field(default_factory=Perturbation)
    force_zero_at_origin: bool = False

    def __post_init__(self):
        if self.core.dim != self.space.dim:
            raise DimensionMismatch(
                f"Core acts on C^{self.core.dim}, space is C^{self.space.dim}."
            )

    def __call__(self, x) -> CVector:
        return evaluate(self, x)


def evaluate(f: TestFunction, x) -> CVector:
    x = f.space.check(x)

    if f.force_zero_at_origin and not np.any(x):
        return f.space.zero()

    return f.core(x) + f.perturbation(f.space, x)


def additivity_defect(f: TestFunction, x, y) -> float:
    x = f.space.check(x)
    y = f.space.check(y)
    return f.space.norm(f(x + y) - f(x) - f(y))


def constant_offset(space: NormedSpace, offset) -> TestFunction:
    """f(x) = x + offset, the constant-offset model."""
    default = np.broadcast_to(
        np.asarray(offset, dtype=np.complex128), (space.dim,)
    )
    return TestFunction(
        space=space,
        core=AdditiveCore.identity(space.dim),
        perturbation=Perturbation.tabulated((), default=default),
    )


def power_perturbed(
    space: NormedSpace,
    theta: float,
    r: float,
    core: AdditiveCore | None = None,
    direction_seed: int = 0,
    direction_mode: DirectionMode = DirectionMode.HASHED,
) -> TestFunction:
    return TestFunction(
        space=space,
        core=core or AdditiveCore.identity(space.dim),
        perturbation=Perturbation(
            kind=PerturbationKind.POWER,
            theta=theta,
            r=r,
            direction_seed=direction_seed,
            direction_mode=direction_mode,
        ),
    )


def bounded_perturbed(
    space: NormedSpace,
    epsilon: float,
    core: AdditiveCore | None = None,
    direction_seed: int = 0,
) -> TestFunction:
    return TestFunction(
        space=space,
        core=core or AdditiveCore.identity(space.dim),
        perturbation=Perturbation(
            kind=PerturbationKind.BOUNDED,
            epsilon=epsilon,
            direction_seed=direction_seed,
        ),
    )
