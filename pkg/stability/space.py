"""
Finite-dimensional complex normed spaces and seeded sampling.

Vectors are 1-D ``complex128`` numpy arrays whose length is the space
dimension. Sampling draws uniform directions (normalized complex Gaussians)
with norms log-uniform in ``(exclude_origin_below, radius]`` so that samples
cover several dyadic shells.
"""
import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from stability.choices import NormKind
from stability.exceptions import DimensionMismatch, InvalidArity

logger = logging.getLogger(__name__)

CVector = npt.NDArray[np.complex128]

ATOL = 1e-12
RTOL = 1e-9

# Norm floor used when sampling is allowed to reach the origin.
ORIGIN_FLOOR = 2.0 ** -30

_NORM_ORDERS = {
    NormKind.L1: 1,
    NormKind.L2: 2,
    NormKind.LINF: np.inf,
}


def isclose(a: float, b: float, atol: float = ATOL, rtol: float = RTOL) -> bool:
    return abs(a - b) <= atol + rtol * max(abs(a), abs(b))


@dataclass(frozen=True)
class NormedSpace:
    dim: int
    norm_kind: NormKind = NormKind.L2

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DimensionMismatch("Space dimension must be at least 1.")

        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "norm_kind", NormKind(self.norm_kind))

    def check(self, v) -> CVector:
        vector = np.asarray(v, dtype=np.complex128)

        if vector.ndim == 0 and self.dim == 1:
            vector = vector.reshape(1)

        if vector.shape != (self.dim,):
            raise DimensionMismatch(
                f"Expected a vector of length {self.dim}, got shape {vector.shape}."
            )

        return vector

    def vector(self, coords) -> CVector:
        return self.check(coords).copy()

    def zero(self) -> CVector:
        return np.zeros(self.dim, dtype=np.complex128)

    def norm(self, v) -> float:
        return float(np.linalg.norm(self.check(v), ord=_NORM_ORDERS[self.norm_kind]))

    def row_norms(self, rows: np.ndarray) -> np.ndarray:
        return np.linalg.norm(rows, ord=_NORM_ORDERS[self.norm_kind], axis=-1)

    def __str__(self) -> str:
        return f"C^{self.dim} ({self.norm_kind})"


@dataclass(frozen=True)
class SamplePlan:
    seed: int = 0
    count: int = 100
    radius: float = 1.0
    exclude_origin_below: float = 0.0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer.")
        if int(self.count) < 0:
            raise ValueError("count must be nonnegative.")
        if not self.radius > self.exclude_origin_below >= 0:
            raise ValueError("Sample plan needs radius > exclude_origin_below >= 0.")

    @property
    def inner_radius(self) -> float:
        return self.exclude_origin_below or self.radius * ORIGIN_FLOOR


def norm_of(space: NormedSpace, v) -> float:
    return space.norm(v)


def draw_samples(space: NormedSpace, plan: SamplePlan, arity: int = 1) -> list:
    """
    Draw ``plan.count`` points (arity 1) or argument triples (arity 3).

    Identical inputs give bit-identical samples. Sample ``k`` of a triple
    draw uses rows ``3k .. 3k + 2``, so consumers splitting work should
    partition by index instead of sharing a generator.
    """
    if arity not in (1, 3):
        raise InvalidArity(f"Arity must be 1 or 3, got {arity}.")

    rows = plan.count * arity
    if rows == 0:
        return []

    rng = np.random.default_rng(plan.seed)
    gaussian = (
        rng.standard_normal((rows, space.dim))
        + 1j * rng.standard_normal((rows, space.dim))
    )
    directions = gaussian / space.row_norms(gaussian)[:, np.newaxis]

    # u in [0, 1) maps onto radii in (inner, radius].
    ratio = plan.inner_radius / plan.radius
    radii = plan.radius * ratio ** rng.uniform(0.0, 1.0, rows)
    points = directions * radii[:, np.newaxis]

    logger.debug(
        "Drew %d samples of arity %d in %s (seed=%d)",
        plan.count, arity, space, plan.seed,
    )

    if arity == 1:
        return [row.copy() for row in points]

    grouped = points.reshape(plan.count, 3, space.dim)
    return [tuple(row.copy() for row in triple) for triple in grouped]
