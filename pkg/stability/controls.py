"""
Control functions phi(x, y, z) bounding the inequality defect.
"""
from dataclasses import dataclass

import numpy as np

from stability.choices import ControlKind
from stability.exceptions import ControlKindError, SingularPoint
from stability.space import NormedSpace


@dataclass(frozen=True, eq=False)
class ControlFunction:
    """
    A nonnegative control phi.

    ``power`` evaluates ``theta * (||x||**r + ||y||**r + ||z||**r)``, zero
    arguments contributing nothing. ``tabulated`` and ``measured`` look up
    the largest argument norm in a shell table: ``values[k]`` covers
    ``(edges[k], edges[k + 1]]``. Measured controls extrapolate outside the
    table as ``v * (t / edge) ** max(r, 0)`` from the outermost shells;
    tabulated controls are undefined there.
    """
    kind: ControlKind = ControlKind.ZERO
    theta: float = 0.0
    r: float = 0.0
    edges: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        kind = ControlKind(self.kind)
        object.__setattr__(self, "kind", kind)

        if self.theta < 0:
            raise ValueError("theta must be nonnegative.")

        if kind in (ControlKind.TABULATED, ControlKind.MEASURED):
            edges = np.array(self.edges, dtype=np.float64)
            values = np.array(self.values, dtype=np.float64)

            if edges.ndim != 1 or len(edges) != len(values) + 1 or len(values) < 1:
                raise ValueError("A shell table needs len(edges) == len(values) + 1.")
            if np.any(np.diff(edges) <= 0) or edges[0] <= 0:
                raise ValueError("Shell edges must be positive and increasing.")
            if np.any(values < 0):
                raise ValueError("Shell values must be nonnegative.")

            edges.setflags(write=False)
            values.setflags(write=False)
            object.__setattr__(self, "edges", edges)
            object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> "ControlFunction":
        return cls()

    @classmethod
    def power(cls, theta: float, r: float) -> "ControlFunction":
        return cls(ControlKind.POWER, theta=theta, r=r)

    @classmethod
    def tabulated(cls, edges, values) -> "ControlFunction":
        return cls(ControlKind.TABULATED, edges=edges, values=values)

    @classmethod
    def measured(cls, edges, values, theta: float, r: float) -> "ControlFunction":
        return cls(ControlKind.MEASURED, theta=theta, r=r, edges=edges, values=values)

    @property
    def exponent(self) -> float | None:
        """Growth exponent of the control away from its table, if it has one."""
        if self.kind == ControlKind.POWER:
            return self.r
        if self.kind == ControlKind.MEASURED:
            return max(self.r, 0.0)
        return None

    def covers(self, scale: float) -> bool:
        if self.kind in (ControlKind.ZERO, ControlKind.POWER):
            return True
        return scale == 0.0 or self.edges[0] < scale <= self.edges[-1]

    def shell_value(self, scale: float) -> float:
        if scale == 0.0:
            return 0.0

        if self.edges[0] < scale <= self.edges[-1]:
            index = int(np.searchsorted(self.edges, scale, side="left")) - 1
            return float(self.values[min(max(index, 0), len(self.values) - 1)])

        if self.kind == ControlKind.TABULATED:
            raise ControlKindError(
                f"Tabulated control does not cover norm {scale!r}."
            )

        if scale > self.edges[-1]:
            return float(self.values[-1] * (scale / self.edges[-1]) ** self.exponent)
        return float(self.values[0] * (scale / self.edges[0]) ** self.exponent)

    def at_norms(self, *norms: float) -> float:
        if self.kind == ControlKind.ZERO:
            return 0.0

        if self.kind == ControlKind.POWER:
            if self.r < 0 and min(norms) == 0.0:
                raise SingularPoint("Power control with r < 0 at a zero argument.")
            return self.theta * sum(n ** self.r for n in norms if n > 0)

        return self.shell_value(max(norms))

    def __call__(self, space: NormedSpace, x, y, z) -> float:
        return self.at_norms(space.norm(x), space.norm(y), space.norm(z))

    def describe(self) -> dict:
        description = {"kind": str(self.kind)}

        if self.kind in (ControlKind.POWER, ControlKind.MEASURED):
            description.update(theta=self.theta, r=self.r)
        if self.kind in (ControlKind.TABULATED, ControlKind.MEASURED):
            description.update(
                edges=[float(edge) for edge in self.edges],
                values=[float(value) for value in self.values],
            )

        return description
