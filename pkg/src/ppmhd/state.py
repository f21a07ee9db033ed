"""Conserved/primitive state algebra, equation of state and the structured grid.

All point-wise functions take arrays whose leading axis holds the eight
components, so the same call works for a single state ``(8,)`` and for a
whole field ``(8, nx, ny, ...)``.

Conserved layout::

    q = (rho, rho*ux, rho*uy, rho*uz, E, Bx, By, Bz)

Primitive layout::

    w = (rho, ux, uy, uz, p, Bx, By, Bz)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

RHO, MX, MY, MZ, EN, BX, BY, BZ = range(8)
NVAR = 8
GAMMA = 5.0 / 3.0
NGHOST = 4

# smallest value counted as "positive" when checking raw states
ADMISSIBLE_FLOOR = 1e-300


class InadmissibleStateError(ValueError):
    """Raised when a state without positive density is converted."""


def pressure(q, gamma: float = GAMMA):
    """Gas pressure of conserved state(s); may be negative."""
    q = np.asarray(q, dtype=float)
    rho = q[RHO]
    if np.any(rho == 0.0):
        raise InadmissibleStateError("pressure undefined for zero density")
    kinetic = 0.5 * (q[MX] ** 2 + q[MY] ** 2 + q[MZ] ** 2) / rho
    magnetic = 0.5 * (q[BX] ** 2 + q[BY] ** 2 + q[BZ] ** 2)
    return (gamma - 1.0) * (q[EN] - kinetic - magnetic)


def to_primitive(q, gamma: float = GAMMA) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if np.any(q[RHO] <= 0.0):
        raise InadmissibleStateError("non-positive density in to_primitive")
    w = np.empty_like(q)
    w[RHO] = q[RHO]
    w[MX:MZ + 1] = q[MX:MZ + 1] / q[RHO]
    w[EN] = pressure(q, gamma)
    w[BX:] = q[BX:]
    return w


def to_conserved(w, gamma: float = GAMMA) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    q = np.empty_like(w)
    rho = w[RHO]
    q[RHO] = rho
    q[MX:MZ + 1] = rho * w[MX:MZ + 1]
    u2 = w[MX] ** 2 + w[MY] ** 2 + w[MZ] ** 2
    b2 = w[BX] ** 2 + w[BY] ** 2 + w[BZ] ** 2
    q[EN] = w[EN] / (gamma - 1.0) + 0.5 * rho * u2 + 0.5 * b2
    q[BX:] = w[BX:]
    return q


def is_admissible(q, gamma: float = GAMMA) -> bool:
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        return False
    if np.any(q[RHO] < ADMISSIBLE_FLOOR):
        return False
    return bool(np.all(pressure(q, gamma) >= ADMISSIBLE_FLOOR))


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid with a ghost layer of width ``ghost``.

    Point ``j`` of axis ``d`` sits at ``lo[d] + (j + 0.5) * dx[d]``.
    """

    n: tuple[int, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    ghost: int = NGHOST

    def __post_init__(self):
        if not (len(self.n) == len(self.lo) == len(self.hi)) or not 1 <= len(self.n) <= 3:
            raise ValueError("n, lo, hi must have matching length 1..3")
        if any(k < 1 for k in self.n):
            raise ValueError(f"invalid mesh {self.n}")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("domain bounds must satisfy lo < hi")
        if self.ghost < 4:
            raise ValueError("ghost width must be at least 4")
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))

    @property
    def dims(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((h - l) / k for l, h, k in zip(self.lo, self.hi, self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        """Padded shape including ghosts."""
        return tuple(k + 2 * self.ghost for k in self.n)

    @property
    def interior(self) -> tuple[slice, ...]:
        g = self.ghost
        return tuple(slice(g, g + k) for k in self.n)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def measure(self) -> float:
        return float(np.prod([h - l for l, h in zip(self.lo, self.hi)]))

    def axis_coords(self, d: int, ghosts: bool = True) -> np.ndarray:
        g = self.ghost if ghosts else 0
        j = np.arange(-g, self.n[d] + g)
        return self.lo[d] + (j + 0.5) * self.dx[d]

    def coords(self, ghosts: bool = True) -> list[np.ndarray]:
        """Broadcast-ready coordinate arrays (``indexing='ij'``)."""
        axes = [self.axis_coords(d, ghosts) for d in range(self.dims)]
        return list(np.meshgrid(*axes, indexing="ij"))


PERIODIC = "periodic"
OUTFLOW = "outflow"
CUSTOM = "custom"


def _at(axis: int, ndim: int, k: int):
    idx = [slice(None)] * ndim
    idx[axis] = k
    return tuple(idx)


def fill_axis(data: np.ndarray, axis: int, rule: str, g: int, extrapolate: str = "constant") -> None:
    """Fill both ghost slabs of ``axis`` (array axis, counting the component axis).

    ``extrapolate='linear'`` keeps the boundary gradient instead of the value;
    it is used for potentials whose curl must stay continuous across outflow
    boundaries.
    """
    n = data.shape[axis] - 2 * g
    nd = data.ndim
    if rule == PERIODIC:
        for k in range(g):
            data[_at(axis, nd, k)] = data[_at(axis, nd, n + k)]
            data[_at(axis, nd, g + n + k)] = data[_at(axis, nd, g + k)]
    elif rule == OUTFLOW:
        first = data[_at(axis, nd, g)]
        last = data[_at(axis, nd, g + n - 1)]
        if extrapolate == "linear" and n > 1:
            d_lo = data[_at(axis, nd, g + 1)] - first
            d_hi = last - data[_at(axis, nd, g + n - 2)]
            for k in range(1, g + 1):
                data[_at(axis, nd, g - k)] = first - k * d_lo
                data[_at(axis, nd, g + n - 1 + k)] = last + k * d_hi
        else:
            for k in range(g):
                data[_at(axis, nd, k)] = first
                data[_at(axis, nd, g + n + k)] = last
    elif rule == CUSTOM:
        pass
    else:
        raise ValueError(f"unknown boundary rule {rule!r}")


@dataclass
class Boundary:
    """Per-axis boundary rules plus an optional time-dependent filler.

    ``rules[d]`` is ``"periodic"``, ``"outflow"`` or ``"custom"``.  Custom axes
    are filled by ``custom(data, grid, t, kind)`` after the standard axes, where
    ``kind`` is ``"state"`` or ``"potential"``.
    """

    rules: Sequence[str]
    custom: Callable | None = None

    def fill(self, data: np.ndarray, grid: Grid, t: float = 0.0, kind: str = "state") -> None:
        g = grid.ghost
        mode = "linear" if kind == "potential" else "constant"
        for d, rule in enumerate(self.rules):
            fill_axis(data, d + 1, rule, g, extrapolate=mode)
        if self.custom is not None and CUSTOM in self.rules:
            self.custom(data, grid, t, kind)


@dataclass
class FieldArray:
    """Conserved variables on a padded grid, shape ``(8, *grid.shape)``."""

    grid: Grid
    data: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.data is None:
            self.data = np.zeros((NVAR,) + self.grid.shape)
        if self.data.shape != (NVAR,) + self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} does not match grid {self.grid.shape}")

    @property
    def interior(self) -> np.ndarray:
        return self.data[(slice(None),) + self.grid.interior]

    def copy(self) -> "FieldArray":
        return FieldArray(self.grid, self.data.copy())

    def fill_ghosts(self, bc: Boundary, t: float = 0.0) -> None:
        bc.fill(self.data, self.grid, t, "state")

    @classmethod
    def from_primitive(cls, grid: Grid, w: np.ndarray, gamma: float = GAMMA) -> "FieldArray":
        """Build from primitives given either on the padded or the interior grid."""
        f = cls(grid)
        q = to_conserved(w, gamma)
        if q.shape[1:] == grid.shape:
            f.data[...] = q
        else:
            f.interior[...] = q
        return f
