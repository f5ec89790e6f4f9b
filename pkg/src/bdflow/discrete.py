"""Uniform cell-centred grids, fields and conservative stencils (1D and 2D)."""

from __future__ import annotations

import csv
import enum
import io
import functools
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .errors import DomainError, GridMismatch

__all__ = [
    "Boundary",
    "Grid",
    "DensityField",
    "VelocityField",
    "make_grid",
    "flux_laplacian",
    "face_gradient",
    "gradient",
    "divergence",
    "curl2d",
    "lp_norm",
    "quadrature",
    "interior_mask",
    "support_extent",
    "write_field_csv",
    "read_field_csv",
]


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    ZERO_FLUX = "zeroflux"

    @classmethod
    def parse(cls, text: Union[str, "Boundary"]) -> "Boundary":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value == key:
                return member
        raise DomainError(f"unknown boundary rule {text!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n[i]`` cells on ``[lo[i], hi[i]]`` per axis."""

    n: Tuple[int, ...]
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    boundary: Boundary = Boundary.ZERO_FLUX

    def __post_init__(self):
        if len(self.n) not in (1, 2) or not (len(self.n) == len(self.lo) == len(self.hi)):
            raise DomainError("grids are 1D or 2D with matching extents")
        for n, a, b in zip(self.n, self.lo, self.hi):
            if n < 8:
                raise DomainError(f"need at least 8 cells per axis, got {n}")
            if not b > a:
                raise DomainError(f"empty axis [{a}, {b}]")

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.n)

    @functools.cached_property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((b - a) / n for n, a, b in zip(self.n, self.lo, self.hi))

    @property
    def dx(self) -> float:
        """Smallest spacing (the one that limits explicit steps)."""
        return min(self.spacing)

    @functools.cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return self.lo[axis] + (np.arange(self.n[axis]) + 0.5) * h

    def centers(self) -> Tuple[np.ndarray, ...]:
        """Cell-centre coordinate arrays broadcast to the grid shape (read-only)."""
        return self._centers

    @functools.cached_property
    def _centers(self) -> Tuple[np.ndarray, ...]:
        axes = [self.axis_centers(i) for i in range(self.dim)]
        out = tuple(np.meshgrid(*axes, indexing="ij"))
        for c in out:
            c.flags.writeable = False
        return out

    def radius(self, center: Optional[Sequence[float]] = None) -> np.ndarray:
        coords = self.centers()
        center = [0.0] * self.dim if center is None else center
        return np.sqrt(sum((c - c0) ** 2 for c, c0 in zip(coords, center)))

    def refine(self, factor: int = 2) -> "Grid":
        return replace(self, n=tuple(n * factor for n in self.n))


def make_grid(n: Union[int, Sequence[int]], a: Union[float, Sequence[float]],
              b: Union[float, Sequence[float]], boundary="zeroflux", dim: int = 1) -> Grid:
    def per_axis(v, cast):
        if np.ndim(v) == 0:
            return tuple(cast(v) for _ in range(dim))
        return tuple(cast(x) for x in v)

    if np.ndim(n) > 0:
        dim = len(n)
    return Grid(per_axis(n, int), per_axis(a, float), per_axis(b, float), Boundary.parse(boundary))


@dataclass
class DensityField:
    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridMismatch(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @property
    def mass(self) -> float:
        return quadrature(self)

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable, time: float = 0.0) -> "DensityField":
        return cls(grid, np.asarray(fn(*grid.centers()), dtype=float), time)


@dataclass
class VelocityField:
    grid: Grid
    components: np.ndarray  # shape (dim, *grid.shape)
    time: float = 0.0

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        if self.components.shape != (self.grid.dim,) + self.grid.shape:
            raise GridMismatch("velocity components do not match the grid")

    @property
    def x(self) -> np.ndarray:
        return self.components[0]


def _values(field_or_array):
    if isinstance(field_or_array, DensityField):
        return field_or_array.grid, field_or_array.values
    raise TypeError("expected a DensityField")


def flux_laplacian(g: Callable, fld: DensityField) -> np.ndarray:
    """Conservative ``Delta_h g(rho)``; sums to zero under both boundary rules."""
    grid, rho = _values(fld)
    gv = np.asarray(g(rho), dtype=float)
    if gv.shape != rho.shape:
        gv = np.broadcast_to(gv, rho.shape).astype(float)
    return kernels.flux_laplacian(np.ascontiguousarray(gv), grid.spacing, grid.periodic)


def _pad(v: np.ndarray, axis: int, periodic: bool, odd: bool = False) -> np.ndarray:
    width = [(0, 0)] * v.ndim
    width[axis] = (1, 1)
    if periodic:
        return np.pad(v, width, mode="wrap")
    out = np.pad(v, width, mode="edge")
    if odd:
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[axis] = slice(0, 1)
        hi[axis] = slice(-1, None)
        out[tuple(lo)] *= -1.0
        out[tuple(hi)] *= -1.0
    return out


def _centered_diff(v: np.ndarray, axis: int, h: float, periodic: bool, odd: bool = False) -> np.ndarray:
    p = _pad(v, axis, periodic, odd)
    hi = [slice(None)] * v.ndim
    lo = [slice(None)] * v.ndim
    hi[axis] = slice(2, None)
    lo[axis] = slice(None, -2)
    return (p[tuple(hi)] - p[tuple(lo)]) / (2.0 * h)


def gradient(fld: Union[DensityField, Tuple[Grid, np.ndarray]]) -> VelocityField:
    """Centred second-order gradient with the boundary ghost rule of the grid."""
    if isinstance(fld, DensityField):
        grid, v = fld.grid, fld.values
        t = fld.time
    else:
        grid, v = fld
        t = 0.0
    comps = [_centered_diff(v, ax, grid.spacing[ax], grid.periodic) for ax in range(grid.dim)]
    return VelocityField(grid, np.stack(comps), t)


def divergence(vf: VelocityField) -> np.ndarray:
    """Centred divergence; the normal component is reflected oddly at zero-flux walls."""
    grid = vf.grid
    out = np.zeros(grid.shape)
    for ax in range(grid.dim):
        out += _centered_diff(vf.components[ax], ax, grid.spacing[ax], grid.periodic, odd=True)
    return out


def face_gradient(grid: Grid, v: np.ndarray, axis: int = 0) -> np.ndarray:
    """Face differences ``(v[j+1] - v[j]) / h``; periodic grids include the wrap face."""
    h = grid.spacing[axis]
    d = np.diff(v, axis=axis) / h
    if grid.periodic:
        first = np.take(v, [0], axis=axis)
        last = np.take(v, [-1], axis=axis)
        d = np.concatenate([d, (first - last) / h], axis=axis)
    return d


def curl2d(vf: VelocityField) -> np.ndarray:
    if vf.grid.dim != 2:
        raise DomainError("curl is defined here for 2D fields only")
    g = vf.grid
    return (_centered_diff(vf.components[1], 0, g.spacing[0], g.periodic)
            - _centered_diff(vf.components[0], 1, g.spacing[1], g.periodic))


def lp_norm(fld: Union[DensityField, Tuple[Grid, np.ndarray]], p: float) -> float:
    if isinstance(fld, DensityField):
        grid, v = fld.grid, fld.values
    else:
        grid, v = fld
    if not p >= 1.0:
        raise DomainError(f"L^p norms need p >= 1, got {p}")
    a = np.abs(v)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1.0:
        return float(grid.cell_volume * a.sum())
    if p == 2.0:
        return float(np.sqrt(grid.cell_volume * np.dot(a.ravel(), a.ravel())))
    return float((grid.cell_volume * np.sum(a ** p)) ** (1.0 / p))


def quadrature(fld: Union[DensityField, Tuple[Grid, np.ndarray]]) -> float:
    if isinstance(fld, DensityField):
        grid, v = fld.grid, fld.values
    else:
        grid, v = fld
    return float(grid.cell_volume * np.sum(v))


def support_extent(values: np.ndarray, coords: Sequence[np.ndarray], threshold: float) -> float:
    """Largest distance from the mass centroid to a cell with ``values >= threshold``."""
    inside = values >= threshold
    if not inside.any():
        return 0.0
    total = float(values.sum())
    if total > 0.0:
        center = [float(np.dot(c.ravel(), values.ravel())) / total for c in coords]
    else:
        center = [float(c[inside].mean()) for c in coords]
    d2 = sum((c[inside] - c0) ** 2 for c, c0 in zip(coords, center))
    return float(np.sqrt(d2.max()))


def interior_mask(values: np.ndarray, threshold: float, margin: int = 3,
                  periodic: bool = False) -> np.ndarray:
    """Cells with ``values >= threshold`` at least ``margin`` cells from any cell below it.

    Non-periodic grids also exclude ``margin`` cells next to the domain edge.
    """
    inside = values >= threshold
    mask = inside.copy()
    for ax in range(values.ndim):
        for s in range(1, margin + 1):
            for sign in (1, -1):
                shifted = np.roll(inside, sign * s, axis=ax)
                if not periodic:
                    idx = [slice(None)] * values.ndim
                    idx[ax] = slice(0, s) if sign > 0 else slice(-s, None)
                    shifted[tuple(idx)] = False
                mask &= shifted
    return mask


# -- snapshot files -----------------------------------------------------------

def write_field_csv(path, fld: DensityField, velocity: Optional[VelocityField] = None) -> Path:
    """Header ``x[,y],rho[,u]``; one row per cell in row-major order."""
    grid = fld.grid
    coords = [c.ravel() for c in grid.centers()]
    header = ["x", "y"][: grid.dim] + ["rho"]
    cols = coords + [fld.values.ravel()]
    if velocity is not None:
        header.append("u")
        cols.append(velocity.components[0].ravel())
        if grid.dim == 2:
            header.append("v")
            cols.append(velocity.components[1].ravel())
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*cols):
        writer.writerow([repr(float(v)) for v in row])
    path.write_text(buf.getvalue())
    return path


def read_field_csv(path, grid: Grid) -> DensityField:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rho = [float(row["rho"]) for row in reader]
    values = np.asarray(rho, dtype=float)
    if values.size != int(np.prod(grid.shape)):
        raise GridMismatch(f"{path}: {values.size} rows for a grid of {grid.shape}")
    return DensityField(grid, values.reshape(grid.shape))
