"""Synthetic populations and the distance-driven choice generator.

Populations are complete-spatial-randomness (CSR) point fields: coordinates
i.i.d. uniform over the study area. Choices are Bernoulli with success
probability L(alpha + beta * d), d the distance to a single facility; the
default generating coefficients are (1, -2) so that distance deters choice.

Municipality grids are the synthetic stand-in for administrative units in
the centroid-assignment experiment: k x k equal square cells tiling the
study area, each with its center as centroid and the radius of the circle
of equal surface as its size scale.

Draw-order contract (per stream): generate_csr draws all n x-coordinates,
then all n y-coordinates; simulate_choices draws n uniforms compared
against the per-point probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .dataset import ChoiceDataset
from .geometry import Point, StudyArea, equivalent_circle_radius
from .logit import LogitParams
from .rng import RngStream, as_generator

DEFAULT_GENERATING_PARAMS = LogitParams(1.0, -2.0)


class OutOfGridError(ValueError):
    """A point falls outside every grid cell."""

    def __init__(self, point_indices):
        self.point_indices = list(point_indices)
        super().__init__(
            f"{len(self.point_indices)} point(s) outside the grid, first index {self.point_indices[0]}"
        )


@dataclass(frozen=True)
class GridCell:
    """One square municipality: bounds, centroid, and equivalent radius."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    centroid: Point
    equivalent_radius: float


@dataclass(frozen=True)
class MunicipalityGrid:
    """k x k equal square cells tiling a study area, row-major from (xmin, ymin)."""

    area: StudyArea
    k: int
    cells: tuple[GridCell, ...] = field(repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.cells) != self.k * self.k:
            raise ValueError(f"expected {self.k * self.k} cells, got {len(self.cells)}")

    @property
    def cell_side(self) -> tuple[float, float]:
        return self.area.width / self.k, self.area.height / self.k

    def cell_indices(self, xy: np.ndarray) -> np.ndarray:
        """Row-major cell index per point; raises for points outside the area.

        Points on interior cell edges belong to the upper cell; the area's
        outer max edges are clamped into the last row/column so the cells
        tile the closed area exactly.
        """
        xy = np.asarray(xy, dtype=np.float64)
        inside = (
            (xy[:, 0] >= self.area.xmin)
            & (xy[:, 0] <= self.area.xmax)
            & (xy[:, 1] >= self.area.ymin)
            & (xy[:, 1] <= self.area.ymax)
        )
        if not inside.all():
            raise OutOfGridError(np.flatnonzero(~inside))
        sx, sy = self.cell_side
        ix = np.minimum(((xy[:, 0] - self.area.xmin) / sx).astype(np.int64), self.k - 1)
        iy = np.minimum(((xy[:, 1] - self.area.ymin) / sy).astype(np.int64), self.k - 1)
        return iy * self.k + ix

    def centroids(self) -> np.ndarray:
        return np.array([[c.centroid.x, c.centroid.y] for c in self.cells])

    def cell_bounds(self) -> np.ndarray:
        """(k^2, 4) array of (xmin, xmax, ymin, ymax) per cell, row-major."""
        return np.array([[c.xmin, c.xmax, c.ymin, c.ymax] for c in self.cells])


def build_municipality_grid(area: StudyArea, k: int) -> MunicipalityGrid:
    """Partition the area into k^2 equal rectangular cells (squares on a square area)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sx, sy = area.width / k, area.height / k
    cell_radius = equivalent_circle_radius(sx * sy)
    cells = []
    for iy in range(k):
        for ix in range(k):
            xmin = area.xmin + ix * sx
            ymin = area.ymin + iy * sy
            cells.append(
                GridCell(
                    xmin=xmin,
                    xmax=xmin + sx,
                    ymin=ymin,
                    ymax=ymin + sy,
                    centroid=Point(xmin + 0.5 * sx, ymin + 0.5 * sy),
                    equivalent_radius=cell_radius,
                )
            )
    return MunicipalityGrid(area=area, k=k, cells=tuple(cells))


def generate_csr_xy(n: int, area: StudyArea, rng: RngStream) -> np.ndarray:
    """(n, 2) i.i.d. uniform coordinates over the area."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen = as_generator(rng)
    x = gen.uniform(area.xmin, area.xmax, n)
    y = gen.uniform(area.ymin, area.ymax, n)
    return np.column_stack([x, y])


def generate_csr(n: int, area: StudyArea, rng: RngStream) -> list[Point]:
    """CSR point field as Point objects (array form: generate_csr_xy)."""
    return [Point(float(x), float(y)) for x, y in generate_csr_xy(n, area, rng)]


def simulate_choices_xy(
    xy: np.ndarray,
    facility: Point,
    params: LogitParams,
    rng: RngStream,
    area: StudyArea | None = None,
) -> ChoiceDataset:
    """Bernoulli choices with P(y=1) = L(alpha + beta * d(point, facility))."""
    xy = np.asarray(xy, dtype=np.float64)
    d = np.hypot(xy[:, 0] - facility.x, xy[:, 1] - facility.y)
    prob = expit(params.alpha + params.beta * d)
    u = as_generator(rng).uniform(0.0, 1.0, xy.shape[0])
    choices = (u < prob).astype(np.int64)
    return ChoiceDataset(
        points=xy,
        facilities=np.array([[facility.x, facility.y]]),
        choices=choices,
        area=area if area is not None else StudyArea.unit_square(),
    )


def simulate_choices(
    points: list[Point],
    facility: Point,
    params: LogitParams,
    rng: RngStream,
    area: StudyArea | None = None,
) -> ChoiceDataset:
    """simulate_choices_xy over a list of Point."""
    xy = np.array([[p.x, p.y] for p in points])
    return simulate_choices_xy(xy, facility, params, rng, area=area)


def assign_to_centroid(ds: ChoiceDataset, grid: MunicipalityGrid) -> ChoiceDataset:
    """Replace active coordinates with cell centroids (the unintentional
    locational error of administrative geocoding); choices unchanged,
    distances recomputed. Idempotent: centroids map to themselves.
    """
    idx = grid.cell_indices(ds.active_points)
    return ds.with_masked_points(grid.centroids()[idx])
