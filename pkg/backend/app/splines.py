"""
Clamped equidistant B-spline bases on [0, 1]
"""
from dataclasses import dataclass
from scipy.interpolate import BSpline
from app.models import KnotConvention
import numpy as np
import logging

logger = logging.getLogger(__name__)


class SplineError(ValueError):
    pass


@dataclass(frozen=True)
class SplineBasis:
    num_basis: int
    degree: int
    knots: np.ndarray

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knots[self.degree + 1:-(self.degree + 1)]


def num_basis_from_knots(knots: int, degree: int = 3, convention: KnotConvention = KnotConvention.BASIS) -> int:
    """Translate a knot count into the number of basis functions"""
    convention = KnotConvention(convention)
    if convention == KnotConvention.BASIS:
        num_basis = knots
    elif convention == KnotConvention.INTERIOR:
        num_basis = knots + degree + 1
    else:
        # breakpoints include both ends of [0, 1]
        num_basis = knots + degree - 1
    if num_basis < degree + 1:
        raise SplineError(f"{knots} knots ({convention.value}) give {num_basis} basis functions, need at least {degree + 1}")
    return num_basis


def build_basis(num_basis: int, degree: int = 3) -> SplineBasis:
    """Build a clamped basis with equidistant interior knots"""
    if degree < 0:
        raise SplineError(f"degree must be >= 0, got {degree}")
    if num_basis < degree + 1:
        raise SplineError(f"num_basis={num_basis} is below degree + 1 = {degree + 1}")

    interior = np.linspace(0.0, 1.0, num_basis - degree + 1)[1:-1]
    knots = np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])
    knots.setflags(write=False)
    return SplineBasis(num_basis=num_basis, degree=degree, knots=knots)


def design_matrix(basis: SplineBasis, grid) -> np.ndarray:
    """Basis values at every grid point, one row per point"""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size and (grid.min() < 0.0 or grid.max() > 1.0 or not np.all(np.isfinite(grid))):
        raise SplineError("basis evaluation points must lie in [0, 1]")

    # identity coefficients turn the spline into its individual basis functions;
    # x = 1 falls into the closure of the last interval
    spline = BSpline(basis.knots, np.eye(basis.num_basis), basis.degree, extrapolate=False)
    values = spline(grid)
    # round-off can leave tiny negatives next to a knot
    np.maximum(values, 0.0, out=values)
    return values


def eval_basis(basis: SplineBasis, x: float) -> np.ndarray:
    """Basis values at a single point of [0, 1]"""
    return design_matrix(basis, [x])[0]
