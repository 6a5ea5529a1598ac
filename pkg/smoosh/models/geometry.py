"""
Planar primitives shared by all models.

Clamping, palm membership, the extended domain D̄ (the table dilated by the
palm disc, rounded corners included) and the lens area φ of two overlapping
palm discs.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from smoosh.core.errors import EventStreamError, ParameterError, QuadratureError

# Slack for float round-off when testing membership of D̄.
EXTENDED_TOLERANCE = 1e-12
LENS_QUAD_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Point2:
    """A point on (or near) the table, in table-lengths."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ParameterError(f"Point2 requires finite coordinates, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    @classmethod
    def from_array(cls, xy: Sequence[float]) -> "Point2":
        return cls(float(xy[0]), float(xy[1]))


PointLike = Union[Point2, Sequence[float], np.ndarray]
PositionsLike = Union[Sequence[Point2], np.ndarray]


def as_xy(point: PointLike) -> Tuple[float, float]:
    if isinstance(point, Point2):
        return point.x, point.y
    return float(point[0]), float(point[1])


def as_positions(positions: PositionsLike) -> np.ndarray:
    """
    Normalise a configuration to a float array of shape (m, 2).

    Args:
        positions: Sequence of Point2 or an array-like of (x, y) rows

    Returns:
        A fresh (m, 2) float64 array
    """
    if isinstance(positions, np.ndarray):
        arr = np.array(positions, dtype=float, copy=True)
    else:
        rows = [as_xy(p) for p in positions]
        arr = np.array(rows, dtype=float) if rows else np.empty((0, 2), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParameterError(f"positions must have shape (m, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("positions must be finite")
    return arr


@dataclass(frozen=True)
class Table:
    """
    Rectangular table [0, width] x [0, height] and the palm radius δ.

    The extended domain D̄ is the Minkowski sum of the table with the closed
    disc of radius δ.
    """
    width: float
    height: float
    delta: float

    def __post_init__(self):
        for name in ('width', 'height', 'delta'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"Table.{name} must be a positive finite number, got {value}")

    @classmethod
    def unit(cls, delta: float) -> "Table":
        return cls(1.0, 1.0, delta)

    @property
    def extended_area(self) -> float:
        """Exact area of D̄: wh + 2δ(w + h) + πδ²."""
        w, h, d = self.width, self.height, self.delta
        return w * h + 2.0 * d * (w + h) + math.pi * d * d

    @property
    def extended_area_bound(self) -> float:
        """Area of the bounding box of D̄, (w + 2δ)(h + 2δ)."""
        return (self.width + 2.0 * self.delta) * (self.height + 2.0 * self.delta)

    def contains(self, positions: PositionsLike) -> bool:
        arr = positions if isinstance(positions, np.ndarray) else as_positions(positions)
        if arr.size == 0:
            return True
        xs, ys = arr[..., 0], arr[..., 1]
        return bool(np.all((xs >= 0.0) & (xs <= self.width) & (ys >= 0.0) & (ys <= self.height)))

    def in_extended(self, w: PointLike) -> bool:
        return distance_to_table(w, self) <= self.delta + EXTENDED_TOLERANCE

    def rescaled_to_unit(self, s0: float) -> Tuple[float, float]:
        """
        Rescale a square table to the unit table.

        Args:
            s0: Spread distance on this table

        Returns:
            (delta, s0) divided by the side length
        """
        if not math.isclose(self.width, self.height, rel_tol=1e-12):
            raise ParameterError("only square tables can be rescaled to the unit table")
        return self.delta / self.width, s0 / self.width


def clamp(x, lo: float = 0.0, hi: float = 1.0):
    """
    Clamp x into [lo, hi]; arrays are clamped elementwise.

    Example:
        >>> clamp(1.05, 0, 1)
        1.0
    """
    if lo > hi:
        raise ParameterError(f"clamp requires lo <= hi, got [{lo}, {hi}]")
    if np.ndim(x) == 0:
        return float(min(max(x, lo), hi))
    return np.clip(x, lo, hi)


def under_palm(z: PointLike, center: PointLike, delta: float) -> bool:
    """True iff z lies in the closed disc of radius delta about center."""
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    zx, zy = as_xy(z)
    cx, cy = as_xy(center)
    return math.hypot(zx - cx, zy - cy) <= delta


def under_palm_mask(positions: np.ndarray, center: PointLike, delta: float) -> np.ndarray:
    cx, cy = as_xy(center)
    if positions.size == 0:
        return np.zeros(positions.shape[:-1], dtype=bool)
    return np.hypot(positions[..., 0] - cx, positions[..., 1] - cy) <= delta


def distance_to_table(w: PointLike, table: Table) -> float:
    wx, wy = as_xy(w)
    dx = max(-wx, 0.0, wx - table.width)
    dy = max(-wy, 0.0, wy - table.height)
    return math.hypot(dx, dy)


def _distance_to_table_array(points: np.ndarray, table: Table) -> np.ndarray:
    dx = np.maximum(np.maximum(-points[:, 0], 0.0), points[:, 0] - table.width)
    dy = np.maximum(np.maximum(-points[:, 1], 0.0), points[:, 1] - table.height)
    return np.hypot(dx, dy)


def clamp_center(w: PointLike, table: Table) -> Point2:
    """
    Coordinate-wise clamp of a palm centre into the table.

    Args:
        w: Palm centre; must lie in D̄
        table: The table

    Returns:
        The gather point, within δ of w

    Raises:
        EventStreamError: If w is outside D̄
    """
    x, y = clamp_center_xy(w, table)
    return Point2(x, y)


def clamp_center_xy(w: PointLike, table: Table) -> Tuple[float, float]:
    wx, wy = as_xy(w)
    if not (math.isfinite(wx) and math.isfinite(wy)) or not table.in_extended((wx, wy)):
        raise EventStreamError(f"palm centre ({wx}, {wy}) lies outside the extended table")
    return clamp(wx, 0.0, table.width), clamp(wy, 0.0, table.height)


def sample_extended(table: Table, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Draw palm centres uniformly on D̄ by rejection from its bounding box.

    Args:
        table: The table
        rng: Random generator
        size: Number of centres; None for a single (2,) point

    Returns:
        Array of shape (2,) or (size, 2)
    """
    n = 1 if size is None else int(size)
    d = table.delta
    low = (-d, -d)
    high = (table.width + d, table.height + d)
    out = np.empty((n, 2), dtype=float)
    filled = 0
    while filled < n:
        need = n - filled
        candidates = rng.uniform(low, high, size=(need + need // 3 + 1, 2))
        accepted = candidates[_distance_to_table_array(candidates, table) <= d][:need]
        out[filled:filled + len(accepted)] = accepted
        filled += len(accepted)
    return out[0] if size is None else out


def lens_area(r, delta: float):
    """
    Area of the intersection of two radius-delta discs with centres r apart.

    φ(r) = 2δ² arccos(r / 2δ) - (r / 2) sqrt(4δ² - r²) for r <= 2δ, else 0.
    Accepts scalars or arrays.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ParameterError("lens_area requires r >= 0")
    two_d = 2.0 * delta
    ratio = np.clip(r_arr / two_d, 0.0, 1.0)
    chord = np.sqrt(np.maximum(two_d * two_d - r_arr * r_arr, 0.0))
    value = 2.0 * delta * delta * np.arccos(ratio) - 0.5 * r_arr * chord
    value = np.where(r_arr <= two_d, np.clip(value, 0.0, math.pi * delta * delta), 0.0)
    if value.ndim == 0:
        return float(value)
    return value


def lens_integral(delta: float) -> float:
    """
    Compute 2 ∫₀^{2δ} r φ(r) dr by adaptive Gauss-Kronrod quadrature.

    The exact value is πδ⁴.

    Raises:
        QuadratureError: If QUADPACK reports non-convergence
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    out = integrate.quad(
        lambda r: 2.0 * r * lens_area(r, delta),
        0.0,
        2.0 * delta,
        epsabs=LENS_QUAD_TOLERANCE,
        epsrel=LENS_QUAD_TOLERANCE,
        limit=200,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(f"lens integral for delta={delta}: {out[3]}", abserr)
    return float(value)
