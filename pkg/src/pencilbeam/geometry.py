"""Flat-earth geometry: angles, distances and uncertainty-circle construction.

Conventions
-----------
* Azimuth (steering) is measured counter-clockwise from the +x axis and
  normalized to [0, 360).
* Elevation (tilting) is positive when the target lies below the antenna,
  in [-90, 90].
* Every angle crossing a module boundary is in degrees.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class GeometryError(ValueError):
    pass


class Point3(NamedTuple):
    x: float
    y: float
    z: float = 0.0


class InterceptionPoints(NamedTuple):
    i_west: Point3
    i_east: Point3
    i_north: Point3
    i_south: Point3


def wrap_offset(angle):
    """Wrap an angular difference in degrees to (-180, 180]."""
    return angle - 360.0 * np.ceil((angle - 180.0) / 360.0)


def relative_angles(sector_pos: Point3, target: Point3, axis: float = 0.0) -> tuple[float, float]:
    """Steering and tilting angle of ``target`` seen from ``sector_pos``.

    ``axis`` is the azimuth of the sector's 0 degree direction in the global
    frame; steering is reported relative to it.
    """
    dx = target[0] - sector_pos[0]
    dy = target[1] - sector_pos[1]
    d2 = math.hypot(dx, dy)
    if d2 == 0.0:
        raise GeometryError("undefined azimuth: target is vertically aligned with the sector")
    steering = (math.degrees(math.atan2(dy, dx)) - axis) % 360.0
    if steering >= 360.0:
        steering = 0.0
    tilting = math.degrees(math.atan((sector_pos[2] - target[2]) / d2))
    return steering, tilting


def relative_angles_array(sx: float, sy: float, sz: float, x, y, z):
    """Vectorized :func:`relative_angles` for many targets and one sector.

    Returns ``(steering, tilting, d2, d3)`` arrays.  Coincident horizontal
    projections yield steering 0 and tilting +-90 instead of raising.
    """
    dx = np.asarray(x, dtype=float) - sx
    dy = np.asarray(y, dtype=float) - sy
    dz = sz - np.asarray(z, dtype=float)
    d2 = np.hypot(dx, dy)
    steering = np.mod(np.degrees(np.arctan2(dy, dx)), 360.0)
    steering = np.where(steering >= 360.0, 0.0, steering)
    with np.errstate(divide="ignore", invalid="ignore"):
        tilting = np.degrees(np.where(d2 > 0, np.arctan(dz / d2), np.arctan2(dz, d2)))
    d3 = np.sqrt(d2 * d2 + dz * dz)
    return steering, tilting, d2, d3


def distances(a: Point3, b: Point3) -> tuple[float, float]:
    """Horizontal and 3D Euclidean distance between two points."""
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    d2 = math.hypot(dx, dy)
    return d2, math.sqrt(d2 * d2 + dz * dz)


def interception_points(sector_pos: Point3, d: Point3, epsilon: float,
                        radius_mode: str = "diameter") -> InterceptionPoints:
    """Tangent and radial interception points of the uncertainty circle.

    The circle is centered at ``d`` on the horizontal plane.  ``i_west`` and
    ``i_east`` are the contact points of the two tangents drawn from the
    sector's ground projection (``i_west`` is the counter-clockwise one);
    ``i_south``/``i_north`` are where the sector-to-``d`` line enters and
    leaves the circle.  All points carry ``d``'s height.
    """
    r = epsilon / 2.0 if radius_mode == "diameter" else epsilon
    dx = d[0] - sector_pos[0]
    dy = d[1] - sector_pos[1]
    dist = math.hypot(dx, dy)
    if dist <= r:
        raise GeometryError("spot too close: sector lies inside the uncertainty circle")
    ux, uy = dx / dist, dy / dist
    z = d[2]
    sx, sy = sector_pos[0], sector_pos[1]

    south = Point3(d[0] - r * ux, d[1] - r * uy, z)
    north = Point3(d[0] + r * ux, d[1] + r * uy, z)

    # Tangent contact points sit at distance sqrt(D^2 - r^2) from the sector,
    # rotated by asin(r/D) either side of the sector->d direction.
    tangent = math.sqrt(dist * dist - r * r)
    sin_b = r / dist
    cos_b = tangent / dist
    wx = ux * cos_b - uy * sin_b
    wy = uy * cos_b + ux * sin_b
    ex = ux * cos_b + uy * sin_b
    ey = uy * cos_b - ux * sin_b
    west = Point3(sx + tangent * wx, sy + tangent * wy, z)
    east = Point3(sx + tangent * ex, sy + tangent * ey, z)
    return InterceptionPoints(west, east, north, south)
