"""Circle fluxes, winding numbers and boundary degrees.

Conventions fixed here and used everywhere: counterclockwise traversal is
positive, charges satisfy div V = 2*pi*sum n_i delta_i, and all reported
quanta are fluxes divided by 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, GeometryError, ToleranceError
from .grid import TWO_PI, sample_angle, sample_vector, wrap


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("circle radius must be positive")
        object.__setattr__(self, "center",
                           (float(self.center[0]), float(self.center[1])))

    def points(self, n, radius_offset=0.0):
        th = TWO_PI * np.arange(n) / n
        r = self.radius + radius_offset
        return np.stack([self.center[0] + r * np.cos(th),
                         self.center[1] + r * np.sin(th)], axis=1), th

    def validate_in_box(self, grid):
        cx, cy = self.center
        r = self.radius
        if (cx - r < grid.x0 or cx + r > grid.xmax or
                cy - r < grid.y0 or cy + r > grid.ymax):
            raise GeometryError("circle closure leaves the grid bounding box")

    def to_json(self):
        return {"center": [self.center[0], self.center[1]], "radius": self.radius}

    @staticmethod
    def from_json(obj):
        return Circle(tuple(obj["center"]), obj["radius"])


@dataclass(frozen=True)
class FluxResult:
    value: float
    quantum: int
    residual: float

    def to_json(self):
        return {"value": self.value, "quantum": self.quantum,
                "residual": self.residual}


def _quantize(value):
    q = int(np.rint(value / TWO_PI))
    return FluxResult(float(value), q, float(abs(value - TWO_PI * q)))


def circle_flux(V, circle, tol=1e-6, zero_extend=False, n0=128, nmax=1 << 15):
    """Flux of V through a circle by composite trapezoid quadrature with
    sample doubling until the increment is below ``tol``.

    The integrand is the bilinear interpolant of V, so quadrature converges
    at second order once the circle is resolved; ``zero_extend`` treats V as
    zero outside the mask (used by the covering construction)."""
    if not zero_extend:
        circle.validate_in_box(V.grid)
    if circle.radius < 2.0 * V.grid.h:
        raise GeometryError("circle radius below 2h: quadrature not valid")
    prev = None
    n = n0
    while n <= nmax:
        pts, th = circle.points(n)
        normal = np.stack([np.cos(th), np.sin(th)], axis=1)
        vals = sample_vector(V, pts, zero_extend=zero_extend)
        integral = circle.radius * TWO_PI / n * float(np.sum(vals[:, 0] * normal[:, 0]
                                                             + vals[:, 1] * normal[:, 1]))
        if prev is not None and abs(integral - prev) <= tol:
            return _quantize(integral)
        prev = integral
        n *= 2
    raise ToleranceError(f"circle flux quadrature did not reach tol={tol:g} "
                         f"within {nmax} samples")


def winding_degree(u, curve):
    """Winding number of u along a closed polyline, from wrapped increments.

    The curve must be sampled finely enough that u moves by less than pi/2
    between consecutive samples; the result is then an exact integer."""
    curve = np.asarray(curve, dtype=float)
    if len(curve) < 3:
        raise GeometryError("closed curve needs at least 3 samples")
    if np.allclose(curve[0], curve[-1]):
        curve = curve[:-1]
    seg = np.hypot(*(np.roll(curve, -1, axis=0) - curve).T)
    if seg.max() > u.grid.h:
        raise AliasingError("curve samples are farther apart than h; refine")
    th = sample_angle(u, curve)
    inc = wrap(np.roll(th, -1) - th)
    if np.abs(inc).max() >= np.pi / 2:
        raise AliasingError("wrapped increment >= pi/2 between samples; refine")
    total = float(np.sum(inc))
    deg = int(np.rint(total / TWO_PI))
    if abs(total - TWO_PI * deg) > np.pi / 2:
        raise AliasingError("winding sum is far from an integer multiple of 2*pi")
    return deg


def boundary_degree(u, inset=None):
    """Degree of u along the (counterclockwise) domain boundary."""
    curve = u.grid.boundary_curve(inset=inset)
    return winding_degree(u, curve)
