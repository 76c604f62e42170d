"""Grid geometry, sampled fields, L^p norms and the directional norm identity.

Arrays are indexed ``[ix, iy]`` so that the first axis runs along x.  All
circle-valued arithmetic goes through :func:`wrap` (differences reduced to
``(-pi, pi]``); stored angles live in ``[0, 2*pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, ndimage

from .errors import AliasingError, DataError, GeometryError, ToleranceError

TWO_PI = 2.0 * np.pi


def wrap(d):
    """Reduce angle differences to the principal branch ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(d), TWO_PI)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform node grid over an axis-aligned box with a domain mask.

    ``mask_kind`` is ``"disk"`` (inscribed in the bounding box), ``"rect"``
    (the full box), or ``"custom"`` for masks built directly by callers;
    only the first two are serializable in the VF2D format.
    """

    x0: float
    y0: float
    h: float
    nx: int
    ny: int
    mask_kind: str = "rect"
    mask: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.h <= 0:
            raise GeometryError("grid spacing must be positive")
        if self.nx < 2 or self.ny < 2:
            raise GeometryError("grid needs at least 2 nodes per axis")
        if self.mask is None:
            object.__setattr__(self, "mask", self._default_mask())
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.nx, self.ny):
            raise GeometryError("mask shape does not match (nx, ny)")
        if not m.any():
            raise GeometryError("mask is empty")
        # 4-connectivity of the masked region
        _, ncomp = ndimage.label(m, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
        if ncomp != 1:
            raise GeometryError("mask must be 4-connected")
        object.__setattr__(self, "mask", m)

    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return ((self.x0, self.y0, self.h, self.nx, self.ny, self.mask_kind)
                == (other.x0, other.y0, other.h, other.nx, other.ny,
                    other.mask_kind)
                and np.array_equal(self.mask, other.mask))

    def _default_mask(self):
        if self.mask_kind == "rect":
            return np.ones((self.nx, self.ny), dtype=bool)
        if self.mask_kind == "disk":
            cx, cy = self.center
            r = self.disk_radius
            xx, yy = self.meshgrid()
            return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r * (1 + 1e-12)
        raise GeometryError("custom mask_kind requires an explicit mask array")

    # -- geometry helpers --------------------------------------------------
    @property
    def center(self):
        return (self.x0 + (self.nx - 1) * self.h / 2.0,
                self.y0 + (self.ny - 1) * self.h / 2.0)

    @property
    def disk_radius(self):
        return min(self.nx - 1, self.ny - 1) * self.h / 2.0

    @property
    def xmax(self):
        return self.x0 + (self.nx - 1) * self.h

    @property
    def ymax(self):
        return self.y0 + (self.ny - 1) * self.h

    def xs(self):
        return self.x0 + self.h * np.arange(self.nx)

    def ys(self):
        return self.y0 + self.h * np.arange(self.ny)

    def meshgrid(self):
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def node_points(self, mask_only=True):
        xx, yy = self.meshgrid()
        pts = np.stack([xx, yy], axis=-1)
        if mask_only:
            return pts[self.mask]
        return pts.reshape(-1, 2)

    def boundary_distance(self, pts):
        """Signed-ish distance of points to the mask boundary (positive inside).

        Exact for disk/rect masks; custom masks fall back to the distance to
        the nearest unmasked node (clipped at the box edge).
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.mask_kind == "disk":
            cx, cy = self.center
            rho = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
            return self.disk_radius - rho
        if self.mask_kind == "rect":
            return np.minimum.reduce([
                pts[:, 0] - self.x0, self.xmax - pts[:, 0],
                pts[:, 1] - self.y0, self.ymax - pts[:, 1],
            ])
        inside = ~self.mask
        if not inside.any():
            return np.minimum.reduce([
                pts[:, 0] - self.x0, self.xmax - pts[:, 0],
                pts[:, 1] - self.y0, self.ymax - pts[:, 1],
            ])
        out = self.node_points(mask_only=False)[inside.ravel()]
        d = np.min(np.hypot(pts[:, 0, None] - out[None, :, 0],
                            pts[:, 1, None] - out[None, :, 1]), axis=1)
        box = np.minimum.reduce([
            pts[:, 0] - self.x0, self.xmax - pts[:, 0],
            pts[:, 1] - self.y0, self.ymax - pts[:, 1],
        ])
        return np.minimum(d, box)

    def boundary_curve(self, inset=None, spacing=None):
        """Closed counterclockwise polyline tracing the mask boundary,
        inset into the domain so that bilinear sampling stays masked."""
        if inset is None:
            inset = 2.0 * self.h
        if spacing is None:
            spacing = self.h / 2.0
        if self.mask_kind == "disk":
            r = self.disk_radius - inset
            if r <= 0:
                raise GeometryError("inset exceeds disk radius")
            cx, cy = self.center
            n = max(16, int(np.ceil(TWO_PI * r / spacing)))
            th = TWO_PI * np.arange(n) / n
            return np.stack([cx + r * np.cos(th), cy + r * np.sin(th)], axis=1)
        if self.mask_kind == "rect":
            xa, xb = self.x0 + inset, self.xmax - inset
            ya, yb = self.y0 + inset, self.ymax - inset
            if xa >= xb or ya >= yb:
                raise GeometryError("inset exceeds rectangle size")
            sides = []
            for (px, py), (qx, qy) in [((xa, ya), (xb, ya)), ((xb, ya), (xb, yb)),
                                       ((xb, yb), (xa, yb)), ((xa, yb), (xa, ya))]:
                n = max(2, int(np.ceil(np.hypot(qx - px, qy - py) / spacing)))
                t = np.arange(n) / n
                sides.append(np.stack([px + t * (qx - px), py + t * (qy - py)], axis=1))
            return np.concatenate(sides, axis=0)
        raise GeometryError("boundary curve only available for disk/rect masks")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def disk(n, radius=1.0, center=(0.0, 0.0)):
        h = 2.0 * radius / (n - 1)
        return GridSpec(center[0] - radius, center[1] - radius, h, n, n, "disk")

    @staticmethod
    def rect(nx, ny, x0=0.0, y0=0.0, h=None, width=None, height=None):
        if h is None:
            h = width / (nx - 1)
        if width is None:
            width = (nx - 1) * h
        if height is None:
            height = (ny - 1) * h
        return GridSpec(x0, y0, h, nx, ny, "rect")

    @staticmethod
    def annulus(n, outer=1.0, inner=0.2, center=(0.0, 0.0)):
        """Disk grid with the inner disk removed (custom mask; tests only)."""
        base = GridSpec.disk(n, outer, center)
        xx, yy = base.meshgrid()
        rho2 = (xx - center[0]) ** 2 + (yy - center[1]) ** 2
        m = base.mask & (rho2 >= inner * inner)
        return GridSpec(base.x0, base.y0, base.h, n, n, "custom", m)


@dataclass
class VectorField2D:
    """Node-sampled planar vector field; ``singular`` flags nodes where the
    sampled value is not trustworthy (vortex cores)."""

    grid: GridSpec
    vx: np.ndarray
    vy: np.ndarray
    singular: np.ndarray = None

    def __post_init__(self):
        self.vx = np.asarray(self.vx, dtype=float)
        self.vy = np.asarray(self.vy, dtype=float)
        shape = (self.grid.nx, self.grid.ny)
        if self.vx.shape != shape or self.vy.shape != shape:
            raise DataError("component arrays must have shape (nx, ny)")
        if self.singular is None:
            self.singular = np.zeros(shape, dtype=bool)
        else:
            self.singular = np.asarray(self.singular, dtype=bool)
        ok = self.grid.mask
        if not (np.isfinite(self.vx[ok]).all() and np.isfinite(self.vy[ok]).all()):
            raise DataError("non-finite samples on masked nodes")

    def copy(self):
        return VectorField2D(self.grid, self.vx.copy(), self.vy.copy(),
                             self.singular.copy())

    def magnitude(self):
        return np.hypot(self.vx, self.vy)

    def __sub__(self, other):
        if other.grid is not self.grid and other.grid != self.grid:
            raise DataError("fields live on different grids")
        return VectorField2D(self.grid, self.vx - other.vx, self.vy - other.vy,
                             self.singular | other.singular)

    def __add__(self, other):
        return VectorField2D(self.grid, self.vx + other.vx, self.vy + other.vy,
                             self.singular | other.singular)


@dataclass
class CircleValuedField:
    """Node-sampled map with values in R/2piZ, stored in ``[0, 2*pi)``."""

    grid: GridSpec
    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        if t.shape != (self.grid.nx, self.grid.ny):
            raise DataError("theta must have shape (nx, ny)")
        if not np.isfinite(t[self.grid.mask]).all():
            raise DataError("non-finite angles on masked nodes")
        self.theta = np.mod(t, TWO_PI)


def check_exponent(p, allow_one=False):
    p = float(p)
    lo = 1.0 if allow_one else 1.0 + 1e-12
    if not np.isfinite(p) or p < lo:
        raise DataError(f"exponent p={p} out of range (requires p {'>=' if allow_one else '>'} 1)")
    return p


# ---------------------------------------------------------------------------
# Bilinear sampling

def _gather(arr, ix, iy):
    return arr[ix, iy]


def bilinear_sample(grid, arrays, pts, zero_extend=False):
    """Sample node arrays at arbitrary points by bilinear interpolation.

    With ``zero_extend`` the field is treated as zero outside the mask and
    outside the bounding box; otherwise all four surrounding nodes must be
    masked and the point must lie in the box.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    fx = (pts[:, 0] - grid.x0) / grid.h
    fy = (pts[:, 1] - grid.y0) / grid.h
    inbox = (fx >= 0) & (fx <= grid.nx - 1) & (fy >= 0) & (fy <= grid.ny - 1)
    if not zero_extend and not inbox.all():
        raise GeometryError("sample point outside the grid bounding box")
    fx = np.clip(fx, 0.0, grid.nx - 1 - 1e-12)
    fy = np.clip(fy, 0.0, grid.ny - 1 - 1e-12)
    ix = fx.astype(np.int64)
    iy = fy.astype(np.int64)
    tx = fx - ix
    ty = fy - iy
    w = [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty]
    corners = [(ix, iy), (ix + 1, iy), (ix, iy + 1), (ix + 1, iy + 1)]
    if zero_extend:
        for k, (cx, cy) in enumerate(corners):
            w[k] = w[k] * grid.mask[cx, cy] * inbox
    else:
        for cx, cy in corners:
            if not grid.mask[cx, cy].all():
                raise GeometryError("sample stencil leaves the domain mask")
    out = []
    for a in arrays:
        acc = np.zeros(len(pts))
        for wk, (cx, cy) in zip(w, corners):
            acc += wk * a[cx, cy]
        out.append(acc)
    return out


def sample_vector(V, pts, zero_extend=False):
    """Bilinear samples of a vector field; returns an (m, 2) array."""
    vx, vy = bilinear_sample(V.grid, (V.vx, V.vy), pts, zero_extend=zero_extend)
    return np.stack([vx, vy], axis=1)


def sample_angle(u, pts):
    """Wrapped-bilinear samples of a circle-valued field.

    Corner values are rebased to the first corner before interpolating, which
    is valid while the four corners stay within ~pi of each other; a larger
    spread means the cell straddles a vortex core and sampling there aliases.
    """
    grid = u.grid
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    fx = (pts[:, 0] - grid.x0) / grid.h
    fy = (pts[:, 1] - grid.y0) / grid.h
    if ((fx < 0) | (fx > grid.nx - 1) | (fy < 0) | (fy > grid.ny - 1)).any():
        raise GeometryError("sample point outside the grid bounding box")
    fx = np.clip(fx, 0.0, grid.nx - 1 - 1e-12)
    fy = np.clip(fy, 0.0, grid.ny - 1 - 1e-12)
    ix = fx.astype(np.int64)
    iy = fy.astype(np.int64)
    tx = fx - ix
    ty = fy - iy
    corners = [(ix, iy), (ix + 1, iy), (ix, iy + 1), (ix + 1, iy + 1)]
    for cx, cy in corners:
        if not grid.mask[cx, cy].all():
            raise GeometryError("sample stencil leaves the domain mask")
    base = u.theta[ix, iy]
    d = [np.zeros(len(pts))]
    for cx, cy in corners[1:]:
        d.append(wrap(u.theta[cx, cy] - base))
    dmax = np.max(np.abs(np.stack(d)), axis=0)
    if (dmax > 2.5).any():
        raise AliasingError("corner values spread over most of the circle; "
                            "sample crosses a vortex core")
    w = [(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty]
    val = base + sum(wk * dk for wk, dk in zip(w, d))
    return np.mod(val, TWO_PI)


# ---------------------------------------------------------------------------
# Norms

def lp_norm(V, p):
    """Discrete L^p norm by the cell-midpoint rule over masked cells.

    Cells touching a singular-flagged node are excluded, which keeps norms of
    fields with point singularities finite for p < 2.
    """
    p = check_exponent(p, allow_one=True)
    g = V.grid
    ok = g.mask & ~V.singular
    cell_ok = ok[:-1, :-1] & ok[1:, :-1] & ok[:-1, 1:] & ok[1:, 1:]
    if not cell_ok.any():
        raise DataError("no admissible cells under the mask")

    def cellmid(a):
        return 0.25 * (a[:-1, :-1] + a[1:, :-1] + a[:-1, 1:] + a[1:, 1:])

    mag = np.hypot(cellmid(V.vx), cellmid(V.vy))[cell_ok]
    if not np.isfinite(mag).all():
        raise DataError("non-finite cell values in lp_norm")
    return float((np.sum(mag ** p) * g.h ** 2) ** (1.0 / p))


def c_p(p):
    """The directional constant: integral of |cos(g)|^p over a full circle."""
    p = check_exponent(p, allow_one=True)
    val, err = integrate.quad(lambda g: np.abs(np.cos(g)) ** p, 0.0, TWO_PI,
                              points=[np.pi / 2, 3 * np.pi / 2], limit=200,
                              epsrel=1e-12, epsabs=0.0)
    if err > 1e-10 * abs(val):
        raise ToleranceError(f"c_p quadrature error {err:g} above 1e-10 relative")
    return float(val)


def directional_norm_check(V, p, ndirs, mag_floor=1e-12):
    """Worst per-node relative error of the equispaced-direction identity
    ``|V|^p = (1/c_p) * mean over directions of |<V, theta>|^p * 2*pi``."""
    p = check_exponent(p, allow_one=True)
    if ndirs < 8:
        raise DataError("ndirs must be at least 8")
    cp = c_p(p)
    ok = V.grid.mask & ~V.singular
    vx = V.vx[ok]
    vy = V.vy[ok]
    target = np.hypot(vx, vy) ** p
    acc = np.zeros_like(target)
    chunk = 256
    for k0 in range(0, ndirs, chunk):
        th = TWO_PI * np.arange(k0, min(k0 + chunk, ndirs)) / ndirs
        proj = np.abs(np.outer(vx, np.cos(th)) + np.outer(vy, np.sin(th))) ** p
        acc += proj.sum(axis=1)
    approx = acc * TWO_PI / (ndirs * cp)
    sel = target > mag_floor
    if not sel.any():
        return 0.0
    rel = np.abs(approx[sel] - target[sel]) / target[sel]
    return float(rel.max())
