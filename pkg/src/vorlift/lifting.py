"""Lifting between L^p vector fields and circle-valued maps.

``lift`` splits V into the explicit singular field of its charges plus a
remainder, integrates the remainder's rotated components along a
breadth-first spanning tree of the grid graph, and verifies quantization of
the loop residuals against the full field.  ``unlift`` is the wrapped
finite-difference rotated gradient; the perpendicular convention is
``grad_perp(u) = (d2 u, -d1 u)`` so that u = Arg lifts V = x/|x|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .errors import DataError, GeometryError, LiftError
from .flux import Circle, boundary_degree, circle_flux
from .grid import TWO_PI, CircleValuedField, VectorField2D, check_exponent, lp_norm, wrap


@dataclass
class ChargeSet:
    """Finite list of point singularities (x_i, n_i), n_i nonzero integers."""

    points: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        n = np.asarray(self.n, dtype=int).reshape(-1)
        if len(pts) != len(n):
            raise DataError("points and n must have equal length")
        if (n == 0).any():
            raise DataError("charges must be nonzero integers")
        self.points = pts
        self.n = n

    def __len__(self):
        return len(self.n)

    def total(self):
        return int(self.n.sum())

    def min_separation(self):
        if len(self) < 2:
            return np.inf
        d = np.hypot(self.points[:, 0, None] - self.points[None, :, 0],
                     self.points[:, 1, None] - self.points[None, :, 1])
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def validate_on(self, grid):
        if len(self) == 0:
            return
        if self.min_separation() < 4.0 * grid.h:
            raise GeometryError("charge locations closer than 4h")
        if (grid.boundary_distance(self.points) <= 0).any():
            raise GeometryError("charge outside the domain mask")

    def distance_to(self, pts):
        """Distance from each query point to the nearest charge."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if len(self) == 0:
            return np.full(len(pts), np.inf)
        return np.min(np.hypot(pts[:, 0, None] - self.points[None, :, 0],
                               pts[:, 1, None] - self.points[None, :, 1]), axis=1)

    def to_json(self):
        return [{"x": float(x), "y": float(y), "n": int(n)}
                for (x, y), n in zip(self.points, self.n)]

    @staticmethod
    def from_json(obj):
        return ChargeSet(np.array([[c["x"], c["y"]] for c in obj], dtype=float).reshape(-1, 2),
                         np.array([c["n"] for c in obj], dtype=int))

    @staticmethod
    def empty():
        return ChargeSet(np.zeros((0, 2)), np.zeros(0, dtype=int))


@dataclass
class LiftResult:
    u: CircleValuedField
    max_loop_residual: float
    boundary_degree: int


def _singular_arrays(charges, grid):
    xx, yy = grid.meshgrid()
    vx = np.zeros_like(xx)
    vy = np.zeros_like(yy)
    us = np.zeros_like(xx)
    sing = np.zeros(xx.shape, dtype=bool)
    for (cx, cy), n in zip(charges.points, charges.n):
        dx = xx - cx
        dy = yy - cy
        r2 = dx * dx + dy * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            vx += n * dx / r2
            vy += n * dy / r2
        us += n * np.arctan2(dy, dx)
        sing |= r2 <= grid.h ** 2
    vx[~np.isfinite(vx)] = 0.0
    vy[~np.isfinite(vy)] = 0.0
    return vx, vy, us, sing


def green_field(charges, grid):
    """Superposition of unit vortices: V(x) = sum n_i (x - x_i)/|x - x_i|^2,
    with nodes within h of a charge flagged singular."""
    charges.validate_on(grid)
    vx, vy, _, sing = _singular_arrays(charges, grid)
    return VectorField2D(grid, vx, vy, singular=sing)


def _grid_graph(grid):
    """Masked-node index map plus the edge list of the grid graph.

    Edges are (a, b, axis) with b the +x or +y neighbor of a."""
    m = grid.mask
    idx = -np.ones((grid.nx, grid.ny), dtype=np.int64)
    nodes = np.argwhere(m)
    idx[m] = np.arange(len(nodes))
    edges = []
    ex = m[:-1, :] & m[1:, :]
    a = idx[:-1, :][ex]
    b = idx[1:, :][ex]
    edges.append((a, b, np.zeros(len(a), dtype=np.int8)))
    ey = m[:, :-1] & m[:, 1:]
    a = idx[:, :-1][ey]
    b = idx[:, 1:][ey]
    edges.append((a, b, np.ones(len(a), dtype=np.int8)))
    ea = np.concatenate([e[0] for e in edges])
    eb = np.concatenate([e[1] for e in edges])
    ax = np.concatenate([e[2] for e in edges])
    return nodes, idx, ea, eb, ax


def _edge_increments(vx, vy, mask, ea, eb, ax, h):
    """Trapezoid integrals of the rotated field along +x/+y edges; ea/eb
    index the compacted masked-node arrays."""
    wx = vx[mask] if vx.ndim == 2 else vx
    wy = vy[mask] if vy.ndim == 2 else vy
    inc = np.where(ax == 0,
                   -0.5 * h * (wy[ea] + wy[eb]),
                   0.5 * h * (wx[ea] + wx[eb]))
    return inc


def default_lift_tol(V):
    vmag = V.magnitude()[V.grid.mask & ~V.singular]
    vinf = float(np.percentile(vmag, 99.5)) if vmag.size else 0.0
    return max(1e-6, 10.0 * V.grid.h ** 2 * vinf)


def _verify_charges(V, charges, grid):
    for k, ((cx, cy), n) in enumerate(zip(charges.points, charges.n)):
        others = np.delete(charges.points, k, axis=0)
        dother = np.inf if len(others) == 0 else float(
            np.min(np.hypot(others[:, 0] - cx, others[:, 1] - cy)))
        dbnd = float(grid.boundary_distance([[cx, cy]])[0])
        r_hi = min(0.45 * dother, dbnd - 3 * grid.h, 0.12)
        r = min(r_hi, max(6 * grid.h, 0.04))
        if r < 2.5 * grid.h:
            raise LiftError("cannot place a verification circle around "
                            f"charge at ({cx:g}, {cy:g})")
        res = circle_flux(V, Circle((cx, cy), r), tol=1e-4)
        if res.quantum != n or res.residual > 1.5:
            raise LiftError(f"charge ({cx:g}, {cy:g}, {n}) not confirmed by "
                            f"flux (quantum {res.quantum}, residual "
                            f"{res.residual:.3g})")


def lift(V, charges=None, tol=None, root=None, verify_charges=True,
         residual_exclusion=None):
    """Lift V to a circle-valued u with grad_perp(u) = V.

    Raises :class:`LiftError` when any loop residual away from the declared
    charges exceeds ``tol`` (the field is not flux-quantized at this
    resolution or the charge list is incomplete)."""
    grid = V.grid
    if charges is None:
        charges = ChargeSet.empty()
    charges.validate_on(grid)
    if tol is None:
        tol = default_lift_tol(V)
    if verify_charges and len(charges):
        _verify_charges(V, charges, grid)

    svx, svy, us, _ = _singular_arrays(charges, grid)
    wx = V.vx - svx
    wy = V.vy - svy

    nodes, idx, ea, eb, ax = _grid_graph(grid)
    nmask = len(nodes)
    graph = csr_matrix((np.ones(len(ea)), (ea, eb)), shape=(nmask, nmask))
    if root is None:
        root = 0  # argwhere order: first masked node, on the mask boundary
    order, pred = breadth_first_order(graph, i_start=root, directed=False)
    if len(order) != nmask:
        raise GeometryError("mask is not connected under the grid graph")

    inc_w = _edge_increments(wx, wy, grid.mask, ea, eb, ax, grid.h)
    # increment from predecessor, per node
    node_inc = np.zeros(nmask)
    has = np.zeros(nmask, dtype=bool)
    for a, b, inc in ((ea, eb, inc_w), (eb, ea, -inc_w)):
        sel = pred[b] == a
        node_inc[b[sel]] = inc[sel]
        has[b[sel]] = True
    if not has[order[1:]].all():
        raise GeometryError("spanning tree misses increments (internal)")

    psi = np.zeros(nmask)
    pr = pred
    for k in order[1:]:
        psi[k] = psi[pr[k]] + node_inc[k]

    theta = np.zeros((grid.nx, grid.ny))
    theta[grid.mask] = np.mod(us[grid.mask] + psi, TWO_PI)
    # gauge: circular mean zero over the mask
    z = np.exp(1j * theta[grid.mask]).mean()
    shift = float(np.angle(z)) if abs(z) > 1e-12 else 0.0
    theta[grid.mask] = np.mod(theta[grid.mask] - shift, TWO_PI)
    u = CircleValuedField(grid, theta)

    # loop residuals against the full field, away from the cores
    flat = u.theta.ravel()
    midpts = 0.5 * (nodes[ea] + nodes[eb]) * grid.h
    midpts[:, 0] += grid.x0
    midpts[:, 1] += grid.y0
    excl = residual_exclusion
    if excl is None:
        excl = max(8.0 * grid.h, 0.04)
    away = charges.distance_to(midpts) > excl
    nodeflat = nodes[:, 0] * grid.ny + nodes[:, 1]
    inc_v = _edge_increments(V.vx, V.vy, grid.mask, ea, eb, ax, grid.h)
    res = wrap(flat[nodeflat[eb]] - flat[nodeflat[ea]] - inc_v)
    max_res = float(np.abs(res[away]).max()) if away.any() else 0.0
    if max_res > tol:
        worst = np.argsort(-np.abs(res * away))[:5]
        locs = [tuple(np.round(midpts[w], 4)) for w in worst]
        raise LiftError(f"loop residual {max_res:.3g} exceeds tol {tol:.3g}; "
                        f"field not liftable at this resolution or charge "
                        f"list incomplete (worst edges near {locs})")

    deg = boundary_degree(u)
    if deg != charges.total():
        raise LiftError(f"boundary degree {deg} != sum of charges "
                        f"{charges.total()}")
    return LiftResult(u, max_res, deg)


def unlift(u):
    """Rotated wrapped gradient grad_perp(u) = (d2 u, -d1 u); centered
    differences inside, one-sided at the mask boundary."""
    g = u.grid
    m = g.mask
    th = u.theta

    def axis_deriv(axis):
        d = wrap(np.diff(th, axis=axis)) / g.h
        if axis == 0:
            valid = m[:-1, :] & m[1:, :]
            left = np.zeros_like(th)
            right = np.zeros_like(th)
            lv = np.zeros(th.shape, dtype=bool)
            rv = np.zeros(th.shape, dtype=bool)
            left[1:, :] = d
            lv[1:, :] = valid
            right[:-1, :] = d
            rv[:-1, :] = valid
        else:
            valid = m[:, :-1] & m[:, 1:]
            left = np.zeros_like(th)
            right = np.zeros_like(th)
            lv = np.zeros(th.shape, dtype=bool)
            rv = np.zeros(th.shape, dtype=bool)
            left[:, 1:] = d
            lv[:, 1:] = valid
            right[:, :-1] = d
            rv[:, :-1] = valid
        both = lv & rv
        out = np.zeros_like(th)
        out[both] = 0.5 * (left[both] + right[both])
        only_l = lv & ~rv
        out[only_l] = left[only_l]
        only_r = rv & ~lv
        out[only_r] = right[only_r]
        return out

    d1 = axis_deriv(0)
    d2 = axis_deriv(1)
    return VectorField2D(g, d2, -d1)


def roundtrip_exclusion_radius(grid):
    """Exclusion halo around charges for round-trip error reporting; shrinks
    like sqrt(h) so the excluded area vanishes while keeping the difference
    stencil in its asymptotic regime."""
    scale = 0.5 * min(grid.xmax - grid.x0, grid.ymax - grid.y0)
    return 1.5 * np.sqrt(grid.h * scale)


def roundtrip(V, charges=None, p=2.0, tol=None, exclusion_radius=None):
    """Lift, unlift and report the L^p discrepancy off the singular halos,
    plus per-charge flux agreement of the reconstruction."""
    p = check_exponent(p, allow_one=True)
    if charges is None:
        charges = ChargeSet.empty()
    result = lift(V, charges, tol=tol)
    Vr = unlift(result.u)
    grid = V.grid
    if exclusion_radius is None:
        exclusion_radius = roundtrip_exclusion_radius(grid)
    sing = V.singular.copy()
    if len(charges):
        pts = grid.node_points(mask_only=False).reshape(grid.nx, grid.ny, 2)
        d = charges.distance_to(pts.reshape(-1, 2)).reshape(grid.nx, grid.ny)
        sing |= d <= exclusion_radius
    diff = VectorField2D(grid, V.vx - Vr.vx, V.vy - Vr.vy, singular=sing)
    ref = VectorField2D(grid, V.vx, V.vy, singular=sing)
    err = lp_norm(diff, p)
    ref_norm = lp_norm(ref, p)
    rel = err / ref_norm if ref_norm > 0 else 0.0
    flux_ok = []
    for (cx, cy), n in zip(charges.points, charges.n):
        dbnd = float(grid.boundary_distance([[cx, cy]])[0])
        r = min(0.1, max(2.5 * grid.h, exclusion_radius * 1.5))
        r = min(r, dbnd - 3 * grid.h)
        fr = circle_flux(Vr, Circle((cx, cy), r), tol=1e-4)
        flux_ok.append(fr.quantum == n)
    return {
        "error_lp": float(err),
        "relative_error": float(rel),
        "exclusion_radius": float(exclusion_radius),
        "max_loop_residual": result.max_loop_residual,
        "boundary_degree": result.boundary_degree,
        "charge_flux_agreement": flux_ok,
    }


def lift_with_current(V, charges, current, tol=None, margin=None):
    """Lift V whose divergence combines point charges with the boundary of
    an integral 1-current: the current contributes its interior endpoint
    masses as additional charges (a 2*pi jump of the would-be real lift per
    signed crossing, invisible modulo 2*pi)."""
    from .currents import interior_boundary

    if charges is None:
        charges = ChargeSet.empty()
    extra = interior_boundary(current, V.grid, margin=margin)
    if extra:
        pts = np.vstack([charges.points] + [[loc] for loc, _ in extra])
        ns = np.concatenate([charges.n, [m for _, m in extra]])
        merged = ChargeSet(pts, ns)
    else:
        merged = charges
    return lift(V, merged, tol=tol)
