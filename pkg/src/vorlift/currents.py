"""Integer-multiplicity polyline currents: boundary, slicing, level-set
extraction from circle-valued maps, and the coarea identity.

Sign conventions (fixed package-wide, see the flux module for the companion
choices): the boundary operator puts +multiplicity at the end vertex of an
open piece and -multiplicity at the start; level-set polylines are oriented
so that the endpoints inside the domain carry the positive charges of the
map (segments run *into* a +1 vortex); slice crossings are counted positive
when the piece crosses the circle moving inward.  With these three choices
slice totals agree with flux quanta and level-set boundaries agree with
charge lists simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DegenerateSliceError, GeometryError
from .grid import TWO_PI, bilinear_sample, wrap

MERGE_DECIMALS = 9


@dataclass
class Piece:
    vertices: np.ndarray
    multiplicity: int
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise DataError("piece needs an (m, 2) vertex array with m >= 2")
        if (np.hypot(*np.diff(v, axis=0).T) == 0).any():
            raise DataError("consecutive vertices must be distinct")
        if int(self.multiplicity) == 0:
            raise DataError("multiplicity must be a nonzero integer")
        self.vertices = v
        self.multiplicity = int(self.multiplicity)

    def length(self):
        d = float(np.sum(np.hypot(*np.diff(self.vertices, axis=0).T)))
        if self.closed:
            d += float(np.hypot(*(self.vertices[0] - self.vertices[-1])))
        return d


@dataclass
class PolylineCurrent:
    pieces: list = field(default_factory=list)

    def mass(self):
        return sum(abs(p.multiplicity) * p.length() for p in self.pieces)

    def segments(self):
        """All oriented segments as (starts, ends, multiplicities) arrays."""
        starts, ends, mult = [], [], []
        for p in self.pieces:
            v = p.vertices
            a, b = v[:-1], v[1:]
            if p.closed:
                a = np.vstack([a, v[-1]])
                b = np.vstack([b, v[0]])
            starts.append(a)
            ends.append(b)
            mult.append(np.full(len(a), p.multiplicity, dtype=int))
        if not starts:
            return (np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0, dtype=int))
        return np.vstack(starts), np.vstack(ends), np.concatenate(mult)

    def to_json(self):
        return {"pieces": [{"vertices": p.vertices.tolist(),
                            "multiplicity": p.multiplicity,
                            "closed": p.closed} for p in self.pieces]}

    @staticmethod
    def from_json(obj):
        return PolylineCurrent([Piece(np.asarray(q["vertices"], dtype=float),
                                      q["multiplicity"], q.get("closed", False))
                                for q in obj["pieces"]])


@dataclass
class SliceResult:
    points: list  # (location ndarray, sign_multiplicity) tuples

    def total(self):
        return int(sum(m for _, m in self.points))

    def to_json(self):
        return {"points": [{"location": [float(x), float(y)], "multiplicity": int(m)}
                           for (x, y), m in self.points]}


def boundary(current):
    """Signed endpoint masses of a current; coincident points (to 1e-9)
    merge by summation and exact cancellations are dropped."""
    acc = {}
    for p in current.pieces:
        if p.closed:
            continue
        for pt, sgn in ((p.vertices[-1], +1), (p.vertices[0], -1)):
            key = (round(pt[0], MERGE_DECIMALS), round(pt[1], MERGE_DECIMALS))
            loc, m = acc.get(key, (pt, 0))
            acc[key] = (loc, m + sgn * p.multiplicity)
    return [(np.asarray(loc, dtype=float), m) for loc, m in acc.values() if m != 0]


def interior_boundary(current, grid, margin=None):
    """Boundary points farther than ``margin`` from the domain boundary."""
    pts = boundary(current)
    if margin is None:
        margin = 3.0 * grid.h
    if not pts:
        return []
    locs = np.array([p for p, _ in pts])
    keep = grid.boundary_distance(locs) > margin
    return [pm for pm, k in zip(pts, keep) if k]


def cluster_point_masses(points, radius):
    """Merge signed point masses within ``radius`` (greedy union); returns
    (centroid, total multiplicity) pairs with zero totals dropped.  The
    reported location is the |m|-weighted centroid of the merged points."""
    out = []  # [weighted location sum, weight, total multiplicity]
    for loc, m in points:
        loc = np.asarray(loc, dtype=float)
        w = max(abs(m), 1)
        for entry in out:
            if np.hypot(*(entry[0] / entry[1] - loc)) <= radius:
                entry[0] += w * loc
                entry[1] += w
                entry[2] += m
                break
        else:
            out.append([w * loc, w, m])
    return [(s / w, m) for s, w, m in out if m != 0]


def slice_by_circle(current, circle, t=0.0, eps=1e-12):
    """Transversal intersections of the current with the circle of radius
    ``radius + t``; inward crossings count positive."""
    radius = circle.radius + t
    if radius <= 0:
        raise GeometryError("slice level puts the circle at non-positive radius")
    o = np.asarray(circle.center, dtype=float)
    starts, ends, mult = current.segments()
    pts = []
    scale = max(radius, 1.0)
    for a, b, m in zip(starts, ends, mult):
        u = b - a
        ao = a - o
        qa = float(u @ u)
        qb = 2.0 * float(ao @ u)
        qc = float(ao @ ao) - radius * radius
        if abs(qc) < eps * scale ** 2 or abs(qc + qb + qa) < eps * scale ** 2:
            raise DegenerateSliceError("segment vertex lies on the slicing "
                                       "circle; perturb t")
        disc = qb * qb - 4 * qa * qc
        if disc <= 0:
            if abs(disc) < eps * scale ** 4 and disc > -eps * scale ** 4:
                # grazing tangency inside the segment
                s = -qb / (2 * qa)
                if 0.0 < s < 1.0:
                    raise DegenerateSliceError("segment tangent to the slicing "
                                               "circle; perturb t")
            continue
        sq = np.sqrt(disc)
        for s in ((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)):
            if 0.0 < s < 1.0:
                x = a + s * u
                outward = float((x - o) @ u)
                if abs(outward) < eps * scale ** 2:
                    raise DegenerateSliceError("tangential crossing; perturb t")
                sign = -1 if outward > 0 else 1
                pts.append((x, sign * int(m)))
    return SliceResult(pts)


# ---------------------------------------------------------------------------
# Level-set extraction (marching squares on wrapped values)

def _edge_crossings(theta, y, axis):
    """Crossing flags, fractions and signed straddle direction for all grid
    edges along the given axis (0: x-edges, 1: y-edges)."""
    if axis == 0:
        ta, tb = theta[:-1, :], theta[1:, :]
    else:
        ta, tb = theta[:, :-1], theta[:, 1:]
    d = wrap(tb - ta)
    s = wrap(y - ta)
    crossed = ((d > 0) & (s > 0) & (s <= d)) | ((d < 0) & (s < 0) & (s >= d))
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(crossed, s / d, 0.0)
    return crossed, frac


def level_set_current(u, y, singular_cells_out=None):
    """Extract the level set u^{-1}(y) as a multiplicity-1 segment current.

    Cell edges cross the level when the wrapped difference straddles it;
    two-crossing cells yield one segment oriented so that interior endpoints
    carry the map's positive charges (see module docstring); cells with an
    odd crossing count sit on vortex cores and terminate the level lines
    there.  ``y`` must avoid all node values (pre-checked)."""
    g = u.grid
    y = float(np.mod(y, TWO_PI))
    th = u.theta
    if (np.abs(wrap(th[g.mask] - y)) < 1e-12).any():
        raise GeometryError("level hits a node value exactly; redraw y")

    cx, fx = _edge_crossings(th, y, axis=0)   # edges along x: (nx-1, ny)
    cy, fy = _edge_crossings(th, y, axis=1)   # edges along y: (nx, ny-1)
    xs, ys_ = g.xs(), g.ys()

    # crossing coordinates per edge
    px_x = xs[:-1, None] + fx * g.h
    px_y = np.broadcast_to(ys_[None, :], fx.shape)
    py_x = np.broadcast_to(xs[:, None], fy.shape)
    py_y = ys_[None, :-1] + fy * g.h

    m = g.mask
    cell_ok = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]

    # cell-averaged wrapped gradient
    dx = wrap(th[1:, :] - th[:-1, :]) / g.h
    dy = wrap(th[:, 1:] - th[:, :-1]) / g.h
    gx = 0.5 * (dx[:, :-1] + dx[:, 1:])
    gy = 0.5 * (dy[:-1, :] + dy[1:, :])
    # desired tangent direction: +90 deg rotation of the wrapped gradient
    dirx, diry = -gy, gx

    # per-cell edge slots: bottom, top, left, right
    flags = np.stack([cx[:, :-1], cx[:, 1:], cy[:-1, :], cy[1:, :]])
    exs = np.stack([px_x[:, :-1], px_x[:, 1:], py_x[:-1, :], py_x[1:, :]])
    eys = np.stack([px_y[:, :-1], px_y[:, 1:], py_y[:-1, :], py_y[1:, :]])
    flags = flags & cell_ok[None, :, :]
    count = flags.sum(axis=0)

    pieces = []
    if singular_cells_out is not None:
        for i, j in zip(*np.nonzero(cell_ok & (count % 2 == 1))):
            singular_cells_out.append((int(i), int(j)))

    # two-crossing cells, fully vectorized
    ii, jj = np.nonzero(count == 2)
    if len(ii):
        f = flags[:, ii, jj]                       # (4, ncells)
        order = np.argsort(~f, axis=0, kind="stable")
        e0, e1 = order[0], order[1]
        idx = np.arange(len(ii))
        p0 = np.stack([exs[e0, ii, jj], eys[e0, ii, jj]], axis=1)
        p1 = np.stack([exs[e1, ii, jj], eys[e1, ii, jj]], axis=1)
        tang = p1 - p0
        dot = tang[:, 0] * dirx[ii, jj] + tang[:, 1] * diry[ii, jj]
        swap = dot < 0   # tangent aligned with the rotated gradient
        a = np.where(swap[:, None], p1, p0)
        b = np.where(swap[:, None], p0, p1)
        keep = np.hypot(*(b - a).T) > 0
        for pa, pb in zip(a[keep], b[keep]):
            pieces.append(Piece(np.vstack([pa, pb]), 1))
        del idx

    # saddle cells (4 crossings): resolve pairing by the cell gradient
    for i, j in zip(*np.nonzero(count == 4)):
        pts = [np.array([exs[k, i, j], eys[k, i, j]]) for k in range(4)]
        c = np.mean(pts, axis=0)
        ang = [np.arctan2(p[1] - c[1], p[0] - c[0]) for p in pts]
        order = np.argsort(ang)
        pairings = [((order[0], order[1]), (order[2], order[3])),
                    ((order[1], order[2]), (order[3], order[0]))]
        d = np.array([dirx[i, j], diry[i, j]])
        dn = np.hypot(*d)
        if dn == 0:
            pairing = pairings[0]
        else:
            scores = []
            for pr in pairings:
                s = 0.0
                for ia, ib in pr:
                    t = pts[ib] - pts[ia]
                    tn = np.hypot(*t)
                    if tn > 0:
                        s += abs(float(t @ d)) / (tn * dn)
                scores.append(s)
            pairing = pairings[int(np.argmax(scores))]
        for ia, ib in pairing:
            pa, pb = pts[ia], pts[ib]
            t = pb - pa
            if np.hypot(*t) == 0:
                continue
            if t @ d < 0:
                pa, pb = pb, pa
            pieces.append(Piece(np.vstack([pa, pb]), 1))

    return PolylineCurrent(pieces)


@dataclass(frozen=True)
class CoareaResult:
    lhs: float
    rhs: float
    relative_error: float

    def to_json(self):
        return {"lhs": self.lhs, "rhs": self.rhs,
                "relative_error": self.relative_error}


def coarea_check(u, gfun, nlevels, rng=None):
    """Compare the area integral of g*|grad u| against the average of
    level-line integrals of g over equispaced regular levels."""
    if nlevels < 8:
        raise DataError("nlevels must be at least 8")
    g = u.grid
    gfun = np.asarray(gfun, dtype=float)
    if gfun.shape != (g.nx, g.ny):
        raise DataError("g must be sampled on the grid nodes")
    m = g.mask
    cell_ok = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]

    th = u.theta
    dx = wrap(th[1:, :] - th[:-1, :]) / g.h
    dy = wrap(th[:, 1:] - th[:, :-1]) / g.h
    gx = 0.5 * (dx[:, :-1] + dx[:, 1:])
    gy = 0.5 * (dy[:-1, :] + dy[1:, :])
    gradmag = np.hypot(gx, gy)
    gcell = 0.25 * (gfun[:-1, :-1] + gfun[1:, :-1] + gfun[:-1, 1:] + gfun[1:, 1:])
    lhs = float(np.sum(gcell[cell_ok] * gradmag[cell_ok]) * g.h ** 2)

    if rng is None:
        rng = np.random.default_rng(0)
    rhs_sum = 0.0
    for k in range(nlevels):
        y = (k + 0.5) * TWO_PI / nlevels
        for _ in range(8):
            try:
                cur = level_set_current(u, y)
                break
            except GeometryError:
                y = float(np.mod(y + 1e-7 * (1 + rng.random()), TWO_PI))
        else:
            raise GeometryError("could not find a regular level")
        starts, ends, _ = cur.segments()
        if len(starts) == 0:
            continue
        mids = 0.5 * (starts + ends)
        lens = np.hypot(*(ends - starts).T)
        (gv,) = bilinear_sample(g, (gfun,), mids, zero_extend=True)
        rhs_sum += float(np.sum(gv * lens))
    rhs = rhs_sum * TWO_PI / nlevels

    if lhs == 0.0 and rhs != 0.0:
        raise DataError("coarea inconsistency: zero area integral with "
                        "nonzero level-line integral")
    rel = 0.0 if lhs == rhs == 0.0 else abs(lhs - rhs) / abs(lhs)
    return CoareaResult(lhs, rhs, float(rel))
