"""Deterministic test fields: model vortex, swirls, charge constellations.

Running ``python -m vorlift.fixtures [outdir]`` regenerates the checked-in
``fixtures/`` directory (VF2D fields plus JSON charge lists).
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from . import fileio
from .grid import TWO_PI, GridSpec, VectorField2D
from .lifting import ChargeSet, green_field, lift


def disk_grid(n=256, radius=1.0):
    return GridSpec.disk(n, radius)


def model_vortex(grid=None, n=256, center=(0.0, 0.0)):
    """V = x/|x|^2 around the center: the unit-degree vortex, div V = 2*pi*delta."""
    if grid is None:
        grid = disk_grid(n)
    return green_field(ChargeSet(np.array([center]), np.array([1])), grid)


def swirl_field(grid, amplitude=0.6, k=2.5):
    """Smooth divergence-free field: perpendicular gradient of the stream
    potential psi = A sin(kx) sin(ky)."""
    xx, yy = grid.meshgrid()
    # V = (d_y psi, -d_x psi) is exactly divergence free
    vx = amplitude * k * np.sin(k * xx) * np.cos(k * yy)
    vy = -amplitude * k * np.cos(k * xx) * np.sin(k * yy)
    return VectorField2D(grid, vx, vy)


def charge_field(grid, points, ns, swirl_amplitude=0.0):
    charges = ChargeSet(np.asarray(points, dtype=float),
                        np.asarray(ns, dtype=int))
    V = green_field(charges, grid)
    if swirl_amplitude:
        V = V + swirl_field(grid, amplitude=swirl_amplitude)
    return V, charges


def dipole_field(grid, separation=0.8):
    s = separation / 2.0
    return charge_field(grid, [[-s, 0.0], [s, 0.0]], [1, -1])


def two_charge_field(grid, swirl_amplitude=0.35):
    return charge_field(grid, [[-0.45, -0.1], [0.4, 0.25]], [1, -1],
                        swirl_amplitude=swirl_amplitude)


def four_charge_field(grid):
    return charge_field(grid, [[-0.5, -0.4], [0.5, -0.35], [0.45, 0.5],
                               [-0.4, 0.45]], [1, -1, 2, 1])


def linear_phase_field(nx=256, ny=256, kx=3.0, ky=2.0):
    """Rectangle fixture u = kx*x + ky*y (mod 2*pi) and its companion
    V = (ky, -kx)."""
    grid = GridSpec.rect(nx, ny, x0=0.0, y0=0.0, width=1.0, height=1.0)
    xx, yy = grid.meshgrid()
    theta = np.mod(kx * xx + ky * yy, TWO_PI)
    from .grid import CircleValuedField
    u = CircleValuedField(grid, theta)
    V = VectorField2D(grid, np.full_like(xx, ky), np.full_like(xx, -kx))
    return u, V


def arg_annulus(n=256, outer=1.0, inner=0.25):
    """Annulus grid with u = Arg(x); the model phase away from its core."""
    grid = GridSpec.annulus(n, outer=outer, inner=inner)
    xx, yy = grid.meshgrid()
    theta = np.mod(np.arctan2(yy, xx), TWO_PI)
    from .grid import CircleValuedField
    return CircleValuedField(grid, theta)


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def paired_field(grid, pairs, taper=(0.78, 0.92), swirl_amplitude=0.0,
                 swirl_k=2.5):
    """Compactly supported companion field of a zero-degree constellation.

    Each (plus, minus) pair contributes the single-valued angle
    arg((z - plus)/(z - minus)), smooth away from the connecting segment,
    so the summed phase can be tapered to a constant near the domain
    boundary without breaking quantization; the returned field is the
    wrapped gradient of the tapered phase and vanishes identically outside
    the taper radius."""
    from .grid import CircleValuedField
    from .lifting import unlift
    xx, yy = grid.meshgrid()
    z = (xx - grid.center[0]) + 1j * (yy - grid.center[1])
    w = np.zeros_like(xx)
    pts, ns = [], []
    for plus, minus in pairs:
        zp = complex(plus[0] - grid.center[0], plus[1] - grid.center[1])
        zm = complex(minus[0] - grid.center[0], minus[1] - grid.center[1])
        with np.errstate(divide="ignore", invalid="ignore"):
            w += np.angle((z - zp) / (z - zm))
        pts += [list(plus), list(minus)]
        ns += [1, -1]
    w[~np.isfinite(w)] = 0.0
    rho = np.abs(z)
    r0, r1 = taper
    s = _smoothstep((r1 - rho) / (r1 - r0))
    theta = s * w
    if swirl_amplitude:
        psi = swirl_amplitude * np.sin(swirl_k * xx) * np.sin(swirl_k * yy)
        theta = theta + s * psi
    u = CircleValuedField(grid, np.mod(theta, TWO_PI))
    V = unlift(u)
    charges = ChargeSet(np.array(pts), np.array(ns))
    for (cx, cy) in charges.points:
        near = (xx - cx) ** 2 + (yy - cy) ** 2 <= grid.h ** 2
        V.singular |= near
    return V, charges, u


def random_charge_set(grid, rng, max_charges=8, max_n=3, min_sep=None,
                      margin=None, snap=True):
    """Random admissible charge constellation: at most ``max_charges``
    charges with |n| <= max_n, pairwise separation >= min_sep, kept a
    margin inside the boundary; positions snapped near cell centers so
    that no charge sits on a grid node."""
    if min_sep is None:
        min_sep = max(8.0 * grid.h, 0.25)
    if margin is None:
        margin = max(10.0 * grid.h, 0.2)
    k = int(rng.integers(1, max_charges + 1))
    pts = []
    for _ in range(400):
        if len(pts) == k:
            break
        cand = rng.uniform([grid.x0 + margin, grid.y0 + margin],
                           [grid.xmax - margin, grid.ymax - margin])
        if grid.boundary_distance(cand)[0] < margin:
            continue
        if pts and np.min(np.hypot(*(np.array(pts) - cand).T)) < min_sep:
            continue
        pts.append(cand)
    pts = np.array(pts).reshape(-1, 2)
    if snap:
        pts = grid.h * (np.floor((pts - [grid.x0, grid.y0]) / grid.h) + 0.5) \
            + [grid.x0, grid.y0]
    ns = rng.integers(1, max_n + 1, size=len(pts)) \
        * rng.choice([-1, 1], size=len(pts))
    return ChargeSet(pts, ns)


def saturating_charge_family(grid):
    """Many-vortex constellation whose bad-ball count grows as the cover
    radius shrinks: isolated charge pairs stay visible at every radius
    while dipoles at shrinking separation scales only resolve once the
    balls are smaller than the pair distance.  Zero total degree, so the
    companion field tapers to zero at the domain boundary."""
    pairs = []
    # well-separated pairs on a ring, visible at every radius
    for j in range(5):
        a = TWO_PI * j / 5
        b = a + TWO_PI / 10
        pairs.append(([0.68 * np.cos(a), 0.68 * np.sin(a)],
                      [0.68 * np.cos(b), 0.68 * np.sin(b)]))
    # dipoles resolving below r ~ 0.15
    for cx, cy, ang in [(-0.3, 0.0, 0.3), (0.3, 0.05, 1.2)]:
        d = 0.30 / 2
        u = np.array([np.cos(ang), np.sin(ang)])
        pairs.append(([cx + d * u[0], cy + d * u[1]],
                      [cx - d * u[0], cy - d * u[1]]))
    # tighter dipoles resolving below r ~ 0.075
    for cx, cy, ang in [(0.0, 0.35, 0.7), (0.0, -0.35, 2.1), (-0.05, 0.0, 1.7)]:
        d = 0.15 / 2
        u = np.array([np.cos(ang), np.sin(ang)])
        pairs.append(([cx + d * u[0], cy + d * u[1]],
                      [cx - d * u[0], cy - d * u[1]]))
    # tightest dipoles, visible only at the smallest cover radius
    for cx, cy, ang in [(0.45, -0.28, 0.2), (-0.45, 0.25, 1.1),
                        (0.2, 0.5, 2.4), (-0.2, -0.52, 0.9)]:
        d = 0.08 / 2
        u = np.array([np.cos(ang), np.sin(ang)])
        pairs.append(([cx + d * u[0], cy + d * u[1]],
                      [cx - d * u[0], cy - d * u[1]]))
    V, charges, _ = paired_field(grid, pairs)
    return V, charges


def write_all(outdir="fixtures", n=128):
    os.makedirs(outdir, exist_ok=True)
    grid = disk_grid(n)

    def dump(name, V, charges=None):
        fileio.write_vector_field(os.path.join(outdir, name + ".vf2d"), V)
        if charges is not None:
            with open(os.path.join(outdir, name + ".charges.json"), "w") as f:
                json.dump(charges.to_json(), f, sort_keys=True, indent=2)

    vortex = model_vortex(grid)
    dump("model_vortex", vortex,
         ChargeSet(np.array([[0.0, 0.0]]), np.array([1])))
    dump("swirl", swirl_field(grid))
    V, ch = dipole_field(grid)
    dump("dipole", V, ch)
    V, ch = two_charge_field(grid)
    dump("two_charge", V, ch)
    res = lift(V, ch)
    fileio.write_circle_field(os.path.join(outdir, "two_charge_lift.vf2d"),
                              res.u)
    V, ch = four_charge_field(grid)
    dump("four_charge", V, ch)
    _, Vlin = linear_phase_field(n, n)
    dump("linear_phase", Vlin)
    return outdir


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    print(write_all(out))
