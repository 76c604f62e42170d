"""Approximation of a flux-quantized field by one with finitely many
point singularities.

Pipeline: cover the domain with overlapping balls, trace the field on each
circle, mollify the traces so the normal flux snaps exactly onto 2*pi*Z,
then rebuild the interior ball by ball — a Fourier harmonic extension where
the flux quantum is zero, a divergence-free radial extension where it is
not.  Balls are processed sequentially and each writes over the nodes it
covers, so a vortex swallowed by a later good ball loses its singularity
and only the last surviving bad-ball centers remain as charges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, QuantizationError
from .flux import Circle
from .grid import TWO_PI, check_exponent, lp_norm, sample_vector
from .cover import perturb_ball, shifted_cover
from .lifting import ChargeSet


@dataclass
class CircleTrace:
    """Equispaced normal/tangential samples of a field on one circle."""

    ball: Circle
    angles: np.ndarray
    normal: np.ndarray
    tangential: np.ndarray

    def __post_init__(self):
        n = len(self.angles)
        if n < 64 or n & (n - 1):
            raise GeometryError("trace sample count must be a power of two >= 64")

    @property
    def nsamples(self):
        return len(self.angles)

    def flux(self):
        """Trapezoid integral of V.n over the circle (exact for the
        equispaced periodic samples)."""
        return float(self.ball.radius * TWO_PI / self.nsamples
                     * np.sum(self.normal))

    def quantum(self):
        return int(np.rint(self.flux() / TWO_PI))

    def residual(self):
        return abs(self.flux() - TWO_PI * self.quantum())


def trace_circle(V, c, nsamples=256, zero_extend=True):
    """Sample V.n and V.tau at equispaced angles on a circle."""
    if c.radius < 2.0 * V.grid.h:
        raise GeometryError("trace circle radius below 2h is unresolved")
    pts, th = c.points(nsamples)
    vals = sample_vector(V, pts, zero_extend=zero_extend)
    ct, st = np.cos(th), np.sin(th)
    vn = vals[:, 0] * ct + vals[:, 1] * st
    vt = -vals[:, 0] * st + vals[:, 1] * ct
    return CircleTrace(c, th, vn, vt)


def _bump_kernel(angles, width):
    """Unit-mass C^infty bump of the given angular half-width, sampled on
    the trace's angle lattice (wrapped to [-pi, pi))."""
    d = np.angle(np.exp(1j * angles))
    k = np.zeros_like(d)
    inside = np.abs(d) < width
    x = d[inside] / width
    k[inside] = np.exp(-1.0 / (1.0 - x * x))
    s = k.sum()
    if s <= 0:
        raise GeometryError("mollifier width below trace resolution")
    return k / s


def mollify_trace(t, width, tol=1.0):
    """Smooth both trace components by periodic convolution with a bump
    kernel, then add the constant to the normal component that makes the
    total flux an exact multiple of 2*pi.

    Convolution against a unit-mass kernel preserves the mean, so the snap
    constant is bounded by the pre-existing flux residual; a residual above
    ``tol`` (radians of flux) means the input was not flux-quantized at
    this resolution."""
    if not 0 < width < np.pi / 4:
        raise GeometryError("mollifier width must lie in (0, pi/4)")
    kernel = _bump_kernel(t.angles, width)
    fk = np.fft.rfft(kernel)
    vn = np.fft.irfft(np.fft.rfft(t.normal) * fk, t.nsamples)
    vt = np.fft.irfft(np.fft.rfft(t.tangential) * fk, t.nsamples)
    out = CircleTrace(t.ball, t.angles.copy(), vn, vt)
    res = out.residual()
    if res > tol:
        raise QuantizationError(
            f"flux residual {res:.3g} above tol {tol:g} before snapping")
    q = out.quantum()
    out.normal = out.normal + (TWO_PI * q - out.flux()) / (TWO_PI * t.ball.radius)
    return out


@dataclass
class HarmonicExtension:
    """Divergence-free field on a good ball with prescribed normal trace.

    Built as the perpendicular gradient of the harmonic extension of the
    angular antiderivative of the (mean-adjusted) normal trace, plus the
    constant mean field."""

    ball: Circle
    coeffs: np.ndarray          # one-sided Fourier coefficients a_k, k>=0
    mean_field: np.ndarray

    def evaluate(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        cx, cy = self.ball.center
        R = self.ball.radius
        dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
        rho = np.hypot(dx, dy)
        th = np.arctan2(dy, dx)
        ks = np.arange(len(self.coeffs))
        # v_rad = (1/rho) dA/dtheta, v_tan = -dA/drho; both carry rho^{k-1}
        # so the k=1 mode stays finite at the center.
        vr = np.zeros(len(pts))
        vt = np.zeros(len(pts))
        for k in ks[1:]:
            a = self.coeffs[k]
            radial = (rho / R) ** (k - 1) / R
            e = np.exp(1j * k * th)
            vr += 2.0 * np.real(1j * k * a * e) * radial
            vt += -2.0 * k * np.real(a * e) * radial
        ct, st = np.cos(th), np.sin(th)
        vx = vr * ct - vt * st + self.mean_field[0]
        vy = vr * st + vt * ct + self.mean_field[1]
        return np.stack([vx, vy], axis=1)

    def grad_energy_l2(self):
        """Exact squared-root Dirichlet energy ||grad A||_{L2(ball)} from
        the Fourier coefficients."""
        ks = np.arange(len(self.coeffs))
        # two-sided spectrum of a real function: |a_{-k}| = |a_k|
        return float(np.sqrt(np.sum(2.0 * TWO_PI * ks
                                    * np.abs(self.coeffs) ** 2)))

    def boundary_tangential_energy(self):
        """Exact ||d a/d tau||_{L2(circle)} of the boundary antiderivative."""
        ks = np.arange(len(self.coeffs))
        return float(np.sqrt(np.sum(2.0 * TWO_PI * ks ** 2
                                    * np.abs(self.coeffs) ** 2)
                             / self.ball.radius))


def harmonic_extension(t, mean_field=(0.0, 0.0), K=None, mean_tol=1e-8):
    """Extend a zero-flux trace into its ball as a divergence-free field.

    The normal trace minus the mean field's normal contribution must have
    zero circle integral (the ball is good); the extension reproduces that
    trace to Fourier-truncation accuracy and its rotational part minimizes
    the Dirichlet energy among fields with this normal trace."""
    mean_field = np.asarray(mean_field, dtype=float)
    R = t.ball.radius
    ct, st = np.cos(t.angles), np.sin(t.angles)
    adj = t.normal - mean_field[0] * ct - mean_field[1] * st
    mean = float(np.mean(adj))
    if abs(mean) * TWO_PI * R > max(mean_tol, 1e-12):
        raise GeometryError(
            f"adjusted normal trace has nonzero flux {mean * TWO_PI * R:.3g}; "
            "ball is not good")
    n = t.nsamples
    if K is None:
        K = n // 2
    nk = np.fft.rfft(adj - mean) / n
    ks = np.arange(len(nk))
    a = np.zeros_like(nk)
    a[1:] = R * nk[1:] / (1j * ks[1:])
    if K + 1 < len(a):
        a = a[:K + 1]
    return HarmonicExtension(t.ball, a, mean_field)


@dataclass
class RadialExtension:
    """Divergence-free radial extension of a circle trace into its ball:
    (R/rho) * normal(theta) along the outward radial direction.  The node
    at the exact center is singular."""

    ball: Circle
    trace: CircleTrace

    def evaluate(self, pts, floor=1e-12):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        cx, cy = self.ball.center
        R = self.ball.radius
        dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
        rho = np.maximum(np.hypot(dx, dy), floor)
        th = np.mod(np.arctan2(dy, dx), TWO_PI)
        n = self.trace.nsamples
        ang = np.concatenate([self.trace.angles, [TWO_PI]])
        val = np.concatenate([self.trace.normal, self.trace.normal[:1]])
        vn = np.interp(th, ang, val)
        mag = R / rho * vn
        return np.stack([mag * dx / rho, mag * dy / rho], axis=1)


def radial_extension(t, c=None):
    return RadialExtension(c if c is not None else t.ball, t)


@dataclass
class ApproxReport:
    per_ball_errors: np.ndarray
    total_error: float
    epsilon_m: float
    charges: ChargeSet
    radius: float
    nballs: int
    nbad: int

    def to_json(self):
        return {
            "per_ball_errors": self.per_ball_errors.tolist(),
            "total_error": self.total_error,
            "epsilon_m": self.epsilon_m,
            "charges": self.charges.to_json(),
            "radius": self.radius,
            "nballs": self.nballs,
            "nbad": self.nbad,
        }


def _node_key(grid, pt):
    ix = int(np.rint((pt[0] - grid.x0) / grid.h))
    iy = int(np.rint((pt[1] - grid.y0) / grid.h))
    return ix, iy


def approximate(V, p, r, width=TWO_PI / 64, K=None, seed=0, nsamples=256,
                tol=1.0, nshifts=16):
    """Approximate a flux-quantized field by one with finitely many point
    singularities, to accuracy vanishing with the cover radius ``r``.

    Returns the approximant, the surviving singular charges and an error
    report.  Balls are applied sequentially; every ball re-traces the
    current composed field, so its flux quantum counts only singularities
    that are still alive when it is processed."""
    p = check_exponent(p, allow_one=True)
    grid = V.grid
    cover = shifted_cover(V, r, p, nshifts=nshifts, seed=seed,
                          avoid_points=np.argwhere(V.singular) * grid.h
                          + [grid.x0, grid.y0] if V.singular.any() else None,
                          nsamples=nsamples)
    xx, yy = grid.meshgrid()
    W = V.copy()
    W.singular = V.singular.copy()
    owner = np.full((grid.nx, grid.ny), -1, dtype=int)
    quanta = {}                 # node key -> quantum, for surviving cores
    eps_m = 0.0
    rng = np.random.default_rng(seed + 1)

    order = np.argsort(-cover.radii)  # larger balls first, small ones refine
    for i in order:
        # keep the trace circle clear of every core that is still alive
        avoid = np.argwhere(W.singular) * grid.h + [grid.x0, grid.y0]
        ctr, rad = perturb_ball(cover.centers[i], float(cover.radii[i]),
                                cover.r, avoid, grid.h, rng)
        c = Circle(tuple(ctr), rad)
        raw = trace_circle(W, c, nsamples=nsamples, zero_extend=True)
        t = mollify_trace(raw, width, tol=tol)
        eps_m = max(eps_m, float(np.max(np.abs(t.normal - raw.normal))),
                    float(np.max(np.abs(t.tangential - raw.tangential))))
        q = t.quantum()
        inside = ((xx - c.center[0]) ** 2 + (yy - c.center[1]) ** 2
                  < c.radius ** 2) & grid.mask
        if not inside.any():
            continue
        pts = np.stack([xx[inside], yy[inside]], axis=1)
        sing_inside = np.argwhere(W.singular & inside)
        if q == 0:
            mean_field = np.array([W.vx[inside].mean(), W.vy[inside].mean()])
            ext = harmonic_extension(t, mean_field, K=K)
            vals = ext.evaluate(pts)
            core_key = None
        else:
            # keep the core where it already lives: subtract q times the
            # unit vortex there from the trace (zero-flux residual) and
            # extend the residual harmonically
            if len(sing_inside):
                d2 = np.sum((sing_inside * grid.h
                             + [grid.x0, grid.y0] - ctr) ** 2, axis=1)
                core_key = tuple(sing_inside[int(np.argmin(d2))])
            else:
                core_key = _node_key(grid, ctr)
            core = np.array([grid.x0 + core_key[0] * grid.h,
                             grid.y0 + core_key[1] * grid.h])
            cpts, th = c.points(t.nsamples)
            rel = cpts - core
            r2 = np.sum(rel ** 2, axis=1)
            vtx = q * rel / r2[:, None]
            ct, st = np.cos(th), np.sin(th)
            res = CircleTrace(c, t.angles.copy(),
                              t.normal - vtx[:, 0] * ct - vtx[:, 1] * st,
                              t.tangential + vtx[:, 0] * st - vtx[:, 1] * ct)
            ext = harmonic_extension(res, (0.0, 0.0), K=K, mean_tol=1e-3)
            vals = ext.evaluate(pts)
            prel = pts - core
            pr2 = np.maximum(np.sum(prel ** 2, axis=1), (0.25 * grid.h) ** 2)
            vals = vals + q * prel / pr2[:, None]
        # overwriting clears every singularity previously inside the ball
        for ix, iy in sing_inside:
            W.singular[ix, iy] = False
            quanta.pop((ix, iy), None)
        W.vx[inside] = vals[:, 0]
        W.vy[inside] = vals[:, 1]
        owner[inside] = i
        if q != 0:
            W.singular[core_key] = True
            W.vx[core_key] = 0.0
            W.vy[core_key] = 0.0
            quanta[core_key] = q

    if quanta:
        pts = np.array([[grid.x0 + k[0] * grid.h, grid.y0 + k[1] * grid.h]
                        for k in quanta])
        ns = np.array(list(quanta.values()), dtype=int)
    else:
        pts = np.zeros((0, 2))
        ns = np.zeros(0, dtype=int)
    charges = ChargeSet(pts, ns)

    diff = V - W
    total = lp_norm(diff, p)
    per_ball = np.zeros(len(cover))
    dmag = diff.magnitude()
    bad_nodes = diff.singular
    for i in range(len(cover)):
        sel = (owner == i) & grid.mask & ~bad_nodes
        per_ball[i] = (np.sum(dmag[sel] ** p) * grid.h ** 2) ** (1.0 / p)
    report = ApproxReport(per_ball, float(total), float(eps_m), charges,
                          float(r), len(cover), int(len(ns)))
    return W, charges, report
