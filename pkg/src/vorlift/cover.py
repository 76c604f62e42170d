"""Shifted ball covers: maximal separated sets, good/bad classification and
the boundary-flux bound with its empirically fitted constant.

The covering follows the translate-and-select construction: a maximal
(3r/4)-separated set on the r-enlarged domain, shifted by the best of a
random sample of translations, with radii drawn in [3r/4, r] and perturbed
away from known singularities.  The field is extended by zero outside the
mask for all boundary integrals here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, QuantizationError
from .flux import Circle, circle_flux
from .grid import TWO_PI, check_exponent, lp_norm, sample_vector


@dataclass
class BallCover:
    centers: np.ndarray
    radii: np.ndarray
    shift: np.ndarray
    r: float
    p: float
    pnorm_fluxes: np.ndarray          # per-ball integral of |V.n|^p
    fitted_constant: float            # sum * r / ||V||_p^p
    labels: list = None               # "good" / "bad" after classification
    quanta: np.ndarray = None
    residuals: np.ndarray = None

    def __len__(self):
        return len(self.radii)

    def circles(self):
        return [Circle((cx, cy), rad)
                for (cx, cy), rad in zip(self.centers, self.radii)]

    def bad_count(self):
        if self.labels is None:
            raise QuantizationError("cover not classified yet")
        return sum(1 for lab in self.labels if lab == "bad")

    def to_json(self):
        out = {
            "centers": self.centers.tolist(),
            "radii": self.radii.tolist(),
            "shift": self.shift.tolist(),
            "r": self.r,
            "p": self.p,
            "pnorm_fluxes": self.pnorm_fluxes.tolist(),
            "fitted_constant": self.fitted_constant,
        }
        if self.labels is not None:
            out["labels"] = list(self.labels)
            out["quanta"] = self.quanta.tolist()
            out["residuals"] = self.residuals.tolist()
        return out


def _enlarged_inside(grid, pts, margin):
    return grid.boundary_distance(pts) > -margin


def maximal_separated_set(grid, r, seed=0, margin=None, repair_samples=50000):
    """Greedy maximal r-separated point set on the margin-enlarged domain.

    Greedy insertion over a shuffled dense candidate lattice, followed by
    seeded random repair passes that plug any residual coverage gap; the
    result is r-separated and (to sampling accuracy) maximal."""
    if r <= 0:
        raise GeometryError("separation radius must be positive")
    if margin is None:
        margin = r
    rng = np.random.default_rng(seed)
    delta = r / 8.0
    xs = np.arange(grid.x0 - margin, grid.xmax + margin + delta, delta)
    ys = np.arange(grid.y0 - margin, grid.ymax + margin + delta, delta)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    cand = np.stack([xx.ravel(), yy.ravel()], axis=1)
    cand = cand[_enlarged_inside(grid, cand, margin)]
    rng.shuffle(cand)

    cell = r
    buckets = {}
    accepted = []

    def key(pt):
        return (int(np.floor(pt[0] / cell)), int(np.floor(pt[1] / cell)))

    def is_far(pt):
        kx, ky = key(pt)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for q in buckets.get((kx + dx, ky + dy), ()):
                    if (pt[0] - q[0]) ** 2 + (pt[1] - q[1]) ** 2 < r * r:
                        return False
        return True

    def insert(pt):
        accepted.append(pt)
        buckets.setdefault(key(pt), []).append(pt)

    for pt in cand:
        if is_far(pt):
            insert(pt)

    # repair: random probes over the enlarged domain
    for _ in range(4):
        lo = np.array([grid.x0 - margin, grid.y0 - margin])
        hi = np.array([grid.xmax + margin, grid.ymax + margin])
        probes = rng.uniform(lo, hi, size=(repair_samples, 2))
        probes = probes[_enlarged_inside(grid, probes, margin)]
        added = 0
        for pt in probes:
            if is_far(pt):
                insert(pt)
                added += 1
        if added == 0:
            break
    return np.asarray(accepted)


def _pflux_sums(V, centers, radii, p, nsamples=256):
    """Per-ball integral of |V.n|^p over each circle (zero-extended field)."""
    th = TWO_PI * np.arange(nsamples) / nsamples
    ct, st = np.cos(th), np.sin(th)
    out = np.zeros(len(radii))
    chunk = max(1, int(2e6) // nsamples)
    for k0 in range(0, len(radii), chunk):
        sl = slice(k0, min(k0 + chunk, len(radii)))
        c = centers[sl]
        rr = radii[sl]
        px = c[:, 0, None] + rr[:, None] * ct[None, :]
        py = c[:, 1, None] + rr[:, None] * st[None, :]
        pts = np.stack([px.ravel(), py.ravel()], axis=1)
        vals = sample_vector(V, pts, zero_extend=True).reshape(len(rr), nsamples, 2)
        vn = vals[:, :, 0] * ct[None, :] + vals[:, :, 1] * st[None, :]
        out[sl] = rr * TWO_PI / nsamples * np.sum(np.abs(vn) ** p, axis=1)
    return out


def perturb_ball(center, rad, r, avoid, h, rng, margin=None):
    """Perturb one ball's radius (and, if needed, its center) so its
    circle stays clear of the avoided points — the almost-every-radius
    selection of the construction, done constructively.  Returns the new
    (center, radius)."""
    avoid = np.asarray(avoid, dtype=float).reshape(-1, 2)
    if margin is None:
        margin = 3.0 * h
    floor = max(0.75 * h, min(2.0 * h, r / 8.0))
    center = np.asarray(center, dtype=float)
    d = np.hypot(avoid[:, 0] - center[0], avoid[:, 1] - center[1])
    if len(d) == 0 or np.abs(d - rad).min() >= margin:
        return center, rad
    cand = np.concatenate([[rad], rng.uniform(0.75 * r, r, size=127)])
    offs = np.vstack([[0.0, 0.0],
                      0.15 * r * rng.standard_normal((24, 2))])
    best = None
    for off in offs:
        dd = np.hypot(avoid[:, 0] - center[0] - off[0],
                      avoid[:, 1] - center[1] - off[1])
        gaps = np.min(np.abs(dd[None, :] - cand[:, None]), axis=1)
        j = int(np.argmax(gaps))
        if best is None or gaps[j] > best[0]:
            best = (gaps[j], cand[j], off)
        if best[0] >= margin:
            break
    if best[0] < floor:
        raise GeometryError("no admissible ball perturbation found "
                            f"for ball at {tuple(np.round(center, 4))}")
    return center + best[2], float(best[1])


def _perturb_balls(centers, radii, r, avoid_points, h, rng):
    if avoid_points is None or len(avoid_points) == 0:
        return centers, radii
    centers = centers.copy()
    out = radii.copy()
    for i in range(len(radii)):
        centers[i], out[i] = perturb_ball(centers[i], radii[i], r,
                                          avoid_points, h, rng)
    return centers, out


def shifted_cover(V, r, p, nshifts=64, seed=0, avoid_points=None,
                  nsamples=256):
    """Build the covering of the masked domain by balls of radii in
    [3r/4, r], selecting the translation that minimizes the total boundary
    p-flux, and report the fitted constant of the flux bound."""
    p = check_exponent(p, allow_one=True)
    grid = V.grid
    if r < 5 * grid.h:
        raise GeometryError("cover radius below 5h is unresolved")
    rng = np.random.default_rng(seed)
    base = maximal_separated_set(grid, 0.75 * r, seed=seed, margin=r)
    radii = rng.uniform(0.75 * r, r, size=len(base))

    ang = rng.uniform(0, TWO_PI, size=nshifts)
    rad = r * np.sqrt(rng.uniform(0, 1, size=nshifts))
    shifts = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    shifts[0] = 0.0

    best = None
    for z in shifts:
        s = float(np.sum(_pflux_sums(V, base + z, radii, p, nsamples)))
        if best is None or s < best[0]:
            best = (s, z)
    _, zbest = best
    centers = base + zbest
    centers, radii = _perturb_balls(centers, radii, r, avoid_points,
                                    grid.h, rng)
    pfluxes = _pflux_sums(V, centers, radii, p, nsamples)
    total = float(np.sum(pfluxes))
    vnorm = lp_norm(V, p)
    chat = total * r / vnorm ** p if vnorm > 0 else 0.0
    return BallCover(centers, radii, np.asarray(zbest), float(r), p,
                     pfluxes, float(chat))


def classify_balls(V, cover, tol=1.0):
    """Label every ball good (flux quantum 0) or bad (nonzero quantum); a
    residual above ``tol`` means the field is not flux-quantized at this
    resolution."""
    labels = []
    quanta = np.zeros(len(cover), dtype=int)
    residuals = np.zeros(len(cover))
    for i, c in enumerate(cover.circles()):
        fr = circle_flux(V, c, tol=min(tol, 1e-3), zero_extend=True)
        if fr.residual > tol:
            raise QuantizationError(
                f"ball {i} flux residual {fr.residual:.3g} above tol {tol:g}: "
                "input not quantized at this resolution")
        quanta[i] = fr.quantum
        residuals[i] = fr.residual
        labels.append("bad" if fr.quantum != 0 else "good")
    cover.labels = labels
    cover.quanta = quanta
    cover.residuals = residuals
    return cover


def bad_ball_scaling(V, p, radii, nshifts=32, seed=0, tol=1.0,
                     avoid_points=None):
    """Bad-ball counts across a decreasing radius sweep and the least-squares
    slope of log(count) against log(radius)."""
    radii = list(radii)
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise GeometryError("radii must be strictly decreasing")
    if min(radii) < 5 * V.grid.h:
        raise GeometryError("smallest radius below 5h")
    counts = []
    for k, r in enumerate(radii):
        cover = shifted_cover(V, r, p, nshifts=nshifts, seed=seed + k,
                              avoid_points=avoid_points)
        classify_balls(V, cover, tol=tol)
        counts.append(cover.bad_count())
    pos = [(r, c) for r, c in zip(radii, counts) if c > 0]
    slope = float("nan")
    if len(pos) >= 2:
        lr = np.log([r for r, _ in pos])
        lc = np.log([c for _, c in pos])
        slope = float(np.polyfit(lr, lc, 1)[0])
    return {"radii": list(map(float, radii)), "counts": counts, "slope": slope}
