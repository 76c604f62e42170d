"""Dipole sequences whose boundary charge cannot come from any L^p field.

A sequence of dipoles with radii a_i is packed into disjoint balls, the
current connecting each dipole has total mass at most 2, yet around every
endpoint any compatible field must carry at least the energy of the
minimal radial profile 1/(2*pi*rho).  Summing these per-endpoint lower
bounds gives kappa_p * (a_i/2)^(2-p) terms whose series diverges for
1 < p < 2 under a suitable radius law, certifying that no L^p field has
this divergence while the current mass stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .currents import Piece, PolylineCurrent
from .errors import DataError, GeometryError
from .grid import TWO_PI, check_exponent

MASS_TOTAL = 2.0
C_QUADRATIC = 12.0 / np.pi ** 2       # sum c/i^2 = 2


@lru_cache(maxsize=1)
def _log_series_constant():
    """c' with sum of c'/(i*log^2(i+1)) equal to 2 (partial sum to 1e6
    plus the integral tail 1/log(N))."""
    i = np.arange(1, 1_000_001, dtype=float)
    s = float(np.sum(1.0 / (i * np.log(i + 1.0) ** 2))) + 1.0 / np.log(1e6)
    return MASS_TOTAL / s


def kappa(p):
    """Exact integral of (1/(2*pi*rho))^p over a unit-radius disk divided
    by the radius factor: kappa_p = (2*pi)^(1-p)/(2-p)."""
    if p >= 2:
        raise DataError("the per-endpoint bound degenerates for p >= 2")
    return (TWO_PI) ** (1.0 - p) / (2.0 - p)


def dipole_radii(p, eps, N):
    """Radii a_i (capped at eps) whose mass series sums to at most 2 while
    sum a_i^(2-p) diverges.

    For p >= 1.5 the quadratic law c/i^2 already diverges in the (2-p)
    power; below 1.5 it does not, so a logarithmically corrected law is
    used instead."""
    p = check_exponent(p, allow_one=True)
    if eps <= 0:
        raise GeometryError("eps must be positive")
    i = np.arange(1, N + 1, dtype=float)
    if p >= 1.5:
        a = C_QUADRATIC / i ** 2
    else:
        a = _log_series_constant() / (i * np.log(i + 1.0) ** 2)
    return np.minimum(a, eps)


@dataclass
class DipoleSequence:
    p: float
    eps: float
    radii: np.ndarray
    centers: np.ndarray        # ball centers; endpoints at center -+ a_i/2
    current: PolylineCurrent

    def mass(self):
        return self.current.mass()

    def endpoints(self):
        off = np.stack([self.radii / 2.0, np.zeros_like(self.radii)], axis=1)
        return self.centers - off, self.centers + off


def build_sequence(p, eps, N, domain=(0.0, 0.0, 3.0, 3.0)):
    """Pack N dipole balls disjointly into a rectangle by shelf packing
    and assemble the connecting current (one unit-multiplicity segment per
    dipole, from the negative to the positive endpoint)."""
    p = check_exponent(p)
    if N < 1:
        raise GeometryError("need at least one dipole")
    radii = dipole_radii(p, eps, N)
    x0, y0, width, height = domain
    pad = 1e-9
    centers = np.zeros((N, 2))
    x = x0
    y = y0
    row = 0.0
    for i, a in enumerate(radii):
        side = 2.0 * a + pad
        if x + side > x0 + width:
            x = x0
            y += row
            row = 0.0
        if y + side > y0 + height or side > width:
            raise GeometryError(
                f"cannot pack {N} dipole balls of max radius {eps:g} into a "
                f"{width:g} x {height:g} rectangle (failed at index {i})")
        centers[i] = (x + a, y + a)
        x += side
        row = max(row, side)
    neg = centers - np.stack([radii / 2, np.zeros(N)], axis=1)
    pos = centers + np.stack([radii / 2, np.zeros(N)], axis=1)
    pieces = [Piece(np.array([neg[i], pos[i]]), 1, False) for i in range(N)]
    return DipoleSequence(p, eps, radii, centers, PolylineCurrent(pieces))


def min_norm_lower_bound(seq):
    """Certified lower bound on ||V||_p^p for any field whose divergence
    is 2*pi times the boundary of the sequence's current: every endpoint
    owns a disjoint ball of radius a_i/2, on which the minimal radial
    profile costs kappa_p * (a_i/2)^(2-p)."""
    k = kappa(seq.p)
    return float(np.sum(2.0 * k * (seq.radii / 2.0) ** (2.0 - seq.p)))


def divergence_certificate(p, eps, thresholds, nmax=1_000_000):
    """For each threshold T, the smallest N whose truncated lower bound
    exceeds T, together with the current mass at that N.

    Works on radii alone (no packing), so N may run to 1e6.  A threshold
    that is never exceeded within nmax is reported with N = None."""
    p = check_exponent(p, allow_one=True)
    k = kappa(p)
    radii = dipole_radii(p, eps, nmax)
    bounds = np.cumsum(2.0 * k * (radii / 2.0) ** (2.0 - p))
    masses = np.cumsum(radii)
    rows = []
    for T in thresholds:
        idx = int(np.searchsorted(bounds, T, side="right"))
        if idx >= nmax:
            rows.append({"threshold": float(T), "N": None,
                         "mass": float(masses[-1]), "bound": float(bounds[-1])})
        else:
            rows.append({"threshold": float(T), "N": idx + 1,
                         "mass": float(masses[idx]), "bound": float(bounds[idx])})
    return rows


def write_certificate_csv(path, rows):
    with open(path, "w") as f:
        f.write("N,mass,bound\n")
        for row in rows:
            n = "" if row["N"] is None else row["N"]
            f.write(f"{n},{row['mass']:.12g},{row['bound']:.12g}\n")
