"""End-to-end acceptance checks, one test per numbered criterion.

Each test prints a single PASS line with the measured quantity so the
suite doubles as a report when run with ``pytest -s tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

import vorlift as vl
from vorlift.approx import trace_circle
from vorlift.counterexample import divergence_certificate, min_norm_lower_bound
from vorlift.currents import cluster_point_masses
from vorlift.fixtures import (arg_annulus, four_charge_field,
                              linear_phase_field, model_vortex, paired_field,
                              random_charge_set, saturating_charge_family,
                              swirl_field)
from vorlift.lifting import green_field

TWO_PI = 2 * np.pi


def _random_circle(rng, charges, grid, margin=0.06, rmin=0.08, rmax=0.45):
    """Circle inside the disk staying ``margin`` clear of every charge."""
    for _ in range(500):
        c = rng.uniform(-0.5, 0.5, 2)
        r = rng.uniform(rmin, rmax)
        if np.hypot(*c) + r > 1.0 - 3 * grid.h:
            continue
        if len(charges.n):
            d = np.hypot(charges.points[:, 0] - c[0],
                         charges.points[:, 1] - c[1])
            if np.abs(d - r).min() < margin:
                continue
        return vl.Circle(tuple(c), r)
    raise RuntimeError("could not place a test circle")


def test_criterion_1_flux_quantization():
    start = time.perf_counter()
    g = vl.GridSpec.disk(257)
    rng = np.random.default_rng(11)
    worst = 0.0
    done = 0
    while done < 100:
        charges = random_charge_set(g, rng)
        V = green_field(charges, g) + swirl_field(
            g, amplitude=rng.uniform(0.2, 0.8), k=rng.uniform(1.5, 3.5))
        for _ in range(5):
            c = _random_circle(rng, charges, g)
            res = vl.circle_flux(V, c, tol=1e-4)
            d = np.hypot(charges.points[:, 0] - c.center[0],
                         charges.points[:, 1] - c.center[1])
            enclosed = int(charges.n[d < c.radius].sum())
            assert res.quantum == enclosed
            assert res.residual <= 1e-3 * TWO_PI
            worst = max(worst, res.residual)
            done += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"PASS criterion 1: flux quantization on 100 circles "
          f"(max residual {worst:.2e}, {elapsed:.1f} s)")


def test_criterion_2_roundtrip_convergence():
    factors = []
    for make in (lambda g: (model_vortex(g),
                            vl.ChargeSet(np.array([[0.0, 0.0]]),
                                         np.array([1]))),
                 four_charge_field):
        for p in (1.5, 2.0):
            errs = []
            for n in (129, 257, 513):
                g = vl.GridSpec.disk(n)
                V, ch = make(g)
                errs.append(vl.roundtrip(V, ch, p=p)["error_lp"])
            for a, b in zip(errs, errs[1:]):
                factors.append(a / b)
    assert all(1.5 <= f <= 2.5 for f in factors)
    print(f"PASS criterion 2: round-trip error halves with h "
          f"(factors {min(factors):.2f}..{max(factors):.2f})")


def test_criterion_3_degree_identity():
    g = vl.GridSpec.disk(257)
    rng = np.random.default_rng(3)
    for trial in range(20):
        charges = random_charge_set(g, rng)
        V = green_field(charges, g) + swirl_field(g, amplitude=0.3)
        res = vl.lift(V, charges)
        assert res.boundary_degree == int(charges.n.sum())
    print("PASS criterion 3: boundary degree equals the total charge on "
          "20 random charge sets")


def test_criterion_4_level_sets_match_charges():
    g = vl.GridSpec.disk(257)
    rng = np.random.default_rng(7)
    charges = random_charge_set(g, rng)
    V = green_field(charges, g) + swirl_field(g, amplitude=0.25)
    u = vl.lift(V, charges).u
    tol = np.sqrt(2.0) * g.h + 1e-12
    good = 0
    for _ in range(32):
        y = rng.uniform(0.0, TWO_PI)
        try:
            cur = vl.level_set_current(u, y)
        except vl.GeometryError:
            continue
        pts = cluster_point_masses(vl.interior_boundary(cur, g), 3 * g.h)
        if len(pts) != len(charges.n):
            continue
        ok = True
        for (px, py), m in pts:
            d = np.hypot(charges.points[:, 0] - px,
                         charges.points[:, 1] - py)
            j = int(np.argmin(d))
            if charges.n[j] != m or d[j] > tol:
                ok = False
        good += ok
    assert good >= 0.9 * 32
    print(f"PASS criterion 4: level-set endpoints match the charges on "
          f"{good}/32 random levels")


def test_criterion_5_coarea_identity():
    rng = np.random.default_rng(5)
    u1 = arg_annulus(513, outer=1.0, inner=0.2)
    r1 = vl.coarea_check(u1, np.ones((513, 513)), nlevels=64, rng=rng)
    assert r1.relative_error <= 0.02
    u2, _ = linear_phase_field(513, 513)
    r2 = vl.coarea_check(u2, np.ones((513, 513)), nlevels=64, rng=rng)
    assert r2.relative_error <= 0.02
    print(f"PASS criterion 5: coarea identity within 2% "
          f"(rel. errors {r1.relative_error:.2e}, {r2.relative_error:.2e})")


def test_criterion_6_cover_flux_bound_constant():
    ratios = []
    g = vl.GridSpec.disk(257)
    vortex = model_vortex(g)
    vortex_pts = np.array([[0.0, 0.0]])
    for V, avoid in ((swirl_field(g), None), (vortex, vortex_pts)):
        chats = [vl.shifted_cover(V, r, 2, nshifts=16, seed=0,
                                  avoid_points=avoid).fitted_constant
                 for r in (0.2, 0.1, 0.05)]
        ratios.append(max(chats) / min(chats))
    assert all(r <= 4.0 for r in ratios)
    print(f"PASS criterion 6: fitted cover constant stable within factor 4 "
          f"(worst spread {max(ratios):.2f})")


def test_criterion_7_bad_ball_scaling():
    g = vl.GridSpec.disk(257)
    V, charges = saturating_charge_family(g)
    out = vl.bad_ball_scaling(V, 1.5, [0.2, 0.1, 0.05], nshifts=16, seed=0,
                              avoid_points=charges.points)
    # expected exponent p - 2 = -0.5, within +-0.5
    assert -1.0 <= out["slope"] <= 0.0
    assert all(a <= b for a, b in zip(out["counts"], out["counts"][1:]))
    print(f"PASS criterion 7: bad-ball count scaling slope "
          f"{out['slope']:.2f} in [-1, 0] (counts {out['counts']})")


def test_criterion_8_approximation_refinement():
    g = vl.GridSpec.disk(257)
    V, true_charges, _ = paired_field(g, [((-0.35, 0.0), (0.35, 0.0))],
                                      swirl_amplitude=0.3)
    errs = []
    for r in (0.2, 0.1, 0.05):
        _, charges, report = vl.approximate(V, 2, r, seed=0)
        errs.append(report.total_error)
        assert sorted(charges.n) == sorted(true_charges.n)
        for pt, n in zip(charges.points, charges.n):
            d = np.hypot(true_charges.points[:, 0] - pt[0],
                         true_charges.points[:, 1] - pt[1])
            j = int(np.argmin(d))
            assert true_charges.n[j] == n and d[j] <= r
    assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))
    print(f"PASS criterion 8: approximation error non-increasing "
          f"({errs[0]:.2f} -> {errs[1]:.2f} -> {errs[2]:.2f}), "
          "charges recovered")


def test_criterion_9_harmonic_extension_energy():
    g = vl.GridSpec.disk(257)
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        V = swirl_field(g, amplitude=rng.uniform(0.3, 1.0),
                        k=rng.uniform(1.0, 4.0))
        c = vl.Circle(tuple(0.3 * rng.uniform(-1, 1, 2)),
                      rng.uniform(0.1, 0.6))
        t = trace_circle(V, c, nsamples=256)
        ext = vl.harmonic_extension(t, mean_tol=1e-2)
        denom = ext.boundary_tangential_energy()
        assert ext.grad_energy_l2() <= (1.0 + 1e-3) * denom
        worst = max(worst, ext.grad_energy_l2() / denom)
    print(f"PASS criterion 9: interior gradient energy below the boundary "
          f"tangential energy on 50 traces (worst ratio {worst:.3f})")


def test_criterion_10_counterexample_divergence():
    start = time.perf_counter()
    rows = divergence_certificate(1.5, 0.05, [10.0])
    assert rows[0]["N"] is not None and rows[0]["N"] <= 10 ** 6
    assert rows[0]["bound"] >= 10.0
    assert rows[0]["mass"] <= 2.0 + 1e-9
    one = divergence_certificate(1.0, 0.05, [10.0])
    assert one[0]["N"] is None
    assert one[0]["bound"] <= 2.0 + 1e-9
    # finite truncations still certify a growing lower bound
    seq = vl.build_sequence(1.5, 0.05, 50)
    assert min_norm_lower_bound(seq) > 0
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(f"PASS criterion 10: p=1.5 lower bound exceeds 10 at "
          f"N={rows[0]['N']} with mass {rows[0]['mass']:.3f} <= 2; p=1 "
          f"stays bounded ({elapsed:.1f} s)")


def test_criterion_11_directional_norm_identity():
    g = vl.GridSpec.disk(129)
    rng = np.random.default_rng(13)
    worst = 0.0
    for p in (1.1, 1.5, 2.0, 3.0):
        xx, yy = g.meshgrid()
        vx = np.zeros_like(xx)
        vy = np.zeros_like(xx)
        for _ in range(4):
            kx, ky = rng.uniform(0.5, 3.0, 2)
            ax, ay = rng.normal(size=2)
            ph = rng.uniform(0, TWO_PI)
            vx += ax * np.sin(kx * xx + ph) * np.cos(ky * yy)
            vy += ay * np.cos(kx * xx) * np.sin(ky * yy + ph)
        V = vl.VectorField2D(g, vx, vy)
        err = vl.directional_norm_check(V, p, 2048)
        assert err <= 1e-5
        worst = max(worst, err)
    print(f"PASS criterion 11: directional norm identity holds to "
          f"{worst:.2e} <= 1e-5 with 2048 directions")


def test_criterion_12_slice_flux_duality():
    g = vl.GridSpec.disk(257)
    rng = np.random.default_rng(12)
    charges = random_charge_set(g, rng, max_n=2)
    V = green_field(charges, g) + swirl_field(g, amplitude=0.2)
    u = vl.lift(V, charges).u
    cur = vl.level_set_current(u, 2.7183)
    mismatches = 0
    for _ in range(50):
        c = _random_circle(rng, charges, g)
        try:
            total = vl.slice_by_circle(cur, c, t=1e-7).total()
        except vl.DegenerateSliceError:
            total = vl.slice_by_circle(cur, c, t=3.7e-6).total()
        quantum = vl.circle_flux(V, c, tol=1e-4).quantum
        mismatches += total != quantum
    assert mismatches == 0
    print("PASS criterion 12: slice totals equal flux quanta on all "
          "50 circles")
