import numpy as np
import pytest

import vorlift as vl
from vorlift.approx import radial_extension, trace_circle
from vorlift.fixtures import model_vortex, paired_field, swirl_field

TWO_PI = 2 * np.pi


def _constant_field(g, vx, vy):
    return vl.VectorField2D(g, np.full((g.nx, g.ny), float(vx)),
                            np.full((g.nx, g.ny), float(vy)))


def test_trace_model_vortex():
    g = vl.GridSpec.disk(257)
    V = model_vortex(g)
    t = trace_circle(V, vl.Circle((0, 0), 0.5), nsamples=256)
    assert np.abs(t.normal - 2.0).max() < 1e-2       # |x|/|x|^2 at rho=0.5
    assert np.abs(t.tangential).max() < 1e-2
    assert t.quantum() == 1
    assert t.residual() < 1e-2


def test_trace_constant_field():
    g = vl.GridSpec.disk(129)
    V = _constant_field(g, 1.0, 0.0)
    t = trace_circle(V, vl.Circle((0.1, -0.1), 0.3), nsamples=128)
    assert np.abs(t.normal - np.cos(t.angles)).max() < 1e-10
    assert np.abs(t.tangential + np.sin(t.angles)).max() < 1e-10
    assert t.quantum() == 0


def test_trace_zero_field():
    g = vl.GridSpec.disk(65)
    V = _constant_field(g, 0.0, 0.0)
    t = trace_circle(V, vl.Circle((0, 0), 0.4), nsamples=64)
    assert t.flux() == 0.0


def test_trace_sample_count_validated():
    g = vl.GridSpec.disk(65)
    V = _constant_field(g, 1.0, 0.0)
    with pytest.raises(vl.GeometryError):
        trace_circle(V, vl.Circle((0, 0), 0.4), nsamples=100)
    with pytest.raises(vl.GeometryError):
        trace_circle(V, vl.Circle((0, 0), 0.4), nsamples=32)


def test_trace_small_circle_rejected():
    g = vl.GridSpec.disk(65)
    V = _constant_field(g, 1.0, 0.0)
    with pytest.raises(vl.GeometryError):
        trace_circle(V, vl.Circle((0, 0), g.h))


def test_mollify_constant_invariant():
    g = vl.GridSpec.disk(129)
    V = _constant_field(g, 0.4, -0.9)
    t = trace_circle(V, vl.Circle((0, 0), 0.5), nsamples=256)
    m = vl.mollify_trace(t, TWO_PI / 64)
    # smooth low-frequency traces pass through nearly unchanged and the
    # snap keeps the flux exactly on the lattice
    assert np.abs(m.normal - t.normal).max() < 1e-3
    assert m.residual() < 1e-12


def test_mollify_smoothing_order():
    g = vl.GridSpec.disk(257)
    V = model_vortex(g) + swirl_field(g, amplitude=0.5)
    t = trace_circle(V, vl.Circle((0.05, 0.02), 0.5), nsamples=512)
    errs = []
    for w in (TWO_PI / 16, TWO_PI / 32, TWO_PI / 64):
        m = vl.mollify_trace(t, w)
        errs.append(np.abs(m.normal - t.normal).max())
        assert m.quantum() == 1
        assert m.residual() < 1e-12
    assert errs[0] > errs[1] > errs[2]
    # roughly quadratic decay in the kernel width
    assert errs[0] / errs[2] > 6.0


def test_mollify_unquantized_flux_rejected():
    g = vl.GridSpec.disk(129)
    # purely radial field with circle flux pi, far from any multiple of 2*pi
    xx, yy = g.meshgrid()
    rho = np.maximum(np.hypot(xx, yy), 1e-12)
    V = vl.VectorField2D(g, 0.5 * xx / rho ** 2, 0.5 * yy / rho ** 2)
    t = trace_circle(V, vl.Circle((0, 0), 0.5), nsamples=256)
    with pytest.raises(vl.QuantizationError):
        vl.mollify_trace(t, TWO_PI / 32, tol=1e-2)


def test_mollify_width_validated():
    g = vl.GridSpec.disk(65)
    t = trace_circle(_constant_field(g, 1, 0), vl.Circle((0, 0), 0.4))
    with pytest.raises(vl.GeometryError):
        vl.mollify_trace(t, 2.0)


def test_harmonic_extension_zero_trace():
    g = vl.GridSpec.disk(65)
    t = trace_circle(_constant_field(g, 0, 0), vl.Circle((0, 0), 0.4))
    ext = vl.harmonic_extension(t)
    vals = ext.evaluate(np.array([[0.0, 0.0], [0.1, 0.2]]))
    assert np.abs(vals).max() < 1e-12
    assert ext.grad_energy_l2() == 0.0


def test_harmonic_extension_reproduces_constant_field():
    g = vl.GridSpec.disk(129)
    V = _constant_field(g, 1.0, 0.0)
    c = vl.Circle((0.0, 0.0), 0.5)
    t = trace_circle(V, c, nsamples=256)
    ext = vl.harmonic_extension(t)
    rng = np.random.default_rng(0)
    pts = 0.45 * rng.uniform(-1, 1, size=(200, 2))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) < 0.45]
    vals = ext.evaluate(pts)
    assert np.abs(vals[:, 0] - 1.0).max() < 1e-6
    assert np.abs(vals[:, 1]).max() < 1e-6


def test_harmonic_extension_boundary_trace_match():
    g = vl.GridSpec.disk(257)
    V = swirl_field(g, amplitude=0.7)
    c = vl.Circle((0.1, -0.05), 0.4)
    t = trace_circle(V, c, nsamples=256)
    mean = np.array([V.vx[g.mask].mean(), V.vy[g.mask].mean()])
    ext = vl.harmonic_extension(t, mean_field=mean, mean_tol=1e-2)
    pts, th = c.points(256)
    vals = ext.evaluate(pts)
    vn = vals[:, 0] * np.cos(th) + vals[:, 1] * np.sin(th)
    assert np.abs(vn - t.normal).max() < 5e-3


def test_harmonic_extension_energy_bound():
    # for a ball of radius <= 1 the interior gradient energy never exceeds
    # the boundary tangential energy
    g = vl.GridSpec.disk(257)
    V = swirl_field(g, amplitude=0.8, k=3.0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        c = vl.Circle(tuple(0.3 * rng.uniform(-1, 1, 2)),
                      rng.uniform(0.1, 0.5))
        t = trace_circle(V, c, nsamples=256)
        ext = vl.harmonic_extension(t, mean_tol=1e-2)
        assert ext.grad_energy_l2() <= ext.boundary_tangential_energy() + 1e-12


def test_harmonic_extension_rejects_net_flux():
    g = vl.GridSpec.disk(257)
    V = model_vortex(g)
    t = trace_circle(V, vl.Circle((0, 0), 0.5), nsamples=256)
    with pytest.raises(vl.GeometryError):
        vl.harmonic_extension(t)


def test_radial_extension_vortex():
    g = vl.GridSpec.disk(257)
    V = model_vortex(g)
    c = vl.Circle((0.0, 0.0), 0.5)
    ext = radial_extension(trace_circle(V, c, nsamples=256))
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.4, 0.4, size=(300, 2))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 0.05]
    vals = ext.evaluate(pts)
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    assert np.abs(vals[:, 0] - pts[:, 0] / r2).max() < 5e-2
    assert np.abs(vals[:, 1] - pts[:, 1] / r2).max() < 5e-2


def test_radial_extension_flux_constant_in_radius():
    g = vl.GridSpec.disk(257)
    V = model_vortex(g) + swirl_field(g, amplitude=0.4)
    c = vl.Circle((0.0, 0.0), 0.5)
    ext = radial_extension(trace_circle(V, c, nsamples=512))
    fluxes = []
    for rr in (0.1, 0.25, 0.45):
        th = TWO_PI * np.arange(1024) / 1024
        pts = rr * np.stack([np.cos(th), np.sin(th)], axis=1)
        vals = ext.evaluate(pts)
        vn = vals[:, 0] * np.cos(th) + vals[:, 1] * np.sin(th)
        fluxes.append(rr * TWO_PI / 1024 * vn.sum())
    assert np.abs(np.diff(fluxes)).max() < 1e-10
    assert fluxes[0] == pytest.approx(TWO_PI, abs=1e-2)


def test_approximate_smooth_field_no_charges():
    g = vl.GridSpec.disk(129)
    V, ch, _ = paired_field(g, [], swirl_amplitude=0.6)
    assert len(ch.n) == 0
    W, charges, report = vl.approximate(V, 2, 0.3, seed=0)
    assert len(charges.n) == 0
    assert report.nbad == 0
    assert report.total_error < vl.lp_norm(V, 2)


def test_approximate_single_pair_recovers_charges():
    g = vl.GridSpec.disk(129)
    V, ch, _ = paired_field(g, [((-0.35, 0.0), (0.35, 0.0))])
    W, charges, report = vl.approximate(V, 2, 0.25, seed=0)
    assert sorted(charges.n) == [-1, 1]
    # each recovered core sits close to a true charge
    for pt, n in zip(charges.points, charges.n):
        d = np.hypot(ch.points[:, 0] - pt[0], ch.points[:, 1] - pt[1])
        j = int(np.argmin(d))
        assert ch.n[j] == n and d[j] < 0.25
    assert report.epsilon_m < 2.0
    assert np.isfinite(report.per_ball_errors).all()


def test_approximate_error_decreases_with_radius():
    g = vl.GridSpec.disk(129)
    V, _, _ = paired_field(g, [((-0.35, 0.0), (0.35, 0.0))],
                           swirl_amplitude=0.3)
    errs = [vl.approximate(V, 2, r, seed=0)[2].total_error
            for r in (0.4, 0.2)]
    assert errs[1] < errs[0]


def test_approx_report_json():
    g = vl.GridSpec.disk(129)
    V, _, _ = paired_field(g, [((-0.35, 0.0), (0.35, 0.0))])
    _, _, report = vl.approximate(V, 2, 0.3, seed=1)
    out = report.to_json()
    assert out["nballs"] == report.nballs
    assert out["radius"] == 0.3
    assert len(out["per_ball_errors"]) == report.nballs
