import json

import numpy as np
import pytest

import vorlift as vl
from vorlift import cli, fileio
from vorlift.fixtures import model_vortex
from vorlift.lifting import green_field

TWO_PI = 2 * np.pi


@pytest.fixture
def vortex_file(tmp_path):
    g = vl.GridSpec.disk(129)
    path = tmp_path / "vortex.vf2d"
    fileio.write_vector_field(path, model_vortex(g))
    return str(path)


@pytest.fixture
def charges_file(tmp_path):
    ch = vl.ChargeSet(np.array([[0.0, 0.0]]), np.array([1]))
    path = tmp_path / "charges.json"
    path.write_text(json.dumps(ch.to_json()))
    return str(path)


def test_flux_stdout(vortex_file, capsys):
    rc = cli.main(["flux", "--input", vortex_file, "--circle", "0,0,0.5"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["quantum"] == 1
    assert abs(out["value"] - TWO_PI) < 1e-2


def test_lift_and_unlift_round_trip(tmp_path, vortex_file, charges_file):
    upath = str(tmp_path / "u.vf2d")
    rc = cli.main(["lift", "--input", vortex_file, "--charges", charges_file,
                   "--output", upath])
    assert rc == 0
    report = json.loads(open(upath + ".report.json").read())
    assert report["boundary_degree"] == 1
    assert report["max_loop_residual"] < 1e-2

    vpath = str(tmp_path / "back.vf2d")
    assert cli.main(["unlift", "--input", upath, "--output", vpath]) == 0
    W = fileio.read_vector_field(vpath)
    assert W.grid.nx == 129


def test_lift_unliftable_exit_code(tmp_path, vortex_file):
    # the vortex without its declared charge is not liftable
    rc = cli.main(["lift", "--input", vortex_file,
                   "--output", str(tmp_path / "u.vf2d")])
    assert rc == 2


def test_missing_input_exit_code(tmp_path):
    rc = cli.main(["flux", "--input", str(tmp_path / "nope.vf2d"),
                   "--circle", "0,0,0.5"])
    assert rc == 1


def test_corrupt_input_exit_code(tmp_path):
    bad = tmp_path / "bad.vf2d"
    bad.write_text(json.dumps({"magic": "???"}))
    rc = cli.main(["flux", "--input", str(bad), "--circle", "0,0,0.5"])
    assert rc == 1


def test_bad_circle_spec_exit_code(vortex_file):
    assert cli.main(["flux", "--input", vortex_file, "--circle", "zap"]) == 1


def test_geometry_violation_exit_code(vortex_file):
    # circle smaller than the grid resolution
    rc = cli.main(["flux", "--input", vortex_file, "--circle", "0,0,1e-6"])
    assert rc == 2


def test_tolerance_exit_code(tmp_path):
    g = vl.GridSpec.disk(65)
    rng = np.random.default_rng(0)
    V = vl.VectorField2D(g, rng.normal(size=(65, 65)),
                         rng.normal(size=(65, 65)))
    path = tmp_path / "noise.vf2d"
    fileio.write_vector_field(path, V)
    rc = cli.main(["cover", "--input", str(path), "--r", "0.4",
                   "--tol", "1e-3",
                   "--output", str(tmp_path / "cover.json")])
    assert rc == 3


def test_levelset_and_slice(tmp_path, vortex_file, charges_file):
    upath = str(tmp_path / "u.vf2d")
    assert cli.main(["lift", "--input", vortex_file, "--charges",
                     charges_file, "--output", upath]) == 0
    cpath = str(tmp_path / "ls.json")
    assert cli.main(["levelset", "--input", upath, "--level", "1.3",
                     "--output", cpath]) == 0
    spath = str(tmp_path / "slice.json")
    assert cli.main(["slice", "--current", cpath, "--circle", "0,0,0.5",
                     "--output", spath]) == 0
    out = json.loads(open(spath).read())
    assert out["total"] == 1


def test_coarea(tmp_path, vortex_file, charges_file):
    upath = str(tmp_path / "u.vf2d")
    assert cli.main(["lift", "--input", vortex_file, "--charges",
                     charges_file, "--output", upath]) == 0
    opath = str(tmp_path / "coarea.json")
    assert cli.main(["coarea", "--input", upath, "--nlevels", "16",
                     "--output", opath]) == 0
    out = json.loads(open(opath).read())
    assert out["relative_error"] < 0.1


def test_counterexample_csv(tmp_path):
    opath = str(tmp_path / "cert.csv")
    rc = cli.main(["counterexample", "--p", "1.5", "--eps", "0.05",
                   "--thresholds", "1,5,10", "--output", opath])
    assert rc == 0
    lines = open(opath).read().strip().splitlines()
    assert lines[0] == "N,mass,bound"
    assert len(lines) == 4


def test_config_file_with_flag_precedence(tmp_path, vortex_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"circle": "0,0,0.5", "tol": 1e-6}))
    opath = str(tmp_path / "flux.json")
    rc = cli.main(["flux", "--input", vortex_file, "--config", str(cfg),
                   "--output", opath])
    assert rc == 0
    out = json.loads(open(opath).read())
    assert out["quantum"] == 1
    # explicit flag wins over the config value
    opath2 = str(tmp_path / "flux2.json")
    rc = cli.main(["flux", "--input", vortex_file, "--config", str(cfg),
                   "--circle", "0.6,0.0,0.2", "--output", opath2])
    assert rc == 0
    assert json.loads(open(opath2).read())["quantum"] == 0


def test_deterministic_outputs(tmp_path, vortex_file):
    a = str(tmp_path / "a.json")
    b = str(tmp_path / "b.json")
    for path in (a, b):
        assert cli.main(["flux", "--input", vortex_file,
                         "--circle", "0,0,0.5", "--output", path]) == 0
    assert open(a).read() == open(b).read()
