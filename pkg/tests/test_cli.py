import csv
import io
import json

import numpy as np
import pytest

from anisoperim import __version__
from anisoperim import anisotropy as an
from anisoperim import geometry as geo
from anisoperim.cli import main

L1 = '{"kind":"pnorm","p":1}'
LINF = '{"kind":"pnorm","p":"inf"}'
CYL_EU = '{"kind":"cylindrical","base":{"kind":"euclidean"}}'


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def cube(tmp_path):
    E = geo.PolyhedralSet.box([0, 0, 0], [1, 1, 1], window=(-np.ones(3), 2 * np.ones(3)))
    p = tmp_path / "cube.json"
    p.write_text(json.dumps(E.to_dict()))
    return str(p)


def test_norm_dual_file(tmp_path):
    p = tmp_path / "l1.json"
    p.write_text(L1)
    code, out = run(["norm", "--config", str(p), "--dual", "1,1"])
    assert code == 0 and out.strip() == "1.000000000000"


def test_norm_eval_and_check():
    code, out = run(["norm", "--config", L1, "--eval", "1,-2,3"])
    assert code == 0 and out.strip() == "6.000000000000"
    code, out = run(["norm", "--config", '{"kind":"cylindrical","base":' + L1 + "}", "--check", "graph", "--dim", "3"])
    assert code == 0 and json.loads(out)["verdict"] == "holds"
    code, out = run(["norm", "--config", '{"kind":"polytope","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}',
                     "--check", "gap", "--direction", "1"])
    assert code == 0 and float(out) == pytest.approx(0.0, abs=1e-12)


def test_malformed_json_reports_position(capsys):
    code, _ = run(["norm", "--config", '{"kind": "pnorm",\n "p": }', "--eval", "1,1"])
    assert code == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_unknown_keys_rejected(capsys):
    code, _ = run(["norm", "--config", '{"kind":"pnorm","p":1,"colour":"red"}', "--eval", "1,1"])
    assert code == 2 and "colour" in capsys.readouterr().err


def test_dimension_mismatch_names_both(cube, capsys):
    code, _ = run(["perim", "--set", cube, "--norm", '{"kind":"polytope","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}'])
    err = capsys.readouterr().err
    assert code == 2 and "dimension 2" in err and "dimension 3" in err


def test_perim_and_slice(cube):
    code, out = run(["perim", "--set", cube, "--norm", LINF])
    assert code == 0 and out.strip() == "6.000000000000"
    code, out = run(["perim", "--set", cube, "--norm", LINF, "--window", "[[0,0,0],[0.5,2,2]]"])
    assert float(out) == pytest.approx(3.0, abs=1e-12)
    code, out = run(["slice", "--set", cube, "--norm", CYL_EU])
    assert code == 0 and json.loads(out)["max_rel_error"] <= 1e-9


def test_set_descriptor_round_trip():
    U = geo.union_of_cones(1, 0.5, 1.0, 1.5, -0.5, 3.0)
    for E in (U, U.complement(), geo.PolyhedralSet.box([0, 0], [1, 1])):
        F = geo.PolyhedralSet.from_dict(json.loads(json.dumps(E.to_dict())))
        X = np.random.default_rng(0).uniform(-3, 3, size=(200, 2))
        assert np.array_equal(E.contains(X), F.contains(X))
        assert geo.perimeter(F, an.Euclidean()) == pytest.approx(geo.perimeter(E, an.Euclidean()), abs=1e-12)
    bare = geo.PolyhedralSet.from_dict({"facets": [{"normal": [1, 0], "area": 2.0, "anchor": [0, 0]}]})
    assert geo.perimeter(bare, an.PNorm(1)) == pytest.approx(2.0)


def test_norm_descriptor_round_trip():
    for d in ({"kind": "omega", "omega": {"p": 2}, "base": {"kind": "pnorm", "p": 1}},
              {"kind": "cylindrical", "base": {"kind": "euclidean"}},
              {"kind": "polytope", "vertices": [[1, 0], [0, 1], [-1, 0], [0, -1]]}):
        a = an.from_dict(d)
        b = an.from_dict(json.loads(json.dumps(a.to_dict())))
        X = np.random.default_rng(1).normal(size=(50, a.dim or 3))
        assert np.allclose(a.eval(X), b.eval(X))


def test_gmin_writes_csv(tmp_path):
    scen = {"norm": {"kind": "euclidean"}, "lattice": {"dims": [6, 6], "h": 1 / 6},
            "collar": {"kind": "linear", "zeta": [0.6, 0.8]}, "solver": {"gap_tol": 1e-8, "seed": 1}}
    s = tmp_path / "s.json"
    s.write_text(json.dumps(scen))
    u = tmp_path / "u.csv"
    code, out = run(["gmin", "--scenario", str(s), "--out", str(u)])
    assert code == 0 and json.loads(out)["max_principle_violation"] == 0
    rows = list(csv.reader(u.open()))
    assert rows[0] == ["x", "y", "u"] and len(rows) == 8 * 8 + 1
    X = np.array(rows[1:], dtype=float)
    assert np.allclose(X[:, 2], X[:, :2] @ [0.6, 0.8], atol=1e-4)  # affine data minimises


def test_gmin_config_errors(tmp_path, capsys):
    bad = {"norm": {"kind": "euclidean", "dim": 3}, "lattice": {"dims": [4, 4]}, "collar": {"kind": "constant"}}
    code, _ = run(["gmin", "--scenario", json.dumps(bad)])
    assert code == 2 and "dimension 3" in capsys.readouterr().err
    bad = {"norm": {"kind": "euclidean"}, "lattice": {"dims": [4, 4]}, "collar": {"kind": "constant"}, "extra": 1}
    assert run(["gmin", "--scenario", json.dumps(bad)])[0] == 2
    bad = {"norm": {"kind": "euclidean"}, "lattice": {"dims": [4, 4]}, "collar": {"kind": "constant"},
           "solver": {"gap_tol": 0}}
    assert run(["gmin", "--scenario", json.dumps(bad)])[0] == 2


def test_verify_exit_codes(tmp_path):
    U = geo.union_of_cones(1, 0, 0, 1, 2, radius=5)
    cand = json.dumps(U.to_dict())
    wins = "[[[-0.5,0],[1.5,2]]]"
    code, out = run(["verify", "--candidate", cand, "--norm", '{"kind":"pnorm","p":"inf","dim":2}',
                     "--windows", wins, "--h", "0.5"])
    v = json.loads(out)
    assert code == 1 and v["status"] == "counterexample" and "competitor" in v
    U = geo.union_of_cones(1, 0, 0, 2, 1, radius=5)
    code, out = run(["verify", "--candidate", json.dumps(U.to_dict()), "--norm", LINF,
                     "--windows", "[[-0.5,0],[1.5,2]]", "--h", "0.5"])
    assert code == 0 and json.loads(out)["status"] == "certified-at-scale"
    assert run(["verify", "--candidate", cand, "--norm", LINF, "--windows", wins, "--h", "-1"])[0] == 2


def test_slab_large_window_counterexample(tmp_path):
    slab = geo.PolyhedralSet.from_halfspaces([[0, 0, 1], [0, 0, -1]], [1, 0], "intersect",
                                             ([-5, -5, -2], [5, 5, 3]))
    out_path = tmp_path / "v.json"
    code, _ = run(["verify", "--candidate", json.dumps(slab.to_dict()), "--norm", CYL_EU,
                   "--windows", "[[[-2,-2,-0.25],[2,2,1.25]]]", "--method", "relaxed", "--h", "0.25",
                   "--gap-tol", "1e-6", "--max-iters", "20000", "--out", str(out_path)])
    assert code == 1 and json.loads(out_path.read_text())["status"] == "counterexample"


def test_casebook_subcommand(tmp_path):
    out_path = tmp_path / "r.csv"
    code, out = run(["casebook", "--run", "ex2.2-parallelogram,ex3.2-hexagon", "--out", str(out_path)])
    assert code == 0 and "2/2" in out
    assert out_path.read_text().splitlines()[0] == "id,computed,expected,tol,status,seconds"
    assert run(["casebook", "--run", "missing-id"])[0] == 2


def test_version_and_usage(capsys):
    assert run(["--version"])[0] == 0
    assert __version__ in capsys.readouterr().out
    assert run(["bogus"])[0] == 2
    assert run(["norm", "--config", L1])[0] == 2
