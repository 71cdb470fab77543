from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from abeldecomp import data, latalg, serialize
from abeldecomp.cli import main
from abeldecomp.gaction import SymplecticRep


@pytest.fixture
def files(tmp_path):
    paths = {
        "surface": tmp_path / "surface.json",
        "s11": tmp_path / "s11.json",
        "f": tmp_path / "f.json",
        "rep": tmp_path / "rep.json",
        "ident": tmp_path / "ident.json",
        "zero": tmp_path / "zero.json",
    }
    serialize.write_json(paths["surface"], data.surface())
    paths["s11"].write_text(json.dumps({"schema": "pav/1", "Pi": serialize.encode_matrix(data.genus11_surface_period())}))
    serialize.write_json(paths["f"], data.surface_idempotent(), "endo")
    serialize.write_json(paths["rep"], SymplecticRep(latalg.alternating_form((1, 1)), data.surface_generators()))
    serialize.write_json(paths["ident"], latalg.identity(4), "endo")
    serialize.write_json(paths["zero"], latalg.zeros(4, 4), "endo")
    paths["dir"] = tmp_path
    return paths


def test_induced_polarization(files, capsys):
    assert main(["induced-polarization", str(files["surface"]), str(files["f"]), "--primitive"]) == 0
    out = capsys.readouterr().out
    assert "induced type (2)" in out and "rescaling by 2" in out


def test_subvariety_period(files, capsys):
    out_path = files["dir"] / "factor.json"
    assert main(["subvariety-period", str(files["surface"]), str(files["f"]), "-o", str(out_path)]) == 0
    factor = serialize.read_json(out_path)
    assert factor.g == 1 and factor.ptype.d == (2,)


def test_restrict_action_and_fixed_riemann(files, capsys):
    emb = files["dir"] / "ident_emb.json"
    restricted = files["dir"] / "restricted.json"
    riemann = files["dir"] / "riemann.json"
    assert main(["induced-polarization", str(files["surface"]), str(files["ident"]), "-o", str(emb)]) == 0
    capsys.readouterr()
    code = main(["restrict-action", str(files["rep"]), str(emb), "-o", str(restricted),
                 "--riemann-output", str(riemann)])
    assert code == 0
    out = capsys.readouterr().out
    assert "fixed locus: point" in out and "exact" in out
    locus = serialize.read_json(riemann)
    expected = data.surface_riemann()
    assert all(locus.points[0].Z[i, j] == expected[i, j] for i in range(2) for j in range(2))
    assert main(["fixed-riemann", str(restricted), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["schema"] == "riemann/1"


def test_decompose_and_verify(files, capsys):
    tree_path = files["dir"] / "tree.json"
    assert main(["decompose", str(files["surface"]), "-o", str(tree_path)]) == 0
    out = capsys.readouterr().out
    assert "split of degree 4" in out and out.count("elliptic") == 2
    assert main(["verify", str(tree_path), str(files["surface"])]) == 0
    assert "verification passed" in capsys.readouterr().out


def test_decompose_candidate(files, capsys):
    assert main(["decompose", str(files["s11"]), "--candidate", "0,-1,-4/3,0,0,0"]) == 0
    out = capsys.readouterr().out
    assert "content 4 removed" in out and "1/6*sqrt(-6)" in out


def test_tampered_tree_fails_at_node(files, capsys):
    tree_path = files["dir"] / "tree.json"
    assert main(["decompose", str(files["surface"]), "-o", str(tree_path)]) == 0
    doc = json.loads(tree_path.read_text())
    doc["tree"]["split"]["degree"] = 8
    tree_path.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["verify", str(tree_path)]) == 1
    out = capsys.readouterr().out
    assert "FAIL root" in out and "degree" in out and "verification failed" in out


def test_exit_codes(files, capsys):
    assert main(["subvariety-period", str(files["surface"]), str(files["zero"])]) == 2
    bad = files["dir"] / "bad.json"
    bad.write_text("{not json")
    assert main(["decompose", str(bad)]) == 3
    assert main(["decompose", str(files["dir"] / "missing.json")]) == 3
    assert main(["decompose", str(files["surface"]), "--candidate", "a,b"]) == 3
    first = files["dir"] / "first.json"
    first.write_text(json.dumps({"schema": "embedding/1", "D": [1], "P": [[1, 0], [0, 0], [0, 1], [0, 0]],
                                 "W": [["i"]], "rho_a": [["1"], ["0"]]}))
    assert main(["restrict-action", str(files["rep"]), str(first), "--no-fix"]) == 4


def test_not_stable_exit(files):
    sub = files["dir"] / "sub.json"
    serialize.write_json(sub, data.surface_idempotent(), "endo")
    assert main(["restrict-action", str(files["rep"]), str(sub), "--no-fix"]) == 4


def test_precision_floor(files):
    with pytest.raises(SystemExit):
        main(["decompose", str(files["surface"]), "--precision", "32"])


@pytest.mark.skipif(shutil.which("abeldecomp") is None, reason="console script not installed")
def test_console_script(files):
    proc = subprocess.run(["abeldecomp", "decompose", str(files["surface"]), "--json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema"] == "tree/1"
