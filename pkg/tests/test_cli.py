import json
import shutil

import pytest

from omp2sim.cli import EXIT_CAPACITY, EXIT_FIXTURE, EXIT_OK, EXIT_USAGE, main
from omp2sim.oracle import fixture_path

H2_FIXTURE = str(fixture_path("h2_1.4.fcidump"))

CAP_FIXTURE_TEXT = """&FCI NORB=  7,NELEC= 2,MS2=0,
 ORBSYM=1,1,1,1,1,1,1,
 ISYM=1,
&END
 0.5000000000000000E+00   1   1   0   0
 0.1000000000000000E+01   0   0   0   0
"""


def run_cli(*argv):
    return main(list(argv))


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema=1"
    header = lines[1].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[2:]]


def test_usage_errors():
    assert run_cli() == EXIT_USAGE
    assert run_cli("frobnicate") == EXIT_USAGE
    assert run_cli("energy") == EXIT_USAGE
    assert run_cli("energy", "--fixture", H2_FIXTURE, "--format", "yaml") == EXIT_USAGE


def test_missing_fixture(tmp_path, capsys):
    assert run_cli("energy", "--fixture", str(tmp_path / "nope_1.0.fcidump")) == EXIT_FIXTURE
    assert "not found" in capsys.readouterr().err


def test_broken_fixture(tmp_path, capsys):
    bad = tmp_path / "bad_1.0.fcidump"
    bad.write_text("&FCI NORB=2,NELEC=2,MS2=0,\n&END\nnot a record\n")
    assert run_cli("energy", "--fixture", str(bad)) == EXIT_FIXTURE
    assert "line" in capsys.readouterr().err


def test_unknown_noise_preset(tmp_path, capsys):
    code = run_cli(
        "noise-study", "--fixture", H2_FIXTURE, "--noise", "bogus_device",
        "--out", str(tmp_path / "x.csv"),
    )
    assert code == EXIT_FIXTURE
    assert "preset" in capsys.readouterr().err


def test_capacity_exit(tmp_path, capsys):
    big = tmp_path / "big_1.0.fcidump"
    big.write_text(CAP_FIXTURE_TEXT)
    assert run_cli("energy", "--fixture", str(big)) == EXIT_CAPACITY
    assert "cap" in capsys.readouterr().err


def test_energy_csv_matches_reference(tmp_path, refs):
    out = tmp_path / "row.csv"
    assert run_cli("energy", "--fixture", H2_FIXTURE, "--out", str(out)) == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 1
    row = rows[0]
    assert row["molecule"] == "h2"
    assert row["status"] == "ok"
    assert row["shots"] == "0"
    pt = refs.molecules["h2"].point_at(1.4)
    assert float(row["e_omp2_ref"]) == pytest.approx(pt.e_omp2, abs=1e-9)
    assert float(row["e_total"]) == pytest.approx(pt.e_omp2, abs=1e-6)
    assert float(row["e_hf_ref"]) == pytest.approx(pt.e_hf, abs=1e-9)


def test_energy_json_shape(tmp_path):
    out = tmp_path / "row.json"
    assert run_cli(
        "energy", "--fixture", H2_FIXTURE, "--format", "json", "--out", str(out)
    ) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1
    assert len(doc["rows"]) == 1
    assert doc["rows"][0]["e_total"] == pytest.approx(doc["rows"][0]["e0"] + doc["rows"][0]["e1"] + doc["rows"][0]["e2"], abs=1.0)


def test_energy_without_reference_runs(tmp_path):
    anon = tmp_path / "zz_9.9.fcidump"
    shutil.copy(H2_FIXTURE, anon)
    out = tmp_path / "row.csv"
    assert run_cli("energy", "--fixture", str(anon), "--out", str(out)) == EXIT_OK
    row = read_csv(out)[0]
    assert row["molecule"] == "zz"
    assert row["e_omp2_ref"] == ""
    assert row["status"] == "ok"


def test_curve_sorted_and_filtered(tmp_path, refs):
    fixtures = fixture_path("h2_1.4.fcidump").parent
    out = tmp_path / "curve.csv"
    code = run_cli(
        "curve", "--fixture-dir", str(fixtures), "--molecule", "h2", "--out", str(out)
    )
    assert code == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == len(refs.molecules["h2"].points)
    dists = [float(r["distance_bohr"]) for r in rows]
    assert dists == sorted(dists)
    assert {r["molecule"] for r in rows} == {"h2"}
    for r in rows:
        assert abs(float(r["e_total"]) - float(r["e_omp2_ref"])) < 1e-6


def test_curve_jobs_do_not_change_output(tmp_path):
    fixtures = fixture_path("h2_1.4.fcidump").parent
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli("curve", "--fixture-dir", str(fixtures), "--molecule", "h2", "--jobs", "1", "--out", str(a))
    run_cli("curve", "--fixture-dir", str(fixtures), "--molecule", "h2", "--jobs", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_curve_empty_dir(tmp_path):
    assert run_cli("curve", "--fixture-dir", str(tmp_path)) == EXIT_FIXTURE


@pytest.mark.parametrize(
    "name,qubits,params,doubles,groups,circuits,depth_a,depth_b",
    [
        ("h2_1.4.fcidump", 4, 1, 1, 4, 12, 24, 41),
        ("h3p_1.4.fcidump", 6, 2, 6, 7, 91, 36, 55),
        ("lih_3.1.fcidump", 6, 2, 6, 7, 91, 36, 55),
        ("h4_1.8.fcidump", 8, 4, 36, 11, 803, 48, 69),
    ],
)
def test_resources_table(tmp_path, name, qubits, params, doubles, groups, circuits, depth_a, depth_b):
    out = tmp_path / "res.json"
    code = run_cli(
        "resources", "--fixture", str(fixture_path(name)), "--format", "json",
        "--out", str(out),
    )
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["n_qubits"] == qubits
    assert doc["n_parameters"] == params
    assert doc["n_doubles"] == doubles
    assert doc["n_groups"] == groups
    assert doc["circuits_per_evaluation"] == circuits
    assert doc["reference_depth"] == depth_a
    assert doc["residual_depth_max"] == depth_b


def test_noise_study_rows(tmp_path):
    out = tmp_path / "noise.csv"
    code = run_cli(
        "noise-study", "--fixture", H2_FIXTURE, "--shots", "400",
        "--trajectories", "2", "--out", str(out),
    )
    assert code == EXIT_OK
    rows = read_csv(out)
    assert [r["postselected"] for r in rows] == ["false", "true"]
    # noiseless: postselection keeps every shot
    assert float(rows[1]["kept_fraction_mean"]) == 1.0


def test_noise_study_preset_json(tmp_path):
    out = tmp_path / "noise.json"
    code = run_cli(
        "noise-study", "--fixture", H2_FIXTURE, "--noise", "ibm_lima",
        "--shots", "200", "--trajectories", "10", "--format", "json", "--out", str(out),
    )
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 2
    ps_row = doc["rows"][1]
    assert ps_row["postselected"] is True
    assert 0.0 < ps_row["kept_fraction_mean"] < 1.0
    fid = doc["fidelity"]
    assert fid["n_trajectories"] == 10
    assert 0.0 < fid["postselected"]["fidelity"] <= 1.0
    assert fid["postselected"]["kept_fraction_mean"] < 1.0
    assert fid["postselected"]["fidelity"] >= fid["raw"]["fidelity"]


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("noise-study", "--fixture", H2_FIXTURE, "--noise", "ibm_lima",
            "--shots", "300", "--trajectories", "2")
    run_cli(*args, "--out", str(a))
    run_cli(*args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_shot_noise(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    base = ("energy", "--fixture", H2_FIXTURE, "--mode", "shots", "--shots", "500")
    run_cli(*base, "--seed", "1", "--out", str(a))
    run_cli(*base, "--seed", "2", "--out", str(b))
    run_cli(*base, "--seed", "1", "--out", str(c))
    assert a.read_bytes() != b.read_bytes()
    assert a.read_bytes() == c.read_bytes()
