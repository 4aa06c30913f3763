"""Command-line behavior: outputs, exit codes, snapshots, caps."""

import json

import pytest

from f2orbits.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_text(capsys):
    code, out, err = run(capsys, "classify", "--format", "2x2x2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["1", "1", "27", ".......1"]
    assert "rank 3:   2 orbits  66 tensors" in out
    assert "enumeration" in err
    assert "estimated table bytes" in err


def test_classify_csv(capsys):
    code, out, _ = run(capsys, "classify", "--format", "2x2x2", "--emit", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "ordinal,rank,size,canonical_bits,canonical_code"
    assert lines[1] == "1,1,27,.......1,1"
    assert "rank,orbits,tensors,percent" in lines
    assert lines[-1] == "3,2,66,25.7813"


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--format", "2x2x2",
                       "--flavor", "large", "--emit", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["format"] == "2x2x2"
    assert doc["flavor"] == "large"
    assert doc["group_order"] == 1296
    assert doc["orbits"] == 5
    assert len(doc["rows"]) == 5
    assert doc["rows"][0]["canonical_bits"] == ".......1"
    assert doc["distribution"][0]["percent"] == "0.3906"


def test_classify_deterministic(capsys):
    _, first, _ = run(capsys, "classify", "--format", "3x2x2", "--emit", "csv")
    _, second, _ = run(capsys, "classify", "--format", "3x2x2", "--emit", "csv")
    assert first == second


def test_classify_rejects_bad_format(capsys):
    code, _, err = run(capsys, "classify", "--format", "1x2x2")
    assert code == 1
    assert "at least 2" in err
    code, _, err = run(capsys, "classify", "--format", "4x4x2")
    assert code == 1


def test_classify_output_file(capsys, tmp_path):
    target = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "classify", "--format", "2x2x2",
                       "--emit", "csv", "--output", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().splitlines()[1] == "1,1,27,.......1,1"


def test_classify_output_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "classify", "--format", "2x2x2",
                       "--output", str(tmp_path))
    assert code == 3
    assert "f2orbits:" in err


def test_classify_mem_cap_refusal(capsys):
    code, _, err = run(capsys, "classify", "--format", "3x3x2",
                       "--mem-cap", "1000")
    assert code == 2
    assert "bytes" in err and "cap" in err


def test_mem_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("F2TO_MEM_CAP", "1000")
    code, _, err = run(capsys, "classify", "--format", "3x3x2")
    assert code == 2
    # an explicit flag wins over the environment
    code, out, _ = run(capsys, "classify", "--format", "3x3x2",
                       "--mem-cap", str(1 << 30))
    assert code == 0
    assert out


def test_snapshot_reuse(capsys, tmp_path):
    snap = tmp_path / "a.snap"
    code, first, err1 = run(capsys, "classify", "--format", "3x2x2",
                            "--snapshot", str(snap))
    assert code == 0 and snap.exists()
    assert "snapshot save" in err1
    code, second, err2 = run(capsys, "classify", "--format", "3x2x2",
                             "--snapshot", str(snap))
    assert code == 0
    assert "snapshot load" in err2 and "enumeration" not in err2
    assert first == second


def test_snapshot_format_mismatch(capsys, tmp_path):
    snap = tmp_path / "a.snap"
    assert run(capsys, "classify", "--format", "2x2x2", "--snapshot", str(snap))[0] == 0
    code, _, err = run(capsys, "classify", "--format", "3x2x2",
                       "--snapshot", str(snap))
    assert code == 1
    assert "2x2x2" in err


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--format", "4x2x2")
    assert code == 0
    assert "pass, 10 rows matched" in out


def test_verify_missing_reference(capsys):
    code, _, err = run(capsys, "verify", "--format", "9x9x9")
    assert code == 2
    assert "no reference" in err
    # flavor matters: only the large table exists for this format
    code, _, err = run(capsys, "verify", "--format", "2x2x2x2")
    assert code == 2


def test_conjecture(capsys):
    code, out, _ = run(capsys, "conjecture", "4")
    assert code == 0
    assert "10/10 canonical forms match (pass)" in out
    assert "20160/2^16 = 0.3076" in out


def test_conjecture_rejects_small_p(capsys):
    code, _, err = run(capsys, "conjecture", "3")
    assert code == 1
    assert "p >= 4" in err


def test_show_orbit(capsys):
    code, out, _ = run(capsys, "show-orbit", "--format", "2x2x2",
                       "--code", "107")
    assert code == 0
    assert "orbit #6" in out
    assert "rank 3" in out and "size 12" in out
    assert "members:" in out
    assert "107 109 121" in out


def test_show_orbit_members_threshold(capsys):
    code, out, _ = run(capsys, "show-orbit", "--format", "2x2x2",
                       "--code", "24", "--members-limit", "64")
    assert code == 0
    assert "size 108" in out
    assert "members:" not in out


def test_show_orbit_range_error(capsys):
    code, _, err = run(capsys, "show-orbit", "--format", "2x2x2",
                       "--code", "300")
    assert code == 1
    assert "out of range" in err
    assert run(capsys, "show-orbit", "--format", "2x2x2", "--code", "0")[0] == 1


def test_usage_error_exits_via_argparse(capsys):
    with pytest.raises(SystemExit):
        main(["classify", "--format", "2x2x2", "--emit", "yaml"])
    with pytest.raises(SystemExit):
        main([])
