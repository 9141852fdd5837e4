import json

import pytest

from golden import BETTI, ROW_WINDOW_38, PLAN_COUNTS
from syzp1p1.betti import parse_m2
from syzp1p1.cli import main, parse_size, parse_tiers


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_sizes():
    assert parse_size("2G") == 2 * 2**30
    assert parse_size("512MiB") == 512 * 2**20
    assert parse_size("1000") == 1000
    assert parse_tiers("2G,8G") == [2 * 2**30, 8 * 2**30]


def test_usage_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "plan")[0] == 2
    assert run(capsys, "plan", "--d1", "0", "--d2", "2", "--run", str(tmp_path))[0] == 2
    assert run(capsys, "plan", "--d1", "2", "--d2", "2", "--window", "q7:1-2", "--run", str(tmp_path))[0] == 2
    assert run(capsys, "plan", "--d1", "2", "--d2", "2", "--prime", "9", "--run", str(tmp_path))[0] == 2


def test_plan_38_row_window(capsys, tmp_path):
    code, out, _ = run(capsys, "plan", "--d1", "3", "--d2", "8", "--b1", "2", "--b2", "2",
                       "--window", ROW_WINDOW_38, "--compare-default", "--runs-root", str(tmp_path))
    assert code == 0
    assert f"total jobs: {PLAN_COUNTS[((2, 2), (3, 8))]}" in out
    assert "superset of the window plan: yes" in out


def test_full_pipeline_22(capsys, tmp_path):
    spec = ["--d1", "2", "--d2", "2", "--run", str(tmp_path)]
    for cmd in ("plan", "build"):
        assert run(capsys, cmd, *spec)[0] == 0
    code, out, _ = run(capsys, "rank", *spec, "--second-prime", "0.1")
    assert code == 0 and "0 disagreements" in out
    code, out, _ = run(capsys, "assemble", *spec)
    assert code == 0
    rows = parse_m2(out)
    assert rows[1][1:6] == BETTI[((0, 0), (2, 2))][1][1:6]
    first = (tmp_path / "betti.json").read_bytes()
    assert run(capsys, "assemble", *spec)[0] == 0
    assert (tmp_path / "betti.json").read_bytes() == first
    assert run(capsys, "schur", *spec)[0] == 0
    assert json.loads((tmp_path / "schur.json").read_text())
    code, out, _ = run(capsys, "bs", *spec)
    assert code == 0 and "falling-factorial reading" in out
    code, out, _ = run(capsys, "verify", *spec)
    assert code == 0 and out.count("pass") == 3
    code, out, _ = run(capsys, "report", *spec)
    assert code == 0
    for name in ("row_profile_q1.csv", "schur_counts.csv", "bs_coeffs.csv", "conjectures.json"):
        assert (tmp_path / "reports" / name).exists()


def test_assemble_before_rank_is_integrity_error(capsys, tmp_path):
    code, _, err = run(capsys, "assemble", "--d1", "2", "--d2", "2", "--run", str(tmp_path))
    assert code == 1 and "lack ranks" in err


def test_verify_duality_33_pair(capsys, tmp_path):
    a = ["--d1", "3", "--d2", "3", "--dual-assist", "--hints", "--run", str(tmp_path / "a")]
    b = ["--d1", "3", "--d2", "3", "--b1", "1", "--b2", "1", "--dual-assist", "--hints", "--run", str(tmp_path / "b")]
    for argv in (a, b):
        assert run(capsys, "rank", *argv)[0] == 0
        assert run(capsys, "assemble", *argv)[0] == 0
    code, out, _ = run(capsys, "verify", *a, "--mode", "duality", "--dual-run", str(tmp_path / "b"))
    assert code == 0 and "duality with (1,1);(3,3): pass" in out


def test_verify_duality_wrong_partner_is_usage_error(capsys, tmp_path):
    a = ["--d1", "2", "--d2", "2", "--run", str(tmp_path / "a")]
    b = ["--d1", "2", "--d2", "3", "--run", str(tmp_path / "b")]
    for argv in (a, b):
        run(capsys, "rank", *argv)
        run(capsys, "assemble", *argv)
    assert run(capsys, "verify", *a, "--mode", "duality", "--dual-run", str(tmp_path / "b"))[0] == 2


def test_external_workers_via_cli(capsys, tmp_path):
    spec = ["--d1", "2", "--d2", "2", "--run", str(tmp_path)]
    assert run(capsys, "rank", *spec, "--enqueue")[0] == 0
    assert run(capsys, "rank", *spec, "--worker")[0] == 0
    code, out, _ = run(capsys, "rank", *spec, "--collect")
    assert code == 0 and "failed 0" in out
    assert run(capsys, "assemble", *spec)[0] == 0


def test_scratch_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SYZ_TMPDIR", str(tmp_path / "scratch"))
    spec = ["--d1", "2", "--d2", "2", "--run", str(tmp_path / "run")]
    run(capsys, "rank", *spec)
    run(capsys, "assemble", *spec)
    code, out, _ = run(capsys, "verify", *spec, "--mode", "duality")
    assert code == 0
    assert any((tmp_path / "scratch").iterdir())


@pytest.mark.parametrize("prime", ["32003", "32009"])
def test_manifest_identical_across_primes(capsys, tmp_path, prime):
    run(capsys, "plan", "--d1", "2", "--d2", "3", "--prime", prime, "--run", str(tmp_path / prime))
    ref = tmp_path / "ref"
    run(capsys, "plan", "--d1", "2", "--d2", "3", "--run", str(ref))
    assert (tmp_path / prime / "manifest.json").read_bytes() == (ref / "manifest.json").read_bytes()
