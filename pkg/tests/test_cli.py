import json
import subprocess
import sys
from pathlib import Path

import pytest

from vcpknot.cli import main

FLAGSHIP = Path(__file__).resolve().parents[1] / "demos" / "g2_loop.json"


def write_config(tmp_path, **overrides):
    cfg = {
        "name": "small",
        "ambient": {"m": 3, "vcp": {"kind": "volume"}},
        "immersion": {"preset": "circle"},
        "sweep": {"N": [16, 32, 64], "h": [1e-3, 1e-4], "trials": 1},
        "checks": ["J2", "sympl", "lemma_normal"],
    }
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


class TestVerifyVcp:
    def test_exact_tensor_passes(self, capsys):
        assert main(["verify-vcp", "--kind", "g2", "--trials", "1000", "--seed", "7"]) == 0
        out = capsys.readouterr().out
        assert "h=0.0001 N=128 seed=0" in out
        assert "PASS" in out

    def test_corrupted_fails(self):
        assert main(["verify-vcp", "--kind", "g2", "--corrupt"]) == 1

    def test_unknown_kind(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["verify-vcp", "--kind", "bogus"])
        assert info.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_illegal_dimension(self):
        assert main(["verify-vcp", "--kind", "kaehler", "--m", "5"]) == 2

    @pytest.mark.parametrize("kind", ["kaehler", "volume", "spin7"])
    def test_other_kinds(self, kind):
        assert main(["verify-vcp", "--kind", kind, "--trials", "50"]) == 0


class TestRun:
    def test_writes_reports(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", str(write_config(tmp_path)), str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["schema_version"] == 1
        assert set(report["checks"]) == {"J2", "sympl", "lemma_normal"}
        assert (out / "report.csv").read_text().startswith("check,N,h,trial")
        text = capsys.readouterr().out
        assert "defaults: h=0.0001 N=128 seed=0" in text
        assert "PASS" in text

    def test_converge_prints_rates(self, tmp_path, capsys):
        assert main(["converge", str(write_config(tmp_path)), str(tmp_path / "out")]) == 0
        text = capsys.readouterr().out
        assert "rate in h" in text and "[lemma_normal]" in text

    def test_single_resolution(self, tmp_path, capsys):
        cfg = write_config(tmp_path, sweep={"N": [8], "h": [1e-4]}, checks=["J2", "compat", "sympl", "lemma_normal"])
        assert main(["run", str(cfg), str(tmp_path / "out")]) == 0
        assert "insufficient cells for rate fit" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.json"), str(tmp_path / "out")]) == 2

    def test_schema_violation_names_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path, sweep={"N": [64, 32]})
        assert main(["run", str(cfg), str(tmp_path / "out")]) == 2
        assert "sweep.N" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_aborted_cell(self, tmp_path):
        cfg = write_config(tmp_path, immersion={"preset": "circle", "params": {"radius": 0.0}})
        assert main(["run", str(cfg), str(tmp_path / "out")]) == 3

    def test_failing_check(self, tmp_path):
        cfg = write_config(tmp_path, sweep={"N": [16], "h": [1e-1]}, checks=["lemma_normal"])
        assert main(["run", str(cfg), str(tmp_path / "out")]) == 1

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "vcpknot", "verify-vcp", "--kind", "volume", "--m", "3"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "max violation" in proc.stdout


def test_flagship_config_exit_code(tmp_path):
    assert main(["run", str(FLAGSHIP), str(tmp_path / "out")]) == 0
