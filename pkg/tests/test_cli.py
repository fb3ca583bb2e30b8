import json
import os
import subprocess
import sys

import pytest

from tacbeam.cli import main

TINY = [
    "sample_rate=8000", "duration=0.25", "frame_ms=1", "context_ms=0.5", "enc_dim=8",
    "hidden=4", "depth=1", "chunk=4", "batch_size=2", "max_steps=3", "checkpoint_every=3",
    "n_train=3", "n_valid=2", "min_mics=2", "max_mics=3",
]


def _sets(extra=()):
    out = []
    for kv in list(TINY) + list(extra):
        out += ["--set", kv]
    return out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["evaluate"])  # --checkpoint is required
    assert exc.value.code == 1


def test_validation_errors(tmp_path):
    assert main(["train", "--set", "lr=-1", "--out-dir", str(tmp_path)]) == 2
    assert main(["train", "--set", "nope=1"]) == 2
    assert main(["train", "--out-dir", str(tmp_path)]) == 2  # no manifest
    assert main(["evaluate", "--checkpoint", str(tmp_path / "x.tbm"), "--manifest", "m"]) == 2
    bad = tmp_path / "bad.tbm"
    bad.write_bytes(b"not a checkpoint at all")
    assert main(["separate", "--checkpoint", str(bad), "a.wav"]) == 2


def test_grad_check_numerical_failure(tmp_path):
    assert main(["grad-check", "--seeds", "1", "--tolerance", "1e-30",
                 "--out-dir", str(tmp_path)]) == 3
    rows = json.loads((tmp_path / "grad_check.json").read_text())
    assert rows and not all(r["passed"] for r in rows)


def test_end_to_end(tmp_path, capsys):
    data, run, ev, sep = (str(tmp_path / d) for d in ("data", "run", "eval", "sep"))
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("\n".join(TINY) + "\n")
    assert main(["gen-data", "--config", str(cfg), "--seed", "3", "--out-dir", data]) == 0
    assert sorted(os.listdir(data)) == ["train", "train.jsonl", "valid", "valid.jsonl"]
    assert main(["train", "--config", str(cfg), "--manifest", os.path.join(data, "train.jsonl"),
                 "--out-dir", run]) == 0
    assert os.path.exists(os.path.join(run, "last.tbm"))
    assert os.path.exists(os.path.join(run, "config.txt"))
    ckpt = os.path.join(run, "last.tbm")
    assert main(["evaluate", "--checkpoint", ckpt, "--manifest",
                 os.path.join(data, "valid.jsonl"), "--out-dir", ev]) == 0
    report = json.loads(open(os.path.join(ev, "report.json")).read())
    assert report["count"] == 2
    rec = json.loads(open(os.path.join(data, "valid.jsonl")).readline())
    wavs = [os.path.join(data, p) for p in rec["mixture"]]
    assert main(["separate", "--checkpoint", ckpt, "--out-dir", sep] + wavs) == 0
    assert sorted(os.listdir(sep)) == ["est_s0.wav", "est_s1.wav"]
    # one mic is below the supported range
    assert main(["separate", "--checkpoint", ckpt, "--out-dir", sep, wavs[0]]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tacbeam", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "grad-check" in res.stdout
