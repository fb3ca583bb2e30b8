import json
import os

import numpy as np
import pytest

from tacbeam.audio_io import load_utterance, read_manifest
from tacbeam.errors import ValidationError
from tacbeam.fasnet import FaSNet
from tacbeam.objective import si_snr
from tacbeam.runtime.checkpoint import checkpoint_load, checkpoint_save
from tacbeam.runtime.config import RunConfig, dump_config, load_config, parse_overrides
from tacbeam.runtime.evaluate import bucket_report, evaluate, evaluate_model, utterance_si_snri
from tacbeam.runtime.optim import Adam, clip_grad_norm
from tacbeam.runtime.separate import separate_array, separate_files
from tacbeam.runtime.train import load_dataset, train
from tacbeam.scene.dataset import generate_split

TINY = dict(sample_rate=8000, duration=0.25, frame_ms=1.0, context_ms=0.5, enc_dim=8,
            hidden=4, depth=1, chunk=4, batch_size=2, log_every=0, min_mics=2, max_mics=3)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    train_m = generate_split(str(root), "train", 4, 0, "adhoc", 2, 3, 8000, 0.25)
    test_m = generate_split(str(root), "test", 3, 0, "adhoc", 2, 3, 8000, 0.25)
    return train_m, test_m


def _cfg(dataset, **kw):
    d = dict(TINY, train_manifest=dataset[0], max_steps=4, checkpoint_every=2)
    d.update(kw)
    return RunConfig(**d).validate()


def test_config_parsing(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nvariant = two_stage\n\nlr = 0.01  # trailing\nchunk=8\n")
    cfg = load_config(str(p), ["lr=0.5"])
    assert cfg.variant == "two_stage" and cfg.lr == 0.5 and cfg.chunk == 8
    assert parse_overrides(dump_config(cfg).splitlines()) == cfg
    for bad in (["nonsense"], ["bogus = 1"], ["lr = fast"], ["variant = x"], ["min_mics = 1"]):
        with pytest.raises(ValidationError):
            parse_overrides(bad)
    with pytest.raises(ValidationError):
        load_config(str(tmp_path / "missing.cfg"))


def test_config_defaults():
    cfg = RunConfig()
    m = cfg.model_config()
    assert cfg.context_ms == 16.0 and cfg.frame_ms == cfg.context_ms
    assert m.frame_len == 256 and m.context == 256
    assert RunConfig(frame_ms=4).model_config().frame_len == 64


def test_clip_grad_norm(rng):
    model = FaSNet(RunConfig(**TINY).model_config(), rng)
    for p in model.parameters():
        p.grads[...] = 1.0
    n = sum(p.grads.size for p in model.parameters())
    assert clip_grad_norm(model.parameters(), 1.0) == pytest.approx(np.sqrt(n))
    assert np.sqrt(sum(np.sum(p.grads**2) for p in model.parameters())) == pytest.approx(1.0)


def test_checkpoint_roundtrip(tmp_path, rng):
    cfg = RunConfig(**TINY)
    model = FaSNet(cfg.model_config(), rng)
    opt = Adam(model.named_parameters())
    for p in model.parameters():
        p.grads[...] = rng.standard_normal(p.grads.shape)
    opt.step()
    a, b = tmp_path / "a.tbm", tmp_path / "b.tbm"
    checkpoint_save(a, model, opt, 1, [0.5], cfg)
    m2 = FaSNet(cfg.model_config(), np.random.default_rng(9))
    o2 = Adam(m2.named_parameters())
    checkpoint_load(a, m2, o2)
    checkpoint_save(b, m2, o2, 1, [0.5], cfg)
    assert a.read_bytes() == b.read_bytes()
    x = rng.standard_normal((3, 40))
    assert np.array_equal(m2.separate(x), model.separate(x))
    m3, header = checkpoint_load(a)
    assert header["step"] == 1 and header["run"]["chunk"] == 4
    assert np.array_equal(m3.separate(x), model.separate(x))


def test_checkpoint_mismatch(tmp_path, rng):
    cfg = RunConfig(**TINY)
    model = FaSNet(cfg.model_config(), rng)
    path = tmp_path / "a.tbm"
    checkpoint_save(path, model)
    other = FaSNet(cfg.replace(enc_dim=6).model_config(), rng)
    with pytest.raises(ValidationError):
        checkpoint_load(path, other)
    fresh = FaSNet(cfg.model_config(), np.random.default_rng(5))
    before = fresh.state_dict()
    with pytest.raises(ValidationError):
        checkpoint_load(path, fresh, Adam(fresh.named_parameters()))
    for k, v in fresh.state_dict().items():
        assert np.array_equal(v, before[k])
    blob = bytearray(path.read_bytes())
    blob[-10] ^= 1
    path.write_bytes(bytes(blob))
    with pytest.raises(ValidationError):
        checkpoint_load(path)


def test_zero_lr_leaves_parameters(tmp_path, dataset):
    res = train(_cfg(dataset, lr=0.0), str(tmp_path))
    init = FaSNet(res.model.config, np.random.default_rng(0)).state_dict()
    for k, v in res.model.state_dict().items():
        assert np.array_equal(v, init[k])
    assert len(res.losses) == 4


def test_resume_is_bit_exact(tmp_path, dataset):
    full = train(_cfg(dataset), str(tmp_path / "full"))
    part = train(_cfg(dataset), str(tmp_path / "part"), max_steps=2)
    resumed = train(_cfg(dataset), str(tmp_path / "res"), resume=part.checkpoints[-1])
    assert resumed.losses == full.losses
    a = full.model.state_dict()
    for k, v in resumed.model.state_dict().items():
        assert np.array_equal(v, a[k])
    assert sorted(os.listdir(tmp_path / "full")) == [
        "ckpt_000002.tbm", "ckpt_000004.tbm", "last.tbm", "losses.tsv"]


def test_training_set_mismatch(dataset):
    with pytest.raises(ValidationError):
        load_dataset(dataset[0], 3)


def test_evaluate_passthrough_and_oracle(dataset):
    records = read_manifest(dataset[1])
    passthrough = evaluate_model(lambda mix: np.stack([mix[0], mix[0]]), records)
    assert passthrough.average == 0.0
    assert all(c["mean"] == 0.0 for c in passthrough.overlap.values())

    cache = {}
    for rec in records:
        mix, targets, _ = load_utterance(rec)
        cache[mix.tobytes()] = targets
    oracle = evaluate_model(lambda mix: cache[mix.tobytes()][::-1], records)
    for rec, (_, score) in zip(records, oracle.utterances):
        mix, targets, _ = load_utterance(rec)
        cap = np.mean([100.0 - si_snr(mix[0], t) for t in targets])
        assert score == pytest.approx(cap, abs=1e-9)
    assert oracle.count == 3


def test_bucket_report_by_hand():
    records = [
        {"id": "a", "overlap_ratio": 0.1, "n_mics": 2, "mixture": []},
        {"id": "b", "overlap_ratio": 0.2, "n_mics": 3, "mixture": []},
        {"id": "c", "overlap_ratio": 0.9, "n_mics": 2, "mixture": [], "speaker_angle": 100.0},
    ]
    rep = bucket_report([1.0, 3.0, 5.0], records)
    assert rep.average == 3.0
    assert rep.overlap == {"<25%": {"mean": 2.0, "count": 2}, ">75%": {"mean": 5.0, "count": 1}}
    assert rep.mics == {"2": {"mean": 3.0, "count": 2}, "3": {"mean": 3.0, "count": 1}}
    assert rep.angle == {">90": {"mean": 5.0, "count": 1}}
    json.dumps(rep.to_dict())
    with pytest.raises(ValidationError):
        bucket_report([], [])


def test_separate_matches_evaluate(tmp_path, dataset, rng):
    cfg = RunConfig(**TINY)
    model = FaSNet(cfg.model_config(), rng)
    ckpt = tmp_path / "m.tbm"
    checkpoint_save(ckpt, model)
    rec = read_manifest(dataset[1])[0]
    paths, est = separate_files(str(ckpt), rec["mixture"], str(tmp_path / "out"))
    assert len(paths) == 2 and all(os.path.exists(p) for p in paths)
    mix, targets, _ = load_utterance(rec)
    mine = utterance_si_snri(est, targets, mix[0])
    report = evaluate(str(ckpt), dataset[1])
    assert mine == pytest.approx(report.utterances[0][1], abs=1e-9)


def test_separate_channel_bounds(rng):
    model = FaSNet(RunConfig(**TINY).model_config(), rng)
    with pytest.raises(ValidationError):
        separate_array(model, rng.standard_normal((1, 40)))
    with pytest.raises(ValidationError):
        separate_array(model, rng.standard_normal((4, 40)))
    assert separate_array(model, rng.standard_normal((3, 40))).shape == (2, 40)


def test_separate_ignores_order_of_secondary_files(tmp_path, dataset, rng):
    cfg = RunConfig(**TINY)
    ckpt = tmp_path / "m.tbm"
    checkpoint_save(ckpt, FaSNet(cfg.model_config(), rng))
    rec = next(r for r in read_manifest(dataset[1]) if len(r["mixture"]) == 3)
    ref, a, b = rec["mixture"]
    _, est1 = separate_files(str(ckpt), [ref, a, b], str(tmp_path / "o1"))
    _, est2 = separate_files(str(ckpt), [ref, b, a], str(tmp_path / "o2"))
    assert np.linalg.norm(est1 - est2) <= 1e-8 * np.linalg.norm(est1)


def test_separate_rejects_mismatched_inputs(tmp_path, dataset, rng):
    from tacbeam.audio_io import read_wav, write_wav

    cfg = RunConfig(**TINY)
    ckpt = tmp_path / "m.tbm"
    checkpoint_save(ckpt, FaSNet(cfg.model_config(), rng))
    ref, other = read_manifest(dataset[1])[0]["mixture"][:2]
    x, fs = read_wav(other)
    short, slow = tmp_path / "short.wav", tmp_path / "slow.wav"
    write_wav(short, x[:-1], fs)
    write_wav(slow, x, 16000)
    for bad in ([ref, str(short)], [ref, str(slow)], [ref, str(tmp_path / "missing.wav")]):
        with pytest.raises(ValidationError):
            separate_files(str(ckpt), bad, str(tmp_path / "out"))
    with pytest.raises(ValidationError):
        separate_files(str(ckpt), [str(slow), str(slow)], str(tmp_path / "out"))
