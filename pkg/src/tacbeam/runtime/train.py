"""Training loop: negative SI-SNR with utterance-level PIT, Adam, norm clipping.

Batches are drawn with a counter-based RNG keyed on (seed, step), so a run
resumed from any checkpoint follows the uninterrupted run exactly. Each
batch holds utterances with the same microphone count. With
``random_reference`` every example uses a randomly chosen microphone as the
reference (moved to channel 0, targets taken at that mic).
"""
from dataclasses import dataclass, field
import logging
import os

import numpy as np

from tacbeam.audio_io import load_images, read_manifest
from tacbeam.errors import NumericalError, ValidationError
from tacbeam.fasnet import FaSNet
from tacbeam.objective import upit_loss_batch
from tacbeam.runtime.checkpoint import checkpoint_load, checkpoint_save
from tacbeam.runtime.optim import Adam, clip_grad_norm

log = logging.getLogger(__name__)


@dataclass
class TrainResult:
    model: FaSNet
    losses: list
    checkpoints: list = field(default_factory=list)


def load_dataset(manifest, num_sources):
    """List of (mixture (N, S), images (C, N, S), reference channel) per utterance."""
    data = []
    for rec in read_manifest(manifest):
        if rec["num_sources"] != num_sources:
            raise ValidationError(
                f"{rec.get('id')}: {rec['num_sources']} sources, model expects {num_sources}"
            )
        mix, images, _ = load_images(rec)
        data.append((mix, images, rec.get("reference_channel", 0)))
    return data


def _groups(data):
    groups = {}
    for k, (mix, _, _) in enumerate(data):
        groups.setdefault(mix.shape[0], []).append(k)
    keys = sorted(groups)
    return keys, [groups[k] for k in keys]


def _with_reference(mix, images, ref):
    order = [ref] + [i for i in range(mix.shape[0]) if i != ref]
    return mix[order], images[:, ref]


def draw_batch(data, keys, groups, batch_size, seed, step, random_reference=False):
    rng = np.random.default_rng([seed, step])
    sizes = np.array([len(g) for g in groups], dtype=np.float64)
    g = groups[int(rng.choice(len(keys), p=sizes / sizes.sum()))]
    idx = rng.choice(len(g), size=batch_size, replace=len(g) < batch_size)
    picks = []
    for i in idx:
        mix, images, ref = data[g[i]]
        if random_reference:
            ref = int(rng.integers(mix.shape[0]))
        picks.append(_with_reference(mix, images, ref))
    lengths = {m.shape[1] for m, _ in picks}
    if len(lengths) != 1:
        n = min(lengths)
        picks = [(m[:, :n], t[:, :n]) for m, t in picks]
    return np.stack([m for m, _ in picks]), np.stack([t for _, t in picks])


def train_step(model, optimizer, x, targets, clip_norm):
    model.zero_grad()
    y, cache = model.forward(x)
    loss, _, dy = upit_loss_batch(y, targets)
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite training loss {loss}")
    model.backward(dy, cache)
    norm = clip_grad_norm(model.parameters(), clip_norm)
    if not np.isfinite(norm):
        raise NumericalError("non-finite gradient norm")
    optimizer.step()
    return loss


def train(cfg, out_dir, data=None, resume=None, max_steps=None):
    """Train from ``cfg``; writes checkpoints and ``losses.tsv`` into ``out_dir``.

    ``data`` may be a preloaded list of (mixture, targets) pairs; otherwise
    ``cfg.train_manifest`` is read. ``resume`` is a checkpoint path.
    """
    os.makedirs(out_dir, exist_ok=True)
    mcfg = cfg.model_config()
    if data is None:
        if not cfg.train_manifest:
            raise ValidationError("train_manifest is not set")
        data = load_dataset(cfg.train_manifest, mcfg.num_sources)
    if not data:
        raise ValidationError("empty training set")
    keys, groups = _groups(data)
    model = FaSNet(mcfg, np.random.default_rng(cfg.seed))
    opt = Adam(model.named_parameters(), lr=cfg.lr)
    losses, start = [], 0
    if resume:
        _, header = checkpoint_load(resume, model, opt)
        start = header["step"]
        losses = list(header["losses"])
    stop = cfg.max_steps if max_steps is None else max_steps
    saved = []
    for step in range(start, stop):
        x, t = draw_batch(data, keys, groups, cfg.batch_size, cfg.seed, step,
                          bool(cfg.random_reference))
        losses.append(train_step(model, opt, x, t, cfg.clip_norm))
        done = step + 1
        if cfg.log_every and done % cfg.log_every == 0:
            recent = np.mean(losses[-cfg.log_every :])
            log.info("step %d  loss %.3f (mean of last %d)", done, recent, cfg.log_every)
        if done % cfg.checkpoint_every == 0 or done == stop:
            path = os.path.join(out_dir, f"ckpt_{done:06d}.tbm")
            checkpoint_save(path, model, opt, done, losses, cfg)
            saved.append(path)
    with open(os.path.join(out_dir, "losses.tsv"), "w") as fh:
        fh.write("step\tloss\n")
        for k, v in enumerate(losses, 1):
            fh.write(f"{k}\t{v!r}\n")
    if saved:
        checkpoint_save(os.path.join(out_dir, "last.tbm"), model, opt, stop, losses, cfg)
    return TrainResult(model, losses, saved)
