"""WAV and manifest I/O.

WAVs are mono 32-bit IEEE float files, one per channel. Manifests are JSON
Lines, one record per utterance, with paths relative to the manifest.
"""
import json
import os

import numpy as np
from scipy.io import wavfile

from tacbeam.errors import ValidationError


def write_wav(path, x, fs):
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError("write_wav expects a mono signal")
    wavfile.write(path, int(fs), x.astype(np.float32))


def read_wav(path):
    """Return ``(signal as float64, sample_rate)``."""
    try:
        fs, x = wavfile.read(path)
    except FileNotFoundError:
        raise ValidationError(f"missing audio file: {path}") from None
    except ValueError as exc:
        raise ValidationError(f"unreadable wav {path}: {exc}") from exc
    if x.ndim != 1:
        raise ValidationError(f"{path}: expected a mono file")
    if x.dtype.kind == "i":
        x = x / float(np.iinfo(x.dtype).max)
    return x.astype(np.float64), int(fs)


def read_multichannel(paths):
    """Stack mono files into (N, S); all must share length and rate."""
    sigs, rates = zip(*(read_wav(p) for p in paths))
    if len(set(rates)) != 1:
        raise ValidationError(f"sample rate mismatch across inputs: {sorted(set(rates))}")
    if len({s.size for s in sigs}) != 1:
        raise ValidationError("input files differ in length")
    return np.stack(sigs), rates[0]


def write_manifest(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_manifest(path):
    """Records with paths resolved against the manifest's directory."""
    if not os.path.exists(path):
        raise ValidationError(f"manifest not found: {path}")
    base = os.path.dirname(os.path.abspath(path))
    records = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{n}: bad JSON ({exc})") from exc
            for key in ("mixture", "sources", "num_sources", "sample_rate"):
                if key not in rec:
                    raise ValidationError(f"{path}:{n}: missing field {key!r}")
            rec["mixture"] = [os.path.join(base, p) for p in rec["mixture"]]
            rec["sources"] = [[os.path.join(base, p) for p in src] for src in rec["sources"]]
            if "noise" in rec:
                rec["noise"] = [os.path.join(base, p) for p in rec["noise"]]
            records.append(rec)
    if not records:
        raise ValidationError(f"manifest {path} is empty")
    return records


def load_utterance(rec, reference=0):
    """Mixture (N, S) and the sources' reverberant images at ``reference`` (C, S)."""
    mix, fs = read_multichannel(rec["mixture"])
    targets = np.stack([read_wav(src[reference])[0] for src in rec["sources"]])
    if targets.shape[1] != mix.shape[1]:
        raise ValidationError(f"{rec.get('id')}: target and mixture lengths differ")
    return mix, targets, fs


def load_images(rec):
    """Mixture (N, S) and every source's reverberant image at every mic (C, N, S)."""
    mix, fs = read_multichannel(rec["mixture"])
    images = np.stack([read_multichannel(src)[0] for src in rec["sources"]])
    if images.shape[1:] != mix.shape:
        raise ValidationError(f"{rec.get('id')}: source images and mixture shapes differ")
    return mix, images, fs
