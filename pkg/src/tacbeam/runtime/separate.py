"""Run a trained model on an arbitrary set of microphone recordings."""
import os

from tacbeam.audio_io import read_multichannel, write_wav
from tacbeam.errors import ValidationError
from tacbeam.runtime.checkpoint import checkpoint_load


def separate_array(model, mixture):
    """(N, S) mixture -> (C, S) estimates; N must lie in [2, max_mics]."""
    N = mixture.shape[0]
    if not 2 <= N <= model.config.max_mics:
        raise ValidationError(f"{N} input channels outside supported range 2..{model.config.max_mics}")
    return model.separate(mixture)


def separate_files(checkpoint, wav_paths, out_dir):
    """Write ``est_s{j}.wav`` for each source; returns (paths, estimates)."""
    model, _ = checkpoint_load(checkpoint)
    mixture, fs = read_multichannel(wav_paths)
    if fs != model.config.sample_rate:
        raise ValidationError(f"input rate {fs} Hz, model trained at {model.config.sample_rate} Hz")
    est = separate_array(model, mixture)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for j, y in enumerate(est):
        p = os.path.join(out_dir, f"est_s{j}.wav")
        write_wav(p, y, fs)
        paths.append(p)
    return paths, est
