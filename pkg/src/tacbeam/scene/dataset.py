"""Dataset generation: scene sampling, rendering and WAV/manifest output.

Each utterance draws from its own RNG stream seeded by (seed, split, index),
so serial and multi-process generation produce identical files.
"""
from concurrent.futures import ProcessPoolExecutor
import glob
import os
import zlib

import numpy as np

from tacbeam.audio_io import read_wav, write_manifest, write_wav
from tacbeam.scene.render import render_scene
from tacbeam.scene.sampling import (
    angle_bucket,
    overlap_bucket,
    sample_scene,
    speaker_angle,
)
from tacbeam.scene.sources import pick_from_pool, synth_noise, synth_speech


def _split_code(split):
    return zlib.crc32(split.encode())


def utterance_rng(seed, split, index):
    return np.random.default_rng(np.random.SeedSequence([seed, _split_code(split), index]))


def load_pool(directory):
    if not directory:
        return None
    files = sorted(glob.glob(os.path.join(directory, "*.wav")))
    if not files:
        raise FileNotFoundError(f"no .wav files in {directory}")
    return [read_wav(f)[0] for f in files]


def mic_count(index, geometry, min_mics, max_mics):
    """Round-robin over mic counts so every configuration gets equal utterances."""
    if geometry == "circular6":
        return 6
    return min_mics + index % (max_mics - min_mics + 1)


def make_utterance(index, seed, split, geometry, min_mics, max_mics, fs, n_samples,
                   speech_pool=None, noise_pool=None):
    rng = utterance_rng(seed, split, index)
    n_mics = mic_count(index, geometry, min_mics, max_mics)
    spec = sample_scene(rng, geometry, n_mics)
    if speech_pool:
        s1 = pick_from_pool(rng, speech_pool, n_samples)
        s2 = pick_from_pool(rng, speech_pool, n_samples)
    else:
        s1 = synth_speech(rng, n_samples, fs)
        s2 = synth_speech(rng, n_samples, fs)
    noise = pick_from_pool(rng, noise_pool, n_samples) if noise_pool else synth_noise(rng, n_samples, fs)
    return render_scene(spec, s1, s2, noise, fs, n_samples)


def _write_one(args):
    (index, out_dir, split, seed, geometry, min_mics, max_mics, fs, n_samples,
     speech_pool, noise_pool) = args
    scene = make_utterance(index, seed, split, geometry, min_mics, max_mics, fs, n_samples,
                           speech_pool, noise_pool)
    uid = f"{split}_{index:06d}"
    rel = os.path.join(split, uid)
    os.makedirs(os.path.join(out_dir, rel), exist_ok=True)

    def put(name, x):
        p = os.path.join(rel, name)
        write_wav(os.path.join(out_dir, p), x, fs)
        return p

    N = scene.spec.n_mics
    mixture = [put(f"mix_ch{i}.wav", scene.mixture[i]) for i in range(N)]
    sources = [[put(f"s{j}_ch{i}.wav", scene.targets[j, i]) for i in range(N)] for j in range(2)]
    noise = [put(f"noise_ch{i}.wav", scene.noise[i]) for i in range(N)]
    angle = speaker_angle(scene.spec) if scene.spec.geometry == "circular6" else None
    return {
        "id": uid,
        "index": index,
        "split": split,
        "sample_rate": fs,
        "num_samples": n_samples,
        "n_mics": N,
        "num_sources": 2,
        "reference_channel": 0,
        "geometry": scene.spec.geometry,
        "mixture": mixture,
        "sources": sources,
        "noise": noise,
        "scene": scene.spec.to_dict(),
        "overlap_ratio": scene.spec.overlap_ratio,
        "overlap_bucket": overlap_bucket(scene.spec.overlap_ratio),
        "speaker_angle": angle,
        "angle_bucket": angle_bucket(angle) if angle is not None else None,
    }


def generate_split(out_dir, split, n_utterances, seed, geometry="adhoc", min_mics=2,
                   max_mics=6, sample_rate=16000, duration=4.0, speech_dir=None,
                   noise_dir=None, workers=1):
    """Render ``n_utterances`` and write ``<out_dir>/<split>.jsonl``; returns its path."""
    os.makedirs(out_dir, exist_ok=True)
    n_samples = int(round(duration * sample_rate))
    speech_pool = load_pool(speech_dir)
    noise_pool = load_pool(noise_dir)
    jobs = [
        (i, out_dir, split, seed, geometry, min_mics, max_mics, sample_rate, n_samples,
         speech_pool, noise_pool)
        for i in range(n_utterances)
    ]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_write_one, jobs))
    else:
        records = [_write_one(j) for j in jobs]
    path = os.path.join(out_dir, f"{split}.jsonl")
    write_manifest(path, records)
    return path
