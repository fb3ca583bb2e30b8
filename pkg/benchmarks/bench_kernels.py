"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Sizes follow the smoke configuration (hidden 32, 50-frame chunks, batch of
2-mic utterances), a long narrow recurrence and a 0.4 s T60 room impulse response at 16 kHz.
"""
import argparse
import timeit

import numpy as np

from tacbeam import _kernels_py as pure

try:
    from tacbeam import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def cases(rng):
    H = 32
    xg = rng.standard_normal((50, 168, 4 * H))
    wh = 0.3 * rng.standard_normal((H, 4 * H))
    yield "lstm_forward  T=50 B=168 H=32", lambda k: k.lstm_forward(xg, wh)
    h, c, acts = pure.lstm_forward(xg, wh)
    dh = rng.standard_normal(h.shape)
    yield "lstm_backward T=50 B=168 H=32", lambda k: k.lstm_backward(dh, c, acts, wh)
    # inter-chunk pass when separating one utterance: long and narrow
    xs = rng.standard_normal((500, 2, 4 * H))
    yield "lstm_forward  T=500 B=2 H=32", lambda k: k.lstm_forward(xs, wh)
    room = np.array([6.5, 6.5, 3.25])
    src, mic = np.array([1.7, 2.2, 1.5]), np.array([4.1, 3.9, 1.2])
    yield "image_source_rir 0.4 s @16k", lambda k: k.image_source_rir(
        room, src, mic, 0.85, 16000.0, 7000, 343.0, -1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng):
        t_py = min(timeit.repeat(lambda: fn(pure), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:32s} {t_py:10.2f} {'n/a':>10s} {'':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
