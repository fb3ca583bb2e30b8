"""The gradient-check suite run by ``tacbeam grad-check`` and the tests."""
import numpy as np

from tacbeam.fasnet import VARIANTS, FasnetConfig, FaSNet
from tacbeam.nn import BiLSTM, LayerNorm, Linear, PReLU, grad_check
from tacbeam.tac import TAC


def tiny_model_config(variant):
    """L=8, W=4, K=8, one block, C=2 (inputs: N=2, 12 samples -> 3 frames)."""
    return FasnetConfig(variant=variant, num_sources=2, sample_rate=8000, frame_len=8,
                        context=4, hop=4, enc_dim=8, tac_dim=6, hidden=4, depth=1, chunk=4)


def suite_cases(seed):
    rng = np.random.default_rng(seed)
    cases = [
        ("linear", Linear(5, 7, rng), rng.standard_normal((3, 5)), True),
        ("prelu", PReLU(), rng.standard_normal((4, 6)), True),
        ("prelu_channel", PReLU(6), rng.standard_normal((4, 6)), True),
        ("layer_norm", LayerNorm(6), rng.standard_normal((4, 6)), True),
        ("recurrent_bidir", BiLSTM(3, 2, rng), rng.standard_normal((2, 4, 3)), True),
        ("tac", TAC(4, rng, hidden=3), rng.standard_normal((2, 3, 2, 4)), True),
    ]
    for v in VARIANTS:
        model = FaSNet(tiny_model_config(v), rng)
        cases.append((f"fasnet_{v}", model, rng.standard_normal((1, 2, 12)), False))
    return cases


def run_suite(seeds=range(5), tolerance=1e-5):
    """Yield (seed, name, report) for every case."""
    for seed in seeds:
        for name, module, x, check_input in suite_cases(seed):
            yield seed, name, grad_check(module, x, tolerance, seed=seed, check_input=check_input)
