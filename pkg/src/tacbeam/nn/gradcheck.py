"""Central finite-difference gradient checking for any module."""
from dataclasses import dataclass, field

import numpy as np

from tacbeam.errors import NumericalError


@dataclass
class GradCheckReport:
    max_rel_error: float
    tolerance: float
    errors: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.max_rel_error < self.tolerance

    def worst(self):
        return max(self.errors.items(), key=lambda kv: kv[1]) if self.errors else None


def _rel_err(a, n):
    denom = max(np.linalg.norm(a), np.linalg.norm(n))
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(a - n) / denom)


def grad_check(module, x, tolerance=1e-5, step=1e-5, seed=0, check_input=True):
    """Compare analytic gradients against central differences.

    The scalar loss is ``sum(G * module.forward(x)[0])`` for a fixed random
    projection ``G``. Every parameter entry (and every input entry when
    ``check_input``) is perturbed by +-``step``. The error per tensor is
    ``|analytic - numeric| / max(|analytic|, |numeric|)`` in the 2-norm; the
    report holds the maximum over tensors.
    """
    x = np.array(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    y, cache = module.forward(x)
    G = rng.standard_normal(y.shape)

    def loss(inp):
        val = float(np.sum(G * module.forward(inp)[0]))
        if not np.isfinite(val):
            raise NumericalError("non-finite loss during gradient check")
        return val

    module.zero_grad()
    dx = module.backward(G, cache)
    errors = {}
    for name, p in module.named_parameters():
        analytic = p.grads.copy()
        numeric = np.zeros_like(analytic)
        flat = p.values.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            lp = loss(x)
            flat[k] = orig - step
            lm = loss(x)
            flat[k] = orig
            numeric.reshape(-1)[k] = (lp - lm) / (2 * step)
        errors[name] = _rel_err(analytic, numeric)
    if check_input:
        numeric = np.zeros_like(x)
        flat = x.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            lp = loss(x)
            flat[k] = orig - step
            lm = loss(x)
            flat[k] = orig
            numeric.reshape(-1)[k] = (lp - lm) / (2 * step)
        errors["<input>"] = _rel_err(np.asarray(dx), numeric)
    module.zero_grad()
    worst = max(errors.values()) if errors else 0.0
    return GradCheckReport(worst, tolerance, errors)
