"""Adam with global gradient-norm clipping."""
import numpy as np


def clip_grad_norm(params, max_norm):
    """Scale all gradients so their joint 2-norm is at most ``max_norm``; returns the norm."""
    total = float(np.sqrt(sum(float(np.sum(p.grads * p.grads)) for p in params)))
    if total > max_norm:
        scale = max_norm / (total + 1e-12)
        for p in params:
            p.grads *= scale
    return total


class Adam:
    """Adam over ``named_params``, a list of (name, Param) pairs."""

    def __init__(self, named_params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        named_params = list(named_params)
        self.names = [n for n, _ in named_params]
        self.params = [p for _, p in named_params]
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.values) for p in self.params]
        self.v = [np.zeros_like(p.values) for p in self.params]

    def step(self):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * p.grads
            v *= self.b2
            v += (1.0 - self.b2) * p.grads * p.grads
            p.values -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_tensors(self):
        out = []
        for name, m, v in zip(self.names, self.m, self.v):
            out.append(("adam.m." + name, m))
            out.append(("adam.v." + name, v))
        return out

    def load_state_tensors(self, tensors, t):
        for k, name in enumerate(self.names):
            self.m[k][...] = tensors["adam.m." + name]
            self.v[k][...] = tensors["adam.v." + name]
        self.t = t
