"""Parameters and the module base class.

Modules follow a cache-passing convention: ``forward(x)`` returns
``(y, cache)`` and ``backward(dy, cache)`` accumulates parameter gradients
and returns ``dx``. Nothing is stored on the module during a forward pass,
so inference may run concurrently over shared parameters.
"""
import numpy as np


class Param:
    __slots__ = ("name", "values", "grads")

    def __init__(self, values, name=""):
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.grads = np.zeros_like(self.values)
        self.name = name

    @property
    def shape(self):
        return self.values.shape

    def zero_grad(self):
        self.grads[...] = 0.0

    def __repr__(self):
        return f"Param({self.name!r}, shape={self.values.shape})"


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_children", {})

    def __setattr__(self, name, value):
        if isinstance(value, Param):
            if not value.name:
                value.name = name
            self._params[name] = value
        elif isinstance(value, Module):
            self._children[name] = value
        object.__setattr__(self, name, value)

    @staticmethod
    def param(values):
        return Param(values)

    def add_module(self, name, module):
        setattr(self, name, module)
        return module

    def named_parameters(self, prefix=""):
        out = [(prefix + name, p) for name, p in self._params.items()]
        for name, child in self._children.items():
            out.extend(child.named_parameters(prefix + name + "."))
        return out

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def num_parameters(self):
        return sum(p.values.size for p in self.parameters())

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self):
        return {name: p.values.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        """Replace all parameter values; validates everything before assigning."""
        named = dict(self.named_parameters())
        missing = sorted(set(named) - set(state))
        extra = sorted(set(state) - set(named))
        if missing or extra:
            raise ValueError(f"parameter mismatch: missing={missing} unexpected={extra}")
        for name, p in named.items():
            if np.shape(state[name]) != p.shape:
                raise ValueError(
                    f"shape mismatch for {name}: {np.shape(state[name])} vs {p.shape}"
                )
        for name, p in named.items():
            p.values[...] = state[name]

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dy, cache):
        raise NotImplementedError

    def __call__(self, x):
        return self.forward(x)[0]
