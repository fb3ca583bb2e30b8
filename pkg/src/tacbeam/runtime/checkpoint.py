"""Model checkpoints: config, weights and optional optimizer state in one file.

The container layout is documented in :mod:`tacbeam.nn.serialize`. The JSON
header carries ``format``, ``model`` (the FasnetConfig), ``run`` (the full
RunConfig, optional), ``step``, ``adam_t`` and the loss history so far.
"""
import numpy as np

from tacbeam.errors import ValidationError
from tacbeam.fasnet import FasnetConfig, FaSNet
from tacbeam.nn import serialize

FORMAT = "tacbeam-checkpoint"


def checkpoint_save(path, model, optimizer=None, step=0, losses=(), run_config=None):
    header = {
        "format": FORMAT,
        "model": model.config.to_dict(),
        "run": run_config.to_dict() if run_config is not None else None,
        "step": int(step),
        "adam_t": optimizer.t if optimizer is not None else 0,
        "losses": [float(v) for v in losses],
    }
    tensors = list(model.state_dict().items())
    if optimizer is not None:
        tensors += optimizer.state_tensors()
    serialize.save(path, header, tensors)


def checkpoint_load(path, model=None, optimizer=None):
    """Load a checkpoint.

    Without ``model`` a new :class:`FaSNet` is built from the stored config.
    With ``model`` the stored config must match exactly; nothing is modified
    unless every tensor name and shape matches. Returns ``(model, header)``.
    """
    header, tensors = serialize.load(path)
    if header.get("format") != FORMAT:
        raise ValidationError(f"{path}: not a tacbeam checkpoint")
    try:
        stored = FasnetConfig.from_dict(header["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: bad model config ({exc})") from exc
    if model is None:
        model = FaSNet(stored, np.random.default_rng(0))
    elif model.config != stored:
        raise ValidationError(
            f"{path}: checkpoint config {stored} does not match model config {model.config}"
        )
    tensors = dict(tensors)
    weights = {k: v for k, v in tensors.items() if not k.startswith("adam.")}
    if optimizer is not None:
        missing = [n for n in optimizer.names if "adam.m." + n not in tensors]
        if missing:
            raise ValidationError(f"{path}: no optimizer state for {missing[:3]}")
    try:
        model.load_state_dict(weights)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if optimizer is not None:
        optimizer.load_state_tensors(tensors, header.get("adam_t", 0))
    return model, header
