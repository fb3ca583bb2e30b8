"""Run configuration: one flat set of keys shared by every subcommand.

Config files are line-oriented ``key = value`` text; ``#`` starts a comment,
blank lines are ignored, unknown keys are rejected. See README for the key
reference. Every default that is not stated by the method itself (all
optimization settings, separator sizes, K, D, hop) is a tunable, not a
reproduction value.
"""
from dataclasses import asdict, dataclass, fields

from tacbeam.errors import ValidationError
from tacbeam.fasnet import VARIANTS, FasnetConfig


@dataclass
class RunConfig:
    # data generation
    geometry: str = "adhoc"
    n_train: int = 200
    n_valid: int = 50
    n_test: int = 0
    min_mics: int = 2
    max_mics: int = 6
    sample_rate: int = 16000
    duration: float = 4.0
    speech_dir: str = ""
    noise_dir: str = ""
    workers: int = 1
    # model
    variant: str = "single_stage_tac"
    num_sources: int = 2
    frame_ms: float = 16.0
    context_ms: float = 16.0
    hop: int = 0
    enc_dim: int = 64
    tac_dim: int = 0
    hidden: int = 128
    depth: int = 2
    chunk: int = 50
    # training
    train_manifest: str = ""
    valid_manifest: str = ""
    lr: float = 1e-3
    clip_norm: float = 5.0
    batch_size: int = 4
    max_steps: int = 1000
    checkpoint_every: int = 100
    log_every: int = 50
    random_reference: int = 0
    seed: int = 0

    def validate(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.geometry not in ("adhoc", "circular6"):
            raise ValidationError("geometry must be adhoc or circular6")
        if not 2 <= self.min_mics <= self.max_mics <= 6:
            raise ValidationError("need 2 <= min_mics <= max_mics <= 6")
        if self.frame_ms <= 0 or self.context_ms < 0:
            raise ValidationError("frame_ms must be > 0 and context_ms >= 0")
        if self.batch_size < 1 or self.max_steps < 0 or self.checkpoint_every < 1:
            raise ValidationError("batch_size, checkpoint_every must be >= 1, max_steps >= 0")
        if self.lr < 0 or self.clip_norm <= 0:
            raise ValidationError("lr must be >= 0 and clip_norm > 0")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ValidationError("duration and sample_rate must be positive")
        try:
            self.model_config()
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        return self

    def model_config(self):
        fs = self.sample_rate
        return FasnetConfig(
            variant=self.variant,
            num_sources=self.num_sources,
            sample_rate=fs,
            frame_len=int(round(self.frame_ms * fs / 1000)),
            context=int(round(self.context_ms * fs / 1000)),
            hop=self.hop,
            enc_dim=self.enc_dim,
            tac_dim=self.tac_dim,
            hidden=self.hidden,
            depth=self.depth,
            chunk=self.chunk,
            max_mics=self.max_mics,
        )

    def to_dict(self):
        return asdict(self)

    def replace(self, **overrides):
        d = self.to_dict()
        d.update(overrides)
        return RunConfig(**d)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    kind = _TYPES[key]
    kind = kind if isinstance(kind, str) else kind.__name__
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ValidationError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_overrides(pairs, base=None):
    """Apply ``key=value`` strings on top of ``base`` (or the defaults)."""
    values = (base or RunConfig()).to_dict()
    for n, line in enumerate(pairs, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {n}: expected key = value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValidationError(f"line {n}: unknown config key {key!r}")
        values[key] = _coerce(key, raw)
    return RunConfig(**values).validate()


def load_config(path=None, overrides=()):
    lines = []
    if path:
        try:
            with open(path) as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_overrides(lines)
    return parse_overrides(list(overrides), cfg) if overrides else cfg


def dump_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())
