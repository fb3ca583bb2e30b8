"""SI-SNRi evaluation with overlap-ratio, speaker-angle and mic-count buckets."""
from dataclasses import asdict, dataclass, field

import numpy as np

from tacbeam.audio_io import load_utterance, read_manifest
from tacbeam.errors import ValidationError
from tacbeam.objective import si_snri, upit_loss
from tacbeam.scene.sampling import ANGLE_BUCKETS, OVERLAP_BUCKETS, angle_bucket, overlap_bucket


@dataclass
class EvalReport:
    average: float
    count: int
    overlap: dict = field(default_factory=dict)
    angle: dict = field(default_factory=dict)
    mics: dict = field(default_factory=dict)
    utterances: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def format(self):
        lines = [f"average SI-SNRi {self.average:.2f} dB over {self.count} utterances"]
        for title, table in (("overlap", self.overlap), ("angle", self.angle), ("mics", self.mics)):
            for key, cell in table.items():
                lines.append(f"  {title:8s} {key:>8s}  {cell['mean']:7.2f} dB  (n={cell['count']})")
        return "\n".join(lines)


def utterance_si_snri(est, targets, mixture_ref):
    """Mean SI-SNRi over sources under the best (PIT) assignment."""
    _, perm = upit_loss(est, targets)
    vals = [si_snri(est[j], targets[perm[j]], mixture_ref) for j in range(len(perm))]
    return float(np.mean(vals))


def _bucket_table(scores, labels, order):
    table = {}
    for key in order:
        vals = [s for s, lab in zip(scores, labels) if lab == key]
        if vals:
            table[key] = {"mean": float(np.mean(vals)), "count": len(vals)}
    return table


def bucket_report(scores, records):
    """Aggregate per-utterance scores into an :class:`EvalReport`."""
    if not scores:
        raise ValidationError("nothing to evaluate")
    ov = [r.get("overlap_bucket") or overlap_bucket(r["overlap_ratio"]) for r in records]
    ang = [
        r.get("angle_bucket") or (angle_bucket(r["speaker_angle"]) if r.get("speaker_angle") is not None else None)
        for r in records
    ]
    mics = [str(r.get("n_mics", len(r["mixture"]))) for r in records]
    mic_order = [str(n) for n in sorted({int(m) for m in mics})]
    return EvalReport(
        average=float(np.mean(scores)),
        count=len(scores),
        overlap=_bucket_table(scores, ov, OVERLAP_BUCKETS),
        angle=_bucket_table(scores, ang, ANGLE_BUCKETS),
        mics=_bucket_table(scores, mics, mic_order),
        utterances=[[r.get("id", str(k)), s] for k, (r, s) in enumerate(zip(records, scores))],
    )


def evaluate_model(separate_fn, records, num_sources=None):
    """Score ``separate_fn(mixture (N, S)) -> (C, S)`` on manifest records."""
    scores = []
    for rec in records:
        if num_sources is not None and rec["num_sources"] != num_sources:
            raise ValidationError(
                f"{rec.get('id')}: manifest has {rec['num_sources']} sources, model {num_sources}"
            )
        ref = rec.get("reference_channel", 0)
        mix, targets, _ = load_utterance(rec, ref)
        est = separate_fn(mix)
        scores.append(utterance_si_snri(est, targets, mix[ref]))
    return bucket_report(scores, records)


def evaluate(checkpoint, manifest):
    from tacbeam.runtime.checkpoint import checkpoint_load

    model, _ = checkpoint_load(checkpoint)
    records = read_manifest(manifest)
    return evaluate_model(model.separate, records, model.config.num_sources)
