"""Random scene configurations for the ad-hoc and 6-mic circular setups.

Ranges: room length/width U[3, 10] m, height U[2.5, 4] m, T60 U[0.1, 0.5] s,
overlap ratio U[0, 1], speaker-to-speaker SNR U[0, 5] dB, speech-to-noise
SNR U[10, 20] dB.
"""
from dataclasses import asdict, dataclass
import math

import numpy as np

from tacbeam.errors import ValidationError

WALL_MARGIN = 0.5
CIRCLE_DIAMETER = 0.10
CIRCLE_MICS = 6
GEOMETRIES = ("adhoc", "circular6")

OVERLAP_BUCKETS = ("<25%", "25-50%", "50-75%", ">75%")
ANGLE_BUCKETS = ("<15", "15-45", "45-90", ">90")


@dataclass(frozen=True)
class RoomSpec:
    length: float
    width: float
    height: float
    t60: float

    def __post_init__(self):
        if self.t60 <= 0:
            raise ValueError("t60 must be positive")
        if min(self.length, self.width, self.height) <= 0:
            raise ValueError("room dimensions must be positive")

    @property
    def dims(self):
        return np.array([self.length, self.width, self.height])


@dataclass(frozen=True)
class SceneSpec:
    room: RoomSpec
    mic_positions: tuple
    source_positions: tuple
    noise_position: tuple
    overlap_ratio: float
    speech_snr: float
    noise_snr: float
    geometry: str

    @property
    def n_mics(self):
        return len(self.mic_positions)

    def to_dict(self):
        d = asdict(self)
        d["mic_positions"] = [list(p) for p in self.mic_positions]
        d["source_positions"] = [list(p) for p in self.source_positions]
        d["noise_position"] = list(self.noise_position)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            room=RoomSpec(**d["room"]),
            mic_positions=tuple(tuple(p) for p in d["mic_positions"]),
            source_positions=tuple(tuple(p) for p in d["source_positions"]),
            noise_position=tuple(d["noise_position"]),
            overlap_ratio=d["overlap_ratio"],
            speech_snr=d["speech_snr"],
            noise_snr=d["noise_snr"],
            geometry=d["geometry"],
        )


def _tup(p):
    return tuple(float(v) for v in p)


def _in_margin(p, dims, margin=WALL_MARGIN):
    return bool(np.all(p >= margin) and np.all(p <= dims - margin))


def _uniform_point(rng, dims, margin):
    return rng.uniform(margin, dims - margin)


def sample_room(rng):
    return RoomSpec(
        length=float(rng.uniform(3.0, 10.0)),
        width=float(rng.uniform(3.0, 10.0)),
        height=float(rng.uniform(2.5, 4.0)),
        t60=float(rng.uniform(0.1, 0.5)),
    )


def circular_array(center, diameter=CIRCLE_DIAMETER, n=CIRCLE_MICS, phase=0.0):
    """``n`` mics evenly spaced on a horizontal circle around ``center``."""
    ang = phase + 2.0 * np.pi * np.arange(n) / n
    r = diameter / 2.0
    center = np.asarray(center, dtype=np.float64)
    return center + np.stack([r * np.cos(ang), r * np.sin(ang), np.zeros(n)], axis=1)


def sample_scene(rng, geometry="adhoc", n_mics=None, max_tries=10000):
    """Draw one :class:`SceneSpec`; wall margins are enforced by rejection."""
    if geometry not in GEOMETRIES:
        raise ValidationError(f"unknown geometry {geometry!r}")
    if geometry == "adhoc":
        if n_mics is None or not 2 <= n_mics <= 6:
            raise ValidationError(f"ad-hoc scenes need 2..6 mics, got {n_mics}")
    elif n_mics not in (None, CIRCLE_MICS):
        raise ValidationError("circular6 geometry always has 6 mics")
    room = sample_room(rng)
    dims = room.dims
    overlap = float(rng.uniform(0.0, 1.0))
    speech_snr = float(rng.uniform(0.0, 5.0))
    noise_snr = float(rng.uniform(10.0, 20.0))
    if geometry == "adhoc":
        mics = [_uniform_point(rng, dims, WALL_MARGIN) for _ in range(n_mics)]
        srcs = [_uniform_point(rng, dims, WALL_MARGIN) for _ in range(2)]
        noise = _uniform_point(rng, dims, WALL_MARGIN)
    else:
        center = _uniform_point(rng, dims, WALL_MARGIN)
        mics = list(circular_array(center, phase=float(rng.uniform(0, 2 * np.pi))))
        angle = float(rng.uniform(0.0, 180.0))
        srcs = _place_speakers(rng, dims, center, angle, max_tries)
        noise = rng.uniform(0.0, 1.0, 3) * dims
        for _ in range(max_tries):
            if min(np.linalg.norm(noise - m) for m in mics) > 1e-3:
                break
            noise = rng.uniform(0.0, 1.0, 3) * dims
    return SceneSpec(
        room=room,
        mic_positions=tuple(_tup(m) for m in mics),
        source_positions=tuple(_tup(s) for s in srcs),
        noise_position=_tup(noise),
        overlap_ratio=overlap,
        speech_snr=speech_snr,
        noise_snr=noise_snr,
        geometry=geometry,
    )


def _place_speakers(rng, dims, center, angle_deg, max_tries):
    """Two speakers in the array's horizontal plane separated by ``angle_deg``."""
    for _ in range(max_tries):
        phi = rng.uniform(0.0, 2 * np.pi)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        dists = rng.uniform(0.3, 3.0, 2)
        pts = []
        for az, d in ((phi, dists[0]), (phi + sign * math.radians(angle_deg), dists[1])):
            pts.append(center + d * np.array([math.cos(az), math.sin(az), 0.0]))
        if all(_in_margin(p, dims) for p in pts):
            return pts
    raise ValidationError("could not place speakers inside the room (infeasible constraints)")


def speaker_angle(spec):
    """Angle in degrees between the two speaker directions seen from the array center."""
    if spec.geometry != "circular6":
        raise ValidationError("speaker angle is defined for the circular array only")
    center = np.mean(np.asarray(spec.mic_positions), axis=0)
    u = np.asarray(spec.source_positions[0]) - center
    v = np.asarray(spec.source_positions[1]) - center
    cos = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


def overlap_bucket(ratio):
    idx = min(int(ratio // 0.25), 3) if ratio >= 0 else 0
    return OVERLAP_BUCKETS[idx]


def angle_bucket(deg):
    if deg < 15:
        return ANGLE_BUCKETS[0]
    if deg < 45:
        return ANGLE_BUCKETS[1]
    if deg < 90:
        return ANGLE_BUCKETS[2]
    return ANGLE_BUCKETS[3]
