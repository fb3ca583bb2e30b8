from tacbeam.scene.rir import rir_image_method, sabine_beta, schroeder_t60
from tacbeam.scene.sampling import (
    OVERLAP_BUCKETS,
    ANGLE_BUCKETS,
    RoomSpec,
    SceneSpec,
    angle_bucket,
    overlap_bucket,
    sample_scene,
    speaker_angle,
)
from tacbeam.scene.render import RenderedScene, render_scene

__all__ = [
    "rir_image_method",
    "sabine_beta",
    "schroeder_t60",
    "RoomSpec",
    "SceneSpec",
    "sample_scene",
    "speaker_angle",
    "overlap_bucket",
    "angle_bucket",
    "OVERLAP_BUCKETS",
    "ANGLE_BUCKETS",
    "RenderedScene",
    "render_scene",
]
