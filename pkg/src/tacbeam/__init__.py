"""Transform-average-concatenate (TAC) filter-and-sum beamforming for ad-hoc arrays."""
from tacbeam.fasnet import VARIANTS, FasnetConfig, FaSNet, build_model
from tacbeam.framing import FrameSpec
from tacbeam.kernels import BACKEND
from tacbeam.tac import TAC

__version__ = "0.1.0"

__all__ = ["FaSNet", "FasnetConfig", "FrameSpec", "TAC", "VARIANTS", "build_model", "BACKEND"]
