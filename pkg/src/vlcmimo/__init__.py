"""Permutation-matrix MIMO codes for VLC with uniform illumination and dimming control."""

__version__ = "0.1.0"

from .codebook import CodebookSpec, Method, decode, encode, validate  # noqa: E402
from .channel import ChannelModel, Geometry, OpticalParams, preset  # noqa: E402
from .detection import Detector, LinkConfig  # noqa: E402

__all__ = [
    "CodebookSpec",
    "Method",
    "encode",
    "decode",
    "validate",
    "ChannelModel",
    "Geometry",
    "OpticalParams",
    "preset",
    "Detector",
    "LinkConfig",
]
