"""Occlusion-weighted bidirectional optical flow engine."""

from ._core import (
    Error,
    bilinear_sample,
    charbonnier,
    epe_map,
    estimate,
    evaluate,
    flow_to_color,
    gradcheck,
    loss_gradient,
    occlusion_weights,
    read_flo,
    read_image,
    read_kitti_flow,
    synth_diag_shear,
    synth_occluder,
    synth_translate,
    total_loss,
    write_flo,
    write_image,
    write_kitti_flow,
)

__all__ = [
    "Error",
    "bilinear_sample",
    "charbonnier",
    "epe_map",
    "estimate",
    "evaluate",
    "flow_to_color",
    "gradcheck",
    "loss_gradient",
    "occlusion_weights",
    "read_flo",
    "read_image",
    "read_kitti_flow",
    "synth_diag_shear",
    "synth_occluder",
    "synth_translate",
    "total_loss",
    "write_flo",
    "write_image",
    "write_kitti_flow",
]

__version__ = "0.1.0"
