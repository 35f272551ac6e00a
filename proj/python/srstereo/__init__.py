"""Stepwise-regression stereo matching on synthetic scenes."""

from srstereo._core import (
    ContractError,
    FormatError,
    StereoModel,
    balanced_weight,
    cb_l1,
    cb_smooth_l1,
    clip_symmetric,
    d1,
    edge_f1,
    edge_gt,
    epe,
    err_rate,
    generate_scene,
    gradcheck,
    gradcheck_ops,
    prewitt_magnitude,
    pseudo_label_select,
    read_pfm,
    resize_bilinear,
    soft_edge,
    write_pfm,
)

__all__ = [
    "ContractError",
    "FormatError",
    "StereoModel",
    "balanced_weight",
    "cb_l1",
    "cb_smooth_l1",
    "clip_symmetric",
    "d1",
    "edge_f1",
    "edge_gt",
    "epe",
    "err_rate",
    "generate_scene",
    "gradcheck",
    "gradcheck_ops",
    "prewitt_magnitude",
    "pseudo_label_select",
    "read_pfm",
    "resize_bilinear",
    "soft_edge",
    "write_pfm",
]
