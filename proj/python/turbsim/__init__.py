"""Geometric atmospheric turbulence simulation for annotated image datasets."""

from ._turbsim import (
    LoadError,
    augment_dataset,
    blur_image,
    calibrate,
    cli_main,
    component_variance,
    derive_seed,
    distortion_field,
    fnv1a64,
    gamma_for_shift,
    load_manifest,
    mean_pixel_shift,
    real_world_shift,
    simulate_turbulence,
    validate_model,
    warp_image,
)

__all__ = [
    "LoadError",
    "augment_dataset",
    "blur_image",
    "calibrate",
    "cli_main",
    "component_variance",
    "derive_seed",
    "distortion_field",
    "fnv1a64",
    "gamma_for_shift",
    "load_manifest",
    "mean_pixel_shift",
    "real_world_shift",
    "simulate_turbulence",
    "validate_model",
    "warp_image",
]
