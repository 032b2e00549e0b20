"""Synthetic data, toy-raster preprocessing and dataset files."""
from .dataset_io import FORMAT_VERSION, Dataset, load_dataset, read_manifest, save_dataset
from .raster import background_mask, otsu_threshold, tile_and_filter, tile_grid
from .synth import GenerationError, SlideSample, SynthConfig, derive_delta, generate_dataset

__all__ = [
    "SynthConfig", "SlideSample", "GenerationError", "generate_dataset", "derive_delta", "Dataset",
    "save_dataset", "load_dataset", "read_manifest", "FORMAT_VERSION", "otsu_threshold",
    "tile_and_filter", "tile_grid", "background_mask",
]
