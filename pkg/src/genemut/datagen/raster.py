"""Otsu thresholding and background-filtered tiling of grayscale rasters.

Background is the bright side of the threshold, as on H&E scans.
"""
from __future__ import annotations

import numpy as np


def _as_raster(raster):
    r = np.asarray(raster)
    if r.ndim != 2:
        raise ValueError(f"raster must be 2-D, got shape {r.shape}")
    if r.size and (r.min() < 0 or r.max() > 255):
        raise ValueError("raster values must lie in 0..255")
    return r.astype(np.int64)


def otsu_threshold(raster):
    """Gray level t maximizing between-class variance with class 0 = values <= t.

    Scores are compared exactly in integer arithmetic; ties go to the smallest
    t. A raster with fewer than two distinct values returns its minimum.
    """
    r = _as_raster(raster)
    hist = np.bincount(r.ravel(), minlength=256)
    if np.count_nonzero(hist) < 2:
        return int(r.min())
    levels = np.arange(256, dtype=np.int64)
    n0s = np.cumsum(hist).tolist()
    s0s = np.cumsum(hist * levels).tolist()
    N, S = n0s[-1], s0s[-1]
    best_t, best_num, best_den = 0, -1, 1
    for t in range(255):
        n0, s0 = n0s[t], s0s[t]
        n1 = N - n0
        if n0 == 0 or n1 == 0:
            continue
        # w0*w1*(mu1 - mu0)^2 == (S*n0 - N*s0)^2 / (N^2 * n0 * n1)
        num = (S * n0 - N * s0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def background_mask(raster, threshold=None):
    r = _as_raster(raster)
    if threshold is None:
        if np.unique(r).size < 2:
            # no contrast to split on: classify by absolute brightness
            return r > 127
        threshold = otsu_threshold(r)
    return r > threshold


def tile_grid(height, width, L):
    return [(x, y) for y in range(0, height - L + 1, L) for x in range(0, width - L + 1, L)]


def tile_and_filter(raster, L, background_fraction_max=0.5, return_dropped=False):
    """Non-overlapping L x L tiles from the origin, keeping tissue-dominated ones.

    Returns ``(x, y)`` top-left coordinates (x = column). Partial edge tiles
    are never produced.
    """
    r = _as_raster(raster)
    h, w = r.shape
    if L < 1 or L > min(h, w):
        raise ValueError(f"tile size {L} does not fit raster {h}x{w}")
    bg = background_mask(r)
    kept, dropped = [], []
    for x, y in tile_grid(h, w, L):
        frac = bg[y:y + L, x:x + L].mean()
        (kept if frac <= background_fraction_max else dropped).append((x, y))
    return (kept, dropped) if return_dropped else kept
