"""Region-selection masks: loading, defaults, and per-pixel thresholds.

A mask holds one weight per pixel in [0, 1]: 1 where reflections were
marked, 0 where the image must be left alone. One mask is shared across
all color channels.
"""

import numpy as np
from PIL import Image

from .image import DimensionError, ensure_image

STRICT = "strict"
NEAREST = "nearest"
RESIZE_POLICIES = (STRICT, NEAREST)

# Rec.601 luma weights for RGB mask files
_LUMA = np.array([0.299, 0.587, 0.114])


def default_mask(dims) -> np.ndarray:
    """All-ones mask: reflections assumed present everywhere."""
    h, w = int(dims[0]), int(dims[1])
    if h < 1 or w < 1:
        raise DimensionError(f"mask dims must be positive, got {h}x{w}")
    return np.ones((h, w), dtype=np.float64)


def ensure_mask(mask, image_shape=None) -> np.ndarray:
    """Validate a mask array: 2D, values in [0, 1], dims matching the image."""
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"mask must be 2D, got shape {m.shape}")
    if m.size and (m.min() < 0.0 or m.max() > 1.0):
        raise ValueError("mask values must lie in [0, 1]")
    if image_shape is not None and m.shape != tuple(image_shape[:2]):
        raise DimensionError(
            f"mask shape {m.shape} does not match image {tuple(image_shape[:2])}"
        )
    return m


def _nearest_resize(m, dims):
    h, w = dims
    rows = np.floor((np.arange(h) + 0.5) * m.shape[0] / h).astype(int)
    cols = np.floor((np.arange(w) + 0.5) * m.shape[1] / w).astype(int)
    return m[rows.clip(0, m.shape[0] - 1)][:, cols.clip(0, m.shape[1] - 1)]


def _normalize_mask_image(data, label, expected_dims, resize_policy):
    if resize_policy not in RESIZE_POLICIES:
        raise ValueError(f"resize_policy must be one of {RESIZE_POLICIES}")
    if data.ndim == 3:
        if data.shape[2] == 1:
            data = data[:, :, 0]
        else:
            data = data @ _LUMA
    m = np.clip(data, 0.0, 1.0)
    if expected_dims is not None:
        expected = (int(expected_dims[0]), int(expected_dims[1]))
        if m.shape != expected:
            if resize_policy == STRICT:
                raise DimensionError(
                    f"{label}: mask is {m.shape[0]}x{m.shape[1]}, image needs "
                    f"{expected[0]}x{expected[1]} (strict policy)"
                )
            m = _nearest_resize(m, expected)
    return m


def load_mask(path, expected_dims=None, resize_policy=STRICT) -> np.ndarray:
    """Load a painted mask file and normalize gray values to [0, 1].

    White means reflection present (1), black absent (0). RGB files are
    converted with Rec.601 luma. Under ``strict`` a dimension mismatch with
    ``expected_dims`` is an error; under ``nearest`` the mask is
    nearest-neighbor resampled.
    """
    from .image import load_image

    return _normalize_mask_image(load_image(path), path, expected_dims, resize_policy)


def decode_mask(data: bytes, expected_dims=None, resize_policy=STRICT, label="<bytes>") -> np.ndarray:
    """In-memory variant of :func:`load_mask` for uploaded mask bytes."""
    from .image import decode_image

    return _normalize_mask_image(
        decode_image(data, label), label, expected_dims, resize_policy
    )


def local_threshold(mask, lam, beta) -> np.ndarray:
    """Per-pixel squared-gradient cutoff lam*phi/beta."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if lam < 0.0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    m = ensure_mask(mask)
    return (lam * m) / beta


def save_mask(mask, path) -> None:
    """Write a mask as an 8-bit grayscale PNG."""
    from .image import save_image

    m = ensure_mask(mask)
    if m.shape[0] < 2 or m.shape[1] < 2:
        raise DimensionError("mask too small to save as an image")
    save_image(m, path)


def mask_for_image(path, image, resize_policy=STRICT) -> np.ndarray:
    """Load a mask matched to ``image``, or the all-ones default when no path."""
    img = ensure_image(image)
    if path is None:
        return default_mask(img.shape[:2])
    return load_mask(path, expected_dims=img.shape[:2], resize_policy=resize_policy)
