"""Synthetic test scenes: a clean layer mixed with a blurred reflection.

Composes y = w*t + (1-w)*(k * r) where k is a normalized Gaussian kernel
applied with replicate boundaries. Procedural generators build a
piecewise-constant clean layer and a soft-blob reflection layer so that
suppression quality can be measured against a known ground truth.
"""

from dataclasses import dataclass

import numpy as np

from .image import ensure_image, ensure_same_shape


@dataclass(frozen=True)
class SyntheticSceneParams:
    weight: float = 0.8  # relative strength of the clean layer
    blur_sigma: float = 3.0
    kernel_radius: int = None  # type: ignore[assignment]  # defaults to ceil(3*sigma)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must be in [0, 1], got {self.weight}")
        if self.blur_sigma <= 0.0:
            raise ValueError(f"blur_sigma must be > 0, got {self.blur_sigma}")
        if self.kernel_radius is None:
            object.__setattr__(self, "kernel_radius", int(np.ceil(3.0 * self.blur_sigma)))
        if self.kernel_radius < 1:
            raise ValueError(f"kernel_radius must be >= 1, got {self.kernel_radius}")


def gaussian_kernel_1d(sigma, radius):
    """Normalized 1D Gaussian taps of length 2*radius + 1."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / np.sum(k)


def _conv1d_replicate(img, taps, axis):
    radius = (len(taps) - 1) // 2
    pad = [(0, 0)] * img.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(img, pad, mode="edge")
    out = np.zeros_like(img)
    index = [slice(None)] * img.ndim
    n = img.shape[axis]
    # fixed tap order keeps the accumulation byte-deterministic
    for k, tap in enumerate(taps):
        index[axis] = slice(k, k + n)
        out += tap * padded[tuple(index)]
    return out


def gaussian_blur(img, sigma, radius=None):
    """Separable Gaussian blur with replicate boundary handling."""
    img = ensure_image(img)
    if radius is None:
        radius = int(np.ceil(3.0 * sigma))
    taps = gaussian_kernel_1d(sigma, radius)
    return _conv1d_replicate(_conv1d_replicate(img, taps, 0), taps, 1)


def compose_scene(t, r, params: SyntheticSceneParams):
    """Mix the clean layer with the blurred reflection and clamp to [0, 1]."""
    t = ensure_image(t, "t")
    r = ensure_image(r, "r")
    ensure_same_shape(t, r, "t", "r")
    blurred = gaussian_blur(r, params.blur_sigma, params.kernel_radius)
    y = params.weight * t + (1.0 - params.weight) * blurred
    return np.clip(y, 0.0, 1.0)


def generate_clean_layer(dims, seed=0, channels=1, regions=6):
    """Piecewise-constant layer: random axis-aligned rectangles of flat color."""
    h, w = int(dims[0]), int(dims[1])
    rng = np.random.default_rng(seed)
    shape = (h, w) if channels == 1 else (h, w, channels)
    img = np.full(shape, 0.5)
    for _ in range(regions):
        r0, r1 = np.sort(rng.integers(0, h, size=2))
        c0, c1 = np.sort(rng.integers(0, w, size=2))
        if r1 - r0 < 2 or c1 - c0 < 2:
            continue
        color = rng.uniform(0.1, 0.9, size=(1,) if channels == 1 else (channels,))
        img[r0:r1, c0:c1] = color if channels > 1 else float(color[0])
    return img


def generate_reflection_layer(dims, seed=0, channels=1, blobs=4):
    """Soft Gaussian blobs on black, the kind of highlight a pane reflects."""
    h, w = int(dims[0]), int(dims[1])
    rng = np.random.default_rng(seed + 1)
    plane = np.zeros((h, w))
    ii, jj = np.mgrid[0:h, 0:w]
    for _ in range(blobs):
        ci = rng.uniform(0.15 * h, 0.85 * h)
        cj = rng.uniform(0.15 * w, 0.85 * w)
        scale = rng.uniform(0.06, 0.18) * min(h, w)
        amp = rng.uniform(0.6, 1.0)
        plane += amp * np.exp(-((ii - ci) ** 2 + (jj - cj) ** 2) / (2.0 * scale**2))
    plane = np.clip(plane, 0.0, 1.0)
    if channels == 1:
        return plane
    return np.repeat(plane[:, :, None], channels, axis=2)


def make_scene(dims, params: SyntheticSceneParams, channels=1):
    """Generate (y, t, r) for a fresh random scene."""
    t = generate_clean_layer(dims, seed=params.seed, channels=channels)
    r = generate_reflection_layer(dims, seed=params.seed, channels=channels)
    y = compose_scene(t, r, params)
    return y, t, r
