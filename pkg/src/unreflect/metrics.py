"""Restoration quality metrics: sLMSE, SSIM, PSNR.

sLMSE is inverted and self-normalized: 1 means the restoration matches the
ground truth, 0 means it is no better than an all-black image. It is NOT
symmetric: the ground truth must be the first argument, since it provides
the normalization. SSIM here uses global (whole-image) statistics with
population variances, not the 11x11 windowed variant; the windowed variant
is available behind a flag but is not what the reported numbers use.
"""

import math
from dataclasses import dataclass

import numpy as np

from .image import DimensionError, ensure_same_shape

PATCH_SIZE = 20
PATCH_STEP = 10

#: PSNR value reported when the two images are identical.
PERFECT_PSNR = math.inf


@dataclass(frozen=True)
class MetricsReport:
    slmse: float
    ssim: float
    psnr: float
    patch_size: int = PATCH_SIZE
    patch_step: int = PATCH_STEP
    dynamic_range: float = 1.0

    def lines(self):
        return [
            f"slmse={self.slmse:.6f}",
            f"ssim={self.ssim:.6f}",
            f"psnr={self.psnr:.4f}",
        ]


def _as_planes(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        return [a]
    if a.ndim == 3:
        return [a[:, :, c] for c in range(a.shape[2])]
    raise DimensionError(f"expected 2D or 3D array, got shape {a.shape}")


def _window_starts(extent):
    """Anchors advance by the step until one window reaches the edge."""
    starts = []
    a = 0
    while True:
        starts.append(a)
        if a + PATCH_SIZE >= extent:
            break
        a += PATCH_STEP
    return starts


def lmse(s, s_hat) -> float:
    """Sum of squared patch errors over the clipped 20-by-20/step-10 walk."""
    s = np.asarray(s, dtype=np.float64)
    s_hat = np.asarray(s_hat, dtype=np.float64)
    ensure_same_shape(s, s_hat, "s", "s_hat")
    h, w = s.shape[:2]
    total = 0.0
    for r in _window_starts(h):
        for c in _window_starts(w):
            diff = s[r : r + PATCH_SIZE, c : c + PATCH_SIZE] - s_hat[r : r + PATCH_SIZE, c : c + PATCH_SIZE]
            total += float(np.sum(diff * diff))
    return total


def slmse(s, s_hat) -> float:
    """Inverted localized MSE, normalized by the ground truth s.

    1 - lmse(s, s_hat)/lmse(s, 0), clipped below at zero. Raises when the
    ground truth is identically zero (nothing to normalize by).
    """
    s = np.asarray(s, dtype=np.float64)
    s_hat = np.asarray(s_hat, dtype=np.float64)
    ensure_same_shape(s, s_hat, "s", "s_hat")
    values = []
    for sp, hp in zip(_as_planes(s), _as_planes(s_hat)):
        denom = lmse(sp, np.zeros_like(sp))
        if denom == 0.0:
            raise ValueError("ground truth is identically zero; sLMSE undefined")
        values.append(max(0.0, 1.0 - lmse(sp, hp) / denom))
    return float(np.mean(values))


def _ssim_plane(sp, hp, c1, c2):
    mu_s = float(np.mean(sp))
    mu_h = float(np.mean(hp))
    var_s = float(np.mean((sp - mu_s) ** 2))
    var_h = float(np.mean((hp - mu_h) ** 2))
    cov = float(np.mean((sp - mu_s) * (hp - mu_h)))
    num = (2.0 * mu_s * mu_h + c1) * (2.0 * cov + c2)
    den = (mu_s**2 + mu_h**2 + c1) * (var_s + var_h + c2)
    return num / den


def ssim(s, s_hat, dynamic_range=1.0, windowed=False, window=11) -> float:
    """Structural similarity from global means, variances, and covariance.

    Population (1/N) statistics; per-channel values are averaged. With
    ``windowed=True`` a uniform sliding-window variant is computed instead
    (mean of local SSIM values), offered for comparison only.
    """
    s = np.asarray(s, dtype=np.float64)
    s_hat = np.asarray(s_hat, dtype=np.float64)
    ensure_same_shape(s, s_hat, "s", "s_hat")
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    values = []
    for sp, hp in zip(_as_planes(s), _as_planes(s_hat)):
        if windowed:
            values.append(_ssim_windowed(sp, hp, c1, c2, window))
        else:
            values.append(_ssim_plane(sp, hp, c1, c2))
    return float(np.mean(values))


def _ssim_windowed(sp, hp, c1, c2, window):
    h, w = sp.shape
    if h < window or w < window:
        return _ssim_plane(sp, hp, c1, c2)
    vals = []
    for r in range(0, h - window + 1):
        for c in range(0, w - window + 1):
            vals.append(
                _ssim_plane(
                    sp[r : r + window, c : c + window],
                    hp[r : r + window, c : c + window],
                    c1,
                    c2,
                )
            )
    return float(np.mean(vals))


def psnr(s, s_hat, max_i=1.0) -> float:
    """Peak signal-to-noise ratio in dB over all entries; inf when equal."""
    s = np.asarray(s, dtype=np.float64)
    s_hat = np.asarray(s_hat, dtype=np.float64)
    ensure_same_shape(s, s_hat, "s", "s_hat")
    if max_i <= 0:
        raise ValueError(f"max_i must be positive, got {max_i}")
    diff = s - s_hat
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PERFECT_PSNR
    return 10.0 * math.log10(max_i * max_i / mse)


def evaluate_pair(truth, restored, dynamic_range=1.0) -> MetricsReport:
    """All three metrics for one restored image against its ground truth."""
    return MetricsReport(
        slmse=slmse(truth, restored),
        ssim=ssim(truth, restored, dynamic_range=dynamic_range),
        psnr=psnr(truth, restored, max_i=dynamic_range),
        dynamic_range=dynamic_range,
    )
