"""Pure numpy implementations of the per-pixel kernels.

Reference backend. The compiled extension mirrors every operation with the
same per-element expression order, so the two backends agree bit for bit.
All kernels take C-contiguous float64 arrays of shape (H, W).
"""

import numpy as np

NAME = "numpy"


def grad(img):
    """Forward differences; last column / last row are zero."""
    h, w = img.shape
    dx = np.zeros_like(img)
    dy = np.zeros_like(img)
    dx[:, : w - 1] = img[:, 1:] - img[:, : w - 1]
    dy[: h - 1, :] = img[1:, :] - img[: h - 1, :]
    return dx, dy


def grad_adjoint(dx, dy):
    """Exact transpose of grad: signed backward differences.

    The last column of dx and last row of dy are ignored, matching the
    zero rows of the forward-difference matrix.
    """
    h, w = dx.shape
    out = np.zeros_like(dx)
    out[:, 1:] += dx[:, : w - 1]
    out[:, : w - 1] -= dx[:, : w - 1]
    out[1:, :] += dy[: h - 1, :]
    out[: h - 1, :] -= dy[: h - 1, :]
    return out


def laplacian(img):
    """5-point stencil; out-of-range neighbors replaced by the center value."""
    up = np.concatenate([img[:1, :], img[:-1, :]], axis=0)
    down = np.concatenate([img[1:, :], img[-1:, :]], axis=0)
    left = np.concatenate([img[:, :1], img[:, :-1]], axis=1)
    right = np.concatenate([img[:, 1:], img[:, -1:]], axis=1)
    return ((up + down) + left) + right - 4.0 * img


def _center_coef(h, w):
    # transpose diagonal: (number of replicated neighbors) - 4
    coef = np.full((h, w), -4.0)
    coef[0, :] += 1.0
    coef[h - 1, :] += 1.0
    coef[:, 0] += 1.0
    coef[:, w - 1] += 1.0
    return coef


def laplacian_adjoint(f):
    """Exact transpose of laplacian (the stencil matrix is symmetric)."""
    h, w = f.shape
    out = np.zeros_like(f)
    out[1:, :] += f[:-1, :]
    out[:-1, :] += f[1:, :]
    out[:, 1:] += f[:, :-1]
    out[:, :-1] += f[:, 1:]
    out += _center_coef(h, w) * f
    return out


def d_step(gx, gy, phi, lam, beta):
    """Zero both components wherever gx^2 + gy^2 <= lam*phi/beta."""
    mag = gx * gx + gy * gy
    thr = (lam * phi) / beta
    keep = mag > thr
    return np.where(keep, gx, 0.0), np.where(keep, gy, 0.0)


def adam_update(t, g, m, v, lr, b1, b2, bc1, bc2, eps):
    """One bias-corrected moment step; t, m, v updated in place."""
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * (g * g)
    mhat = m / bc1
    vhat = v / bc2
    den = np.sqrt(vhat)
    den += eps
    step = mhat / den
    step *= lr
    t -= step
