"""Independent brute-force oracles used to pin expected values.

Everything here is written with explicit Python loops straight from the
operator definitions, deliberately sharing no code with the package.
"""

import math

import numpy as np


def naive_gradient(img):
    h, w = img.shape
    dx = np.zeros((h, w))
    dy = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            if j < w - 1:
                dx[i, j] = img[i, j + 1] - img[i, j]
            if i < h - 1:
                dy[i, j] = img[i + 1, j] - img[i, j]
    return dx, dy


def naive_laplacian(img):
    h, w = img.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            c = img[i, j]
            up = img[i - 1, j] if i > 0 else c
            down = img[i + 1, j] if i < h - 1 else c
            left = img[i, j - 1] if j > 0 else c
            right = img[i, j + 1] if j < w - 1 else c
            out[i, j] = up + down + left + right - 4.0 * c
    return out


def laplacian_matrix(h, w):
    """Explicit matrix of the replicate-boundary 5-point stencil."""
    n = h * w
    mat = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        mat[:, k] = naive_laplacian(e.reshape(h, w)).ravel()
    return mat


def gradient_matrices(h, w):
    """Explicit matrices of the forward-difference maps (x then y)."""
    n = h * w
    gx = np.zeros((n, n))
    gy = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        dx, dy = naive_gradient(e.reshape(h, w))
        gx[:, k] = dx.ravel()
        gy[:, k] = dy.ravel()
    return gx, gy


def naive_prior(phi, dx, dy):
    total = 0.0
    for i in range(phi.shape[0]):
        for j in range(phi.shape[1]):
            if dx[i, j] != 0.0 or dy[i, j] != 0.0:
                total += phi[i, j]
    return total


def naive_quad_objective(t, y, dx, dy, gamma, beta):
    """Fidelity + coupling for a single channel, evaluated by loops."""
    h, w = t.shape
    lap = naive_laplacian(t - y)
    gx, gy = naive_gradient(t)
    total = 0.0
    for i in range(h):
        for j in range(w):
            total += lap[i, j] ** 2
            total += gamma * (t[i, j] - y[i, j]) ** 2
            total += beta * ((dx[i, j] - gx[i, j]) ** 2 + (dy[i, j] - gy[i, j]) ** 2)
    return total


def naive_objective(t, y, phi, lam, gamma):
    h, w = t.shape
    lap = naive_laplacian(t - y)
    gx, gy = naive_gradient(t)
    total = 0.0
    for i in range(h):
        for j in range(w):
            total += lap[i, j] ** 2 + gamma * (t[i, j] - y[i, j]) ** 2
    return total + lam * naive_prior(phi, gx, gy)


def naive_aux_objective(t, dx, dy, y, phi, lam, gamma, beta):
    return naive_quad_objective(t, y, dx, dy, gamma, beta) + lam * naive_prior(
        phi, dx, dy
    )


def fd_quad_gradient(t, y, dx, dy, gamma, beta, h_step=1e-5):
    """Central finite differences of the single-channel quadratic."""
    g = np.zeros_like(t)
    for i in range(t.shape[0]):
        for j in range(t.shape[1]):
            tp = t.copy()
            tm = t.copy()
            tp[i, j] += h_step
            tm[i, j] -= h_step
            fp = naive_quad_objective(tp, y, dx, dy, gamma, beta)
            fm = naive_quad_objective(tm, y, dx, dy, gamma, beta)
            g[i, j] = (fp - fm) / (2.0 * h_step)
    return g


def normal_equations_solve(y, dx, dy, gamma, beta):
    """Exact minimizer of the single-channel quadratic via explicit matrices."""
    h, w = y.shape
    lap = laplacian_matrix(h, w)
    gx, gy = gradient_matrices(h, w)
    n = h * w
    a = lap.T @ lap + gamma * np.eye(n) + beta * (gx.T @ gx + gy.T @ gy)
    b = lap.T @ (lap @ y.ravel()) + gamma * y.ravel() + beta * (
        gx.T @ dx.ravel() + gy.T @ dy.ravel()
    )
    return np.linalg.solve(a, b).reshape(h, w)


def two_candidate_d_step(gx, gy, phi, lam, beta):
    """Per-pixel exhaustive minimization over {(0,0), (gx, gy)}."""
    h, w = gx.shape
    dx = np.zeros((h, w))
    dy = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            keep_cost = 0.0 + lam * phi[i, j] * (
                1.0 if (gx[i, j] != 0.0 or gy[i, j] != 0.0) else 0.0
            )
            zero_cost = beta * (gx[i, j] ** 2 + gy[i, j] ** 2)
            # ties go to the zero branch
            if keep_cost < zero_cost:
                dx[i, j] = gx[i, j]
                dy[i, j] = gy[i, j]
    return dx, dy


def naive_lmse(s, s_hat, size=20, step=10):
    h, w = s.shape
    total = 0.0
    r = 0
    while True:
        c = 0
        while True:
            for i in range(r, min(r + size, h)):
                for j in range(c, min(c + size, w)):
                    d = s[i, j] - s_hat[i, j]
                    total += d * d
            if c + size >= w:
                break
            c += step
        if r + size >= h:
            break
        r += step
    return total


def naive_ssim_plane(s, s_hat, dynamic_range=1.0):
    n = s.size
    vals_s = [float(v) for v in s.ravel()]
    vals_h = [float(v) for v in s_hat.ravel()]
    mu_s = sum(vals_s) / n
    mu_h = sum(vals_h) / n
    var_s = sum((v - mu_s) ** 2 for v in vals_s) / n
    var_h = sum((v - mu_h) ** 2 for v in vals_h) / n
    cov = sum((a - mu_s) * (b - mu_h) for a, b in zip(vals_s, vals_h)) / n
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    return ((2 * mu_s * mu_h + c1) * (2 * cov + c2)) / (
        (mu_s**2 + mu_h**2 + c1) * (var_s + var_h + c2)
    )


def naive_psnr(s, s_hat, max_i=1.0):
    diffs = (s - s_hat).ravel()
    mse = sum(float(d) * float(d) for d in diffs) / diffs.size
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_i * max_i / mse)


def naive_conv2d_replicate(img, kernel):
    """Direct 2D convolution with replicate padding (single channel)."""
    h, w = img.shape
    kh, kw = kernel.shape
    rh, rw = kh // 2, kw // 2
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(kh):
                for b in range(kw):
                    ii = min(max(i + a - rh, 0), h - 1)
                    jj = min(max(j + b - rw, 0), w - 1)
                    acc += kernel[a, b] * img[ii, jj]
            out[i, j] = acc
    return out
