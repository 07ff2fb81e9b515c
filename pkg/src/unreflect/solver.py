"""Reflection-suppression optimizer.

Minimizes a combined Laplacian + weighted L2 fidelity to the input plus a
spatially weighted count of nonzero-gradient pixels, by alternating a
closed-form gradient-thresholding step with an ADAM descent step on the
remaining quadratic, while the coupling weight beta grows geometrically.

The prior counts pixels whose gradient proxy is nonzero, weighted by the
selection mask, so edges are only penalized where the user marked
reflections. The Laplacian term preserves fine detail; the L2 term rules
out the constant shifts a Laplacian-only fidelity would leave free, which
is what pins the global color.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .image import Gradients, ensure_image, ensure_same_shape
from .selection import default_mask, ensure_mask

__all__ = [
    "SolverParams",
    "OuterIteration",
    "SolveTrace",
    "NumericalError",
    "beta_schedule",
    "prior_value",
    "fidelity_value",
    "objective_value",
    "aux_objective_value",
    "t_subproblem_gradient",
    "solve_t_subproblem",
    "solve_d_subproblem",
    "suppress",
]

# beta_min fallback when the prior weight is zero (any schedule is a no-op then)
_BETA_MIN_FLOOR = 4e-3


class NumericalError(RuntimeError):
    """The inner descent produced a non-finite objective (divergent step)."""


@dataclass(frozen=True)
class SolverParams:
    """Solver configuration.

    ``beta_min`` defaults to twice the prior weight, which makes the first
    threshold phi/2 and keeps only the strongest edges early on.
    """

    lam: float = 2e-3
    gamma: float = 0.012
    beta_min: float = None  # type: ignore[assignment]  # None means "derive"
    beta_max: float = 1e5
    kappa: float = 2.0
    adam_step: float = 1e-3
    adam_b1: float = 0.9
    adam_b2: float = 0.999
    adam_eps: float = 1e-8
    inner_iters: int = 100
    inner_rel_tol: float = 1e-6

    def __post_init__(self):
        self.validate()

    @property
    def beta_min_resolved(self) -> float:
        if self.beta_min is not None:
            return self.beta_min
        return 2.0 * self.lam if self.lam > 0.0 else _BETA_MIN_FLOOR

    def validate(self):
        if self.lam < 0.0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.beta_min is not None and self.beta_min <= 0.0:
            raise ValueError(f"beta_min must be > 0, got {self.beta_min}")
        if self.beta_max <= 0.0:
            raise ValueError(f"beta_max must be > 0, got {self.beta_max}")
        if self.beta_min_resolved > self.beta_max:
            raise ValueError(
                f"beta_min {self.beta_min_resolved} exceeds beta_max {self.beta_max}"
            )
        if self.kappa <= 1.0:
            raise ValueError(f"kappa must be > 1, got {self.kappa}")
        if self.adam_step <= 0.0:
            raise ValueError(f"adam_step must be > 0, got {self.adam_step}")
        if not 0.0 < self.adam_b1 < 1.0:
            raise ValueError(f"adam_b1 must be in (0, 1), got {self.adam_b1}")
        if not 0.0 < self.adam_b2 < 1.0:
            raise ValueError(f"adam_b2 must be in (0, 1), got {self.adam_b2}")
        if self.adam_eps <= 0.0:
            raise ValueError(f"adam_eps must be > 0, got {self.adam_eps}")
        if int(self.inner_iters) != self.inner_iters or self.inner_iters < 1:
            raise ValueError(f"inner_iters must be a positive integer, got {self.inner_iters}")
        if self.inner_rel_tol < 0.0:
            raise ValueError(f"inner_rel_tol must be >= 0, got {self.inner_rel_tol}")

    def with_overrides(self, **kwargs):
        """New params with the given fields replaced (None values ignored)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self


@dataclass
class OuterIteration:
    """Observability record for one coupling-weight level."""

    index: int
    beta: float
    objective: float  # full-problem value after the descent step
    aux_objective: float  # split-problem value after the descent step
    aux_before_d_step: float
    aux_after_d_step: float
    inner_iters: int
    millis: float


@dataclass
class SolveTrace:
    records: list = field(default_factory=list)

    def betas(self):
        return [r.beta for r in self.records]

    def __len__(self):
        return len(self.records)


def beta_schedule(params: SolverParams):
    """The geometric sequence beta_min * kappa**n, clipped at beta_max."""
    out = []
    n = 0
    start = params.beta_min_resolved
    while True:
        b = start * params.kappa**n
        if b > params.beta_max:
            break
        out.append(b)
        n += 1
        if n > 100000:
            raise ValueError("beta schedule too long; check kappa and bounds")
    return out


def _channels(img):
    if img.ndim == 2:
        return [np.ascontiguousarray(img)]
    return [np.ascontiguousarray(img[:, :, c]) for c in range(img.shape[2])]


def _merge_like(chans, template):
    if template.ndim == 2:
        return chans[0]
    out = np.empty_like(template)
    for c, plane in enumerate(chans):
        out[:, :, c] = plane
    return out


def _prior_2d(phi, dx, dy):
    active = (dx != 0.0) | (dy != 0.0)
    return float(np.sum(phi * active))


def _quad_2d(t, y, dx, dy, gamma, beta):
    """Fidelity plus coupling for one channel (the smooth part of the split)."""
    e = t - y
    r = _kernels.laplacian(e)
    gx, gy = _kernels.grad(t)
    cx = gx - dx
    cy = gy - dy
    return float(
        np.sum(r * r)
        + gamma * np.sum(e * e)
        + beta * (np.sum(cx * cx) + np.sum(cy * cy))
    )


def _quad_grad_2d(t, y, dx, dy, gamma, beta):
    e = t - y
    la = _kernels.laplacian_adjoint(_kernels.laplacian(e))
    gx, gy = _kernels.grad(t)
    ga = _kernels.grad_adjoint(gx - dx, gy - dy)
    return 2.0 * la + (2.0 * gamma) * e + (2.0 * beta) * ga


def prior_value(phi, d: Gradients) -> float:
    """Mask-weighted count of pixels with a nonzero gradient proxy.

    The indicator is evaluated per channel and summed over channels.
    """
    dx = ensure_image(d.dx, "dx")
    dy = ensure_image(d.dy, "dy")
    ensure_same_shape(dx, dy, "dx", "dy")
    phi = ensure_mask(phi, dx.shape)
    total = 0.0
    for cx, cy in zip(_channels(dx), _channels(dy)):
        total += _prior_2d(phi, cx, cy)
    return total


def fidelity_value(t, y, gamma) -> float:
    """Squared Laplacian mismatch plus gamma times squared pixel mismatch."""
    t = ensure_image(t, "t")
    y = ensure_image(y, "y")
    ensure_same_shape(t, y, "t", "y")
    total = 0.0
    for tc, yc in zip(_channels(t), _channels(y)):
        e = tc - yc
        r = _kernels.laplacian(e)
        total += float(np.sum(r * r) + gamma * np.sum(e * e))
    return total


def objective_value(t, y, phi, lam, gamma) -> float:
    """Full problem value: fidelity plus lam times the prior on the gradient."""
    t = ensure_image(t, "t")
    y = ensure_image(y, "y")
    ensure_same_shape(t, y, "t", "y")
    phi = ensure_mask(phi, t.shape)
    total = 0.0
    for tc, yc in zip(_channels(t), _channels(y)):
        e = tc - yc
        r = _kernels.laplacian(e)
        gx, gy = _kernels.grad(tc)
        total += float(np.sum(r * r) + gamma * np.sum(e * e))
        total += lam * _prior_2d(phi, gx, gy)
    return total


def aux_objective_value(t, d: Gradients, y, phi, lam, gamma, beta) -> float:
    """Split problem value: fidelity + lam*prior(d) + beta*||d - grad t||^2."""
    t = ensure_image(t, "t")
    y = ensure_image(y, "y")
    ensure_same_shape(t, y, "t", "y")
    dx = ensure_image(d.dx, "dx")
    dy = ensure_image(d.dy, "dy")
    ensure_same_shape(dx, t, "dx", "t")
    ensure_same_shape(dy, t, "dy", "t")
    phi = ensure_mask(phi, t.shape)
    total = 0.0
    for tc, yc, cx, cy in zip(_channels(t), _channels(y), _channels(dx), _channels(dy)):
        total += _quad_2d(tc, yc, cx, cy, gamma, beta)
        total += lam * _prior_2d(phi, cx, cy)
    return total


def t_subproblem_gradient(t, d: Gradients, y, gamma, beta) -> np.ndarray:
    """Gradient of the smooth split objective with respect to the image.

    Exactly the derivative of the discrete quadratic: twice the Laplacian
    transpose of the Laplacian mismatch, plus 2*gamma times the pixel
    mismatch, plus 2*beta times the gradient transpose of (grad t - d).
    """
    t = ensure_image(t, "t")
    y = ensure_image(y, "y")
    ensure_same_shape(t, y, "t", "y")
    dx = ensure_image(d.dx, "dx")
    dy = ensure_image(d.dy, "dy")
    ensure_same_shape(dx, t, "dx", "t")
    ensure_same_shape(dy, t, "dy", "t")
    grads = [
        _quad_grad_2d(tc, yc, cx, cy, gamma, beta)
        for tc, yc, cx, cy in zip(
            _channels(t), _channels(y), _channels(dx), _channels(dy)
        )
    ]
    return _merge_like(grads, t)


def _solve_t_2d(t0, y, dx, dy, gamma, beta, params: SolverParams):
    """ADAM descent on one channel from a warm start.

    Tracks the best objective seen (including the start) and stops when the
    relative objective change between consecutive steps drops below the
    configured tolerance. Fresh moment accumulators every call.
    """
    t = t0.copy()
    f_prev = _quad_2d(t, y, dx, dy, gamma, beta)
    if not math.isfinite(f_prev):
        raise NumericalError(f"non-finite objective at warm start: {f_prev}")
    best = t0
    f_best = f_prev
    m = np.zeros_like(t)
    v = np.zeros_like(t)
    used = 0
    for k in range(1, params.inner_iters + 1):
        g = _quad_grad_2d(t, y, dx, dy, gamma, beta)
        bc1 = 1.0 - params.adam_b1**k
        bc2 = 1.0 - params.adam_b2**k
        _kernels.adam_update(
            t, g, m, v,
            params.adam_step, params.adam_b1, params.adam_b2,
            bc1, bc2, params.adam_eps,
        )
        f_new = _quad_2d(t, y, dx, dy, gamma, beta)
        if not math.isfinite(f_new):
            raise NumericalError(
                f"non-finite objective after {k} steps (step size too large?)"
            )
        used = k
        if f_new < f_best:
            f_best = f_new
            best = t.copy()
        if abs(f_new - f_prev) <= params.inner_rel_tol * max(abs(f_prev), 1e-12):
            break
        f_prev = f_new
    return best, f_best, used


def solve_t_subproblem(t0, d: Gradients, y, gamma, beta, params: SolverParams):
    """Minimize the smooth split objective over the image, warm-started at t0."""
    t0 = ensure_image(t0, "t0")
    y = ensure_image(y, "y")
    ensure_same_shape(t0, y, "t0", "y")
    dx = ensure_image(d.dx, "dx")
    dy = ensure_image(d.dy, "dy")
    ensure_same_shape(dx, t0, "dx", "t0")
    ensure_same_shape(dy, t0, "dy", "t0")
    outs = [
        _solve_t_2d(tc, yc, cx, cy, gamma, beta, params)[0]
        for tc, yc, cx, cy in zip(
            _channels(t0), _channels(y), _channels(dx), _channels(dy)
        )
    ]
    return _merge_like(outs, t0)


def solve_d_subproblem(t, phi, lam, beta) -> Gradients:
    """Closed-form minimizer over the gradient proxies.

    Per pixel and channel the proxy is the image gradient, zeroed wherever
    its squared magnitude is at most lam*phi/beta (ties take zero).
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    t = ensure_image(t, "t")
    phi = ensure_mask(phi, t.shape)
    phi_c = np.ascontiguousarray(phi)
    dxs, dys = [], []
    for tc in _channels(t):
        gx, gy = _kernels.grad(tc)
        dx, dy = _kernels.d_step(gx, gy, phi_c, lam, beta)
        dxs.append(dx)
        dys.append(dy)
    return Gradients(_merge_like(dxs, t), _merge_like(dys, t))


def suppress(y, phi=None, params: SolverParams = None, observer=None):
    """Remove marked reflections from an image.

    Starts from the input, alternates the thresholding and descent steps
    over the growing coupling schedule, and returns the final image clamped
    to [0, 1] together with a per-iteration trace. Color images are solved
    as independent channels sharing one mask. Deterministic for fixed
    inputs and parameters.

    ``observer(record, completed, total)`` is called after each outer
    iteration, e.g. for progress reporting or streaming trace output.
    """
    y = ensure_image(y)
    if params is None:
        params = SolverParams()
    else:
        params.validate()
    if phi is None:
        phi = default_mask(y.shape[:2])
    phi = ensure_mask(phi, y.shape)
    phi_c = np.ascontiguousarray(phi)

    schedule = beta_schedule(params)
    total = len(schedule)
    ycs = _channels(y)
    tcs = [yc.copy() for yc in ycs]
    # start the proxies at the image gradient so the coupling term opens at zero
    dcs = [_kernels.grad(tc) for tc in tcs]

    def aux_value(beta):
        val = 0.0
        for tc, yc, (dx, dy) in zip(tcs, ycs, dcs):
            val += _quad_2d(tc, yc, dx, dy, params.gamma, beta)
            val += params.lam * _prior_2d(phi_c, dx, dy)
        return val

    trace = SolveTrace()
    for n, beta in enumerate(schedule):
        started = time.perf_counter()
        aux_before = aux_value(beta)
        for c, tc in enumerate(tcs):
            gx, gy = _kernels.grad(tc)
            dcs[c] = _kernels.d_step(gx, gy, phi_c, params.lam, beta)
        aux_after_d = aux_value(beta)
        inner_used = 0
        for c, (tc, yc, (dx, dy)) in enumerate(zip(tcs, ycs, dcs)):
            tcs[c], _, used = _solve_t_2d(tc, yc, dx, dy, params.gamma, beta, params)
            inner_used += used
        aux_after_t = aux_value(beta)
        obj = 0.0
        for tc, yc in zip(tcs, ycs):
            e = tc - yc
            r = _kernels.laplacian(e)
            gx, gy = _kernels.grad(tc)
            obj += float(np.sum(r * r) + params.gamma * np.sum(e * e))
            obj += params.lam * _prior_2d(phi_c, gx, gy)
        record = OuterIteration(
            index=n,
            beta=beta,
            objective=obj,
            aux_objective=aux_after_t,
            aux_before_d_step=aux_before,
            aux_after_d_step=aux_after_d,
            inner_iters=inner_used,
            millis=(time.perf_counter() - started) * 1e3,
        )
        trace.records.append(record)
        if observer is not None:
            observer(record, n + 1, total)

    out = np.clip(_merge_like(tcs, y), 0.0, 1.0)
    return out, trace
