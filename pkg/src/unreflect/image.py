"""Image containers, PNG/JPEG I/O, and the discrete differential operators.

Images are float64 numpy arrays of shape (H, W) or (H, W, C) with C in
{1, 3}, intensities nominally in [0, 1]. Gradient fields pair dx/dy arrays
of the same shape. All operators broadcast over channels and are pure.
"""

import warnings
from typing import NamedTuple

import numpy as np
from PIL import Image

from . import _kernels

MIN_SIDE = 2


class DimensionError(ValueError):
    """Image or field dimensions are invalid or inconsistent."""


class Gradients(NamedTuple):
    """Per-pixel forward differences along x (columns) and y (rows)."""

    dx: np.ndarray
    dy: np.ndarray


def ensure_image(arr, name="image"):
    """Validate shape/dtype and return the array as float64.

    Accepts (H, W) or (H, W, C) with C in {1, 3}; both sides must be at
    least MIN_SIDE so the difference operators have a neighbor to use.
    """
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 2:
        pass
    elif a.ndim == 3 and a.shape[2] in (1, 3):
        pass
    else:
        raise DimensionError(
            f"{name}: expected (H, W) or (H, W, 1|3) array, got shape {a.shape}"
        )
    if a.shape[0] < MIN_SIDE or a.shape[1] < MIN_SIDE:
        raise DimensionError(
            f"{name}: needs height and width >= {MIN_SIDE}, got {a.shape[0]}x{a.shape[1]}"
        )
    return a


def ensure_same_shape(a, b, name_a="a", name_b="b"):
    if a.shape != b.shape:
        raise DimensionError(
            f"{name_a} shape {a.shape} does not match {name_b} shape {b.shape}"
        )


def _per_channel(fn, img):
    """Apply a 2D (H, W) -> (H, W) kernel over each channel."""
    if img.ndim == 2:
        return fn(np.ascontiguousarray(img))
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[:, :, c] = fn(np.ascontiguousarray(img[:, :, c]))
    return out


def gradient(img) -> Gradients:
    """Forward differences with replicate boundary: last column/row are 0."""
    img = ensure_image(img)
    if img.ndim == 2:
        dx, dy = _kernels.grad(np.ascontiguousarray(img))
        return Gradients(dx, dy)
    dx = np.empty_like(img)
    dy = np.empty_like(img)
    for c in range(img.shape[2]):
        dx[:, :, c], dy[:, :, c] = _kernels.grad(np.ascontiguousarray(img[:, :, c]))
    return Gradients(dx, dy)


def gradient_adjoint(field: Gradients) -> np.ndarray:
    """Exact transpose of :func:`gradient` under the standard inner product."""
    dx = ensure_image(field.dx, "dx")
    dy = ensure_image(field.dy, "dy")
    ensure_same_shape(dx, dy, "dx", "dy")
    if dx.ndim == 2:
        return _kernels.grad_adjoint(
            np.ascontiguousarray(dx), np.ascontiguousarray(dy)
        )
    out = np.empty_like(dx)
    for c in range(dx.shape[2]):
        out[:, :, c] = _kernels.grad_adjoint(
            np.ascontiguousarray(dx[:, :, c]), np.ascontiguousarray(dy[:, :, c])
        )
    return out


def laplacian(img) -> np.ndarray:
    """5-point stencil; out-of-range neighbors take the center value."""
    img = ensure_image(img)
    return _per_channel(_kernels.laplacian, img)


def laplacian_adjoint(f) -> np.ndarray:
    """Exact transpose of :func:`laplacian` (the stencil is self-adjoint)."""
    f = ensure_image(f, "field")
    return _per_channel(_kernels.laplacian_adjoint, f)


def _from_pil(pil_img, path):
    mode = pil_img.mode
    if mode in ("LA", "RGBA", "PA"):
        warnings.warn(f"{path}: stripping alpha channel", stacklevel=3)
        pil_img = pil_img.convert("RGB" if mode == "RGBA" else "L")
        mode = pil_img.mode
    if mode == "P":
        pil_img = pil_img.convert("RGB")
        mode = "RGB"
    if mode in ("I;16", "I;16B", "I;16L"):
        data = np.asarray(pil_img, dtype=np.float64) / 65535.0
    elif mode == "I":
        data = np.asarray(pil_img, dtype=np.float64)
        if data.max(initial=0.0) > 255.0:
            data = data / 65535.0
        else:
            data = data / 255.0
    elif mode == "L":
        data = np.asarray(pil_img, dtype=np.float64) / 255.0
    elif mode == "RGB":
        data = np.asarray(pil_img, dtype=np.float64) / 255.0
    else:
        raise OSError(f"{path}: unsupported image mode {mode!r}")
    return data


def load_image(path) -> np.ndarray:
    """Load a PNG or JPEG file as float64 intensities in [0, 1]."""
    try:
        with Image.open(path) as pil_img:
            pil_img.load()
            data = _from_pil(pil_img, path)
    except FileNotFoundError:
        raise
    except OSError:
        raise
    except Exception as exc:  # Pillow decode errors vary by plugin
        raise OSError(f"{path}: cannot read image ({exc})") from exc
    return ensure_image(data, str(path))


def decode_image(data: bytes, label="<bytes>") -> np.ndarray:
    """Decode in-memory PNG/JPEG bytes; same contract as :func:`load_image`."""
    import io

    try:
        with Image.open(io.BytesIO(data)) as pil_img:
            pil_img.load()
            out = _from_pil(pil_img, label)
    except OSError:
        raise
    except Exception as exc:
        raise OSError(f"{label}: cannot decode image ({exc})") from exc
    return ensure_image(out, label)


def encode_png(img) -> bytes:
    """Clamp to [0, 1], quantize to 8 bits, and encode as PNG bytes."""
    import io

    img = ensure_image(img)
    q = np.clip(img, 0.0, 1.0)
    q = np.round(q * 255.0).astype(np.uint8)
    if q.ndim == 3 and q.shape[2] == 1:
        q = q[:, :, 0]
    pil_img = Image.fromarray(q, mode="L" if q.ndim == 2 else "RGB")
    buf = io.BytesIO()
    pil_img.save(buf, format="PNG")
    return buf.getvalue()


def save_image(img, path) -> None:
    """Clamp to [0, 1], quantize to 8 bits, and write a PNG file."""
    p = str(path)
    if not p.lower().endswith(".png"):
        raise OSError(f"{p}: only PNG output is supported")
    data = encode_png(img)
    with open(p, "wb") as fh:
        fh.write(data)
