"""Kernel backend selection.

The compiled extension is preferred when built; the numpy fallback is used
otherwise. ``REFLECT_BACKEND=python|numpy`` forces the fallback and
``REFLECT_BACKEND=native`` makes a missing extension a hard error.
"""

import os

from . import numpy_backend


def _select():
    requested = os.environ.get("REFLECT_BACKEND", "").strip().lower()
    if requested in ("python", "numpy"):
        return numpy_backend
    try:
        from . import _native
    except ImportError:
        if requested == "native":
            raise ImportError(
                "REFLECT_BACKEND=native but the compiled kernels are not built; "
                "reinstall the package with a C compiler available"
            )
        return numpy_backend
    return _native


_impl = _select()

BACKEND_NAME = _impl.NAME
grad = _impl.grad
grad_adjoint = _impl.grad_adjoint
laplacian = _impl.laplacian
laplacian_adjoint = _impl.laplacian_adjoint
d_step = _impl.d_step
adam_update = _impl.adam_update


def available_backends():
    """Name -> module map of importable backends (for tests and benchmarks)."""
    found = {numpy_backend.NAME: numpy_backend}
    try:
        from . import _native
    except ImportError:
        pass
    else:
        found[_native.NAME] = _native
    return found
