import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    # -ffp-contract=off: no FMA contraction, so the compiled kernels round
    # exactly like the numpy fallback and the two backends stay bit-identical.
    extensions = cythonize(
        [
            Extension(
                "unreflect._kernels._native",
                ["src/unreflect/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    extensions = []

setup(ext_modules=extensions)
