"""Build the optional Cython kernels. Without Cython the package still works
through the pure-Python fallback in frobsplit._kernels_py."""
from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without the compiled core
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "frobsplit._kernels",
                ["src/frobsplit/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
