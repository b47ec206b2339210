"""Build script: compiles the graph kernels when a toolchain is available.

The package works without the extension (a pure-Python fallback is selected
at import time); set PORTNET_PURE_PYTHON=1 to skip compilation entirely.
"""
import os

from setuptools import Extension, setup


def extension_modules():
    if os.environ.get("PORTNET_PURE_PYTHON"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "portnet._kernels._ckernels",
        ["src/portnet/_kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extension_modules())
