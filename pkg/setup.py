"""Build script for the optional compiled kernel.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional: a missing compiler
degrades to the pure-Python backend instead of failing the install.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    core = Extension(
        "morphsim._kernels._core",
        sources=["src/morphsim/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([core], language_level=3)

setup(ext_modules=ext_modules)
