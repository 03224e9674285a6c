"""Build script: compiles the optional fast kernels when Cython is available.

The package is fully functional without the extension; `scatlab.kernels`
falls back to the pure NumPy/Python implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    if not os.path.exists("src/scatlab/kernels/_ck.pyx"):
        raise ImportError("no kernel source")
    ext_modules = cythonize(
        [
            Extension(
                "scatlab.kernels._ck",
                ["src/scatlab/kernels/_ck.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
