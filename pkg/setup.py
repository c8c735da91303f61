import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back to numpy
    cythonize = None


cython_directives = {
    "language_level": 3,
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "initializedcheck": False,
}

ext_modules = []
if cythonize is not None and not os.environ.get("FQATEST_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "fqatest._kernels",
                [os.path.join("src", "fqatest", "_kernels.pyx")],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives=cython_directives,
    )

setup(ext_modules=ext_modules)
