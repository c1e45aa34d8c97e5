"""Build script: compiles the principal-value quadrature kernels.

The compiled extension is optional at runtime; ``iquad._kernels`` falls back
to a pure-numpy implementation when the extension is missing (see
``IQUAD_PV_BACKEND``).
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

pv_ext = Extension(
    "iquad._kernels._pv_cy",
    ["src/iquad/_kernels/_pv_cy.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
)

setup(
    ext_modules=cythonize([pv_ext], language_level="3"),
)
