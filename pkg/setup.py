"""Build script: compiles the optional Cython kernel core.

The extension is a pure speed-up; if Cython or a C compiler is missing
(or HAPSCS_SKIP_CYTHON is set) the package installs without it and the
pure-Python kernels are used instead.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("HAPSCS_SKIP_CYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hapscs.kernels._cykernels",
                    ["src/hapscs/kernels/_cykernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
