import os

from setuptools import Extension, setup

# ACLFDR_NO_EXT=1 skips the compiled kernels; the package then runs on the
# pure-numpy fallback selected at import time.
ext_modules = []
if not os.environ.get("ACLFDR_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "aclfdr._kernels",
                    ["src/aclfdr/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
