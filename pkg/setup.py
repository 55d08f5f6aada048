import os

import numpy as np
from setuptools import Extension, setup

# PHASETOMO_NO_EXT=1 installs the pure-Python kernels only.
ext_modules = []
if not os.environ.get("PHASETOMO_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = [
            Extension(
                "phasetomo._ckernels",
                ["src/phasetomo/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ]
        ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
