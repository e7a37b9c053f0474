import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TRANSLAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; fallback kernels are used
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "translab._core",
            ["src/translab/_core.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
