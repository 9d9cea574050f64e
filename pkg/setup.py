import os
import sys

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ELECTSIM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; installing pure-Python kernels only", file=sys.stderr)
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "electsim._crp",
                    ["src/electsim/_crp.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "embedsignature": True},
        )

setup(ext_modules=ext_modules)
