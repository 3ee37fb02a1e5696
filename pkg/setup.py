import os

import numpy as np
from setuptools import Extension, setup

# LOGPRIVACY_NO_EXT=1 skips the compiled kernels; the package then runs on
# the pure-Python fallback.
if os.environ.get("LOGPRIVACY_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "logprivacy._kernels",
                ["src/logprivacy/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
