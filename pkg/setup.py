import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FIXEDWIDTH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; the fallback kernels are used
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "fixedwidth._ckernels",
                    sources=["src/fixedwidth/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    libraries=["m"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": 3, "embedsignature": True},
        )

setup(ext_modules=ext_modules)
