"""Build script: compiles the optional block-comparison kernel when Cython is present.

Set CHAMELEON_PURE=1 to skip the extension entirely; the package falls back to
the pure-Python kernel at import time either way.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CHAMELEON_PURE") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "chameleon._blocks_fast",
                    ["src/chameleon/_blocks_fast.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
