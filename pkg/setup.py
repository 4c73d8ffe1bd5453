"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/confusion_lens/_kernels/_ckernels.pyx",
        language_level=3,
    )
    include_dirs = [numpy.get_include()]
except Exception as exc:  # pragma: no cover - build env without cython
    print(f"skipping compiled kernels: {exc}", file=sys.stderr)
    ext_modules = []
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
