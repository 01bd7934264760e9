"""Build script: compiles the optional C kernel for normal-form arithmetic.

The package works without the extension (a pure-Python twin is selected at
import time); the build therefore degrades gracefully when Cython or a C
compiler is unavailable.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/approxlaws/_poly_c.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: C kernel not built ({exc}); using pure-Python kernel", file=sys.stderr)

setup(ext_modules=ext_modules)
