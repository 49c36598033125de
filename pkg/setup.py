"""Build script: compiles the optional fast kernels, falling back to pure Python.

The package is fully functional without the extension; `trajseg.kernels`
selects the compiled module at import time when it is available.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        print("trajseg: cython/numpy unavailable at build time; "
              "installing pure-Python kernels only", file=sys.stderr)
        return []
    ext = Extension(
        "trajseg._ext",
        ["src/trajseg/_ext.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
