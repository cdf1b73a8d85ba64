from setuptools import setup
from setuptools.extension import Extension

# The compiled kernel is optional: without Cython (or a C compiler) the
# package falls back to the pure-Python implementation at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("aodvtune._kernels", ["src/aodvtune/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
