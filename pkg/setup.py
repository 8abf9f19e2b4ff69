"""Builds the optional compiled kernel extension.

The package works without the extension: trapsight.kernels falls back to the
pure numpy implementation when trapsight._kernels is not importable.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("trapsight._kernels", ["src/trapsight/_kernels.pyx"])],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
