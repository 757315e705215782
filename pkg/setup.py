"""Build script; compiles the optional Taylor-multiply kernel when Cython
and a C compiler are available.  Without them the package installs with the
pure numpy backend (same results, slower inner loop)."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/finslercheck/taylor/_speedups.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
