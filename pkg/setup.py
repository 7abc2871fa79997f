"""Build script for the compiled stepper kernel.

The extension is optional at runtime: ``confbill._kernel`` falls back to the
pure-Python stepper when the compiled module is missing (or when the
environment variable ``CONFBILL_PURE=1`` is set).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    # -ffp-contract=off keeps the compiled kernel bit-compatible with the
    # pure-Python stepper (no FMA contraction of a*b+c).
    ext_modules = cythonize(
        [
            Extension(
                "confbill._kernel._native",
                ["src/confbill/_kernel/_native.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
