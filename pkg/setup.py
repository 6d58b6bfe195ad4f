"""Build hook for the optional compiled search kernel.

If Cython or a C compiler is missing the package still installs and the
pure-Python kernel is used instead.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HAMPOWER_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("hampower._kernel", ["src/hampower/_kernel.pyx"], extra_compile_args=["-O3"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
