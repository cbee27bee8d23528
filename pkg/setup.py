"""Build script for the optional compiled search kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile downgrades to a warning instead of aborting
the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: compiled search kernel unavailable, "
            f"falling back to pure Python: {exc}",
            file=sys.stderr,
        )


def extensions():
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "coplab._gridsearch",
        sources=["src/coplab/_gridsearch.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
