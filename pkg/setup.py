"""Build script: compiles the optional lexical-kernel extension.

The package works without the extension; ``agoranet._kernels`` falls back
to the pure-Python twin when the compiled module is absent.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the speedup extension, but never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            sys.stderr.write(f"warning: skipping compiled kernels ({exc})\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            sys.stderr.write(f"warning: {ext.name} not built ({exc})\n")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "agoranet._kernels._speedups",
                ["src/agoranet/_kernels/_speedups.pyx"],
            )
        ],
        compiler_directives={"language_level": 3},
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
