"""Build script for the optional compiled kernels.

The extension is skipped (with a warning) when Cython or a C compiler is
unavailable; the package then runs on its numpy fallback.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

OPENMP = ["-fopenmp"] if sys.platform.startswith("linux") else []


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self.warn(f"compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
            return
        except Exception as exc:  # noqa: BLE001
            self.warn(f"build with OpenMP failed ({exc}); retrying serial")
        ext.extra_compile_args = [a for a in ext.extra_compile_args if a not in OPENMP]
        ext.extra_link_args = [a for a in ext.extra_link_args if a not in OPENMP]
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self.warn(f"compiled kernels not built ({exc}); using numpy fallback")


ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "lfe_lab._kernels",
                ["src/lfe_lab/_kernels.pyx"],
                extra_compile_args=["-O3"] + OPENMP,
                extra_link_args=OPENMP,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
