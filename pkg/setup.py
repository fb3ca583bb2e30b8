"""Build the optional Cython kernels.

If Cython or a C compiler is missing, or compilation fails, the package
still installs and the pure-Python kernels in ``tacbeam._kernels_py`` are
used instead. Set ``TACBEAM_NO_EXT=1`` to skip the extension entirely.
"""
import os
import platform
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure means fallback
            print(f"warning: compiled kernels not built ({exc}); using pure Python", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: {ext.name} not built ({exc}); using pure Python", file=sys.stderr)


def _flags():
    compile_args, link_args = ["-O3"], []
    if sys.platform.startswith("linux") and platform.machine() in ("x86_64", "AMD64"):
        # lets gcc call glibc's vector exp/tanh in the LSTM gate loops; fast-math
        # is compile-only so crtfastmath (process-wide flush-to-zero) is not linked
        compile_args += ["-ffast-math", "-fopenmp-simd"]
        link_args += ["-lmvec"]
    return compile_args, link_args


ext_modules = []
if not os.environ.get("TACBEAM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        compile_args, link_args = _flags()
        ext_modules = cythonize(
            [
                Extension(
                    "tacbeam._kernels",
                    ["src/tacbeam/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=compile_args,
                    extra_link_args=link_args,
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
