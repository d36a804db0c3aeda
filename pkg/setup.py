import sys

from setuptools import Extension, setup

# The compiled kernels are an optional speedup: if Cython or a C compiler is
# unavailable the package installs pure-Python and selects the numpy fallback
# at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "polystokes._kernels._fast",
                ["src/polystokes/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover
    print(f"polystokes: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
