"""Build script: compiles the optional Cython path kernel.

The package works without the extension (a pure-Python kernel with identical
output is selected at import time), so any failure here is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import os

    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # random_standard_uniform / random_standard_normal live in the static
    # npyrandom library shipped inside numpy, not in the numpy core DSO
    rng_lib_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

    ext_modules = cythonize(
        [
            Extension(
                "levytails.simulator._kernel",
                ["src/levytails/simulator/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                library_dirs=[rng_lib_dir],
                libraries=["npyrandom"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off: the compiled kernel must reproduce the
                # pure-Python kernel bit-for-bit, so no FMA contraction
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"levytails: skipping Cython kernel build ({exc}); "
          "pure-Python backend will be used")

setup(ext_modules=ext_modules)
