import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup: if Cython or a C toolchain is
# missing (or ADIALAB_PURE_PYTHON is set) the package installs pure-Python and
# selects the NumPy fallback kernels at import.
ext_modules = []
if not os.environ.get("ADIALAB_PURE_PYTHON"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "adialab._kernels._core",
                    ["src/adialab/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
