import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernel is optional: if the toolchain is missing the package
# falls back to the pure-numpy backend selected at import time.
extensions = [
    Extension(
        "pondsense._kernels._core",
        ["src/pondsense/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
