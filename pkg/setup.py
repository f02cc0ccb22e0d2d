import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "cavsqueeze.kernels._core",
    ["src/cavsqueeze/kernels/_core.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize([ext], language_level="3"))
