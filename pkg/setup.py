from setuptools import setup
from distutils.extension import Extension

from Cython.Build import cythonize

modules = [
    Extension(
        "splitlabel._boundcore",
        ["src/splitlabel/_boundcore.pyx"],
        extra_compile_args=["-O2"],
    )
]

setup(ext_modules=cythonize(modules, annotate=False))
