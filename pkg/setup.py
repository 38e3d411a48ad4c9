from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("gicbands._kernels", ["src/gicbands/_kernels.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level=3))
