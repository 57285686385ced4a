import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("randorth._ckernels", ["src/randorth/_ckernels.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O3"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
