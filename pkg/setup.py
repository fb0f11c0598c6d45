import numpy as np
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "wfdiff._convkernels",
                ["src/wfdiff/_convkernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback still works without the compiled kernels.
    pass

setup(ext_modules=ext_modules)
