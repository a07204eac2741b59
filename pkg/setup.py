import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython at build time: install pure-Python only, the package falls
    # back to the numpy kernels at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "cascade_msprt._ckernels",
                ["src/cascade_msprt/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
