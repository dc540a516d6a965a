"""Build the optional compiled kernels; the package falls back to numpy when absent."""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TULLOCK_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("tullock._ckernels", ["src/tullock/_ckernels.pyx"],
                       extra_compile_args=["-O3"])],
            language_level=3,
            compiler_directives={"boundscheck": False, "wraparound": False,
                                 "cdivision": True, "initializedcheck": False},
        )

setup(ext_modules=ext_modules)
