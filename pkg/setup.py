import os
import sys

from setuptools import Extension, setup


def extensions():
    if os.environ.get("CLINCH_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; installing pure-Python kernel only", file=sys.stderr)
        return []
    ext = Extension(
        "clinch._simplex_ext",
        ["src/clinch/_simplex_ext.pyx"],
        libraries=["gmp"],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
