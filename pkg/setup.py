"""Build the optional compiled kernel.

The package works without it (numpy fallback), so a missing compiler or
Cython only costs speed.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("QMAXENT_NO_EXT"):
        return []
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension("qmaxent._kernels", ["src/qmaxent/_kernels.pyx"],
                    extra_compile_args=["-O3"])
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=_extensions())
