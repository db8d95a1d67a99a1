import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KEYACTOR_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "keyactor._kernels._mst",
                    ["src/keyactor/_kernels/_mst.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython at build time: install pure, the fallback kernel takes over.
        ext_modules = []

setup(ext_modules=ext_modules)
