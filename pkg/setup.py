import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TAME3_PURE") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("tame3._modrank", ["src/tame3/_modrank.pyx"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
