from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("corpusforge._speedups", ["src/corpusforge/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: install pure-Python only; corpusforge.similarity
    # falls back to the interpreted kernel at import time.
    extensions = []

setup(ext_modules=extensions)
