"""Build script: compiles the optional sliding-graph extension.

The package works without the extension (a pure-Python twin of the kernel
is selected at import time), so a failed compile only costs speed.
"""

from setuptools import Extension, setup

extensions = []
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fiboptic._kernel._slide_c",
                ["src/fiboptic/_kernel/_slide_c.pyx"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=extensions)
