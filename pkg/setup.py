"""Build script: compiles the optional fast core.

The compiled extension accelerates the two hot inner loops (dyadic
stopping-time cube selection and scalar-kernel quadrature accumulation).
The package works without it; ``volterra_cz._backend`` falls back to the
pure NumPy implementation when the extension is missing.
"""

import sys

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"skipping compiled core ({exc}); pure-Python fallback will be used",
              file=sys.stderr)
        return []
    return cythonize(
        [
            Extension(
                "volterra_cz._core",
                ["src/volterra_cz/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions())
