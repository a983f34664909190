"""Build the optional compiled kernels; the package falls back to NumPy without them."""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "kmsentropy._kernels",
                ["src/kmsentropy/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # reassociation lets gcc vectorize the positive-sum reductions;
                # no -ffast-math so denormal handling stays untouched
                extra_compile_args=[
                    "-O3",
                    "-fno-math-errno",
                    "-fassociative-math",
                    "-fno-signed-zeros",
                    "-fno-trapping-math",
                ],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
