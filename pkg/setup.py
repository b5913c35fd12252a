"""Build script: compiles the optional kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "lamperti_kit._kernels._native",
        ["src/lamperti_kit/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        # keep float expressions un-fused so both backends agree closely
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level="3")
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"lamperti-kit: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
