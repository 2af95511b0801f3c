import os

from setuptools import Extension, setup

# Hot simulation modules also get compiled as-is by Cython; their .py sources
# stay in the package as the pure-Python fallback (see qnetsim/__init__.py).
ACCELERATED = [
    "qnetsim.hardware",
    "qnetsim.resource",
    "qnetsim.metrics",
    "qnetsim.node",
    "qnetsim.network",
    "qnetsim.app",
    "qnetsim.protocols.base",
    "qnetsim.protocols.generation",
    "qnetsim.protocols.purification",
    "qnetsim.protocols.swapping",
    "qnetsim.protocols.messages",
]

ext_modules = []
if os.environ.get("QNETSIM_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        exts = [
            Extension(
                "qnetsim.kernel._cqueue",
                sources=["src/qnetsim/kernel/_cqueue.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ]
        exts += [
            Extension(name, sources=["src/" + name.replace(".", "/") + ".py"],
                      extra_compile_args=["-O2"], optional=True)
            for name in ACCELERATED
        ]
        ext_modules = cythonize(exts, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
