"""Discrete-event simulator of quantum repeater networks.

The event queue and the hot protocol modules are compiled with Cython when
the build allows it. Setting ``QNETSIM_PURE_PYTHON=1`` before the first
import makes every ``qnetsim`` module load from its Python source instead.
"""

import os as _os

PURE_PYTHON = _os.environ.get("QNETSIM_PURE_PYTHON", "") not in ("", "0")

if PURE_PYTHON:
    import importlib.machinery as _machinery
    import sys as _sys

    def _source_only(path):
        return _machinery.FileFinder(
            path,
            (_machinery.SourceFileLoader, _machinery.SOURCE_SUFFIXES),
            (_machinery.SourcelessFileLoader, _machinery.BYTECODE_SUFFIXES),
        )

    _root = _os.path.dirname(__file__)
    for _sub in ("", "kernel", "protocols"):
        _dir = _os.path.join(_root, _sub) if _sub else _root
        _sys.path_importer_cache[_dir] = _source_only(_dir)


def compiled_modules():
    """Names of qnetsim modules currently loaded from compiled extensions."""
    import sys

    out = []
    for name, mod in sorted(sys.modules.items()):
        if name.startswith("qnetsim") and getattr(mod, "__file__", "") and \
                not mod.__file__.endswith((".py", ".pyc")):
            out.append(name)
    return out


__version__ = "0.1.0"
