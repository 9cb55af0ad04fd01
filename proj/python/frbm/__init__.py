"""Boltzmann machines with a growing hidden layer."""

try:
    from ._frbm import *  # noqa: F401,F403
    from ._frbm import __version__  # noqa: F401
except ImportError:  # module built standalone, not installed as a package
    from _frbm import *  # noqa: F401,F403
    from _frbm import __version__  # noqa: F401
