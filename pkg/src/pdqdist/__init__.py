"""
pdqdist - distances between persistence diagrams, exactly and via a
statevector simulation of a QAOA with clause-controlled mixers.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("pdqdist")
except PackageNotFoundError:
    # Package not installed (e.g., running from source)
    __version__ = "0.0.0"
