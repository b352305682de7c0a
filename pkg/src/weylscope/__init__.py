"""weylscope: numerical self-dual Weyl curvature lab on 4-manifold charts."""

__version__ = "0.1.0"

from . import jets  # noqa: F401
from .errors import WeylscopeError  # noqa: F401
