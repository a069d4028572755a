"""flowlab: curvature flows of graph hypersurfaces in warped-product spacetimes."""

__version__ = "0.1.0"

from . import ambient, arw, curvature, flow, hypersurface, stability  # noqa: F401
