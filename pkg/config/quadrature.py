"""
Quadrature Configuration
Default policy handed to every integral when the caller does not pass one.
"""

from config import settings

quadrature_config = {
    "scheme": "composite-adaptive",
    "abs_tol": settings.QUAD_ABS_TOL,
    "rel_tol": settings.QUAD_REL_TOL,
    "max_subdiv": settings.QUAD_MAX_SUBDIV,
    "order": settings.QUAD_PANEL_ORDER,
    "breakpoints": [],
}
