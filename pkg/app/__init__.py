"""
Hölder oscillation toolkit: oscillation integrals of Hölder functions, their
dyadic martingale counterparts and the experiment harness around them.
"""

__version__ = "0.1.0"
