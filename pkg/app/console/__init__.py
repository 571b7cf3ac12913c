"""
Console package
Command group of the oscillation toolkit
"""

from app.console.commands import app

__all__ = ["app"]
