"""CLI package for sohot"""

from sohot.cli.main import app

__all__ = ["app"]
