from .config import __version__
from .cli import main

__all__ = ["__version__", "main"]
