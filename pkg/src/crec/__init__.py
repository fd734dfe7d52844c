"""crec: mines git history for refactored clone groups and recommends new ones."""

__version__ = "0.1.0"
