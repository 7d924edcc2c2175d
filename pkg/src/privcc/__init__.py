"""Private learning and one-way communication at desk scale."""

__version__ = "0.1.0"
