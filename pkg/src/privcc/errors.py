class CapExceeded(ValueError):
    """Raised when an input exceeds a size cap of an exact computation."""
