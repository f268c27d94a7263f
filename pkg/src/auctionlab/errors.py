class DomainError(ValueError):
    """A mathematically invalid request: bad parameters or an infinite expectation."""
