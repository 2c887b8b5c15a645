"""Exception types shared across jamlab."""


class ModelError(ValueError):
    """A model description is malformed or internally inconsistent."""


class CapacityError(RuntimeError):
    """An exact computation was asked to exceed its documented size limit."""

    def __init__(self, message: str, limit: int):
        super().__init__(message)
        self.limit = limit


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""
