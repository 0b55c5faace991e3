"""Exception hierarchy shared by every romkit module."""


class RomkitError(Exception):
    pass


class InvalidArgument(RomkitError, ValueError):
    pass


class InvalidState(RomkitError, ValueError):
    pass


class FormatError(RomkitError):
    pass


class GuardError(RomkitError):
    """Raised when a request exceeds a size guard (the CLI maps this to exit code 2)."""
