"""Exception types raised across the package."""


class NgramStateError(Exception):
    """Base class; the CLI maps every subclass to a nonzero exit code."""

    module = "ngramstate"


class NetParseError(NgramStateError, ValueError):
    module = "net"


class NetStructureError(NgramStateError, ValueError):
    module = "net"

    def __init__(self, message, ids=()):
        super().__init__(message)
        self.ids = tuple(ids)


class NotEnabledError(NgramStateError):
    module = "net"

    def __init__(self, transition, missing):
        self.transition = transition
        self.missing = tuple(missing)
        super().__init__(
            f"transition {transition!r} is not enabled; missing tokens in {list(self.missing)}"
        )


class SafenessError(NgramStateError):
    module = "net"

    def __init__(self, transition, places):
        self.transition = transition
        self.places = tuple(places)
        super().__init__(
            f"firing {transition!r} puts a second token in {list(self.places)} (net is not 1-safe)"
        )


class SilentLivelockError(NgramStateError):
    module = "reach"


class StateSpaceExceeded(NgramStateError):
    module = "reach"


class IndexCapExceeded(NgramStateError):
    module = "index"

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"n-gram index grew to {count} entries, above the cap of {cap}")


class IndexFormatError(NgramStateError, ValueError):
    module = "index"


class UnknownActivityError(NgramStateError, KeyError):
    module = "query"

    def __str__(self):
        return self.args[0] if self.args else "unknown activity"


class LogFormatError(NgramStateError, ValueError):
    module = "logio"
