"""Exception types shared by the library and mapped to CLI exit codes."""


class AinfError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class FormatError(AinfError):
    """A serialized file is malformed, has the wrong version or a bad hash."""

    exit_code = 2


class NotAdmissible(AinfError):
    """A structure fails the admissibility gate (m1, m2, bidegrees, unitality)."""

    exit_code = 1


class WindowTooSmall(AinfError):
    """The requested computation needs data outside the truncation window."""

    exit_code = 3


class NotStabilized(AinfError):
    """Inner and outer windows disagree, so no stable answer can be reported."""

    exit_code = 3


class NotConnectable(AinfError):
    """Two morphisms could not be joined by a homotopy within the window."""

    exit_code = 1


class NotSolvable(AinfError):
    """A coboundary equation has no solution in the truncated complex."""

    exit_code = 1
