"""Exception types shared across the package.

Every domain error derives from TabforgeError so callers (CLI, HTTP layer)
can catch one base class and map subclasses to exit codes / status codes.
"""


class TabforgeError(Exception):
    """Base class for all domain errors."""


# --- parsing / serialization ------------------------------------------------

class MalformedJson(TabforgeError):
    pass


class MissingField(TabforgeError):
    def __init__(self, field: str):
        super().__init__(f"missing required field: {field}")
        self.field = field


class DuplicateKey(TabforgeError):
    def __init__(self, key: str):
        super().__init__(f"duplicate key: {key!r}")
        self.key = key


class EmptyTable(TabforgeError):
    pass


# --- bitstring codecs ---------------------------------------------------------

class BadLength(TabforgeError):
    pass


class BadChar(TabforgeError):
    pass


class InvariantViolation(TabforgeError):
    pass


# --- rendering ---------------------------------------------------------------

class UnknownKey(TabforgeError):
    def __init__(self, key: str):
        super().__init__(f"unknown key: {key!r}")
        self.key = key


# --- value pool --------------------------------------------------------------

class DuplicateTableId(TabforgeError):
    def __init__(self, table_id: str):
        super().__init__(f"duplicate table id: {table_id!r}")
        self.table_id = table_id


# --- editing -----------------------------------------------------------------

class ForbiddenOriginalEdit(TabforgeError):
    pass


class NotFound(TabforgeError):
    pass


class TypeViolation(TabforgeError):
    def __init__(self, src_key: str, dst_key: str, src_group, dst_group):
        super().__init__(
            f"type groups differ: {src_key!r} is {src_group}, {dst_key!r} is {dst_group}"
        )
        self.src_key = src_key
        self.dst_key = dst_key
        self.src_group = src_group
        self.dst_group = dst_group


class EmptyText(TabforgeError):
    pass


class RevisionConflict(TabforgeError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected revision {expected}, session is at {actual}")
        self.expected = expected
        self.actual = actual


# --- storage / export ----------------------------------------------------------

class StorageFailure(TabforgeError):
    pass


class LintBlocked(TabforgeError):
    def __init__(self, message: str, findings=None):
        super().__init__(message)
        self.findings = findings or []


# --- analysis ------------------------------------------------------------------

class EmptySelection(TabforgeError):
    pass


class JoinFailure(TabforgeError):
    def __init__(self, pair_id: str, reason: str = ""):
        msg = f"cannot join pair {pair_id!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.pair_id = pair_id
