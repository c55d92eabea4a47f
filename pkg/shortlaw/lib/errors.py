class ShortLawError(Exception):
    """Base class of every error raised by shortlaw."""


class TrivialWordError(ShortLawError, ValueError):
    pass


class WordParseError(ShortLawError, ValueError):
    pass


class GroupSpecError(ShortLawError, ValueError):
    pass


class FieldError(ShortLawError, ArithmeticError):
    pass


class CeilingExceeded(ShortLawError):
    """A group or catalog is larger than the configured enumeration ceiling."""


class BudgetExceeded(ShortLawError):
    """An oracle or search request does not fit its hard budget."""


class RetryLimitExceeded(ShortLawError):
    pass


class NonGeneratingSet(ShortLawError, ValueError):
    pass


class ConstructionError(ShortLawError):
    """A combinator produced a word violating its length or non-triviality contract."""


class CertificateError(ShortLawError, ValueError):
    """A certificate file is malformed or does not match its reconstruction."""
