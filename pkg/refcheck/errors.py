"""
Exceptions raised by refcheck.

Every error the library raises on purpose derives from RefcheckError so
callers (the CLI in particular) can catch the whole family at once.
"""


class RefcheckError(Exception):
    pass


class ConfigError(RefcheckError):
    pass


class EmptyInput(RefcheckError):
    pass


class UnreadableInput(RefcheckError):
    pass


class NoValidEntries(RefcheckError):
    pass


class MissingTitle(RefcheckError):
    pass


class EmptyCandidateSet(RefcheckError):
    pass


class NoRecords(RefcheckError):
    pass


class SourceError(RefcheckError):
    """
    Failure talking to a bibliographic source. Never aborts verification,
    the pipeline turns it into a warning on the result.
    """


class NetworkError(SourceError):
    pass


class RateLimited(SourceError):

    def __init__(self, message: str, retry_after: float = None):
        super().__init__(message)
        self.retry_after = retry_after


class MalformedResponse(SourceError):
    pass
