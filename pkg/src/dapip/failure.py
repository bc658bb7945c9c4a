"""The Failure result value.

API evaluation is a partial function; absence of a match is an ordinary
value, not a raised fault, so the interpreter can propagate it uniformly.
"""


class Failure:
    """Singleton marker for an API or program that produced no result."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Failure"

    def __bool__(self) -> bool:
        return False


FAILURE = Failure()
