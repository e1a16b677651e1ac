"""Error type shared by every module.

Each failure carries a short machine-readable ``code`` (for example
``REJECT_PERIODIC`` or ``DEPTH_INSUFFICIENT``) so callers and the CLI can
branch on it without parsing messages.
"""


class MatchboxError(ValueError):
    def __init__(self, code, message="", **details):
        self.code = code
        self.details = details
        text = f"{code}: {message}" if message else code
        super().__init__(text)


class DepthInsufficient(MatchboxError):
    """Raised when a computation needs deeper cylinders than allowed."""

    def __init__(self, needed, allowed, what=""):
        self.needed = int(needed)
        self.allowed = int(allowed)
        msg = f"need scan depth {self.needed}, have {self.allowed}"
        if what:
            msg += f" ({what})"
        super().__init__("DEPTH_INSUFFICIENT", msg, needed=self.needed)
