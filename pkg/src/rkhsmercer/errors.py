class RkhsError(ValueError):
    """Input or contract violation carrying a stable machine-readable code.

    The code (``"invalid-range"``, ``"not-positive-type"``, ...) is what the
    command line prints as ``error: <code>: <detail>``.
    """

    def __init__(self, code, detail=""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)
