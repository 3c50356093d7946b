"""Exception hierarchy shared by every jetham module."""


class JethamError(Exception):
    """Base class for all library errors."""


class ExprSyntaxError(JethamError, ValueError):
    """Malformed expression text.

    ``position`` is 1-based; ``expected`` is the sorted set of token kinds
    that would have been accepted there.
    """

    def __init__(self, text, position, expected, found):
        self.text = text
        self.position = position
        self.expected = tuple(sorted(expected))
        self.found = found
        super().__init__(
            f"syntax error at position {position}: found {found!r}, "
            f"expected one of {', '.join(self.expected)}"
        )


class UnknownCoordinate(JethamError, ValueError):
    def __init__(self, name, dims, position=None):
        self.name = name
        self.dims = dims
        self.position = position
        m, n = dims
        where = f" at position {position}" if position is not None else ""
        super().__init__(
            f"unknown coordinate {name}{where}; valid: t[1..{m}], x[1..{n}], "
            f"p[1..{n}][1..{m}]"
        )


class ArityError(JethamError, ValueError):
    def __init__(self, func, expected, got, position=None):
        self.func = func
        self.expected = expected
        self.got = got
        self.position = position
        super().__init__(f"{func} takes {expected} argument(s), got {got}")


class DomainError(JethamError, ArithmeticError):
    """Evaluation left the domain of a node (log of non-positive, 1/0, ...)."""

    def __init__(self, op, value, node=None):
        self.op = op
        self.value = value
        self.node = node
        where = f" in {node}" if node else ""
        super().__init__(f"{op} undefined at {value!r}{where}")


class OrderTooHigh(JethamError, ValueError):
    """More than three nested differentiation directions were requested."""


class SingularJacobian(JethamError, ArithmeticError):
    pass


class SingularMetric(JethamError, ArithmeticError):
    pass


class ShapeMismatch(JethamError, ValueError):
    pass


class ScenarioError(JethamError, ValueError):
    pass
