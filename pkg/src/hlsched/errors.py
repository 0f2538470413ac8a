"""Exception types raised by the toolkit."""


class HlsError(Exception):
    """Base class for all toolkit errors."""


class CyclicGraph(HlsError):
    def __init__(self, nodes=()):
        self.nodes = tuple(nodes)
        msg = "graph contains a cycle"
        if self.nodes:
            msg += " through " + ", ".join(self.nodes)
        super().__init__(msg)


class MissingInput(HlsError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"primary input {name!r} is not bound")


class UnschedulableNode(HlsError):
    """Raised when a scheduler meets a Call, Control or Storage node."""

    def __init__(self, name, node_class):
        self.name = name
        self.node_class = node_class
        super().__init__(f"node {name!r} of class {node_class} cannot be scheduled")


class InfeasibleDeadline(HlsError):
    def __init__(self, deadline, critical_path):
        self.deadline = deadline
        self.critical_path = critical_path
        super().__init__(
            f"deadline {deadline} is shorter than the critical path ({critical_path})"
        )


class NodeSetMismatch(HlsError):
    pass


class NonAssociativeKind(HlsError):
    pass


class ParseError(HlsError):
    """Malformed DFG text. ``where`` locates the problem (line or field path)."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(HlsError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
