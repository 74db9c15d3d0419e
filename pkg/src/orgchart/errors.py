"""Exception hierarchy shared by every stage of the pipeline."""


class OrgChartError(Exception):
    """Base class for all errors raised by this package."""


class MalformedDocument(OrgChartError):
    pass


class DanglingEndpoint(OrgChartError):
    pass


class SelfLoop(OrgChartError):
    pass


class MultipleWriters(OrgChartError):
    pass


class MissingCeo(OrgChartError):
    pass


class UnknownUser(OrgChartError, KeyError):
    def __str__(self):
        return f"unknown user: {self.args[0]!r}" if self.args else "unknown user"


class Infeasible(OrgChartError):
    pass


class ResourceBudgetExceeded(OrgChartError):
    pass


class EmptyClass(OrgChartError):
    pass


class InvalidComposition(OrgChartError):
    pass


class UserSetMismatch(OrgChartError):
    pass


class DegenerateLabels(OrgChartError):
    pass


class UnsatisfiableShape(OrgChartError):
    pass
