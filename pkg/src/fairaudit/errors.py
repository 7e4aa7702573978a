"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FairAuditError(Exception):
    exit_code = 1


class ConfigError(FairAuditError):
    exit_code = 4


class ColumnTypeError(ConfigError):
    """A transform was asked to operate on a column of the wrong kind."""


class DataError(FairAuditError):
    exit_code = 5


class ParseError(DataError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class SchemaError(DataError):
    pass


class ShapeError(DataError):
    pass


class LabelValueError(DataError):
    pass


class DegenerateLabelError(DataError):
    pass


class EmptyGroup(DataError):
    def __init__(self, group, attribute=None):
        where = f" for attribute {attribute!r}" if attribute else ""
        super().__init__(f"no rows in the {group} group{where}")
        self.group = group
        self.attribute = attribute


class InfeasibleRebalance(DataError):
    pass


class MetricUndefined(FairAuditError):
    exit_code = 6

    def __init__(self, message, metric_id=None):
        super().__init__(message)
        self.metric_id = metric_id

    def __str__(self):
        base = super().__str__()
        return f"{self.metric_id}: {base}" if self.metric_id else base


class UndefinedRatio(MetricUndefined):
    def __init__(self, rate_unprivileged, rate_privileged, metric_id="DI"):
        super().__init__(
            f"ratio undefined: unprivileged rate {rate_unprivileged:.6f} over "
            f"privileged rate {rate_privileged:.6f}",
            metric_id,
        )
        self.rate_unprivileged = rate_unprivileged
        self.rate_privileged = rate_privileged


class UndefinedRate(MetricUndefined):
    def __init__(self, group, rate, metric_id=None):
        super().__init__(f"{rate} undefined for the {group} group (zero denominator)", metric_id)
        self.group = group
        self.rate = rate
