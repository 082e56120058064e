"""Exception hierarchy. Every error raised by the package derives from FogCertError."""


class FogCertError(Exception):
    pass


class MissingLocation(FogCertError):
    pass


class AlreadyCertified(FogCertError):
    pass


class MissingFlag(FogCertError):
    pass


class OutOfBounds(FogCertError):
    pass


class TraceError(FogCertError):
    pass


class ParseError(TraceError):
    def __init__(self, reason, line=None):
        self.line = line
        self.reason = reason
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class NonMonotonicTime(TraceError):
    pass


class UnknownProducer(FogCertError):
    pass


class TimeBeyondDuration(FogCertError):
    pass


class SchedulingInPast(FogCertError):
    pass


class NoBrokerAssigned(FogCertError):
    pass


class UnknownCell(FogCertError):
    pass


class SnapshotIncomplete(FogCertError):
    pass


class ConfigMismatch(FogCertError):
    pass


class ConfigError(FogCertError):
    def __init__(self, key, reason):
        self.key = key
        super().__init__(f"{key}: {reason}")


class UnknownScenario(FogCertError):
    pass


class OracleDisagreement(FogCertError):
    pass
