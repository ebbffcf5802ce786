"""Exception hierarchy shared by all engine modules."""


class HypoDBError(Exception):
    """Base class for every engine error."""


# --- world-set core ---

class EmptyDomain(HypoDBError):
    pass


class ZeroTotalWeight(HypoDBError):
    pass


class InconsistentDescriptor(HypoDBError):
    pass


class UnknownVariable(HypoDBError):
    pass


class EmptyVarSet(HypoDBError):
    pass


class DomainTooLarge(HypoDBError):
    pass


# --- algebra ---

class UnknownAttribute(HypoDBError):
    pass


class SchemaMismatch(HypoDBError):
    pass


class NonNumericWeight(HypoDBError):
    pass


class UncertainRepairInput(HypoDBError):
    """repair_key requires certain input tuples (empty descriptors)."""


# --- model language ---

class ModelSyntaxError(HypoDBError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UndeclaredVariable(HypoDBError):
    pass


class CyclicOutputDefinition(HypoDBError):
    pass


class NonConstantExponent(HypoDBError):
    pass


class DivisionByZero(HypoDBError):
    pass


class NegativeSqrtArgument(HypoDBError):
    pass


class UnboundParameter(HypoDBError):
    pass


# --- FD reasoning ---

class CyclicDependency(HypoDBError):
    pass


# --- ingestion ---

class MalformedRow(HypoDBError):
    pass


class DanglingTid(HypoDBError):
    pass


class DuplicateTid(HypoDBError):
    pass


class NoMatchingTrial(HypoDBError):
    pass


# --- pipeline ---

class ProjectError(HypoDBError):
    pass


class MissingTrialForFactorValue(HypoDBError):
    pass


# --- analytics ---

class EmptySelection(HypoDBError):
    pass


class DegenerateLikelihood(HypoDBError):
    pass


class PartialCoverage(HypoDBError):
    pass
