"""
Exception hierarchy shared by every gridflow app.

Each error carries a stable ``code`` string and the ``exit_code`` the command
line front end maps it to (0 ok, 1 input error, 2 divergence,
3 data-generation failure, 4 training failure).
"""
from __future__ import annotations

from typing import Optional


class GridflowError(Exception):
    code = "GRIDFLOW_ERROR"
    exit_code = 1

    def __init__(self, message: str = "", **context):
        self.message = message or self.__class__.__name__
        self.context = context
        super().__init__(self.message)

    def to_dict(self) -> dict:
        return {"error": self.message, "code": self.code, **self.context}


# --- case files -----------------------------------------------------------

class CaseFormatError(GridflowError, ValueError):
    code = "CASE_FORMAT"


class MissingBlock(CaseFormatError):
    code = "MISSING_BLOCK"

    def __init__(self, block: str):
        super().__init__(f"case file has no '{block}' block", block=block)


class DuplicateBusId(CaseFormatError):
    code = "DUPLICATE_BUS_ID"

    def __init__(self, bus_id: int):
        super().__init__(f"bus id {bus_id} appears more than once", bus_id=bus_id)


class NoSlackBus(CaseFormatError):
    code = "NO_SLACK_BUS"

    def __init__(self):
        super().__init__("case file defines no slack bus (type 3)")


class MultipleSlackBuses(CaseFormatError):
    code = "MULTIPLE_SLACK_BUSES"

    def __init__(self, bus_ids):
        super().__init__(f"case file defines several slack buses: {list(bus_ids)}", bus_ids=list(bus_ids))


class MalformedRow(CaseFormatError):
    code = "MALFORMED_ROW"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}", line=line)
        self.line = line


class ZeroImpedanceBranch(CaseFormatError):
    code = "ZERO_IMPEDANCE_BRANCH"

    def __init__(self, branch: int, from_bus: int, to_bus: int):
        super().__init__(
            f"branch {branch} ({from_bus}-{to_bus}) has r = x = 0",
            branch=branch,
        )


# --- numerics -------------------------------------------------------------

class NumericsError(GridflowError, ArithmeticError):
    code = "NUMERICS"


class SingularMatrix(NumericsError):
    code = "SINGULAR_MATRIX"

    def __init__(self, pivot: int):
        super().__init__(f"matrix is singular at pivot {pivot}", pivot=pivot)
        self.pivot = pivot


class SingularSystem(NumericsError):
    code = "SINGULAR_SYSTEM"


class NotPositiveDefinite(NumericsError):
    code = "NOT_POSITIVE_DEFINITE"

    def __init__(self, row: int):
        super().__init__(f"matrix is not positive definite (leading minor {row})", row=row)
        self.row = row


class NonFinite(NumericsError):
    code = "NON_FINITE"


# --- invalid input --------------------------------------------------------

class BadParameter(GridflowError, ValueError):
    code = "BAD_PARAMETER"


class DimensionMismatch(GridflowError, ValueError):
    code = "DIMENSION_MISMATCH"


class ShapeMismatch(GridflowError, ValueError):
    code = "SHAPE_MISMATCH"


class MissingContext(GridflowError, ValueError):
    code = "MISSING_CONTEXT"

    def __init__(self, scheme: str, needs: str):
        super().__init__(f"initialization scheme '{scheme}' needs {needs}", scheme=scheme)


class BadSpec(GridflowError, ValueError):
    code = "BAD_SPEC"


class CovarianceNotPSD(GridflowError, ValueError):
    code = "COVARIANCE_NOT_PSD"


class ConfigError(GridflowError, ValueError):
    code = "CONFIG_ERROR"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        if code:
            self.code = code


class InvalidReport(GridflowError, ValueError):
    code = "INVALID_REPORT"

    def __init__(self, error: str, reason: str):
        super().__init__(f"report failed validation: {error}", reason=reason)
        self.reason = reason


class NoSamples(GridflowError, ValueError):
    code = "NO_SAMPLES"


class AllTargetsNearZero(GridflowError, ValueError):
    code = "ALL_TARGETS_NEAR_ZERO"


class DegenerateSamples(GridflowError, ValueError):
    code = "DEGENERATE_SAMPLES"

    def __init__(self, value: float):
        super().__init__(f"all samples equal {value!r}; distribution is a point mass", value=value)
        self.value = value


# --- solver ---------------------------------------------------------------

class SolverError(GridflowError):
    code = "SOLVER_ERROR"
    exit_code = 2


class Diverged(SolverError):
    code = "DIVERGED"

    def __init__(self, iterations: int, mismatch: float):
        super().__init__(
            f"Newton-Raphson diverged after {iterations} iterations (mismatch {mismatch:.3e})",
            iterations=iterations,
            mismatch=mismatch,
        )
        self.iterations = iterations
        self.mismatch = mismatch


class SingularJacobian(SolverError):
    code = "SINGULAR_JACOBIAN"


# --- data generation / training -------------------------------------------

class DataGenerationError(GridflowError):
    code = "DATA_GENERATION"
    exit_code = 3


class TooManyDivergences(DataGenerationError):
    code = "TOO_MANY_DIVERGENCES"

    def __init__(self, dropped: int, requested: int):
        super().__init__(
            f"{dropped} of {requested} samples diverged (limit 1%)",
            dropped=dropped,
            requested=requested,
        )


class TrainingError(GridflowError):
    code = "TRAINING"
    exit_code = 4


class NonFiniteLoss(TrainingError):
    code = "NON_FINITE_LOSS"

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch)
        self.epoch = epoch
        self.batch = batch


# --- checkpoints ----------------------------------------------------------

class CheckpointError(GridflowError):
    code = "CHECKPOINT"


class CorruptCheckpoint(CheckpointError):
    code = "CORRUPT_CHECKPOINT"


class VersionMismatch(CheckpointError):
    code = "VERSION_MISMATCH"

    def __init__(self, found: int, expected: int):
        super().__init__(f"checkpoint version {found}, expected {expected}", found=found, expected=expected)
