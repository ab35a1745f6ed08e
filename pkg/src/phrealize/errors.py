"""Exception hierarchy.

Every failure carries a ``condition_id`` (a short machine-readable key used
in analysis reports) and a ``witnesses`` dict with the numbers that led to
the decision.
"""

__all__ = [
    "PHError", "InfeasibleError", "NumericalError", "InputError",
    "SingularT", "CertificateRejected", "IntegrationFailure",
    "ConvergenceFailure", "UnstableMatrix", "NotPsd",
    "DegenerateKernelPairing", "SpectraOverlap", "SolveFailure",
    "NotStable", "SingularS", "NoLagrangianSubspace", "W1Singular",
    "ConditionAViolated", "ConditionBViolated", "ConditionCViolated",
    "StructureViolation", "ConditionsFailed", "NoStabilizingZ",
    "ConditionsFailedAtStep", "StorageInfeasible",
]


class PHError(Exception):
    """Base class for all library errors."""

    condition_id = "error"

    def __init__(self, message="", condition_id=None, witnesses=None, step=None):
        super().__init__(message)
        if condition_id is not None:
            self.condition_id = condition_id
        self.witnesses = dict(witnesses or {})
        self.step = step

    def as_reason(self):
        """Structured failure record used by the CLI reports."""
        return {
            "condition_id": self.condition_id,
            "step": self.step,
            "message": str(self),
            "witnesses": self.witnesses,
        }


class InfeasibleError(PHError):
    """A mathematical condition does not hold (a verdict, not a bug)."""


class NumericalError(PHError):
    """A numerical kernel could not deliver a trustworthy result."""


class InputError(PHError, ValueError):
    """Malformed input data."""

    condition_id = "input"


class SingularT(NumericalError):
    condition_id = "singular_T"


class CertificateRejected(NumericalError):
    condition_id = "certificate_rejected"


class IntegrationFailure(NumericalError):
    condition_id = "integration"


class ConvergenceFailure(NumericalError):
    condition_id = "convergence"


class SolveFailure(NumericalError):
    condition_id = "solve"


class SpectraOverlap(NumericalError):
    condition_id = "spectra_overlap"


class W1Singular(NumericalError):
    condition_id = "W1_singular"


class SingularS(InfeasibleError):
    condition_id = "singular_S"


class UnstableMatrix(InfeasibleError):
    condition_id = "not_stable"


class NotStable(InfeasibleError):
    condition_id = "not_stable"


class NotPsd(InfeasibleError):
    condition_id = "not_psd"


class DegenerateKernelPairing(InfeasibleError):
    condition_id = "lemT_a_kernel"


class NoLagrangianSubspace(InfeasibleError):
    condition_id = "thm_c"


class ConditionAViolated(InfeasibleError):
    condition_id = "thm_a"


class ConditionBViolated(InfeasibleError):
    condition_id = "thm_b"


class ConditionCViolated(InfeasibleError):
    condition_id = "thm_c"


class StructureViolation(InfeasibleError):
    condition_id = "lemT_a_kernel"


class ConditionsFailed(InfeasibleError):
    condition_id = "lemT_a_kernel"


class NoStabilizingZ(InfeasibleError):
    condition_id = "not_stable"


class ConditionsFailedAtStep(InfeasibleError):
    condition_id = "lemT_a_kernel"


class StorageInfeasible(InfeasibleError):
    condition_id = "thm_a"
