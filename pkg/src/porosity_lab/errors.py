"""Typed errors raised by the analysis routines.

Every error carries a short machine-readable ``code`` which the command line
front end prints in its diagnostics.
"""


class PorosityLabError(ValueError):
    code = "error"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


class IdOutOfRange(PorosityLabError, IndexError):
    code = "id_out_of_range"


class EmptySubset(PorosityLabError):
    code = "empty_subset"


class DegenerateSpec(PorosityLabError):
    code = "degenerate_spec"


class ResolutionError(PorosityLabError):
    code = "resolution"


class BadRadius(PorosityLabError):
    code = "bad_radius"


class EmptyBall(PorosityLabError):
    code = "empty_ball"


class DegenerateFit(PorosityLabError):
    code = "degenerate_fit"


class BadAlpha(PorosityLabError):
    code = "bad_alpha"


class BadPorosityParam(PorosityLabError):
    code = "bad_porosity_param"


class NotPorous(PorosityLabError):
    code = "not_porous"


class UnreachableExponent(PorosityLabError):
    code = "unreachable_exponent"


class PorosityDeficit(PorosityLabError):
    code = "porosity_deficit"


class NotInBaseSet(PorosityLabError):
    code = "not_in_base_set"


class InsufficientScales(PorosityLabError):
    code = "insufficient_scales"


class NoGap(PorosityLabError):
    code = "no_gap"


class ManifestError(PorosityLabError):
    code = "manifest"


class VerificationFailed(PorosityLabError):
    code = "verification_failed"
