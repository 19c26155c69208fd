"""Error taxonomy shared by all engine layers.

Every error that corresponds to a *verified* failure (as opposed to a usage
mistake) carries a witness object so reports can show why a check failed.
"""

from __future__ import annotations


class WtcError(Exception):
    """Base class for all engine errors."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IllFormedHom(WtcError):
    """Matrix does not map source relations into target relations."""


class TypeMismatch(WtcError):
    """Objects do not compose / live on the wrong scheme, twist or degree."""


class NotEnumerable(WtcError):
    """A solution set with free directions was asked to be enumerated."""


class NotProper(WtcError):
    """Push-forward data requested on a morphism without proper data."""


class ClassMismatch(WtcError):
    """Twist classes disagree where the construction requires equality."""


class NotSmPic(WtcError):
    """A scheme failed the base-compatibility certification."""


class InternalContradiction(WtcError):
    """A step guaranteed by certified hypotheses failed: input data is corrupt."""


class HypothesisFailed(WtcError):
    """A chase hypothesis does not hold; witness shows the offending element."""


class ScopeError(WtcError):
    """A twist class falls outside the declared scope of a presentation."""


class DegreeMismatch(WtcError):
    """Degrees of combination terms do not land in a common degree."""


class MissingMap(WtcError):
    """A registered homomorphism needed by evaluation is absent."""


class MissingAutAction(WtcError):
    """No automorphism data for a 2-torsion square root or a unit class."""


class MissingAnnotation(WtcError):
    """A transfer requires a trusted geometric annotation the morphism lacks."""


class InjectivityFailure(WtcError):
    """A pullback is not injective on the given scope; witness is a colliding pair."""


class OverlapWarning(WtcError):
    """Scopes overlap, so a union only merges generation, not independence."""


class ExactnessFailure(WtcError):
    """A registered sequence is not exact; witness names position and element."""


class SimilitudeFailure(WtcError):
    """A declared lax-similitude witness does not check out."""


class ParseError(WtcError):
    """Workspace file is not syntactically valid."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(WtcError):
    """Workspace data violates a load-time axiom."""

    def __init__(self, axiom, message, witness=None):
        super().__init__(f"{axiom}: {message}", witness)
        self.axiom = axiom
