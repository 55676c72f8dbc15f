"""Exception taxonomy for the exporter.

ManifestError covers everything wrong with the manifest or the values flowing
through it (shape, split invariants, probability-vector checks). PredictorError
covers a user predictor raising; it always names the sample so the failure can
be reproduced with one call.
"""

from __future__ import annotations


class ManifestError(ValueError):
    """Manifest or probability-vector validation failure."""


class PredictorError(RuntimeError):
    """A user-supplied predictor raised while being queried."""

    def __init__(self, role: str, sample_id: str, cause: BaseException):
        self.role = role
        self.sample_id = sample_id
        self.cause = cause
        super().__init__(f"{role} predictor failed on sample {sample_id!r}: {cause}")
