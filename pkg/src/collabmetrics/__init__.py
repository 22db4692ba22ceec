"""Batch analytics for dyadic content-creator collaborations.

Quantifies collaboration synergy (two-way Shapley contributions over
viewership), creator network position (collaboration graph closeness),
audience attention diversity (commenter entropy), and audience discourse
(sentiment and topic mix) over video/comment corpora, with a seeded
synthetic-community generator for end-to-end validation.
"""

__version__ = "0.1.0"

from collabmetrics.errors import (
    CollabMetricsError,
    ConfigurationError,
    InfeasibleSpecError,
    NoBaselineError,
    ValidationError,
    ZeroBaselineError,
)

__all__ = [
    "CollabMetricsError",
    "ConfigurationError",
    "InfeasibleSpecError",
    "NoBaselineError",
    "ValidationError",
    "ZeroBaselineError",
    "__version__",
]
