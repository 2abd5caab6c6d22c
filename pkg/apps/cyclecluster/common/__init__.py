"""
cyclecluster common package
Artifact IO and column helpers shared by services and stages.
"""

from .artifacts import ArtifactStore
from .columns import canonical_headers, canonical_order, snake_case

__all__ = ["ArtifactStore", "canonical_headers", "canonical_order", "snake_case"]
