# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Exception hierarchy shared by services, stages and the CLI"""


class CycleClusterError(Exception):
    """Base class for every error the toolkit raises on purpose"""


class ConfigError(CycleClusterError):
    pass


class IngestError(CycleClusterError):
    pass


class PreprocessError(CycleClusterError):
    pass


class KMeansError(CycleClusterError):
    pass


class ClusterValidationError(CycleClusterError):
    pass


class AnalysisError(CycleClusterError):
    pass


class ArtifactError(CycleClusterError):
    """A stage input artifact is missing or unreadable"""


class StageError(CycleClusterError):
    """Wraps a failure with the name of the pipeline stage it came from"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
