# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""Logging configuration"""

import logging
import sys

from ..config import settings


def setup_logging(level: str | None = None):
    """Configure logging with stdout handler"""
    # Trace-context injection is added by LoggingInstrumentor in main.py when available
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
        force=True,
    )


logger = logging.getLogger(__name__)
