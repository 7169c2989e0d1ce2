"""
Command handlers for the CLI.

Handlers return 0 (every requested criterion met) or 1 (checked and failed)
and let errors propagate; run_command maps them to exit codes in one place.
"""

import logging
from typing import Callable

from src.errors import LabError

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_RUNTIME = 3


def run_command(handler: Callable[..., int], *args, **kwargs) -> int:
    try:
        return handler(*args, **kwargs)
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        for problem in getattr(e, 'problems', []):
            logger.error(f"  {problem}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_RUNTIME
