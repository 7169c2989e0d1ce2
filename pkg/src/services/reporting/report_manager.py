"""
Report Manager for the semigroup laboratory
Routes every report to the CSV and/or JSON writer chosen by the scenario
"""

import logging
import os
from typing import Any, Dict, List

from src.errors import BadParameter
from .writers import CsvReportWriter, JsonReportWriter

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json', 'both')


class ReportManager:
    """
    Owns the output directory and the writers for one command run
    """

    def __init__(self, out_dir: str, fmt: str, resolved_config: Dict[str, Any]):
        if fmt not in FORMATS:
            raise BadParameter(f"Unknown output format: {fmt}")
        self.out_dir = out_dir
        self.csv = None
        self.json = None
        self.written: List[str] = []

        self._initialize_writers(fmt, resolved_config)

    def _initialize_writers(self, fmt: str, resolved_config: Dict[str, Any]):
        """Create the output directory and the writers the format asks for"""
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create output directory {self.out_dir}: {e}")
            raise
        if fmt in ('csv', 'both'):
            self.csv = CsvReportWriter(self.out_dir, resolved_config)
        if fmt in ('json', 'both'):
            self.json = JsonReportWriter(self.out_dir, resolved_config)
        logger.info(f"Report writers initialized in {self.out_dir} ({fmt})")

    def save(self, name: str, report: Any) -> List[str]:
        """
        Write one report with every active writer

        Args:
            name: File stem
            report: Object with csv_header(), csv_rows() and to_dict()

        Returns:
            Paths written
        """
        paths = []
        try:
            for writer in (self.csv, self.json):
                if writer is not None:
                    paths.append(writer.write(name, report))
        except OSError as e:
            logger.error(f"Failed to write report {name}: {e}")
            raise
        self.written.extend(paths)
        return paths
