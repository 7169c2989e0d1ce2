"""
File writers for reports.

CSV bodies depend only on the report, so a replayed scenario reproduces them
byte for byte. The resolved config and the version travel in `#` comment
lines above the header (CSV) or as top-level keys (JSON).
"""

import csv
import json
import logging
import os
from typing import Any, Dict

from src.config import VERSION
from src.models.domain import jsonable

logger = logging.getLogger(__name__)


class CsvReportWriter:
    extension = 'csv'

    def __init__(self, out_dir: str, resolved_config: Dict[str, Any]):
        self.out_dir = out_dir
        self.config_line = json.dumps(jsonable(resolved_config), sort_keys=True)

    def write(self, name: str, report: Any) -> str:
        path = os.path.join(self.out_dir, f"{name}.{self.extension}")
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(f"# config: {self.config_line}\n")
            handle.write(f"# version: {VERSION}\n")
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(report.csv_header())
            writer.writerows(jsonable(report.csv_rows()))
        return path


class JsonReportWriter:
    extension = 'json'

    def __init__(self, out_dir: str, resolved_config: Dict[str, Any]):
        self.out_dir = out_dir
        self.config = jsonable(resolved_config)

    def write(self, name: str, report: Any) -> str:
        path = os.path.join(self.out_dir, f"{name}.{self.extension}")
        document = {'version': VERSION, 'config': self.config, 'result': report.to_dict()}
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(document, handle, sort_keys=True, indent=2, ensure_ascii=False)
            handle.write('\n')
        return path
