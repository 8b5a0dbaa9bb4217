"""
File storage for instances, reports and sweep configurations.

Flat JSON files only. Every write goes to a temporary file in the target
directory first and is moved into place with os.replace.
"""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Type, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from ..core.config import Settings, get_settings
from ..core.exceptions import InstanceFormatError, ProxlabError
from ..core.logger import setup_logger
from ..models.instance import InstanceFile
from ..models.report import ReportRecord
from ..models.sweep import SweepAggregate, SweepConfig

logger = setup_logger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

CSV_COLUMNS = ["instance_id", "n", "m", "proximity", "proximity_feasible", "delta_table", "flags", "checks", "error", "timing_ms"]


class InstanceStore:
    """
    Instance, report and sweep-config storage.

    Relative paths are resolved against ``base_path`` (default: the
    configured output directory).
    """

    def __init__(self, base_path: Optional[Path] = None, settings: Optional[Settings] = None):
        """
        Initialize instance store.

        Args:
            base_path: Base path for relative file names
            settings: Settings providing the default output directory
        """
        self.settings = settings or get_settings()
        self.base_path = Path(base_path) if base_path is not None else self.settings.output_dir
        self.logger = logger

    def resolve(self, path: Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_path / path

    # -- writing ----------------------------------------------------------

    def write_text(self, path: Path, text: str) -> Path:
        """Atomically replace ``path`` with ``text``."""
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            os.replace(tmp_name, target)
        except OSError as e:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            self.logger.error(f"Failed to write {target}: {e}")
            raise ProxlabError(f"Write failed for {target}: {e}") from e
        return target

    def save_model(self, model: BaseModel, path: Path) -> Path:
        text = json.dumps(model.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"
        target = self.write_text(path, text)
        self.logger.debug(f"Saved {type(model).__name__} to {target}")
        return target

    def save_instance(self, instance: InstanceFile, path: Path) -> Path:
        target = self.save_model(instance, path)
        self.logger.info(f"Saved {instance.m}x{instance.n} instance to {target}")
        return target

    def save_aggregate(self, aggregate: SweepAggregate, records: Sequence[ReportRecord], directory: Optional[Path] = None) -> Dict[str, Path]:
        """Write <name>.json (aggregate plus records) and <name>.csv."""
        directory = self.resolve(directory) if directory is not None else self.base_path
        payload = {
            "aggregate": aggregate.model_dump(mode="json"),
            "records": [r.model_dump(mode="json") for r in records],
        }
        json_path = self.write_text(directory / f"{aggregate.name}.json", json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
        csv_path = self.write_text(directory / f"{aggregate.name}.csv", self.records_to_csv(records))
        self.logger.info(f"Saved sweep '{aggregate.name}' ({len(records)} records) to {directory}")
        return {"json": json_path, "csv": csv_path}

    @staticmethod
    def records_to_csv(records: Sequence[ReportRecord]) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in records:
            writer.writerow(
                {
                    "instance_id": r.instance_id,
                    "n": r.n,
                    "m": r.m,
                    "proximity": r.proximity or "",
                    "proximity_feasible": r.proximity_feasible or "",
                    "delta_table": " ".join(r.delta_table),
                    "flags": " ".join(f"{k}={v.value}" for k, v in r.flags.items()),
                    "checks": " ".join(f"{k}={'pass' if v else 'fail'}" for k, v in r.checks.items()),
                    "error": r.error or "; ".join(f"{k}: {v}" for k, v in r.check_errors.items()),
                    "timing_ms": r.timing_ms,
                }
            )
        return buffer.getvalue()

    # -- reading ----------------------------------------------------------

    def _read_json(self, path: Path) -> Any:
        target = self.resolve(path)
        try:
            with open(target, encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError as e:
            raise InstanceFormatError(f"File not found: {target}") from e
        except json.JSONDecodeError as e:
            raise InstanceFormatError(f"Invalid JSON in {target}: {e}") from e

    def _load_model(self, model_cls: Type[ModelT], path: Path) -> ModelT:
        data = self._read_json(path)
        try:
            return model_cls.model_validate(data)
        except ValidationError as e:
            raise InstanceFormatError(f"Invalid {model_cls.__name__} in {path}: {e}") from e

    def load_instance(self, path: Path) -> InstanceFile:
        return self._load_model(InstanceFile, path)

    def load_sweep_config(self, path: Path) -> SweepConfig:
        """YAML or JSON sweep configuration; an empty file is an empty sweep."""
        target = self.resolve(path)
        try:
            with open(target, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise InstanceFormatError(f"File not found: {target}") from e
        except yaml.YAMLError as e:
            raise InstanceFormatError(f"Invalid sweep config {target}: {e}") from e
        if data is None:
            return SweepConfig(name=target.stem)
        if not isinstance(data, dict):
            raise InstanceFormatError(f"Sweep config {target} must be a mapping")
        data.setdefault("name", target.stem)
        try:
            return SweepConfig.model_validate(data)
        except ValidationError as e:
            raise InstanceFormatError(f"Invalid sweep config {target}: {e}") from e
