"""Shared plumbing for the subcommands."""

import argparse
import json
from pathlib import Path
from typing import Any, Optional, Tuple

from pydantic import BaseModel

from ...core.config import Settings
from ...core.exceptions import HypothesisError
from ...core.logger import setup_logger
from ...lab.proximity import Instance, NormalizedInstance, normalize
from ...models.instance import InstanceFile
from ...utils.codec import Witness, file_to_instance
from ...utils.instance_store import InstanceStore

logger = setup_logger(__name__)


def int_list(text: str) -> Tuple[int, ...]:
    """argparse type for "1,0,-1"."""
    try:
        return tuple(int(part) for part in text.replace(" ", "").split(",") if part)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def load(path: Path, settings: Settings) -> Tuple[InstanceFile, Instance, Optional[Witness]]:
    data = InstanceStore(base_path=Path.cwd(), settings=settings).load_instance(path)
    inst, witness = file_to_instance(data)
    logger.info(f"Loaded {inst.m}x{inst.n} instance from {path}")
    return data, inst, witness


def normalized(inst: Instance, settings: Settings) -> NormalizedInstance:
    """Use the instance as given when P ∩ Z^n = {0}, otherwise normalize it."""
    try:
        return NormalizedInstance.assume(inst, settings)
    except HypothesisError:
        return normalize(inst, settings)


def emit(payload: Any, out: Optional[Path], settings: Settings) -> None:
    """Write JSON to ``out`` atomically, or print it when no path is given."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if out is None:
        print(text, end="")
        return
    InstanceStore(base_path=Path.cwd(), settings=settings).write_text(out, text)
