import json
import sys
from pathlib import Path
from typing import Any

from qcap.core.errors import ArtifactError

STDOUT = "-"


def read_json_file(file_path: Path) -> Any:
    try:
        return json.loads(file_path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ArtifactError(f"File not found: {file_path}") from e
    except UnicodeDecodeError as e:
        raise ArtifactError(f"Could not decode {file_path} as UTF-8") from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"{file_path} is not valid JSON: {e}") from e


def write_artifact(output_path: str | Path, text: str) -> None:
    """Writes text to a file (creating parent directories) or to stdout for "-"."""
    if str(output_path) == STDOUT:
        sys.stdout.write(text)
        return
    path = Path(output_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise ArtifactError(f"Could not write {path}: {e}") from e


def sibling_path(output_path: str | Path, suffix: str) -> Path:
    """figd.csv -> figd.<suffix>.csv"""
    path = Path(output_path)
    return path.with_name(f"{path.stem}.{suffix}{path.suffix}")
