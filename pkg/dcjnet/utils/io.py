import hashlib
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def canonical_json(data: Mapping[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(data: Mapping[str, Any]) -> str:
    """Short sha256 of the canonical config document"""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:16]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write the whole file to a temp sibling, then rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")
    return path


def write_json(path: PathLike, document: Union[BaseModel, Mapping[str, Any]]) -> Path:
    if isinstance(document, BaseModel):
        text = document.model_dump_json(indent=2)
    else:
        text = json.dumps(document, indent=2, sort_keys=True)
    return atomic_write_text(path, text + "\n")


def write_csv(path: PathLike, frame: pd.DataFrame, comments: Mapping[str, Any] = None) -> Path:
    """CSV with '# key=value' comment lines ahead of the header row"""
    buffer = io.StringIO()
    for key, value in (comments or {}).items():
        buffer.write(f"# {key}={value}\n")
    frame.to_csv(buffer, index=False)
    return atomic_write_text(path, buffer.getvalue())


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_comments(path: PathLike) -> Dict[str, str]:
    """The '# key=value' lines of a CSV written by write_csv"""
    comments = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition("=")
            comments[key] = value
    return comments


def header_comments(header: BaseModel, extra: Mapping[str, Any] = None) -> Dict[str, Any]:
    comments: Dict[str, Any] = {
        "config_hash": header.config_hash,
        "seed": header.seed,
        "version": header.version,
    }
    for name, value in header.tolerances.items():
        comments[f"tolerance_{name}"] = value
    comments.update(extra or {})
    return comments
