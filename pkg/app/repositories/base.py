"""Base repository class for file-backed storage."""

from pathlib import Path
from typing import Optional, Union

from app.core.config import get_settings


class FileRepository:
    """Base repository resolving paths against the bundled data directory."""

    def __init__(self, data_dir: Optional[Union[str, Path]] = None):
        self.data_dir = Path(data_dir or get_settings().DATA_DIR)

    def resolve(self, path: Union[str, Path]) -> Path:
        """Existing path as given, else the same name inside the data directory."""
        candidate = Path(path)
        if candidate.exists() or candidate.is_absolute():
            return candidate
        bundled = self.data_dir / candidate
        return bundled if bundled.exists() else candidate

    def write_text(self, path: Union[str, Path], content: str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
        return target
