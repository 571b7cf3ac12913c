"""
File Storage Utility
Storage facade for experiment reports on PyFilesystem2: CSV tables and JSON
documents rooted at OSC_OUTPUT_DIR unless a path is absolute.
"""

import csv
import io
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from fs import open_fs
from fs.base import FS
from fs.errors import FSError
from fs.path import dirname
from pydantic import BaseModel

from app.core.exceptions import StorageError
from app.core.logging import get_logger
from config import settings

logger = get_logger("harness")


def format_value(value: Any) -> str:
    """Locale-independent rendering: floats with 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if hasattr(value, "item") and callable(value.item):
        return format_value(value.item())
    return str(value)


class Storage:
    """
    Storage facade for report files.

    Usage:
        storage().put_csv("l2.csv", header, rows)
        storage().put_json("l2.json", report)
    """

    def __init__(self, root: str | None = None):
        """
        Initialize storage rooted at a directory.

        Args:
            root: Root directory (defaults to OSC_OUTPUT_DIR from config)
        """
        self.root = Path(root or settings.OSC_OUTPUT_DIR)
        self._filesystem: FS | None = None

    @property
    def filesystem(self) -> FS:
        """Get or create the root filesystem."""
        if self._filesystem is None:
            self._filesystem = open_fs(f"osfs://{self.root.resolve()}", create=True)
        return self._filesystem

    def path(self, path: str | Path) -> Path:
        """Resolve a storage path; absolute paths are used as given."""
        target = Path(path)
        return target if target.is_absolute() else self.root / target

    def _locate(self, path: str | Path) -> tuple[FS, str]:
        """Filesystem and inner path; absolute paths open their own parent."""
        target = Path(path)
        if target.is_absolute():
            return open_fs(f"osfs://{target.parent}", create=True), target.name
        return self.filesystem, target.as_posix()

    def put(self, path: str | Path, content: str | bytes) -> Path:
        """
        Store file content at given path.

        Args:
            path: File path
            content: File content (string or bytes)

        Returns:
            The written path
        """
        if isinstance(content, str):
            content = content.encode("utf-8")
        target = self.path(path)
        try:
            fs, inner = self._locate(path)
            parent = dirname(inner)
            if parent:
                fs.makedirs(parent, recreate=True)
            fs.writebytes(inner, content)
        except (FSError, OSError) as e:
            logger.error(f"Storage put error for {path}: {e}")
            raise StorageError(f"cannot write {target}: {e}", path=str(target))
        logger.debug("Report written", context={"path": str(target), "bytes": len(content)})
        return target

    def get(self, path: str | Path) -> bytes | None:
        """File content as bytes, or None if not found."""
        try:
            fs, inner = self._locate(path)
            if not fs.isfile(inner):
                return None
            return fs.readbytes(inner)
        except FSError as e:
            logger.error(f"Storage get error for {path}: {e}")
            return None

    def exists(self, path: str | Path) -> bool:
        try:
            fs, inner = self._locate(path)
            return fs.isfile(inner)
        except FSError:
            return False

    def delete(self, path: str | Path) -> bool:
        try:
            fs, inner = self._locate(path)
            if not fs.isfile(inner):
                return False
            fs.remove(inner)
            return True
        except FSError as e:
            logger.error(f"Storage delete error for {path}: {e}")
            return False

    def put_csv(
        self,
        path: str | Path,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
    ) -> Path:
        """Header row, comma separated, '.' decimal, floats as .17g."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return self.put(path, buffer.getvalue())

    def put_json(self, path: str | Path, model: BaseModel) -> Path:
        return self.put(path, model.model_dump_json(indent=2) + "\n")


# Global storage instance
_storage_instance: Storage | None = None


def get_storage(root: str | None = None) -> Storage:
    """Get global storage instance (singleton)."""
    global _storage_instance
    if _storage_instance is None or root:
        _storage_instance = Storage(root=root)
    return _storage_instance


def storage(root: str | None = None) -> Storage:
    return get_storage(root)
