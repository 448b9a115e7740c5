"""
Report writer with change detection.

Only writes files whose content hash differs from the file already on
disk, and records every artifact with its hash in the run manifest.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .analyses import AnalysisResult, emit_plot_data

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def hash_bytes(data: bytes) -> str:
    """16-character SHA-256 hex digest."""
    return hashlib.sha256(data).hexdigest()[:16]


def render_csv(columns: List[str], rows: List[Dict[str, str]]) -> str:
    frame = pd.DataFrame(rows, columns=columns)
    return frame.to_csv(index=False, lineterminator="\n")


def render_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


@dataclass
class WriteResult:
    """Result of a file write operation."""

    file_path: Path
    changed: bool
    reason: str
    content_hash: str


@dataclass
class ReportWriter:
    """Writes analysis artifacts under output_dir and tracks them for the manifest."""

    output_dir: Path
    results: List[WriteResult] = field(default_factory=list)

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_if_changed(self, name: str, content: str, track: bool = True) -> WriteResult:
        """
        Write a text file only if its content hash changed.

        Args:
            name: file name relative to output_dir
            content: full file content
            track: list the file in the manifest

        Returns:
            WriteResult indicating if the file was changed
        """
        file_path = self.output_dir / name
        data = content.encode("utf-8")
        digest = hash_bytes(data)

        if file_path.exists() and self._existing_hash(file_path) == digest:
            logger.debug(f"Unchanged: {name}")
            result = WriteResult(file_path, changed=False, reason="Content unchanged", content_hash=digest)
        else:
            reason = "Content updated" if file_path.exists() else "New file"
            file_path.write_bytes(data)
            logger.info(f"Wrote: {name}")
            result = WriteResult(file_path, changed=True, reason=reason, content_hash=digest)

        if track:
            self.results.append(result)
        return result

    def write_result(self, result: AnalysisResult) -> List[WriteResult]:
        """One CSV and one JSON per analysis, plus plot data when available."""
        name = result.spec.name
        written = [
            self.write_if_changed(f"{name}.csv", render_csv(result.columns, result.rows)),
            self.write_if_changed(
                f"{name}.json",
                render_json({"analysis": result.spec.type, "name": name, **result.payload}),
            ),
        ]
        if result.supports_plot:
            plot = emit_plot_data(result)
            written.append(self.write_if_changed(f"{name}_plot.csv", plot.to_csv(index=False, lineterminator="\n")))
        return written

    def write_manifest(self, header: Dict[str, Any]) -> WriteResult:
        """Manifest of every tracked file with its hash (not the manifest itself)."""
        files = [
            {"path": r.file_path.name, "sha256": r.content_hash}
            for r in sorted(self.results, key=lambda r: r.file_path.name)
        ]
        return self.write_if_changed(MANIFEST_NAME, render_json({**header, "files": files}), track=False)

    @staticmethod
    def _existing_hash(file_path: Path) -> Optional[str]:
        try:
            return hash_bytes(file_path.read_bytes())
        except OSError:
            return None
