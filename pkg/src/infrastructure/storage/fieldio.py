"""
raywave - Field Storage
RWV1 binary snapshots, plain-text matrix exports and the delimited tables a
run emits. One FieldStore owns one output directory.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import yaml

from src.core.utils.logging import get_logger_with_context
from src.core.waves.fields import COMPONENTS, FieldGrid

logger = get_logger_with_context(module="fieldio")

MAGIC = b"RWV1"
TAG_SIZE = 16
# magic, nx, ny, origin x/y, spacing x/y, t, component tag
HEADER = struct.Struct(f"<4sII5d{TAG_SIZE}s")


class FieldFormatError(ValueError):
    """File is not a readable RWV1 snapshot."""


def encode_field(grid: FieldGrid) -> bytes:
    """Header, row-major little-endian float64 values, then the packed mask bits."""
    tag = grid.component.encode("ascii")
    header = HEADER.pack(
        MAGIC, grid.nx, grid.ny,
        float(grid.origin[0]), float(grid.origin[1]),
        float(grid.spacing[0]), float(grid.spacing[1]),
        float(grid.t), tag.ljust(TAG_SIZE, b"\0"),
    )
    values = np.ascontiguousarray(grid.values, dtype="<f8").tobytes()
    mask = np.packbits(grid.mask.reshape(-1).astype(np.uint8)).tobytes()
    return header + values + mask


def decode_field(payload: bytes) -> FieldGrid:
    if len(payload) < HEADER.size or payload[:4] != MAGIC:
        raise FieldFormatError("missing RWV1 header")
    magic, nx, ny, ox, oy, hx, hy, t, tag = HEADER.unpack_from(payload)
    component = tag.rstrip(b"\0").decode("ascii")
    if component not in COMPONENTS:
        raise FieldFormatError(f"unknown component tag {component!r}")
    count = nx * ny
    start = HEADER.size
    end = start + 8 * count
    mask_bytes = (count + 7) // 8
    if len(payload) != end + mask_bytes:
        raise FieldFormatError(f"expected {end + mask_bytes} bytes, found {len(payload)}")
    values = np.frombuffer(payload[start:end], dtype="<f8").reshape(ny, nx).astype(float)
    mask = np.unpackbits(np.frombuffer(payload[end:], dtype=np.uint8), count=count)
    return FieldGrid((ox, oy), (hx, hy), nx, ny, values, t, component, mask.reshape(ny, nx).astype(bool))


def write_field(path: Path, grid: FieldGrid) -> Path:
    path = Path(path)
    path.write_bytes(encode_field(grid))
    return path


def read_field(path: Path) -> FieldGrid:
    return decode_field(Path(path).read_bytes())


def export_text(path: Path, grid: FieldGrid) -> Path:
    """Whitespace matrix, one grid row per line; masked cells print as nan."""
    path = Path(path)
    values = np.where(grid.mask, np.nan, grid.values)
    header = (
        f"component={grid.component} t={grid.t!r} nx={grid.nx} ny={grid.ny} "
        f"origin={grid.origin[0]!r},{grid.origin[1]!r} spacing={grid.spacing[0]!r},{grid.spacing[1]!r}"
    )
    np.savetxt(path, values, fmt="%.17g", header=header)
    return path


def snapshot_name(component: str, t: float) -> str:
    return f"{component}_t{t:.6f}"


class FieldStore:
    """Single writer for everything a run puts in its output directory."""

    def __init__(self, output_dir: Path, text_export: bool = False):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.text_export = text_export
        self.written: List[Path] = []

    def _track(self, path: Path) -> Path:
        self.written.append(path)
        logger.debug(f"Wrote {path.name}")
        return path

    def save_field(self, grid: FieldGrid, name: Optional[str] = None) -> Path:
        stem = name or snapshot_name(grid.component, grid.t)
        path = self._track(write_field(self.output_dir / f"{stem}.rwv", grid))
        if self.text_export:
            self._track(export_text(self.output_dir / f"{stem}.txt", grid))
        return path

    def save_table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Tab-delimited table with a header line; floats at full precision."""
        path = self.output_dir / name
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("\t".join(columns) + "\n")
            for row in rows:
                fh.write("\t".join(_cell(v) for v in row) + "\n")
        return self._track(path)

    def save_text(self, name: str, text: str) -> Path:
        path = self.output_dir / name
        path.write_text(text, encoding="utf-8")
        return self._track(path)

    def save_json(self, name: str, payload: Dict[str, Any]) -> Path:
        return self.save_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def save_yaml(self, name: str, payload: Dict[str, Any]) -> Path:
        return self.save_text(name, yaml.safe_dump(payload, sort_keys=False, default_flow_style=False))


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
