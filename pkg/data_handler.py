"""
Data Handler Module

Reads and writes the portable containers: a KEY=value text header (parsed
with python-dotenv) next to a raw little-endian float64 payload with the
same basename. Series payloads are x-fastest over (i, j, k, l); velocity
payloads are three consecutive x-fastest component blocks v1, v2, v3.
"""

from pathlib import Path
from typing import Dict, Optional, Tuple, Union
import logging
import os

import numpy as np
from dotenv import dotenv_values

from config import (
    HEADER_SUFFIX, PAYLOAD_BYTE_ORDER, PAYLOAD_DTYPE, PAYLOAD_SUFFIX, SERIES_FORMAT,
    SUPPORTED_SLICE_ORDERS, VELOCITY_FORMAT
)
from core_model import ContainerFormatError, GridSpec, SliceTimedSeries, VelocityField

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Nominal time fields for velocity files read without a reference grid
NOMINAL_LEVELS = 2
NOMINAL_DELTA_T = 1.0


def container_paths(path: PathLike) -> Tuple[Path, Path]:
    """
    Header and payload paths for a container.

    Args:
        path (PathLike): Basename, header path or payload path

    Returns:
        Tuple[Path, Path]: (header path, payload path)
    """
    base = Path(path)
    if base.suffix in (HEADER_SUFFIX, PAYLOAD_SUFFIX):
        base = base.with_suffix('')
    return base.with_name(base.name + HEADER_SUFFIX), base.with_name(base.name + PAYLOAD_SUFFIX)


def read_header(path: PathLike) -> Dict[str, str]:
    """Parse a container header into a dict of strings."""
    header_path, _ = container_paths(path)
    if not header_path.exists():
        raise ContainerFormatError(f"header file {header_path} does not exist")
    values = dotenv_values(header_path)
    return {key: value for key, value in values.items() if value is not None}


def _write_header(header_path: Path, fields: Dict[str, object]) -> None:
    lines = [f"{key}={value}" for key, value in fields.items()]
    header_path.write_text("\n".join(lines) + "\n")


def _write_container(header_path: Path, payload_path: Path, fields: Dict[str, object],
                     flat: np.ndarray) -> None:
    """Payload first, then header; a failed write leaves neither file behind."""
    try:
        flat.astype('<f8').tofile(payload_path)
        _write_header(header_path, fields)
    except Exception:
        for leftover in (header_path, payload_path):
            if leftover.is_file():
                leftover.unlink()
        raise


def _field(header: Dict[str, str], name: str, kind: type):
    if name not in header:
        raise ContainerFormatError(f"header field '{name}' is missing")
    try:
        return kind(header[name])
    except ValueError:
        raise ContainerFormatError(f"header field '{name}' has invalid value '{header[name]}'")


def _check_common(header: Dict[str, str], expected_format: str) -> None:
    found = header.get('format')
    if found != expected_format:
        raise ContainerFormatError(
            f"header field 'format' is '{found}', expected '{expected_format}'"
        )
    if header.get('dtype') != PAYLOAD_DTYPE:
        raise ContainerFormatError(f"header field 'dtype' must be '{PAYLOAD_DTYPE}', got '{header.get('dtype')}'")
    if header.get('byte_order') != PAYLOAD_BYTE_ORDER:
        raise ContainerFormatError(
            f"header field 'byte_order' must be '{PAYLOAD_BYTE_ORDER}', got '{header.get('byte_order')}'"
        )


def _axis_counts(header: Dict[str, str], names) -> Tuple[int, ...]:
    counts = []
    for name in names:
        value = _field(header, name, int)
        if value < 2:
            raise ContainerFormatError(f"header field '{name}' must be >= 2, got {value}")
        counts.append(value)
    return tuple(counts)


def _read_payload(payload_path: Path, count: int) -> np.ndarray:
    if not payload_path.exists():
        raise ContainerFormatError(f"payload file {payload_path} does not exist")
    expected = 8 * count
    actual = os.path.getsize(payload_path)
    if actual != expected:
        raise ContainerFormatError(
            f"payload size mismatch in {payload_path}: expected {expected} bytes, found {actual}"
        )
    values = np.fromfile(payload_path, dtype='<f8', count=count).astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise ContainerFormatError(f"payload {payload_path} contains non-finite values")
    return values


def write_series(series: SliceTimedSeries, path: PathLike) -> None:
    """
    Write a slice-timed series container.

    Args:
        series (SliceTimedSeries): Data to write
        path (PathLike): Basename (or header/payload path)
    """
    header_path, payload_path = container_paths(path)
    grid = series.grid
    try:
        _write_container(header_path, payload_path, {
            'format': SERIES_FORMAT,
            'nx': grid.I + 1,
            'ny': grid.J + 1,
            'nz': grid.K + 1,
            'nt': grid.L + 1,
            'delta_mm': repr(float(grid.delta)),
            'delta_t_s': repr(float(grid.delta_t)),
            'slice_order': 'ascending',
            'dtype': PAYLOAD_DTYPE,
            'byte_order': PAYLOAD_BYTE_ORDER,
        }, series.values.ravel(order='F'))
        logger.info(f"Wrote series {grid.series_shape} to {payload_path}")
    except Exception as e:
        logger.error(f"Error writing series to {path}: {e}")
        raise


def read_series(path: PathLike) -> SliceTimedSeries:
    """
    Read a slice-timed series container.

    The header is validated completely before the payload is touched.

    Raises:
        ContainerFormatError: On unknown format, unsupported slice order,
            invalid header fields, size mismatch or non-finite payload
    """
    header_path, payload_path = container_paths(path)
    header = read_header(header_path)
    _check_common(header, SERIES_FORMAT)

    slice_order = header.get('slice_order')
    if slice_order not in SUPPORTED_SLICE_ORDERS:
        raise ContainerFormatError(
            f"header field 'slice_order' is '{slice_order}', supported: {', '.join(SUPPORTED_SLICE_ORDERS)}"
        )
    nx, ny, nz = _axis_counts(header, ('nx', 'ny', 'nz'))
    nt = _field(header, 'nt', int)
    if nt < 3:
        raise ContainerFormatError(f"header field 'nt' must be >= 3, got {nt}")
    grid = _grid_from_header(header, nx, ny, nz, nt - 1, _field(header, 'delta_t_s', float))

    values = _read_payload(payload_path, nx * ny * nz * nt)
    logger.info(f"Read series {grid.series_shape} from {payload_path}")
    return SliceTimedSeries(grid, values.reshape(grid.series_shape, order='F'))


def _grid_from_header(header: Dict[str, str], nx: int, ny: int, nz: int, levels: int,
                      delta_t: float) -> GridSpec:
    delta = _field(header, 'delta_mm', float)
    try:
        return GridSpec(I=nx - 1, J=ny - 1, K=nz - 1, L=levels, delta=delta, delta_t=delta_t)
    except ValueError as e:
        raise ContainerFormatError(f"header describes an invalid grid: {e}")


def write_velocity(v: VelocityField, path: PathLike) -> None:
    """Write a velocity container (component blocks v1, v2, v3)."""
    header_path, payload_path = container_paths(path)
    grid = v.grid
    try:
        _write_container(header_path, payload_path, {
            'format': VELOCITY_FORMAT,
            'nx': grid.I + 1,
            'ny': grid.J + 1,
            'nz': grid.K + 1,
            'delta_mm': repr(float(grid.delta)),
            'dtype': PAYLOAD_DTYPE,
            'byte_order': PAYLOAD_BYTE_ORDER,
        }, v.ravel())
        logger.info(f"Wrote velocity field {grid.point_shape} to {payload_path}")
    except Exception as e:
        logger.error(f"Error writing velocity field to {path}: {e}")
        raise


def read_velocity(path: PathLike, grid: Optional[GridSpec] = None) -> VelocityField:
    """
    Read a velocity container.

    Args:
        path (PathLike): Basename (or header/payload path)
        grid (GridSpec, optional): Reference grid whose spatial part must match
            the header; its time fields are attached to the result. Without it a
            grid with nominal time fields is used.

    Returns:
        VelocityField: The decoded field
    """
    header_path, payload_path = container_paths(path)
    header = read_header(header_path)
    _check_common(header, VELOCITY_FORMAT)
    nx, ny, nz = _axis_counts(header, ('nx', 'ny', 'nz'))
    file_grid = _grid_from_header(header, nx, ny, nz, NOMINAL_LEVELS, NOMINAL_DELTA_T)

    if grid is not None:
        if not grid.same_space(file_grid):
            raise ContainerFormatError(
                f"velocity header grid {file_grid.point_shape} (delta={file_grid.delta}) does not "
                f"match reference grid {grid.point_shape} (delta={grid.delta})"
            )
        file_grid = grid

    values = _read_payload(payload_path, 3 * nx * ny * nz)
    logger.info(f"Read velocity field {file_grid.point_shape} from {payload_path}")
    return VelocityField.from_flat(file_grid, values)


class DataHandler:
    """
    Container access relative to one working directory.

    Basenames handed to the methods are resolved against `root`; absolute
    paths are used as given.
    """

    def __init__(self, root: Optional[PathLike] = None):
        """
        Initialize the DataHandler.

        Args:
            root (PathLike, optional): Directory containers are resolved against
                (default: current directory)
        """
        self.root = Path(root) if root is not None else Path.cwd()
        if not self.root.is_dir():
            raise ContainerFormatError(f"container directory {self.root} does not exist")
        logger.info(f"Initialized DataHandler in {self.root}")

    def resolve(self, path: PathLike) -> Path:
        return self.root / Path(path)

    def header(self, path: PathLike) -> Dict[str, str]:
        return read_header(self.resolve(path))

    def load_series(self, path: PathLike) -> SliceTimedSeries:
        return read_series(self.resolve(path))

    def save_series(self, series: SliceTimedSeries, path: PathLike) -> Path:
        """Write a series container and return its header path."""
        write_series(series, self.resolve(path))
        return container_paths(self.resolve(path))[0]

    def load_velocity(self, path: PathLike, grid: Optional[GridSpec] = None) -> VelocityField:
        return read_velocity(self.resolve(path), grid)

    def save_velocity(self, v: VelocityField, path: PathLike) -> Path:
        """Write a velocity container and return its header path."""
        write_velocity(v, self.resolve(path))
        return container_paths(self.resolve(path))[0]
