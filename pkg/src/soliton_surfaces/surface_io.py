"""
Sampling of immersion fields on grids, mesh exports and report files.

Vertices are stored as rows (x, y, c1, …, c_{N²−1}) where c_j are the
coordinates of F in the su(N) basis; faces triangulate the grid cells.
Exports are built as bytes so that they can be compared and written
atomically by :func:`write_export`.
"""

import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from soliton_surfaces import config
from soliton_surfaces.diffops import map_chunks
from soliton_surfaces.errors import ConfigError, ExportError, SurfaceSamplingError
from soliton_surfaces.matrixcore import algebra_residuals, su_basis
from soliton_surfaces.utils.app_logger import get_logger
from soliton_surfaces.utils.file_lock import write_with_lock

logger = get_logger("surface_io")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid in the (x, y) plane."""

    x_min: float = config.DEFAULT_GRID_BOUNDS[0]
    x_max: float = config.DEFAULT_GRID_BOUNDS[1]
    y_min: float = config.DEFAULT_GRID_BOUNDS[2]
    y_max: float = config.DEFAULT_GRID_BOUNDS[3]
    nx: int = config.DEFAULT_GRID_POINTS
    ny: int = config.DEFAULT_GRID_POINTS
    exclusion_radius: float = 0.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 2 or self.ny < 2:
            raise ConfigError(f"grid needs at least 2x2 points, got {self.nx}x{self.ny}", "--nx/--ny")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ConfigError("grid bounds must satisfy max > min", "--x-min/--x-max/--y-min/--y-max")
        if not np.isfinite([self.x_min, self.x_max, self.y_min, self.y_max]).all():
            raise ConfigError("grid bounds must be finite", "--x-min/--x-max/--y-min/--y-max")
        if self.exclusion_radius < 0:
            raise ConfigError("exclusion radius must be non-negative", "--exclude")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def mesh(self):
        """Point coordinates, shape (ny, nx); row-major in y then x."""
        xs = np.linspace(self.x_min, self.x_max, self.nx)
        ys = np.linspace(self.y_min, self.y_max, self.ny)
        return np.meshgrid(xs, ys, indexing="xy")

    def excluded_mask(self) -> np.ndarray:
        """Flat mask of points inside the exclusion disk around z = 0."""
        gx, gy = self.mesh()
        return np.hypot(gx, gy).ravel() < self.exclusion_radius

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x_min": float(self.x_min),
            "x_max": float(self.x_max),
            "y_min": float(self.y_min),
            "y_max": float(self.y_max),
            "nx": int(self.nx),
            "ny": int(self.ny),
            "exclusion_radius": float(self.exclusion_radius),
        }


@dataclass
class SurfaceMesh:
    """
    Attributes:
        vertices: (M, 2 + d) rows (x, y, c1, …, c_d)
        faces: (F, 3) 0-based vertex indices
        metadata: family, k, t, grid and convention flags
    """

    vertices: np.ndarray
    faces: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2:
            vertices = vertices.reshape(0, 5) if vertices.size == 0 else np.atleast_2d(vertices)
        self.vertices = vertices
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)

    @property
    def n_components(self) -> int:
        return self.vertices.shape[1] - 2

    @property
    def coordinates(self) -> np.ndarray:
        """The su(N) components only."""
        return self.vertices[:, 2:]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": self.vertices.tolist(),
            "faces": self.faces.tolist(),
            "metadata": self.metadata,
        }


def grid_faces(nx: int, ny: int) -> np.ndarray:
    """Two triangles per grid cell, vertex index j·nx + i."""
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="xy")
    a = (j * nx + i).ravel()
    b, c, d = a + 1, a + nx, a + nx + 1
    lower = np.stack([a, b, d], axis=1)
    upper = np.stack([a, d, c], axis=1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def _reindex(faces: np.ndarray, keep: np.ndarray) -> np.ndarray:
    # drop faces touching removed vertices, renumber the rest
    new_index = np.cumsum(keep) - 1
    valid = keep[faces].all(axis=1)
    return new_index[faces[valid]]


def sample_surface(field_, grid: GridSpec, t: float = config.DEFAULT_T) -> SurfaceMesh:
    """
    su(N) components of an immersion field at every grid point.

    Points inside the exclusion disk are dropped. Points where F cannot be
    evaluated or is not in su(N) are dropped and logged.

    Raises:
        SurfaceSamplingError: more than 1 % of the points failed
    """
    gx, gy = grid.mesh()
    xs, ys = gx.ravel(), gy.ravel()
    total = len(xs)
    basis = su_basis(field_.N)

    def components(xc, yc):
        F = np.asarray(field_.F.evaluate(xc, yc, t, strict=False), dtype=complex)
        finite = np.isfinite(F).all(axis=(-2, -1))
        F = np.where(finite[:, None, None], F, 0.0)
        herm, tr = algebra_residuals(F)
        ok = finite & (herm < config.ALGEBRA_TOL) & (tr < config.ALGEBRA_TOL)
        coeffs = (-0.5 * np.einsum("...ij,bji->...b", F, basis.elements)).real
        return coeffs, ok

    coeffs, ok = map_chunks(components, xs, ys)
    outside = ~grid.excluded_mask()
    failed = int(np.count_nonzero(outside & ~ok))
    if failed:
        bad = np.flatnonzero(outside & ~ok)
        logger.warning(
            "%s: %d vertices excluded (not in su(%d)), first at (%.6g, %.6g)",
            field_.F.label, failed, field_.N, xs[bad[0]], ys[bad[0]],
        )
    if failed > config.MAX_EXCLUDED_FRACTION * total:
        raise SurfaceSamplingError(failed, total)

    keep = outside & ok
    vertices = np.column_stack([xs, ys, coeffs])[keep]
    faces = _reindex(grid_faces(grid.nx, grid.ny), keep)
    metadata = {
        "family": field_.family.value,
        "k": int(field_.k),
        "N": int(field_.N),
        "t": float(t),
        "grid": grid.to_dict(),
        "excluded": int(total - np.count_nonzero(keep)),
        "epsilon": -1,
        "basis": "e" if field_.N == 2 else "i*gell-mann",
    }
    logger.info("sampled %s: %d vertices, %d faces", field_.F.label, len(vertices), len(faces))
    return SurfaceMesh(vertices, faces, metadata)


def _require_vertices(mesh: SurfaceMesh) -> None:
    if len(mesh.vertices) < 3:
        raise ExportError(f"mesh has {len(mesh.vertices)} vertices, at least 3 are required")


def export_obj(mesh: SurfaceMesh) -> bytes:
    """Wavefront OBJ: ``v c1 c2 c3`` lines then ``f i j k`` (1-based)."""
    _require_vertices(mesh)
    if mesh.n_components != 3:
        raise ExportError(f"OBJ export needs 3 components, mesh has {mesh.n_components}")
    out = io.StringIO()
    for c1, c2, c3 in mesh.coordinates:
        out.write(f"v {c1:.17g} {c2:.17g} {c3:.17g}\n")
    for i, j, k in mesh.faces + 1:
        out.write(f"f {i} {j} {k}\n")
    return out.getvalue().encode("utf-8")


def export_csv(mesh: SurfaceMesh) -> bytes:
    """CSV with header ``x,y,e1,…``, one row per vertex."""
    _require_vertices(mesh)
    columns = ["x", "y"] + [f"e{j}" for j in range(1, mesh.n_components + 1)]
    df = pd.DataFrame(mesh.vertices, columns=columns)
    return dataframe_csv(df)


def dataframe_csv(df: pd.DataFrame) -> bytes:
    """Bytes of ``df`` as CSV, full precision, LF line endings."""
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format="%.17g", lineterminator="\n")
    return buf.getvalue().encode("utf-8")


def _plain(value):
    # numpy scalars and arrays to JSON types
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # NaN and infinities are not JSON; excluded samples become null
        return float(value) if np.isfinite(value) else None
    if isinstance(value, complex):
        return {"re": _plain(value.real), "im": _plain(value.imag)}
    return value


def export_json(obj) -> bytes:
    """
    UTF-8 JSON with sorted keys of a mesh, a report or any object with
    ``to_dict()``; floats keep full precision. Non-finite floats are
    written as null, which :func:`mesh_from_json` reads back as NaN.
    """
    if isinstance(obj, SurfaceMesh):
        _require_vertices(obj)
    payload = obj.to_dict() if hasattr(obj, "to_dict") else obj
    try:
        text = json.dumps(_plain(payload), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    except (TypeError, ValueError) as e:
        raise ExportError(f"object is not serialisable: {e}") from e
    return (text + "\n").encode("utf-8")


def mesh_from_json(data: Union[bytes, str]) -> SurfaceMesh:
    """Parse the output of :func:`export_json` for a mesh."""
    try:
        payload = json.loads(data)
        return SurfaceMesh(payload["vertices"], payload["faces"], payload.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as e:
        raise ExportError(f"not a mesh document: {e}") from e


def write_export(path: Union[Path, str], data: bytes) -> None:
    """
    Write export bytes to ``path`` under an exclusive lock; ``"-"`` writes
    to standard output.

    Raises:
        ExportError: the file cannot be written
    """
    if str(path) == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        write_with_lock(path, data)
    except OSError as e:
        raise ExportError(str(e), str(path)) from e
    logger.info("wrote %d bytes to %s", len(data), path)
