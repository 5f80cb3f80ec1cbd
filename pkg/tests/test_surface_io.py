import json

import numpy as np
import pytest
import sympy as sp

from soliton_surfaces.diffops import X, FieldSampler
from soliton_surfaces.errors import ConfigError, ExportError, SurfaceSamplingError
from soliton_surfaces.immersion import immersion_cd, immersion_g, immersion_st
from soliton_surfaces.linear_spectral import Wavefunction
from soliton_surfaces.surface_io import (
    GridSpec,
    SurfaceMesh,
    export_csv,
    export_json,
    export_obj,
    grid_faces,
    mesh_from_json,
    sample_surface,
    write_export,
)


@pytest.fixture(scope="module")
def mesh3(cp1):
    return sample_surface(immersion_st(cp1, 0), GridSpec(-1, 1, -1, 1, 3, 3), t=1.0)


def test_grid_faces():
    faces = grid_faces(3, 3)
    assert faces.shape == (8, 3)
    assert faces[:2].tolist() == [[0, 1, 4], [0, 4, 3]]
    assert faces.max() == 8


def test_small_mesh(mesh3):
    assert mesh3.vertices.shape == (9, 5)
    assert mesh3.faces.shape == (8, 3)
    assert mesh3.n_components == 3
    assert mesh3.metadata["family"] == "st"
    assert mesh3.metadata["excluded"] == 0
    assert mesh3.metadata["t"] == 1.0


def test_exclusion_disk(cp1):
    grid = GridSpec(-1, 1, -1, 1, 3, 3, exclusion_radius=0.5)
    mesh = sample_surface(immersion_g(cp1, 0), grid, t=0.5)
    assert len(mesh.vertices) == 8
    assert mesh.metadata["excluded"] == 1
    assert mesh.faces.max() < 8
    assert not np.any(np.all(mesh.vertices[:, :2] == 0.0, axis=1))


def test_too_many_failures():
    pole = FieldSampler.from_expr(sp.Matrix([[sp.I / X, 0], [0, -sp.I / X]]), "pole")
    field_ = immersion_cd(Wavefunction.identity(2), pole)
    with pytest.raises(SurfaceSamplingError) as exc:
        sample_surface(field_, GridSpec(-1, 1, -1, 1, 3, 3))
    assert exc.value.exit_code == 3


def test_obj_export(mesh3):
    data = export_obj(mesh3)
    lines = data.decode().splitlines()
    assert sum(line.startswith("v ") for line in lines) == 9
    assert sum(line.startswith("f ") for line in lines) == 8
    assert "f 1 2 5" in lines
    assert export_obj(mesh3) == data


@pytest.mark.slow
def test_obj_needs_three_components(cp2):
    mesh = sample_surface(immersion_st(cp2, 0), GridSpec(-1, 1, -1, 1, 3, 3), t=1.0)
    assert mesh.n_components == 8
    with pytest.raises(ExportError):
        export_obj(mesh)


def test_csv_export(mesh3):
    text = export_csv(mesh3).decode()
    lines = text.splitlines()
    assert lines[0] == "x,y,e1,e2,e3"
    assert len(lines) == 10
    assert "\r" not in text
    first = [float(v) for v in lines[1].split(",")]
    assert first == mesh3.vertices[0].tolist()


def test_json_round_trip(mesh3):
    data = export_json(mesh3)
    assert data.endswith(b"\n")
    back = mesh_from_json(data)
    assert np.array_equal(back.vertices, mesh3.vertices)
    assert np.array_equal(back.faces, mesh3.faces)
    assert back.metadata == json.loads(data)["metadata"]


def test_json_plain_values():
    payload = json.loads(export_json({"b": np.float64(0.5), "a": [np.int64(2), 1 + 2j], "c": np.bool_(True)}))
    assert payload == {"a": [2, {"re": 1.0, "im": 2.0}], "b": 0.5, "c": True}


def test_json_non_finite_values_are_null():
    data = export_json({"chi": float("nan"), "max": np.float64(np.inf), "z": complex(1.0, -np.inf)})
    assert b"NaN" not in data and b"Infinity" not in data
    assert json.loads(data) == {"chi": None, "max": None, "z": {"re": 1.0, "im": None}}
    vertices = np.zeros((3, 5))
    vertices[0, 2] = np.nan
    vertices[0, 3] = 1.0
    mesh = SurfaceMesh(vertices, [[0, 1, 2]])
    back = mesh_from_json(export_json(mesh))
    assert np.isnan(back.vertices[0, 2])
    assert back.vertices[0, 3] == 1.0


def test_not_a_mesh_document():
    with pytest.raises(ExportError):
        mesh_from_json(b'{"faces": []}')


def test_empty_mesh_is_rejected():
    empty = SurfaceMesh(np.empty((0, 5)), np.empty((0, 3)))
    for export in (export_obj, export_csv, export_json):
        with pytest.raises(ExportError):
            export(empty)


def test_write_export(tmp_path, mesh3):
    target = tmp_path / "out" / "mesh.obj"
    data = export_obj(mesh3)
    write_export(target, data)
    assert target.read_bytes() == data
    write_export(target, b"v 0 0 0\n")
    assert target.read_bytes() == b"v 0 0 0\n"


def test_write_export_stdout(capsysbinary):
    write_export("-", b"hello\n")
    assert capsysbinary.readouterr().out == b"hello\n"


def test_write_export_failure(tmp_path):
    target = tmp_path / "taken"
    target.mkdir()
    with pytest.raises(ExportError) as exc:
        write_export(target, b"data")
    assert exc.value.exit_code == 4


@pytest.mark.parametrize(
    "kwargs",
    [
        {"nx": 1},
        {"ny": 2.5},
        {"x_min": 1.0, "x_max": 0.0},
        {"y_max": float("inf")},
        {"exclusion_radius": -0.1},
    ],
)
def test_grid_validation(kwargs):
    with pytest.raises(ConfigError):
        GridSpec(**kwargs)


def test_grid_mesh_order():
    gx, gy = GridSpec(0, 2, 0, 1, 3, 2).mesh()
    assert gx.ravel().tolist() == [0, 1, 2, 0, 1, 2]
    assert gy.ravel().tolist() == [0, 0, 0, 1, 1, 1]
