import json

import numpy as np
import pytest

from wardpop.raster import Grid, save_grid

BACKENDS = ["numba", "numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "numpy":
        monkeypatch.setenv("WARDPOP_DISABLE_NUMBA", "1")
    else:
        monkeypatch.delenv("WARDPOP_DISABLE_NUMBA", raising=False)
    return request.param


def square(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


def feature(name, rings, lga="25020"):
    return {
        "type": "Feature",
        "properties": {
            "ward_name": name,
            "lga_code": lga,
            "lga_name": "Test LGA",
            "state_code": "TS",
            "state_name": "Test",
        },
        "geometry": {"type": "Polygon", "coordinates": rings},
    }


@pytest.fixture
def small_grid():
    """10x10 grid, unit cells, origin (0, 0), one nodata cell."""
    vals = np.arange(100, dtype=np.float64).reshape(10, 10) + 1.0
    vals[0, 0] = -9999.0
    return Grid(vals, 0.0, 0.0, 1.0, -9999.0)


@pytest.fixture
def quadrant_wards():
    """Four wards tiling the 10x10 extent, plus one triangle straddling cells."""
    return {
        "type": "FeatureCollection",
        "features": [
            feature("South West", [square(0, 0, 5, 5)]),
            feature("South East", [square(5, 0, 10, 5)]),
            feature("North West", [square(0, 5, 5, 10)]),
            feature("North East", [square(5, 5, 10, 10)]),
        ],
    }


@pytest.fixture
def fixture_files(tmp_path, small_grid, quadrant_wards):
    raster = tmp_path / "pop.asc"
    save_grid(small_grid, raster)
    zones = tmp_path / "wards.geojson"
    zones.write_text(json.dumps(quadrant_wards))
    return raster, zones
