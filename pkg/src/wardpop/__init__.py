"""Ward-level population figures from gridded population estimates."""
from .errors import WardpopError
from .geometry import Point, Polygon, Rect, Ring, clip_polygon_to_rect, point_in_polygon, polygon_area
from .raster import CellIndex, Grid, cell_rect, clip_by_mask, raster_to_points, read_ascii_grid, write_ascii_grid
from .zonal import ZoneStats, aggregate_total, export_zonal_csv, zonal_stats
from .zones import Zone, ZoneAttrs, ZoneSet, parse_geojson

__version__ = "0.1.0"
