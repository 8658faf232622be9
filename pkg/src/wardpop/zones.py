"""Administrative zones (wards) and GeoJSON FeatureCollection ingest."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoFailure, ParseError
from .geometry import Polygon, Ring
from .raster import UNSPECIFIED_CRS

ATTR_FIELDS = ("ward_name", "lga_code", "lga_name", "state_code", "state_name")


@dataclass(frozen=True)
class ZoneAttrs:
    ward_name: str
    lga_code: str = ""
    lga_name: str = ""
    state_code: str = ""
    state_name: str = ""

    def __post_init__(self):
        if not self.ward_name:
            raise ValueError("ward_name must be non-empty")

    def as_row(self):
        return [getattr(self, f) for f in ATTR_FIELDS]


@dataclass(frozen=True)
class Zone:
    parts: tuple
    attrs: ZoneAttrs

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("zone needs at least one polygon part")
        object.__setattr__(self, "parts", parts)
        if isinstance(self.attrs, str):
            object.__setattr__(self, "attrs", ZoneAttrs(self.attrs))

    @property
    def name(self):
        return self.attrs.ward_name


@dataclass(frozen=True)
class ZoneSet:
    zones: tuple
    crs_tag: str = UNSPECIFIED_CRS

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))

    def __len__(self):
        return len(self.zones)

    def __iter__(self):
        return iter(self.zones)

    def __getitem__(self, i):
        return self.zones[i]


def _ring(coords, where):
    try:
        return Ring(coords)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{where}: bad ring: {exc}") from None


def _polygon(rings, where):
    if not isinstance(rings, list) or not rings:
        raise ParseError(f"{where}: polygon has no rings")
    try:
        return Polygon(_ring(rings[0], where), tuple(_ring(r, where) for r in rings[1:]))
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _crs_from_geojson(doc):
    crs = doc.get("crs")
    if isinstance(crs, dict):
        name = (crs.get("properties") or {}).get("name")
        if name:
            return str(name)
    return UNSPECIFIED_CRS


def parse_geojson(doc) -> ZoneSet:
    """Build a ZoneSet from a FeatureCollection (dict or JSON text).

    Polygon and MultiPolygon geometries are accepted. The legacy ``crs``
    member, when present, supplies the CRS tag.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError("expected a GeoJSON FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise ParseError("FeatureCollection has no features list")
    zones = []
    for i, feat in enumerate(features):
        where = f"feature {i}"
        geom = (feat or {}).get("geometry")
        if not isinstance(geom, dict):
            raise ParseError(f"{where}: missing geometry")
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            parts = [_polygon(coords, where)]
        elif gtype == "MultiPolygon":
            if not isinstance(coords, list) or not coords:
                raise ParseError(f"{where}: empty MultiPolygon")
            parts = [_polygon(c, where) for c in coords]
        else:
            raise ParseError(f"{where}: unsupported geometry type {gtype!r}")
        props = feat.get("properties") or {}
        ward = props.get("ward_name")
        if ward is None or str(ward) == "":
            raise ParseError(f"{where}: missing ward_name property")
        attrs = ZoneAttrs(*(("" if props.get(f) is None else str(props.get(f))) for f in ATTR_FIELDS))
        zones.append(Zone(tuple(parts), attrs))
    return ZoneSet(tuple(zones), _crs_from_geojson(doc))


def load_zones(path) -> ZoneSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read zones {path}: {exc.strerror or exc}") from None
    return parse_geojson(text)


def to_geojson(zs: ZoneSet) -> dict:
    """FeatureCollection dict for a ZoneSet (rings closed, as GeoJSON requires)."""

    def ring(r):
        pts = r.coords.tolist()
        return pts + [pts[0]]

    feats = []
    for z in zs.zones:
        polys = [[ring(p.exterior)] + [ring(h) for h in p.holes] for p in z.parts]
        geom = (
            {"type": "Polygon", "coordinates": polys[0]}
            if len(polys) == 1
            else {"type": "MultiPolygon", "coordinates": polys}
        )
        props = dict(zip(ATTR_FIELDS, z.attrs.as_row()))
        feats.append({"type": "Feature", "properties": props, "geometry": geom})
    doc = {"type": "FeatureCollection", "features": feats}
    if zs.crs_tag != UNSPECIFIED_CRS:
        doc["crs"] = {"type": "name", "properties": {"name": zs.crs_tag}}
    return doc
