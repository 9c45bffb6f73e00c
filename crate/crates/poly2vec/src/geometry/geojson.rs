//! GeoJSON (RFC 7946) reader/writer for the four supported geometry objects.
//!
//! Positions must be exactly [x, y]; Feature wrappers and GeometryCollection
//! are rejected as unsupported. serde_json prints f64 with shortest
//! round-trip formatting, so write→parse is exact.

use super::{Geometry, GeometryError, Point2, Polygon};
use serde_json::{json, Value};

pub(super) fn parse(text: &str) -> Result<Geometry, GeometryError> {
    let v: Value = serde_json::from_str(text).map_err(|e| GeometryError::Parse {
        pos: e.column(),
        msg: e.to_string(),
    })?;
    from_value(&v)
}

pub(super) fn from_value(v: &Value) -> Result<Geometry, GeometryError> {
    let obj = v
        .as_object()
        .ok_or_else(|| GeometryError::Parse { pos: 0, msg: "expected a JSON object".into() })?;
    let tag = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| GeometryError::Parse { pos: 0, msg: "missing `type`".into() })?;
    let coords = || {
        obj.get("coordinates")
            .ok_or_else(|| GeometryError::Parse { pos: 0, msg: "missing `coordinates`".into() })
    };
    match tag {
        "Point" => Ok(Geometry::Point(position(coords()?)?)),
        "LineString" => Ok(Geometry::Polyline(positions(coords()?)?)),
        "Polygon" => Ok(Geometry::Polygon(polygon(coords()?)?)),
        "MultiPolygon" => {
            let arr = as_array(coords()?)?;
            let pgs = arr.iter().map(polygon).collect::<Result<Vec<_>, _>>()?;
            Ok(Geometry::MultiPolygon(pgs))
        }
        other => Err(GeometryError::Unsupported(other.to_string())),
    }
}

fn as_array(v: &Value) -> Result<&Vec<Value>, GeometryError> {
    v.as_array()
        .ok_or_else(|| GeometryError::Parse { pos: 0, msg: "expected a coordinate array".into() })
}

fn position(v: &Value) -> Result<Point2, GeometryError> {
    let arr = as_array(v)?;
    if arr.len() != 2 {
        return Err(GeometryError::Validation(format!(
            "expected a 2D position, got {} elements",
            arr.len()
        )));
    }
    let num = |x: &Value| {
        x.as_f64()
            .ok_or_else(|| GeometryError::Parse { pos: 0, msg: "coordinate is not a number".into() })
    };
    Ok(Point2::new(num(&arr[0])?, num(&arr[1])?))
}

fn positions(v: &Value) -> Result<Vec<Point2>, GeometryError> {
    as_array(v)?.iter().map(position).collect()
}

fn polygon(v: &Value) -> Result<Polygon, GeometryError> {
    let rings: Vec<Vec<Point2>> =
        as_array(v)?.iter().map(positions).collect::<Result<_, _>>()?;
    let mut it = rings.into_iter();
    let exterior = it
        .next()
        .ok_or_else(|| GeometryError::Validation("polygon with no rings".into()))?;
    Ok(Polygon { exterior, holes: it.collect() })
}

fn pos_json(p: &Point2) -> Value {
    json!([p.x, p.y])
}

fn ring_json(r: &[Point2]) -> Value {
    Value::Array(r.iter().map(pos_json).collect())
}

fn rings_json(pg: &Polygon) -> Value {
    let mut rings = vec![ring_json(&pg.exterior)];
    rings.extend(pg.holes.iter().map(|h| ring_json(h)));
    Value::Array(rings)
}

pub(super) fn write(g: &Geometry) -> Value {
    match g {
        Geometry::Point(p) => json!({"type": "Point", "coordinates": pos_json(p)}),
        Geometry::Polyline(pts) => json!({
            "type": "LineString",
            "coordinates": Value::Array(pts.iter().map(pos_json).collect()),
        }),
        Geometry::Polygon(pg) => json!({"type": "Polygon", "coordinates": rings_json(pg)}),
        Geometry::MultiPolygon(pgs) => json!({
            "type": "MultiPolygon",
            "coordinates": Value::Array(pgs.iter().map(rings_json).collect()),
        }),
    }
}
