use crate::error::{Error, Result};
use crate::geometry::{catalog, Point, Shape, ShapeKind};
use crate::web::OperatorKind;
use serde_json::{Map, Value};
use std::path::Path;

/// Resolves a shape argument: a catalog name (optionally `catalog:name`),
/// a JSON object, an inline `key=value;...` list, or a file holding either
/// of the last two.
pub fn parse_shape(spec: &str) -> Result<Shape> {
    let spec = spec.trim();
    let name = spec.strip_prefix("catalog:").unwrap_or(spec);
    if let Some(s) = catalog::by_name(name) {
        return Ok(s);
    }
    if spec.starts_with("catalog:") {
        return Err(Error::Argument(format!("no catalog shape named {name:?}")));
    }
    let path = Path::new(spec);
    if !spec.contains('=') && !spec.starts_with('{') {
        if !path.is_file() {
            return Err(Error::Argument(format!("{spec:?} is neither a catalog shape nor a file")));
        }
        return parse_shape_text(&std::fs::read_to_string(path)?);
    }
    parse_shape_text(spec)
}

/// Parses a JSON object or an inline `key=value;...` shape description.
pub fn parse_shape_text(text: &str) -> Result<Shape> {
    let text = text.trim();
    let value = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("shape JSON: {e}")))?
    } else {
        inline_to_json(text)?
    };
    let kind: ShapeKind = serde_json::from_value(value).map_err(|e| Error::Parse(format!("shape: {e}")))?;
    Shape::new(kind)
}

/// `kind=stadium; p1=-2,0; p2=2,0; b=1`. Points are `x,y`; point lists
/// separate points with `/`.
fn inline_to_json(text: &str) -> Result<Value> {
    let mut map = Map::new();
    for item in text.split([';', '\n']).map(str::trim).filter(|s| !s.is_empty() && !s.starts_with('#')) {
        let (key, val) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
        let (key, val) = (key.trim(), val.trim());
        let json = if key == "kind" {
            Value::String(val.to_ascii_lowercase())
        } else if val.contains('/') {
            Value::Array(val.split('/').map(point_json).collect::<Result<_>>()?)
        } else if val.contains(',') {
            point_json(val)?
        } else {
            number_json(val)?
        };
        if map.insert(key.to_string(), json).is_some() {
            return Err(Error::Parse(format!("duplicate key {key:?}")));
        }
    }
    Ok(Value::Object(map))
}

fn number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn number_json(s: &str) -> Result<Value> {
    serde_json::Number::from_f64(number(s)?)
        .map(Value::Number)
        .ok_or_else(|| Error::Parse(format!("non-finite number {s:?}")))
}

pub fn parse_point(s: &str) -> Result<Point> {
    let (x, y) = s.split_once(',').ok_or_else(|| Error::Parse(format!("expected x,y, got {s:?}")))?;
    Ok(Point::new(number(x)?, number(y)?))
}

fn point_json(s: &str) -> Result<Value> {
    let p = parse_point(s)?;
    Ok(serde_json::json!({ "x": p.x, "y": p.y }))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(number).collect()
}

pub fn parse_ops(s: &str) -> Result<Vec<OperatorKind>> {
    let mut ops = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let op = t.parse::<OperatorKind>()?;
        if !ops.contains(&op) {
            ops.push(op);
        }
    }
    if ops.is_empty() {
        return Err(Error::Argument("no operator given".into()));
    }
    Ok(ops)
}
