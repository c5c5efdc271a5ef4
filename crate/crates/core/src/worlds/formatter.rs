//! Grid aggregation response format.

use std::collections::BTreeMap;

use crate::error::{Error, HostError};
use crate::interpreter::Interpreter;
use crate::query::ResultTable;
use crate::value::Value;

fn pair(v: &Value, what: &str) -> Result<[f64; 2], HostError> {
    match v.as_list() {
        Some([a, b]) => match (a.as_f64(), b.as_f64()) {
            (Some(a), Some(b)) => Ok([a, b]),
            _ => Err(HostError::new(format!("{what} must be two numbers, got {v}"))),
        },
        _ => Err(HostError::new(format!("{what} must be two numbers, got {v}"))),
    }
}

/// Sums the first cell of each row into the grid cell holding the row's last
/// two cells (x, y). Rows outside the grid are dropped.
pub fn grid(table: &ResultTable, origin: [f64; 2], size: [f64; 2], res: f64) -> Result<Value, HostError> {
    if !(res > 0.0) || size.iter().any(|s| !(*s >= 0.0)) {
        return Err(HostError::new("grid size and resolution must be positive"));
    }
    let width = (size[0] / res).round() as usize;
    let height = (size[1] / res).round() as usize;
    let mut data = vec![0.0; width * height];
    for (i, row) in table.rows.iter().enumerate() {
        let cell = |k: usize| {
            row[k]
                .as_f64()
                .ok_or_else(|| HostError::new(format!("row {i}: cell {k} is not numeric: {}", row[k])))
        };
        if row.len() < 3 {
            return Err(HostError::new(format!("row {i}: expected [value, ..., x, y], got {} cells", row.len())));
        }
        let (v, x, y) = (cell(0)?, cell(row.len() - 2)?, cell(row.len() - 1)?);
        let cx = ((x - origin[0]) / res).floor();
        let cy = ((y - origin[1]) / res).floor();
        if cx >= 0.0 && cy >= 0.0 && (cx as usize) < width && (cy as usize) < height {
            data[cy as usize * width + cx as usize] += v;
        }
    }
    let out: BTreeMap<String, Value> = [
        ("width".to_string(), Value::Int(width as i64)),
        ("height".to_string(), Value::Int(height as i64)),
        ("data".to_string(), Value::list(data.into_iter().map(Value::Float))),
    ]
    .into();
    Ok(Value::Dict(out))
}

/// `AS grid(origin, size, resolution)`.
fn grid_format(table: &ResultTable, args: &[Value]) -> Result<Value, HostError> {
    let [origin, size, res] = args else {
        return Err(HostError::new("grid expects (origin, [width, height], resolution)"));
    };
    let res = res.as_f64().ok_or_else(|| HostError::new("resolution must be a number"))?;
    grid(table, pair(origin, "origin")?, pair(size, "size")?, res)
}

/// `AS plane('XY', origin, [width, height, resolution], blur)`; only the XY
/// plane is supported and the blur argument is ignored.
fn plane_format(table: &ResultTable, args: &[Value]) -> Result<Value, HostError> {
    let (plane, origin, dims) = match args {
        [plane, origin, dims] | [plane, origin, dims, _] => (plane, origin, dims),
        _ => return Err(HostError::new("plane expects (plane, origin, [width, height, resolution], blur?)")),
    };
    if plane.as_str() != Some("XY") {
        return Err(HostError::new(format!("unsupported plane {plane}")));
    }
    let dims = dims
        .as_list()
        .and_then(|d| d.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .filter(|d| d.len() == 3)
        .ok_or_else(|| HostError::new("plane dimensions must be [width, height, resolution]"))?;
    grid(table, pair(origin, "origin")?, [dims[0], dims[1]], dims[2])
}

pub fn attach(interp: &mut Interpreter) -> Result<(), Error> {
    interp.add_formatter("grid", grid_format)?;
    interp.add_formatter("plane", plane_format)
}
