use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FieldFormat;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};

/// Axis names in storage order `x^1..x^n, y^1..y^n`.
pub fn axis_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).chain((1..=dim).map(|i| format!("y{i}"))).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonField {
    name: String,
    dim: usize,
    samples: usize,
    /// Coordinate order; the last axis varies fastest.
    axes: Vec<String>,
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

/// Writes every sample row-major. CSV starts with `# name dim=n samples=N order=x1,..,yn`,
/// then a column header of the coordinates followed by `re` (and `im` for complex fields).
pub fn emit_field(field: &ScalarField, name: &str, path: &Path, format: FieldFormat) -> Result<()> {
    let grid = field.grid();
    let real = field.is_real();
    let text = match format {
        FieldFormat::Csv => {
            let axes = axis_names(grid.dim());
            let mut s = format!("# {name} dim={} samples={} order={}\n", grid.dim(), grid.samples(), axes.join(","));
            s.push_str(&axes.join(","));
            s.push_str(if real { ",re\n" } else { ",re,im\n" });
            grid.for_each_point(|idx, x| {
                for c in x {
                    let _ = write!(s, "{c},");
                }
                let v = field.get(idx);
                let _ = if real { writeln!(s, "{:e}", v.re) } else { writeln!(s, "{:e},{:e}", v.re, v.im) };
            });
            s
        }
        FieldFormat::Json => {
            let out = JsonField {
                name: name.into(),
                dim: grid.dim(),
                samples: grid.samples(),
                axes: axis_names(grid.dim()),
                re: field.values().iter().map(|v| v.re).collect(),
                im: (!real).then(|| field.values().iter().map(|v| v.im).collect()),
            };
            serde_json::to_string(&out)?
        }
    };
    fs::write(path, text)?;
    Ok(())
}

/// Reads a file written by [`emit_field`].
pub fn read_field(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    if text.starts_with('#') {
        let mut lines = text.lines();
        let head = lines.next().unwrap_or_default();
        let get = |key: &str| -> Result<usize> {
            head.split_whitespace()
                .find_map(|t| t.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Config(format!("field header lacks {key}")))
        };
        let grid = TorusGrid::new(get("dim=")?, get("samples=")?)?;
        let columns = lines.next().unwrap_or_default().split(',').count();
        let d = grid.real_dim();
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let cells: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Config(format!("bad field value {c:?}: {e}"))))
                .collect::<Result<_>>()?;
            if cells.len() != columns {
                return Err(Error::Config(format!("field row has {} columns, expected {columns}", cells.len())));
            }
            let im = if columns == d + 2 { cells[d + 1] } else { 0.0 };
            values.push(num_complex::Complex64::new(cells[d], im));
        }
        ScalarField::from_values(grid, values)
    } else {
        let f: JsonField = serde_json::from_str(&text)?;
        let grid = TorusGrid::new(f.dim, f.samples)?;
        let values = match f.im {
            Some(im) if im.len() == f.re.len() => {
                f.re.iter().zip(&im).map(|(a, b)| num_complex::Complex64::new(*a, *b)).collect()
            }
            Some(_) => return Err(Error::Config("field re/im lengths differ".into())),
            None => f.re.iter().map(|a| num_complex::Complex64::new(*a, 0.0)).collect(),
        };
        ScalarField::from_values(grid, values)
    }
}

/// The 2D slice through the origin along axes `a, b` as CSV rows `a,b,value`.
pub fn emit_slice(field: &ScalarField, axes: [usize; 2], path: &Path) -> Result<()> {
    let grid = field.grid();
    let names = axis_names(grid.dim());
    if axes[0] == axes[1] || axes.iter().any(|&a| a >= grid.real_dim()) {
        return Err(Error::AxisOutOfRange { axis: axes[0].max(axes[1]), dim: grid.dim() });
    }
    let mut s = format!("{},{},re\n", names[axes[0]], names[axes[1]]);
    let h = grid.spacing();
    let mut multi = vec![0usize; grid.real_dim()];
    for i in 0..grid.samples() {
        for j in 0..grid.samples() {
            multi[axes[0]] = i;
            multi[axes[1]] = j;
            let _ = writeln!(s, "{},{},{:e}", i as f64 * h, j as f64 * h, field.re(grid.flat_index(&multi)));
        }
    }
    fs::write(path, s)?;
    Ok(())
}
