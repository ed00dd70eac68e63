//! Plot-ready trace CSVs and raw field dumps.
//!
//! Fields are written as row-major little-endian f64 (node-major,
//! component-minor, matching the in-memory layout) next to a small JSON
//! header carrying the grid geometry.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::{Grid, SolutionField, ViolationTrace};

/// Header written beside every binary field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    /// Points per axis.
    pub dims: Vec<usize>,
    /// Grid spacing per axis.
    pub dx: Vec<f64>,
    /// Box length per axis.
    pub lengths: Vec<f64>,
    /// Time step of the run that produced the field (0 when not applicable).
    pub dt: f64,
    pub m: usize,
    pub n: usize,
    /// Time stamp of the field.
    pub time: f64,
}

pub fn write_trace_csv(path: &Path, trace: &ViolationTrace) -> Result<()> {
    let mut out = String::from("t,max_violation\n");
    for (t, v) in trace.times.iter().zip(&trace.max_violation) {
        out.push_str(&format!("{t},{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_field_binary(
    bin_path: &Path,
    json_path: &Path,
    field: &SolutionField,
    dt: f64,
) -> Result<()> {
    let header = FieldHeader {
        dims: field.grid.points.clone(),
        dx: (0..field.grid.dim()).map(|a| field.grid.spacing(a)).collect(),
        lengths: field.grid.lengths.clone(),
        dt,
        m: field.m,
        n: field.grid.dim(),
        time: field.time,
    };
    let json = serde_json::to_string_pretty(&header)
        .map_err(|e| Error::Io(format!("header serialization failed: {e}")))?;
    fs::write(json_path, json)?;

    let mut file = fs::File::create(bin_path)?;
    let mut bytes = Vec::with_capacity(field.as_slice().len() * 8);
    for v in field.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&bytes)?;
    Ok(())
}

pub fn read_field_binary(bin_path: &Path, json_path: &Path) -> Result<SolutionField> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(json_path)?)
        .map_err(|e| Error::Io(format!("header parse failed: {e}")))?;
    let bytes = fs::read(bin_path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Io("binary field has a truncated f64".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let grid = Grid::new(header.lengths.clone(), header.dims.clone())?;
    let expected = grid.node_count() * header.m;
    if values.len() != expected {
        return Err(Error::Io(format!(
            "binary field has {} values, header implies {expected}",
            values.len()
        )));
    }
    let mut field = SolutionField::constant(grid, &nalgebra::DVector::zeros(header.m));
    field.data.copy_from_slice(&values);
    field.time = header.time;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn trace_csv_format() {
        let dir = std::env::temp_dir().join("parinv_export_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trace.csv");
        let trace = ViolationTrace {
            times: vec![0.0, 0.5],
            max_violation: vec![-1.0, -0.25],
        };
        write_trace_csv(&path, &trace).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,max_violation\n0,-1\n0.5,-0.25\n");
    }

    #[test]
    fn field_binary_roundtrip() {
        let dir = std::env::temp_dir().join("parinv_export_test");
        fs::create_dir_all(&dir).unwrap();
        let grid = Grid::new(vec![1.0, 2.0], vec![4, 6]).unwrap();
        let field = SolutionField::from_fn(grid, 3, |x| {
            DVector::from_row_slice(&[x[0], x[1] * 2.0, x[0] - x[1]])
        });
        let bin = dir.join("field.bin");
        let json = dir.join("field.json");
        write_field_binary(&bin, &json, &field, 1e-3).unwrap();
        let back = read_field_binary(&bin, &json).unwrap();
        assert_eq!(back.as_slice(), field.as_slice());
        assert_eq!(back.grid, field.grid);
    }
}
