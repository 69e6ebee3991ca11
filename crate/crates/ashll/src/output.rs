//! Plain-file emitters: legacy ASCII VTK structured grids and RFC-4180
//! CSV. All numeric formatting is 17-significant-digit scientific notation
//! so written values parse back bit-exactly and reruns produce identical
//! bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::gas::{GasModel, PrimitiveState};
use crate::mesh::StructuredMesh;
use crate::scalar::Scalar;

/// 17 significant digits round-trips any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Legacy ASCII VTK structured grid with cell data rho, u, v, p, M.
pub fn write_vtk<S: Scalar>(
    path: &Path,
    mesh: &StructuredMesh<S>,
    primitives: &[PrimitiveState<S>],
    gas: &GasModel<S>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (ni, nj) = (mesh.n_xi, mesh.n_eta);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "flow field")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {} {} 1", ni + 1, nj + 1)?;
    writeln!(w, "POINTS {} double", (ni + 1) * (nj + 1))?;
    for j in 0..=nj {
        for i in 0..=ni {
            let (x, y) = mesh.node(i, j);
            writeln!(
                w,
                "{} {} 0.0000000000000000e0",
                fmt17(x.to_f64().unwrap()),
                fmt17(y.to_f64().unwrap())
            )?;
        }
    }
    writeln!(w, "CELL_DATA {}", ni * nj)?;
    let fields: [(&str, Box<dyn Fn(&PrimitiveState<S>) -> S>); 5] = [
        ("rho", Box::new(|s: &PrimitiveState<S>| s.rho)),
        ("u", Box::new(|s: &PrimitiveState<S>| s.u)),
        ("v", Box::new(|s: &PrimitiveState<S>| s.v)),
        ("p", Box::new(|s: &PrimitiveState<S>| s.p)),
        ("mach", Box::new(|s: &PrimitiveState<S>| s.mach(gas))),
    ];
    for (name, get) in &fields {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for s in primitives {
            writeln!(w, "{}", fmt17(get(s).to_f64().unwrap()))?;
        }
    }
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// RFC-4180 CSV: comma-separated, CRLF line endings, quoting only where
/// needed.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let line = |fields: Vec<String>| -> String {
        fields
            .iter()
            .map(|f| csv_escape(f))
            .collect::<Vec<_>>()
            .join(",")
    };
    write!(
        w,
        "{}\r\n",
        line(header.iter().map(|s| s.to_string()).collect())
    )?;
    for row in rows {
        write!(w, "{}\r\n", line(row.clone()))?;
    }
    Ok(())
}

/// Full-field CSV extract: one row per cell, x, y, rho, u, v, p, mach.
pub fn write_field_csv<S: Scalar>(
    path: &Path,
    mesh: &StructuredMesh<S>,
    primitives: &[PrimitiveState<S>],
    gas: &GasModel<S>,
) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..mesh.n_cells())
        .map(|idx| {
            let (x, y) = mesh.cell_center[idx];
            let s = &primitives[idx];
            vec![
                fmt17(x.to_f64().unwrap()),
                fmt17(y.to_f64().unwrap()),
                fmt17(s.rho.to_f64().unwrap()),
                fmt17(s.u.to_f64().unwrap()),
                fmt17(s.v.to_f64().unwrap()),
                fmt17(s.p.to_f64().unwrap()),
                fmt17(s.mach(gas).to_f64().unwrap()),
            ]
        })
        .collect();
    write_csv(path, &["x", "y", "rho", "u", "v", "p", "mach"], &rows)
}

/// CSV extract of a single j row of cells (centerline/wall-line cuts).
pub fn write_line_csv<S: Scalar>(
    path: &Path,
    mesh: &StructuredMesh<S>,
    primitives: &[PrimitiveState<S>],
    gas: &GasModel<S>,
    j: usize,
) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..mesh.n_xi)
        .map(|i| {
            let idx = mesh.cell(i, j);
            let (x, y) = mesh.cell_center[idx];
            let s = &primitives[idx];
            vec![
                fmt17(x.to_f64().unwrap()),
                fmt17(y.to_f64().unwrap()),
                fmt17(s.rho.to_f64().unwrap()),
                fmt17(s.u.to_f64().unwrap()),
                fmt17(s.v.to_f64().unwrap()),
                fmt17(s.p.to_f64().unwrap()),
                fmt17(s.mach(gas).to_f64().unwrap()),
            ]
        })
        .collect();
    write_csv(path, &["x", "y", "rho", "u", "v", "p", "mach"], &rows)
}
