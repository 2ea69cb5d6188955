//! Field files: comma-separated text with a one-line header, floats in
//! shortest round-trip form, plus an optional legacy VTK volume.

use nanoflux_core::{BoundaryTrace, CellField, FaceField, Side, UniformGrid};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

type Rows<T> = Result<Vec<T>, String>;

fn csv_err(path: &Path, e: impl std::fmt::Display) -> String {
    format!("{}: {e}", path.display())
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Rows<T> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

/// `i,j,x,y,<name>`, one row per cell, `i` fastest.
pub fn write_cells(path: &Path, grid: &UniformGrid, name: &str, values: &[f64]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "x", "y", name])?;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.cell_center(i, j);
            w.serialize((i, j, x, y, values[grid.cell(i, j)]))?;
        }
    }
    w.flush()
}

/// Cell values of a file written by [`write_cells`], checked against
/// `grid`.
pub fn read_cells(path: &Path, grid: &UniformGrid) -> Rows<f64> {
    let rows: Vec<(usize, usize, f64, f64, f64)> = read_rows(path)?;
    let mut values = vec![f64::NAN; grid.cell_count()];
    let mut seen = vec![false; grid.cell_count()];
    for (i, j, _, _, v) in rows {
        if i >= grid.nx() || j >= grid.ny() {
            return Err(csv_err(path, format!("cell ({i}, {j}) outside the grid")));
        }
        let k = grid.cell(i, j);
        if std::mem::replace(&mut seen[k], true) {
            return Err(csv_err(path, format!("cell ({i}, {j}) given twice")));
        }
        values[k] = v;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(csv_err(path, format!("cell ({}, {}) missing", k % grid.nx(), k / grid.nx())));
    }
    Ok(values)
}

/// `component,i,j,x,y,value` with component `x` or `y`.
pub fn write_faces(path: &Path, grid: &UniformGrid, w: &FaceField) -> io::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["component", "i", "j", "x", "y", "value"])?;
    for j in 0..grid.ny() {
        for i in 0..=grid.nx() {
            let (x, y) = grid.xface_center(i, j);
            out.serialize(("x", i, j, x, y, w.at_x(i, j)))?;
        }
    }
    for j in 0..=grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.yface_center(i, j);
            out.serialize(("y", i, j, x, y, w.at_y(i, j)))?;
        }
    }
    out.flush()
}

pub fn read_faces(path: &Path, grid: &UniformGrid) -> Result<FaceField, String> {
    let rows: Vec<(String, usize, usize, f64, f64, f64)> = read_rows(path)?;
    let mut w = FaceField::zeros(grid);
    let (mut nx_seen, mut ny_seen) = (0, 0);
    for (c, i, j, _, _, v) in rows {
        match c.as_str() {
            "x" if i <= grid.nx() && j < grid.ny() => {
                w.x_mut()[grid.xface(i, j)] = v;
                nx_seen += 1;
            }
            "y" if i < grid.nx() && j <= grid.ny() => {
                w.y_mut()[grid.yface(i, j)] = v;
                ny_seen += 1;
            }
            _ => return Err(csv_err(path, format!("face {c} ({i}, {j}) outside the grid"))),
        }
    }
    if nx_seen != grid.xface_count() || ny_seen != grid.yface_count() {
        return Err(csv_err(
            path,
            format!(
                "expected {} x-faces and {} y-faces, found {nx_seen} and {ny_seen}",
                grid.xface_count(),
                grid.yface_count()
            ),
        ));
    }
    Ok(w)
}

/// `i,j,x,y,u,v`: face velocities averaged to cell centres.
pub fn write_cell_velocity(path: &Path, grid: &UniformGrid, w: &FaceField) -> io::Result<()> {
    let (u, v) = w.to_cell_centers();
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["i", "j", "x", "y", "u", "v"])?;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.cell_center(i, j);
            let k = grid.cell(i, j);
            out.serialize((i, j, x, y, u[k], v[k]))?;
        }
    }
    out.flush()
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
        Side::Bottom => "bottom",
        Side::Top => "top",
    }
}

/// `side,k,value`, `k` running along the side.
pub fn write_boundary(path: &Path, trace: &BoundaryTrace) -> io::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["side", "k", "value"])?;
    for side in Side::ALL {
        for (k, v) in trace.side(side).iter().enumerate() {
            out.serialize((side_name(side), k, v))?;
        }
    }
    out.flush()
}

pub fn read_boundary(path: &Path, grid: &UniformGrid) -> Result<BoundaryTrace, String> {
    let rows: Vec<(String, usize, f64)> = read_rows(path)?;
    let mut trace = BoundaryTrace::constant(grid, f64::NAN);
    for (name, k, v) in rows {
        let side = Side::ALL
            .into_iter()
            .find(|s| side_name(*s) == name)
            .ok_or_else(|| csv_err(path, format!("unknown side `{name}`")))?;
        let slot = trace
            .side_mut(side)
            .get_mut(k)
            .ok_or_else(|| csv_err(path, format!("{name} index {k} outside the grid")))?;
        *slot = v;
    }
    if trace.iter().any(f64::is_nan) {
        return Err(csv_err(path, "boundary values missing"));
    }
    Ok(trace)
}

/// Legacy structured-points file with the cell-centred fields.
pub fn write_vtk(
    path: &Path,
    grid: &UniformGrid,
    scalars: &[(&str, &CellField)],
    velocity: &FaceField,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let (x0, y0) = grid.cell_center(0, 0);
    let n = grid.cell_count();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "nanoflux fields")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", grid.nx(), grid.ny())?;
    writeln!(out, "ORIGIN {x0} {y0} 0")?;
    writeln!(out, "SPACING {} {} 1", grid.hx(), grid.hy())?;
    writeln!(out, "POINT_DATA {n}")?;
    for (name, field) in scalars {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in field.values() {
            writeln!(out, "{v:e}")?;
        }
    }
    let (u, v) = velocity.to_cell_centers();
    writeln!(out, "VECTORS velocity double")?;
    for k in 0..n {
        writeln!(out, "{:e} {:e} 0", u[k], v[k])?;
    }
    out.flush()
}
