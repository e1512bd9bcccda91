//! Field serialization: a small header `(d, n, dx)` followed by row-major
//! node values, as CSV text or little-endian binary. Vector fields store one
//! node per row with `d` columns.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};

const MAGIC: &[u8; 4] = b"RFLD";

pub fn write_scalar_csv(path: &Path, u: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let g = u.grid();
    writeln!(w, "{},{},{:.17e}", g.dim(), g.cells_per_axis(), g.dx())?;
    for v in u.values() {
        writeln!(w, "{v:.17e}")?;
    }
    Ok(())
}

pub fn read_scalar_csv(path: &Path, dt: f64) -> Result<ScalarField> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty field file".into()))??;
    let (grid, _dx) = parse_header(&header, dt)?;
    let mut values = Vec::with_capacity(grid.node_count());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        values.push(parse_f64(line.trim())?);
    }
    ScalarField::new(grid, values)
}

pub fn write_vector_csv(path: &Path, a: &VectorField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let g = a.grid();
    writeln!(w, "{},{},{:.17e}", g.dim(), g.cells_per_axis(), g.dx())?;
    for node in 0..g.node_count() {
        let v = a.at(node);
        let row: Vec<String> = (0..g.dim()).map(|k| format!("{:.17e}", v[k])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_vector_csv(path: &Path, dt: f64) -> Result<VectorField> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty field file".into()))??;
    let (grid, _dx) = parse_header(&header, dt)?;
    let nodes = grid.node_count();
    let d = grid.dim();
    let mut values = vec![0.0; d * nodes];
    let mut node = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != d {
            return Err(CoreError::Parse(format!(
                "vector row has {} columns, expected {d}",
                parts.len()
            )));
        }
        for (k, part) in parts.iter().enumerate() {
            values[k * nodes + node] = parse_f64(part)?;
        }
        node += 1;
    }
    if node != nodes {
        return Err(CoreError::Parse(format!("expected {nodes} rows, got {node}")));
    }
    VectorField::new(grid, values)
}

pub fn write_scalar_binary(path: &Path, u: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_binary_header(&mut w, u.grid(), 0)?;
    for v in u.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_scalar_binary(path: &Path, dt: f64) -> Result<ScalarField> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let (grid, kind) = read_binary_header(&mut r, dt)?;
    if kind != 0 {
        return Err(CoreError::Parse("expected a scalar field file".into()));
    }
    let values = read_f64s(&mut r, grid.node_count())?;
    ScalarField::new(grid, values)
}

pub fn write_vector_binary(path: &Path, a: &VectorField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let g = a.grid();
    write_binary_header(&mut w, g, 1)?;
    for node in 0..g.node_count() {
        let v = a.at(node);
        for k in 0..g.dim() {
            w.write_all(&v[k].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_vector_binary(path: &Path, dt: f64) -> Result<VectorField> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let (grid, kind) = read_binary_header(&mut r, dt)?;
    if kind != 1 {
        return Err(CoreError::Parse("expected a vector field file".into()));
    }
    let nodes = grid.node_count();
    let d = grid.dim();
    let raw = read_f64s(&mut r, d * nodes)?;
    let mut values = vec![0.0; d * nodes];
    for node in 0..nodes {
        for k in 0..d {
            values[k * nodes + node] = raw[node * d + k];
        }
    }
    VectorField::new(grid, values)
}

fn parse_header(header: &str, dt: f64) -> Result<(GridSpec, f64)> {
    let parts: Vec<&str> = header.trim().split(',').collect();
    if parts.len() != 3 {
        return Err(CoreError::Parse(format!("bad field header: {header}")));
    }
    let d: usize = parts[0].parse().map_err(|_| CoreError::Parse("bad d".into()))?;
    let n: usize = parts[1].parse().map_err(|_| CoreError::Parse("bad n".into()))?;
    let dx = parse_f64(parts[2])?;
    let grid = GridSpec::new(d, n, dt)?;
    if (grid.dx() - dx).abs() > 1e-12 * dx.abs() {
        return Err(CoreError::Parse(format!("dx {dx} inconsistent with n {n}")));
    }
    Ok((grid, dx))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| CoreError::Parse(format!("bad float: {s}")))
}

fn write_binary_header<W: Write>(w: &mut W, g: &GridSpec, kind: u8) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[1u8, kind])?;
    w.write_all(&(g.dim() as u16).to_le_bytes())?;
    w.write_all(&(g.cells_per_axis() as u64).to_le_bytes())?;
    w.write_all(&g.dx().to_le_bytes())?;
    Ok(())
}

fn read_binary_header<R: Read>(r: &mut R, dt: f64) -> Result<(GridSpec, u8)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Parse("not a field file".into()));
    }
    let mut vk = [0u8; 2];
    r.read_exact(&mut vk)?;
    if vk[0] != 1 {
        return Err(CoreError::Parse(format!("unsupported field file version {}", vk[0])));
    }
    let mut d2 = [0u8; 2];
    r.read_exact(&mut d2)?;
    let mut n8 = [0u8; 8];
    r.read_exact(&mut n8)?;
    let mut dx8 = [0u8; 8];
    r.read_exact(&mut dx8)?;
    let grid = GridSpec::new(u16::from_le_bytes(d2) as usize, u64::from_le_bytes(n8) as usize, dt)?;
    let dx = f64::from_le_bytes(dx8);
    if (grid.dx() - dx).abs() > 1e-12 * dx.abs() {
        return Err(CoreError::Parse("dx inconsistent with n".into()));
    }
    Ok((grid, vk[1]))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}
