//! Text formats for shapes.
//!
//! Voxel grids:
//!
//! ```text
//! dim 2
//! dims 4 3
//! origin -1.0 -0.75
//! spacing 0.5
//! 0110
//! 1111
//! 0110
//! ```
//!
//! Body rows hold one character per cell along x; row `j` is the y index and
//! in three dimensions the `dims[2]` z-slices follow each other. Blank lines
//! and lines starting with `#` are ignored.
//!
//! Ball configurations are CSV with header `x,y,r` or `x,y,z,r`.

use super::{BallConfig, VoxelShape};
use crate::error::{Error, Result};
use std::io::{BufRead, Read, Write};

fn parse_err(source_name: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        reason: reason.into(),
    }
}

pub fn read_voxels<R: BufRead>(reader: R, source_name: &str) -> Result<VoxelShape> {
    let mut dim: Option<usize> = None;
    let mut dims: Option<Vec<usize>> = None;
    let mut origin: Option<Vec<f64>> = None;
    let mut spacing: Option<f64> = None;
    let mut cells: Vec<bool> = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = no + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut words = t.split_whitespace();
        let key = words.next().unwrap();
        let rest: Vec<&str> = words.collect();
        let nums = |rest: &[&str]| -> Result<Vec<f64>> {
            rest.iter()
                .map(|w| w.parse::<f64>().map_err(|e| parse_err(source_name, lineno, format!("`{w}`: {e}"))))
                .collect()
        };
        match key {
            "dim" => {
                let d = nums(&rest)?;
                if d.len() != 1 || d[0].fract() != 0.0 {
                    return Err(parse_err(source_name, lineno, "dim takes one integer"));
                }
                dim = Some(d[0] as usize);
            }
            "dims" => {
                let d = nums(&rest)?;
                if d.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
                    return Err(parse_err(source_name, lineno, "dims must be positive integers"));
                }
                dims = Some(d.iter().map(|&x| x as usize).collect());
            }
            "origin" => origin = Some(nums(&rest)?),
            "spacing" => {
                let d = nums(&rest)?;
                if d.len() != 1 {
                    return Err(parse_err(source_name, lineno, "spacing takes one number"));
                }
                spacing = Some(d[0]);
            }
            row if row.chars().all(|c| c == '0' || c == '1') => {
                if dims.is_none() {
                    return Err(parse_err(source_name, lineno, "cell rows before header"));
                }
                let expected = dims.as_ref().unwrap()[0];
                let joined: String = std::iter::once(row).chain(rest.iter().copied()).collect();
                if joined.len() != expected || !joined.chars().all(|c| c == '0' || c == '1') {
                    return Err(parse_err(source_name, lineno, format!("expected a row of {expected} 0/1 cells")));
                }
                cells.extend(joined.chars().map(|c| c == '1'));
            }
            other => return Err(parse_err(source_name, lineno, format!("unknown header `{other}`"))),
        }
    }
    let missing = |what: &str| parse_err(source_name, 0, format!("missing `{what}` header"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let dims = dims.ok_or_else(|| missing("dims"))?;
    let origin = origin.ok_or_else(|| missing("origin"))?;
    let spacing = spacing.ok_or_else(|| missing("spacing"))?;
    if dims.len() != dim || origin.len() != dim {
        return Err(parse_err(source_name, 0, "dims and origin must have `dim` entries"));
    }
    VoxelShape::new(dim, &dims, &origin, spacing, cells)
}

pub fn write_voxels<W: Write>(mut w: W, v: &VoxelShape) -> Result<()> {
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    writeln!(w, "dim {}", v.dimension())?;
    writeln!(w, "dims {}", v.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "))?;
    writeln!(w, "origin {}", fmt(v.origin()))?;
    writeln!(w, "spacing {:?}", v.spacing())?;
    let nx = v.dims()[0];
    for row in v.cells().chunks(nx) {
        let s: String = row.iter().map(|&c| if c { '1' } else { '0' }).collect();
        writeln!(w, "{s}")?;
    }
    Ok(())
}

pub fn read_balls<R: Read>(reader: R, source_name: &str) -> Result<BallConfig> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_lowercase()).collect();
    let dim = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x", "y", "r"] => 2,
        ["x", "y", "z", "r"] => 3,
        _ => {
            return Err(parse_err(source_name, 1, format!("header must be x,y,r or x,y,z,r, got {}", header.join(","))))
        }
    };
    let mut balls = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let lineno = i + 2;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(source_name, lineno, format!("`{f}`: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != dim + 1 {
            return Err(parse_err(source_name, lineno, format!("expected {} fields", dim + 1)));
        }
        balls.push((vals[..dim].to_vec(), vals[dim]));
    }
    BallConfig::new(dim, balls)
}

pub fn write_balls<W: Write>(w: W, b: &BallConfig) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let dim = b.dimension();
    if dim == 2 {
        wtr.write_record(["x", "y", "r"])?;
    } else {
        wtr.write_record(["x", "y", "z", "r"])?;
    }
    for ball in b.balls() {
        let mut rec: Vec<String> = ball.center[..dim].iter().map(|x| format!("{x:?}")).collect();
        rec.push(format!("{:?}", ball.radius));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
