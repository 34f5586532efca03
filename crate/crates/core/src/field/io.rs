//! Gridded field files.
//!
//! # Binary container (`.tvf`)
//!
//! All integers are unsigned little-endian, all reals IEEE-754 binary64
//! little-endian. No padding.
//!
//! | offset | size | content                                               |
//! |--------|------|-------------------------------------------------------|
//! | 0      | 8    | magic `TVFIELD1` (ASCII)                              |
//! | 8      | 16   | `nx`, `ny`, `nz`, `nt` as u32                         |
//! | 24     | 32   | `x0`, `y0`, `dx`, `dy` as f64                          |
//! | 56     | 4    | spatial, depth, time method codes (u8 each), reserved |
//! | 60     | 8    | time clamp tolerance (f64)                            |
//! | 68     | 8·nz | depth levels                                          |
//! | …      | 8·nt | time stamps                                           |
//! | …      | 8·N  | `u[t][z][y][x]` row-major, `N = nt·nz·ny·nx`          |
//! | …      | 8·N  | `v[t][z][y][x]`                                       |
//!
//! Spatial codes: 0 nearest, 1 bilinear, 2 bicubic. Depth/time codes:
//! 0 nearest, 1 linear, 2 cubic, 3 akima. The reserved byte is 0.
//!
//! # CSV fixtures
//!
//! Header `t,z,y,x,u,v`, one row per sample, any row order. The axes are the
//! sorted distinct values of each column; every combination must be present
//! exactly once and `x`, `y` must be uniformly spaced.

use super::grid::{GridAxes, GridField, GridFieldBuilder, InterpMethods, SpatialMethod};
use super::interp::Method1D;
use crate::geom::Vec2;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"TVFIELD1";

#[derive(Debug, Error)]
pub enum FieldFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a field file (bad magic)")]
    BadMagic,
    #[error("unknown {what} method code {code}")]
    BadCode { what: &'static str, code: u8 },
    #[error("truncated field file")]
    Truncated,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed csv fixture: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] super::FieldError),
}

fn spatial_code(m: SpatialMethod) -> u8 {
    match m {
        SpatialMethod::Nearest => 0,
        SpatialMethod::Bilinear => 1,
        SpatialMethod::Bicubic => 2,
    }
}

fn method_code(m: Method1D) -> u8 {
    match m {
        Method1D::Nearest => 0,
        Method1D::Linear => 1,
        Method1D::Cubic => 2,
        Method1D::Akima => 3,
    }
}

fn spatial_from(code: u8) -> Result<SpatialMethod, FieldFileError> {
    Ok(match code {
        0 => SpatialMethod::Nearest,
        1 => SpatialMethod::Bilinear,
        2 => SpatialMethod::Bicubic,
        _ => return Err(FieldFileError::BadCode { what: "spatial", code }),
    })
}

fn method_from(what: &'static str, code: u8) -> Result<Method1D, FieldFileError> {
    Ok(match code {
        0 => Method1D::Nearest,
        1 => Method1D::Linear,
        2 => Method1D::Cubic,
        3 => Method1D::Akima,
        _ => return Err(FieldFileError::BadCode { what, code }),
    })
}

pub fn write_binary<W: Write>(field: &GridField, mut w: W) -> Result<(), FieldFileError> {
    let a = field.axes();
    let m = field.methods();
    w.write_all(MAGIC)?;
    for n in [a.nx, a.ny, a.nz(), a.nt()] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for x in [a.origin.x, a.origin.y, a.dx, a.dy] {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&[spatial_code(m.spatial), method_code(m.depth), method_code(m.time), 0])?;
    w.write_all(&field.time_clamp().to_le_bytes())?;
    for x in a.depths.iter().chain(&a.times).chain(field.u()).chain(field.v()) {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], FieldFileError> {
        if self.buf.len() < N {
            return Err(FieldFileError::Truncated);
        }
        let (head, rest) = self.buf.split_at(N);
        self.buf = rest;
        Ok(head.try_into().expect("split length"))
    }

    fn u32(&mut self) -> Result<usize, FieldFileError> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64, FieldFileError> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, FieldFileError> {
        if self.buf.len() / 8 < n {
            return Err(FieldFileError::Truncated);
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridField, FieldFileError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor { buf: &bytes };
    if &c.take::<8>()? != MAGIC {
        return Err(FieldFileError::BadMagic);
    }
    let (nx, ny, nz, nt) = (c.u32()?, c.u32()?, c.u32()?, c.u32()?);
    let (x0, y0, dx, dy) = (c.f64()?, c.f64()?, c.f64()?, c.f64()?);
    let codes = c.take::<4>()?;
    let methods = InterpMethods {
        spatial: spatial_from(codes[0])?,
        depth: method_from("depth", codes[1])?,
        time: method_from("time", codes[2])?,
    };
    let clamp = c.f64()?;
    let depths = c.f64s(nz)?;
    let times = c.f64s(nt)?;
    let n = nx
        .checked_mul(ny)
        .and_then(|k| k.checked_mul(nz))
        .and_then(|k| k.checked_mul(nt))
        .ok_or(FieldFileError::Truncated)?;
    let u = c.f64s(n)?;
    let v = c.f64s(n)?;
    let axes = GridAxes {
        nx,
        ny,
        origin: Vec2::new(x0, y0),
        dx,
        dy,
        depths,
        times,
    };
    Ok(GridFieldBuilder::new(axes)
        .methods(methods)
        .time_clamp(clamp)
        .build(u, v)?)
}

pub fn save(field: &GridField, path: &Path) -> Result<(), FieldFileError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_binary(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GridField, FieldFileError> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Bit-exact key for collecting distinct axis values.
fn key(x: f64) -> u64 {
    // order-preserving for finite values
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn uniform_spacing(vals: &[f64], axis: &str) -> Result<f64, FieldFileError> {
    if vals.len() < 2 {
        return Err(FieldFileError::Malformed(format!(
            "need at least two distinct {axis} values"
        )));
    }
    let d = (vals[vals.len() - 1] - vals[0]) / (vals.len() - 1) as f64;
    for (i, &v) in vals.iter().enumerate() {
        let expect = vals[0] + i as f64 * d;
        if (v - expect).abs() > 1e-9 * d.abs().max(1.0) {
            return Err(FieldFileError::Malformed(format!(
                "{axis} values are not uniformly spaced"
            )));
        }
    }
    Ok(d)
}

/// Import a CSV fixture with columns `t,z,y,x,u,v`.
pub fn read_csv<R: Read>(r: R, methods: InterpMethods, time_clamp: f64) -> Result<GridField, FieldFileError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let expected = ["t", "z", "y", "x", "u", "v"];
    if headers.len() != 6 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(FieldFileError::Malformed(format!(
            "header must be t,z,y,x,u,v (got {})",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut vals = [0.0; 6];
        for (k, field) in rec.iter().enumerate().take(6) {
            vals[k] = field.parse().map_err(|_| {
                FieldFileError::Malformed(format!("row {}: column {} is not a number", line + 2, expected[k]))
            })?;
        }
        if rec.len() != 6 {
            return Err(FieldFileError::Malformed(format!(
                "row {}: expected 6 columns",
                line + 2
            )));
        }
        rows.push(vals);
    }
    let distinct = |col: usize| -> Vec<f64> {
        let m: BTreeMap<u64, f64> = rows.iter().map(|r| (key(r[col]), r[col])).collect();
        m.into_values().collect()
    };
    let (ts, zs, ys, xs) = (distinct(0), distinct(1), distinct(2), distinct(3));
    let dx = uniform_spacing(&xs, "x")?;
    let dy = uniform_spacing(&ys, "y")?;
    let index_of = |vals: &[f64], x: f64| vals.binary_search_by(|v| key(*v).cmp(&key(x))).expect("axis value");
    let axes = GridAxes {
        nx: xs.len(),
        ny: ys.len(),
        origin: Vec2::new(xs[0], ys[0]),
        dx,
        dy,
        depths: zs.clone(),
        times: ts.clone(),
    };
    let n = axes.len();
    if rows.len() != n {
        return Err(FieldFileError::Malformed(format!(
            "expected {n} rows for a complete {}x{}x{}x{} grid, got {}",
            axes.nt(),
            axes.nz(),
            axes.ny,
            axes.nx,
            rows.len()
        )));
    }
    let mut u = vec![f64::NAN; n];
    let mut v = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for r in &rows {
        let k = axes.index(
            index_of(&ts, r[0]),
            index_of(&zs, r[1]),
            index_of(&ys, r[2]),
            index_of(&xs, r[3]),
        );
        if seen[k] {
            return Err(FieldFileError::Malformed(format!(
                "duplicate sample at t={}, z={}, y={}, x={}",
                r[0], r[1], r[2], r[3]
            )));
        }
        seen[k] = true;
        u[k] = r[4];
        v[k] = r[5];
    }
    Ok(GridFieldBuilder::new(axes)
        .methods(methods)
        .time_clamp(time_clamp)
        .build(u, v)?)
}

pub fn load_csv(path: &Path, methods: InterpMethods, time_clamp: f64) -> Result<GridField, FieldFileError> {
    read_csv(std::fs::File::open(path)?, methods, time_clamp)
}

/// Write a field as a CSV fixture (rows ordered t, z, y, x).
pub fn write_csv<W: Write>(field: &GridField, w: W) -> Result<(), FieldFileError> {
    let a = field.axes();
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "z", "y", "x", "u", "v"])?;
    for (it, &t) in a.times.iter().enumerate() {
        for (iz, &z) in a.depths.iter().enumerate() {
            for iy in 0..a.ny {
                let y = a.origin.y + iy as f64 * a.dy;
                for ix in 0..a.nx {
                    let x = a.origin.x + ix as f64 * a.dx;
                    let k = a.index(it, iz, iy, ix);
                    wtr.write_record([t, z, y, x, field.u()[k], field.v()[k]].map(|x| x.to_string()))?;
                }
            }
        }
    }
    wtr.flush()?;
    Ok(())
}
