//! Field snapshots as CSV or a compact binary dump.
//!
//! CSV columns are `x,re,im,intensity` in 1D and `x,y,re,im,intensity` in 2D,
//! positions in meters. The binary layout is a 32-byte header
//! (`MWHOLO01`, dim `u64`, samples `u64`, spacing `f64`) followed by one
//! little-endian `f64` triplet `(re, im, intensity)` per sample. In 2D the
//! samples word holds `nx | ny << 32` and cells must be square.

use std::io::{BufRead, Read, Write};

use nalgebra::Complex;

use super::field::ScalarField;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

pub const MAGIC: &[u8; 8] = b"MWHOLO01";
pub const HEADER_LEN: usize = 32;

pub fn write_csv<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let two_d = field.grid.dim() == 2;
    out.write_all(if two_d {
        b"x,y,re,im,intensity\n"
    } else {
        b"x,re,im,intensity\n"
    })?;
    for ((x, y), a) in field.grid.points().into_iter().zip(&field.amplitudes) {
        let (re, im) = (to_f64(a.re), to_f64(a.im));
        let i = to_f64(a.norm_sqr());
        if two_d {
            writeln!(out, "{},{},{re},{im},{i}", to_f64(x), to_f64(y))?;
        } else {
            writeln!(out, "{},{re},{im},{i}", to_f64(x))?;
        }
    }
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; the grid is rebuilt from the coordinates.
pub fn read_csv<T: Real, R: BufRead>(input: R, wavelength: T) -> Result<ScalarField<T>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let two_d = match header.trim() {
        "x,re,im,intensity" => false,
        "x,y,re,im,intensity" => true,
        other => return Err(Error::Format(format!("unexpected header {other:?}"))),
    };
    let width = if two_d { 5 } else { 4 };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut amplitudes = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", row + 2)))?;
        if cells.len() != width {
            return Err(Error::Format(format!(
                "row {}: expected {width} columns",
                row + 2
            )));
        }
        xs.push(cells[0]);
        if two_d {
            ys.push(cells[1]);
        }
        amplitudes.push(Complex::new(
            lit::<T>(cells[width - 3]),
            lit::<T>(cells[width - 2]),
        ));
    }
    let grid = if two_d {
        let nx = ys.iter().take_while(|&&y| y == ys[0]).count();
        if nx < 2 || nx == ys.len() || amplitudes.len() % nx != 0 {
            return Err(Error::Format("irregular 2D layout".into()));
        }
        let ny = amplitudes.len() / nx;
        Grid::new_2d(nx, ny, lit(xs[1] - xs[0]), lit(ys[nx] - ys[0]))?
    } else {
        if xs.len() < 2 {
            return Err(Error::Format("too few rows".into()));
        }
        Grid::new_1d(xs.len(), lit(xs[1] - xs[0]))?
    };
    ScalarField::new(grid, amplitudes, wavelength)
}

pub fn write_binary<T: Real, W: Write>(field: &ScalarField<T>, mut out: W) -> Result<()> {
    let g = &field.grid;
    let (samples, spacing) = if g.dim() == 1 {
        (g.samples(0) as u64, g.spacing(0))
    } else {
        if g.spacing(0) != g.spacing(1) {
            return Err(Error::Unsupported(
                "binary snapshots need square cells".into(),
            ));
        }
        (
            g.samples(0) as u64 | (g.samples(1) as u64) << 32,
            g.spacing(0),
        )
    };
    out.write_all(MAGIC)?;
    out.write_all(&(g.dim() as u64).to_le_bytes())?;
    out.write_all(&samples.to_le_bytes())?;
    out.write_all(&to_f64(spacing).to_le_bytes())?;
    for a in &field.amplitudes {
        for v in [a.re, a.im, a.norm_sqr()] {
            out.write_all(&to_f64(v).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(mut input: R, wavelength: T) -> Result<ScalarField<T>> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |k: usize| u64::from_le_bytes(header[8 * k..8 * k + 8].try_into().unwrap());
    let spacing = lit::<T>(f64::from_bits(word(3)));
    let grid = match word(1) {
        1 => Grid::new_1d(word(2) as usize, spacing)?,
        2 => {
            let s = word(2);
            Grid::new_2d(
                (s & 0xffff_ffff) as usize,
                (s >> 32) as usize,
                spacing,
                spacing,
            )?
        }
        d => return Err(Error::Format(format!("dimension {d}"))),
    };
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != grid.len() * 24 {
        return Err(Error::Format(format!(
            "expected {} bytes of samples, found {}",
            grid.len() * 24,
            body.len()
        )));
    }
    let amplitudes = body
        .chunks_exact(24)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            Complex::new(lit::<T>(f(0)), lit::<T>(f(1)))
        })
        .collect();
    ScalarField::new(grid, amplitudes, wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: Grid<f64>) -> ScalarField<f64> {
        ScalarField::from_fn(grid, 1e-7, |x, y| {
            Complex::new((x * 1e5).sin() + 0.1, (y * 3e4).cos() / 3.0)
        })
        .unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        for grid in [
            Grid::new_1d(64, 1e-6).unwrap(),
            Grid::new_2d(64, 128, 1e-6, 2e-6).unwrap(),
        ] {
            let f = sample(grid);
            let mut buf = Vec::new();
            write_csv(&f, &mut buf).unwrap();
            let back = read_csv(buf.as_slice(), 1e-7).unwrap();
            assert_eq!(back.amplitudes, f.amplitudes);
            assert_eq!(back.grid.samples(0), grid.samples(0));
            assert_eq!(back.grid.samples(1), grid.samples(1));
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        for grid in [
            Grid::new_1d(64, 1e-6).unwrap(),
            Grid::new_2d(64, 128, 1e-6, 1e-6).unwrap(),
        ] {
            let f = sample(grid);
            let mut buf = Vec::new();
            write_binary(&f, &mut buf).unwrap();
            assert_eq!(buf.len(), HEADER_LEN + 24 * grid.len());
            assert_eq!(&buf[..8], MAGIC);
            let back = read_binary(buf.as_slice(), 1e-7).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = Grid::new_2d(64, 64, 1e-6, 2e-6).unwrap();
        assert!(matches!(
            write_binary(&sample(g), Vec::new()),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            read_binary::<f64, _>(&b"NOTMAGIC"[..], 1.0),
            Err(Error::Io(_))
        ));
        assert!(matches!(
            read_csv::<f64, _>(&b"a,b\n"[..], 1.0),
            Err(Error::Format(_))
        ));
    }
}
