//! Plain CSV exchange: samples (x,re,im), spectra (t,re,im) and fields (x,y,w).
//! Numbers are written as `{:.16e}` so values round-trip exactly.

use crate::error::{Error, Result};
use crate::function::MellinFunction;
use crate::grid::LogGrid;
use crate::mellin::MellinSpectrum;
use crate::pde::{KernelField, SolutionField};
use num_complex::Complex64;
use std::io::{Read, Write};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(s: &str, line: usize, col: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: column {col} is not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "line {line}: column {col} is not finite"
        )));
    }
    Ok(v)
}

fn write_rows<W: Write>(
    out: W,
    header: [&str; 3],
    rows: impl Iterator<Item = [f64; 3]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read>(input: R, header: [&str; 3]) -> Result<Vec<[f64; 3]>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let got: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != header {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            header.join(","),
            got.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::Parse(format!(
                "line {line}: expected 3 fields, got {}",
                rec.len()
            )));
        }
        rows.push([
            parse_num(&rec[0], line, header[0])?,
            parse_num(&rec[1], line, header[1])?,
            parse_num(&rec[2], line, header[2])?,
        ]);
    }
    Ok(rows)
}

/// Writes (x, re, im) rows.
pub fn write_samples<W: Write>(out: W, xs: &[f64], values: &[Complex64]) -> Result<()> {
    if xs.len() != values.len() {
        return Err(Error::domain("sample and value counts differ"));
    }
    write_rows(
        out,
        ["x", "re", "im"],
        xs.iter().zip(values).map(|(x, v)| [*x, v.re, v.im]),
    )
}

/// Reads (x, re, im) rows.
pub fn read_samples<R: Read>(input: R) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let rows = read_rows(input, ["x", "re", "im"])?;
    let xs = rows.iter().map(|r| r[0]).collect();
    let vs = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    Ok((xs, vs))
}

/// Reads samples that must lie on a log-uniform grid and wraps them as a
/// sampled function.
pub fn read_sampled_function<R: Read>(input: R) -> Result<MellinFunction> {
    let (xs, vs) = read_samples(input)?;
    if xs.len() < 2 {
        return Err(Error::Parse("need at least two samples".into()));
    }
    if xs.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Parse("sample points must be positive".into()));
    }
    let grid =
        LogGrid::new(xs[0], xs[xs.len() - 1], xs.len()).map_err(|e| Error::Parse(e.to_string()))?;
    let h = grid.h_log();
    for (i, x) in xs.iter().enumerate() {
        if (x.ln() - grid.log_point(i)).abs() > 1e-9 * h.abs().max(1e-300) + 1e-12 {
            return Err(Error::Parse(format!(
                "sample {i} at x = {x} is off the log-uniform grid"
            )));
        }
    }
    MellinFunction::sampled(grid, vs)
}

/// Writes (t, re, im) rows of a spectrum.
pub fn write_spectrum<W: Write>(out: W, spec: &MellinSpectrum) -> Result<()> {
    write_rows(
        out,
        ["t", "re", "im"],
        spec.t_values
            .iter()
            .zip(&spec.values)
            .map(|(t, v)| [*t, v.re, v.im]),
    )
}

/// Reads (t, re, im) rows into a spectrum on the line `nu`.
pub fn read_spectrum<R: Read>(input: R, nu: f64) -> Result<MellinSpectrum> {
    let rows = read_rows(input, ["t", "re", "im"])?;
    Ok(MellinSpectrum {
        nu,
        t_values: rows.iter().map(|r| r[0]).collect(),
        values: rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
    })
}

fn write_grid_field<W: Write>(
    out: W,
    grid: &LogGrid,
    ys: &[f64],
    values: &[Vec<f64>],
) -> Result<()> {
    let xs = grid.points();
    let rows = ys
        .iter()
        .zip(values)
        .flat_map(|(y, row)| xs.iter().zip(row).map(move |(x, w)| [*x, *y, *w]));
    write_rows(out, ["x", "y", "w"], rows)
}

/// Writes (x, y, w) rows, y-major.
pub fn write_field<W: Write>(out: W, field: &SolutionField) -> Result<()> {
    write_grid_field(out, &field.x_grid, &field.y_values, &field.values)
}

pub fn write_kernel<W: Write>(out: W, field: &KernelField) -> Result<()> {
    write_grid_field(out, &field.x_grid, &field.y_values, &field.values)
}

/// Reads (x, y, w) rows.
pub fn read_field<R: Read>(input: R) -> Result<Vec<[f64; 3]>> {
    read_rows(input, ["x", "y", "w"])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn samples_round_trip_exactly() {
        let g = LogGrid::new(0.1, 10.0, 7).unwrap();
        let xs = g.points();
        let vs: Vec<_> = xs
            .iter()
            .map(|x| Complex64::new(x.sin(), 1.0 / 3.0 * x))
            .collect();
        let mut buf = Vec::new();
        write_samples(&mut buf, &xs, &vs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        let (xs2, vs2) = read_samples(buf.as_slice()).unwrap();
        assert_eq!(xs, xs2);
        assert_eq!(vs, vs2);
        let f = read_sampled_function(buf.as_slice()).unwrap();
        assert!((f.eval(xs[3]).unwrap() - vs[3]).norm() < 1e-12);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_samples("x,re,im\n1,2\n".as_bytes()).is_err());
        assert!(read_samples("x,re\n1,2\n".as_bytes()).is_err());
        assert!(read_samples("x,re,im\n1,nan,0\n".as_bytes()).is_err());
        assert!(read_sampled_function("x,re,im\n1,0,0\n2,0,0\n5,0,0\n".as_bytes()).is_err());
        assert!(read_sampled_function("x,re,im\n-1,0,0\n2,0,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn reader_never_panics(s in "\\PC{0,80}") {
            let _ = read_samples(s.as_bytes());
            let _ = read_sampled_function(s.as_bytes());
            let _ = read_field(s.as_bytes());
        }

        #[test]
        fn numbers_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let mut buf = Vec::new();
            write_samples(&mut buf, &[1.0], &[Complex64::new(v, -v)]).unwrap();
            let (_, back) = read_samples(buf.as_slice()).unwrap();
            prop_assert_eq!(back[0].re, v);
            prop_assert_eq!(back[0].im, -v);
        }
    }
}
