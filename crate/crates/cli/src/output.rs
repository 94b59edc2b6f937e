//! CSV schemas shared with downstream plotting scripts.

use std::fs::File;
use std::path::{Path, PathBuf};

use kgwave::field::State;
use kgwave::solver::Sample;
use kgwave::spectral::SpectrumSample;
use kgwave::PeriodicGrid;
use num_complex::Complex64;

use crate::error::{CliError, Result};

pub const DIAGNOSTICS_HEADER: [&str; 12] = [
    "t",
    "rho_l2",
    "rho_x_l2",
    "theta_l2",
    "theta_x_l2",
    "theta_linf",
    "rho_t_l2",
    "theta_t_l2",
    "orbital_dist",
    "gamma",
    "energy",
    "energy_drift",
];

pub const SNAPSHOT_HEADER: [&str; 5] = ["x", "re_u", "im_u", "re_ut", "im_ut"];

pub const SPECTRUM_HEADER: [&str; 10] = [
    "ell",
    "re_lambda_1",
    "re_lambda_2",
    "re_lambda_3",
    "re_lambda_4",
    "im_lambda_1",
    "im_lambda_2",
    "im_lambda_3",
    "im_lambda_4",
    "discriminant",
];

/// Shortest decimal that parses back to the same `f64`. Very small or
/// very large magnitudes switch to exponent notation to keep rows short.
pub fn fmt_f64(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&m) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let writer = csv::Writer::from_path(path).map_err(|e| output_error(path, e))?;
        let mut out = Self { path: path.to_path_buf(), writer };
        out.writer.write_record(header).map_err(|e| output_error(path, e))?;
        Ok(out)
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let path = &self.path;
        self.writer.write_record(values.iter().map(|&v| fmt_f64(v))).map_err(|e| output_error(path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|source| CliError::Output { path: self.path.clone(), source })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn output_error(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::Output { path: path.to_path_buf(), source }
}

pub fn diagnostics_row(s: &Sample) -> [f64; 12] {
    let p = &s.polar;
    [
        p.t,
        p.rho_l2,
        p.rho_x_l2,
        p.theta_l2,
        p.theta_x_l2,
        p.theta_linf,
        p.rho_t_l2,
        p.theta_t_l2,
        p.orbital_dist,
        p.gamma,
        s.energy.total,
        s.energy_drift,
    ]
}

pub fn spectrum_row(s: &SpectrumSample) -> [f64; 10] {
    let r = &s.roots;
    [s.ell, r[0].re, r[1].re, r[2].re, r[3].re, r[0].im, r[1].im, r[2].im, r[3].im, s.discriminant]
}

pub fn write_snapshot(path: &Path, grid: &PeriodicGrid, state: &State) -> Result<()> {
    let mut out = CsvOut::create(path, &SNAPSHOT_HEADER)?;
    for (j, (u, ut)) in state.u.iter().zip(&state.ut).enumerate() {
        out.row(&[grid.x(j), u.re, u.im, ut.re, ut.im])?;
    }
    out.flush()
}

/// Opens a CSV for reading, separating missing files from unreadable ones.
fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CliError::MissingInput { path: path.to_path_buf(), source })?;
    Ok(csv::Reader::from_reader(file))
}

fn malformed(path: &Path, message: impl ToString) -> CliError {
    CliError::MalformedCsv { path: path.to_path_buf(), message: message.to_string() }
}

/// Reads the named columns of a numeric CSV, row-major.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| malformed(path, e))?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| headers.iter().position(|h| h.trim() == *n).ok_or_else(|| malformed(path, format!("no column '{n}'"))))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(path, e))?;
        let row = idx
            .iter()
            .map(|&i| {
                let field = record.get(i).unwrap_or("").trim();
                field
                    .parse::<f64>()
                    .map_err(|_| malformed(path, format!("row {}: '{field}' is not a number", line + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Loads a snapshot CSV onto `grid`, checking that its nodes match.
pub fn read_snapshot(path: &Path, grid: &PeriodicGrid) -> Result<State> {
    let rows = read_columns(path, &SNAPSHOT_HEADER)?;
    if rows.len() != grid.n() {
        return Err(malformed(path, format!("{} rows, the configured grid has {} nodes", rows.len(), grid.n())));
    }
    let tol = 1e-9 * grid.length();
    let mut u = Vec::with_capacity(rows.len());
    let mut ut = Vec::with_capacity(rows.len());
    for (j, r) in rows.iter().enumerate() {
        if (r[0] - grid.x(j)).abs() > tol {
            return Err(malformed(path, format!("row {}: x = {} does not match grid node {}", j + 2, r[0], grid.x(j))));
        }
        u.push(Complex64::new(r[1], r[2]));
        ut.push(Complex64::new(r[3], r[4]));
    }
    State::new(u, ut, 0.0).map_err(|e| malformed(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for x in [0.0, 1.0, -2.5, 0.1 + 0.2, 1e-300, 6.02214076e23, 5e-324, 123456.789, -1.0 / 3.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1e-12), "1e-12");
        assert_eq!(fmt_f64(0.25), "0.25");
    }
}
