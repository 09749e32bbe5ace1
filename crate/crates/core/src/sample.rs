//! Sampled profiles `(ξ, U, V)` and surfaces `(x, t, u, v)` with a fixed CSV layout.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// A travelling-wave profile sampled on a ξ grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// A solution surface on an `nt × nx` grid, stored row-major with one row per `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surface {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSample {
    Profile(Profile),
    Surface(Surface),
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Sample(e.to_string())
}

impl Profile {
    pub fn new(xi: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if xi.len() != u.len() || xi.len() != v.len() {
            return Err(Error::Sample(format!(
                "column lengths differ: xi {}, U {}, V {}",
                xi.len(),
                u.len(),
                v.len()
            )));
        }
        Ok(Profile { xi, u, v })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = writer(w);
        out.write_record(["xi", "U", "V"]).map_err(csv_err)?;
        for i in 0..self.len() {
            out.write_record([self.xi[i], self.u[i], self.v[i]].map(format_value))
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let rows = read_rows(r, &["xi", "U", "V"])?;
        let mut p = Profile::new(Vec::new(), Vec::new(), Vec::new())?;
        for row in rows {
            p.xi.push(row[0]);
            p.u.push(row[1]);
            p.v.push(row[2]);
        }
        Ok(p)
    }
}

impl Surface {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }

    /// `u` along the line `t = t[row]`.
    pub fn u_row(&self, row: usize) -> &[f64] {
        &self.u[row * self.nx()..(row + 1) * self.nx()]
    }

    pub fn v_row(&self, row: usize) -> &[f64] {
        &self.v[row * self.nx()..(row + 1) * self.nx()]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = writer(w);
        out.write_record(["x", "t", "u", "v"]).map_err(csv_err)?;
        let nx = self.nx();
        for (j, &t) in self.t.iter().enumerate() {
            for (i, &x) in self.x.iter().enumerate() {
                let idx = j * nx + i;
                out.write_record([x, t, self.u[idx], self.v[idx]].map(format_value))
                    .map_err(csv_err)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

impl CurveSample {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        match self {
            CurveSample::Profile(p) => p.write_csv(w),
            CurveSample::Surface(s) => s.write_csv(w),
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Sample(e.to_string()))
    }
}

fn read_rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_reader(r);
    let found: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(Error::Sample(format!("expected header {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Sample(format!("line {}: {s:?}: {e}", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
