//! Parameter tables: one CSV schema for both boundedness theorems.
//!
//! Columns are `case,a,b,c,k,c1,c2,alpha,beta,xi0,expected_subcase`, with an
//! optional trailing `provenance` column.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boundedness::{Case, Subcase};
use crate::error::{Error, Result};
use crate::params::Params;

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// 1-based position among the data rows.
    pub row: usize,
    pub case: Case,
    pub expected_subcase: Subcase,
    pub params: Params,
    pub provenance: String,
}

impl TableRow {
    /// Short label such as `row03_I_c`, used in file names.
    pub fn label(&self) -> String {
        format!("row{:02}_{}_{}", self.row, self.case, self.expected_subcase)
    }
}

#[derive(Debug, Deserialize)]
struct RawRow {
    case: String,
    a: f64,
    b: f64,
    c: f64,
    k: f64,
    c1: f64,
    c2: f64,
    alpha: f64,
    beta: f64,
    xi0: f64,
    expected_subcase: String,
    #[serde(default)]
    provenance: String,
}

const REQUIRED: [&str; 11] = [
    "case",
    "a",
    "b",
    "c",
    "k",
    "c1",
    "c2",
    "alpha",
    "beta",
    "xi0",
    "expected_subcase",
];

pub fn parse_table<R: Read>(r: R) -> Result<Vec<TableRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = reader
        .headers()
        .map_err(|e| Error::Table {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(missing) = REQUIRED.iter().find(|h| !headers.iter().any(|x| x == **h)) {
        return Err(Error::Table {
            row: 0,
            message: format!("header lacks column {missing:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<RawRow>().enumerate() {
        let row = i + 1;
        let raw = record.map_err(|e| Error::Table {
            row,
            message: e.to_string(),
        })?;
        let wrap = |e: Error| Error::Table {
            row,
            message: e.to_string(),
        };
        rows.push(TableRow {
            row,
            case: raw.case.parse().map_err(wrap)?,
            expected_subcase: raw.expected_subcase.parse().map_err(wrap)?,
            params: Params {
                a: raw.a,
                b: raw.b,
                c: raw.c,
                k: raw.k,
                alpha: raw.alpha,
                beta: raw.beta,
                xi0: raw.xi0,
                c1: raw.c1,
                c2: raw.c2,
            },
            provenance: raw.provenance,
        });
    }
    Ok(rows)
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_table(file)
}

/// One of the tables shipped with the crate: `table1` or `table2`.
pub fn bundled(name: &str) -> Result<Vec<TableRow>> {
    match name {
        "table1" => parse_table(TABLE1_CSV.as_bytes()),
        "table2" => parse_table(TABLE2_CSV.as_bytes()),
        other => Err(Error::Input(format!("no bundled table named {other:?}"))),
    }
}
