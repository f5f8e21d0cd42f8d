use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Dataset;

use super::output::format_f64;

/// How to read a dataset file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    /// Header name of the response column.
    pub response: String,
    /// Centre and scale the covariates.
    pub standardize: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            response: "y".into(),
            standardize: false,
        }
    }
}

/// Reads a header-first numeric CSV. The response column is picked by
/// name; every other column is a covariate, in file order.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let resp = headers
        .iter()
        .position(|h| h == opts.response)
        .ok_or_else(|| Error::Dimension {
            path: path.to_path_buf(),
            message: format!("missing response column {:?} in header", opts.response),
        })?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != resp)
        .map(|(_, h)| h.to_string())
        .collect();
    let width = headers.len();
    if width < 2 {
        return Err(Error::Dimension {
            path: path.to_path_buf(),
            message: "need a response and at least one covariate column".into(),
        });
    }
    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if let csv::ErrorKind::UnequalLengths {
                    pos,
                    expected_len,
                    len,
                } = e.kind()
                {
                    let line = pos.as_ref().map_or(0, |p| p.line());
                    return Err(Error::Dimension {
                        path: path.to_path_buf(),
                        message: format!(
                            "line {line} has {len} fields but the header declares {expected_len}"
                        ),
                    });
                }
                return Err(e.into());
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(width - 1);
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                column: c + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: c + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            if c == resp {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    let data = Dataset::from_rows(y, &rows, Some(names))?;
    Ok(if opts.standardize {
        data.standardized()
    } else {
        data
    })
}

/// Writes `y` followed by the covariates, shortest round-trip decimals.
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut line = String::from("y");
    for name in data.names() {
        line.push(',');
        line.push_str(name);
    }
    writeln!(w, "{line}")?;
    for i in 0..data.n() {
        line.clear();
        line.push_str(&format_f64(data.y()[i]));
        for j in 0..data.p() {
            line.push(',');
            line.push_str(&format_f64(data.column(j)[i]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}
