use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::design::csv_error;
use crate::error::{Error, Result};
use crate::samplers::ChainOutput;

/// Writes a chain as CSV with header `iter,beta_1..beta_d,grad_1..grad_d`.
///
/// Values are printed with 17 significant digits so [`import_chain`] recovers
/// them bit for bit.
pub fn export_chain(chain: &ChainOutput, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let d = chain.dimension();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("iter");
    for j in 1..=d {
        header.push_str(&format!(",beta_{j}"));
    }
    for j in 1..=d {
        header.push_str(&format!(",grad_{j}"));
    }
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    for (i, (x, g)) in chain.draws().zip(chain.gradients()).enumerate() {
        let mut line = i.to_string();
        for v in x.iter().chain(g) {
            line.push_str(&format!(",{v:.16e}"));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a chain written by [`export_chain`].
///
/// The file does not store sampler metadata: the acceptance rate is recovered
/// as the fraction of moves between consecutive draws and the seed is set to 0.
pub fn import_chain(path: impl AsRef<Path>, model_tag: &str) -> Result<ChainOutput> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let width = headers.len();
    if width < 3 || width % 2 == 0 || &headers[0] != "iter" {
        return Err(Error::load(path, "header must be `iter,beta_1..beta_d,grad_1..grad_d`"));
    }
    let d = (width - 1) / 2;
    for j in 1..=d {
        if headers[j] != format!("beta_{j}") || headers[d + j] != format!("grad_{j}") {
            return Err(Error::load(path, format!("unexpected header column for coordinate {j}")));
        }
    }
    let mut draws = Vec::new();
    let mut gradients = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        for c in 1..width {
            let v: f64 = record[c].parse().map_err(|_| {
                Error::load(
                    path,
                    format!("line {}, column `{}`: bad number {:?}", r + 2, &headers[c], &record[c]),
                )
            })?;
            if c <= d {
                draws.push(v);
            } else {
                gradients.push(v);
            }
        }
    }
    let n = draws.len() / d;
    let moves = (1..n)
        .filter(|&i| draws[i * d..(i + 1) * d] != draws[(i - 1) * d..i * d])
        .count();
    let accept = if n > 1 { moves as f64 / (n - 1) as f64 } else { 1.0 };
    ChainOutput::from_parts(d, draws, gradients, accept, 0, model_tag)
}

/// Writes any serializable study report as pretty-printed JSON.
pub fn export_study<T: Serialize + ?Sized>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
