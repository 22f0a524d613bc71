use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use dirac_spectral::PotentialMatrix;
use serde::Serialize;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON; floats use the shortest representation that round-trips.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

pub fn write_report<T: Serialize>(path: &Path, command: &str, timestamp: Option<u64>, body: &T) -> std::io::Result<()> {
    write_json(path, &Envelope { command, timestamp, body })
}

/// `x,p,q` rows in scientific notation with `precision` significant digits.
pub fn write_potential_csv(path: &Path, potential: &PotentialMatrix, precision: usize) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "p", "q"])?;
    let grid = potential.grid();
    let fmt = |v: f64| format!("{:.*e}", precision - 1, v);
    for j in 0..grid.len() {
        w.write_record([fmt(grid.node(j)), fmt(potential.p()[j]), fmt(potential.q()[j])])?;
    }
    w.flush()
}
