//! JSONL catalogs of equilibrium records, one object per line.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that a
//! write/read cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::equilibria::{EquilibriumRecord, MassVector};
use crate::error::{Error, Result};
use crate::geometry::{Curvature, PolarConfiguration, SpaceSpec};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Wire form of a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordLine {
    pub sigma: i64,
    pub k: usize,
    pub masses: Vec<f64>,
    pub r: f64,
    pub alphas: Vec<f64>,
    pub z_block: Vec<f64>,
    pub angular_velocity: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl From<&EquilibriumRecord> for RecordLine {
    fn from(rec: &EquilibriumRecord) -> Self {
        RecordLine {
            sigma: rec.space.curvature().sign(),
            k: rec.space.k(),
            masses: rec.masses.as_slice().to_vec(),
            r: rec.cfg.r,
            alphas: rec.cfg.alphas.clone(),
            z_block: rec.cfg.z_block.clone(),
            angular_velocity: rec.angular_velocity,
            residual_norm: rec.residual_norm,
            converged: rec.converged,
            iterations: rec.iterations,
        }
    }
}

impl TryFrom<RecordLine> for EquilibriumRecord {
    type Error = Error;

    fn try_from(line: RecordLine) -> Result<Self> {
        let space = SpaceSpec::new(Curvature::from_sign(line.sigma)?, line.k)?;
        let masses = MassVector::new(line.masses)?;
        let cfg = PolarConfiguration { r: line.r, alphas: line.alphas, z_block: line.z_block };
        cfg.validate(&space)?;
        if masses.len() != cfg.n() {
            return Err(Error::InvalidInput(format!("{} masses for {} angles", masses.len(), cfg.n())));
        }
        if !(line.angular_velocity.is_finite() && line.angular_velocity >= 0.0) {
            return Err(Error::InvalidInput("angular velocity must be nonnegative".into()));
        }
        Ok(EquilibriumRecord {
            space,
            masses,
            cfg,
            angular_velocity: line.angular_velocity,
            residual_norm: line.residual_norm,
            converged: line.converged,
            iterations: line.iterations,
        })
    }
}

pub fn record_to_line(rec: &EquilibriumRecord) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    RecordLine::from(rec).serialize(&mut ser).expect("record serialization is infallible");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn record_from_line(line: &str) -> std::result::Result<EquilibriumRecord, String> {
    let wire: RecordLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    EquilibriumRecord::try_from(wire).map_err(|e| e.to_string())
}

/// Writes one JSON object per record. An empty catalog gives an empty file.
pub fn persist_catalog(catalog: &[EquilibriumRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for rec in catalog {
        writeln!(out, "{}", record_to_line(rec))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a catalog written by [`persist_catalog`]. Blank lines are skipped.
pub fn load_catalog(path: &Path) -> Result<Vec<EquilibriumRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = record_from_line(&line).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        })?;
        records.push(rec);
    }
    Ok(records)
}
