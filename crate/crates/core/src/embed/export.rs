//! Matrix file formats: dense CSV (`id,label,f0..f{m-1}`), sparse triplet
//! CSV (`row,col,value`), and the JSON sidecar that makes either one a
//! reproducible artifact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::murmur3::HashSeed;

/// Version of the on-disk matrix and sidecar layout.
pub const FORMAT_VERSION: u32 = 1;

/// Dense export refuses tables wider than this; use the sparse format.
pub const MAX_DENSE_COLUMNS: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    None,
    L1,
    L2,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Normalization::None),
            "l1" => Ok(Normalization::L1),
            "l2" => Ok(Normalization::L2),
            other => Err(Error::invalid(format!("unknown normalization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    #[default]
    Dense,
    Sparse,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(MatrixFormat::Dense),
            "sparse" => Ok(MatrixFormat::Sparse),
            other => Err(Error::invalid(format!("unknown matrix format `{other}`"))),
        }
    }
}

/// Metadata written next to every exported matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub format: MatrixFormat,
    pub normalize: Normalization,
    pub k: usize,
    pub m: u64,
    pub seed: HashSeed,
    pub ids: Vec<String>,
    pub labels: Vec<Option<String>>,
    pub skipped_ids: Vec<String>,
    pub collision_fraction: f64,
}

impl Sidecar {
    pub fn new(
        matrix: &EmbeddingMatrix,
        format: MatrixFormat,
        normalize: Normalization,
        skipped_ids: Vec<String>,
        collision_fraction: f64,
    ) -> Self {
        Sidecar {
            format_version: FORMAT_VERSION,
            format,
            normalize,
            k: matrix.config.k,
            m: matrix.config.m,
            seed: matrix.config.seed,
            ids: matrix.ids.clone(),
            labels: matrix.labels.clone(),
            skipped_ids,
            collision_fraction,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

enum Scale {
    Raw,
    By(f64),
}

fn scale_of(entries: &[(u32, u64)], norm: Normalization) -> Scale {
    match norm {
        Normalization::None => Scale::Raw,
        Normalization::L1 => Scale::By(entries.iter().map(|&(_, v)| v as f64).sum()),
        Normalization::L2 => Scale::By(
            entries
                .iter()
                .map(|&(_, v)| (v as f64) * (v as f64))
                .sum::<f64>()
                .sqrt(),
        ),
    }
}

fn write_value(w: &mut impl Write, v: u64, scale: &Scale) -> std::io::Result<()> {
    match scale {
        Scale::Raw => write!(w, "{v}"),
        Scale::By(d) if *d > 0.0 => write!(w, "{}", v as f64 / d),
        Scale::By(_) => write!(w, "0"),
    }
}

/// Dense CSV with header `id,label,f0,...,f{m-1}`.
pub fn write_dense(path: &Path, matrix: &EmbeddingMatrix, norm: Normalization) -> Result<()> {
    let m = matrix.config.m;
    if m > MAX_DENSE_COLUMNS {
        return Err(Error::invalid(format!(
            "table size {m} is too wide for dense export (limit {MAX_DENSE_COLUMNS}); use the sparse format"
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "id,label").map_err(io)?;
    for j in 0..m {
        write!(w, ",f{j}").map_err(io)?;
    }
    w.write_all(b"\n").map_err(io)?;

    for (row, (id, label)) in matrix.rows.iter().zip(matrix.ids.iter().zip(&matrix.labels)) {
        write!(w, "{},{}", id, label.as_deref().unwrap_or("")).map_err(io)?;
        let scale = scale_of(row.entries(), norm);
        let mut entries = row.entries().iter().peekable();
        for j in 0..m {
            w.write_all(b",").map_err(io)?;
            match entries.peek() {
                Some(&&(b, v)) if u64::from(b) == j => {
                    write_value(&mut w, v, &scale).map_err(io)?;
                    entries.next();
                }
                _ => w.write_all(b"0").map_err(io)?,
            }
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Sparse triplets `row,col,value` for every nonzero entry, row-major.
pub fn write_sparse(path: &Path, matrix: &EmbeddingMatrix, norm: Normalization) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(b"row,col,value\n").map_err(io)?;
    for (i, row) in matrix.rows.iter().enumerate() {
        let scale = scale_of(row.entries(), norm);
        for &(b, v) in row.entries() {
            write!(w, "{i},{b},").map_err(io)?;
            write_value(&mut w, v, &scale).map_err(io)?;
            w.write_all(b"\n").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a triplet file back into `(row, col, value)` tuples.
pub fn read_sparse(path: &Path) -> Result<Vec<(usize, u64, f64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
