//! Corpus loading (FASTA + `id,label` CSV) and the deterministic synthetic
//! corpus generator.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 20 standard amino acids.
pub const AMINO_ACIDS: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Residue used for unknown or ambiguous positions.
pub const UNKNOWN_RESIDUE: u8 = b'X';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: String,
    pub residues: String,
    pub label: Option<String>,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, residues: impl Into<String>, label: Option<String>) -> Self {
        SequenceRecord {
            id: id.into(),
            residues: residues.into(),
            label,
        }
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.residues.as_bytes()
    }
}

/// An ordered, immutable collection of sequences.
///
/// `alphabet` is the set of residue characters observed in the records; no
/// fixed alphabet is enforced because hashing does not need one. Ambiguity
/// codes are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    records: Vec<SequenceRecord>,
    alphabet: BTreeSet<u8>,
    label_set: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, checking that ids are unique and sequences non-empty.
    pub fn new(records: Vec<SequenceRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        let mut alphabet = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            if r.residues.is_empty() {
                return Err(Error::EmptySequence(r.id.clone()));
            }
            alphabet.extend(r.residues.bytes());
            if let Some(l) = &r.label {
                labels.insert(l.clone());
            }
        }
        Ok(Corpus {
            records,
            alphabet,
            label_set: labels.into_iter().collect(),
        })
    }

    pub fn records(&self) -> &[SequenceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn alphabet(&self) -> &BTreeSet<u8> {
        &self.alphabet
    }

    /// Sorted, duplicate-free labels present in the corpus.
    pub fn label_set(&self) -> &[String] {
        &self.label_set
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_some())
    }

    /// Index of every record's label in [`label_set`](Self::label_set).
    pub fn label_indices(&self) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .label_set
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        self.records
            .iter()
            .map(|r| match &r.label {
                Some(l) => Ok(index[l.as_str()]),
                None => Err(Error::MissingLabel(r.id.clone())),
            })
            .collect()
    }

    /// Splits off records shorter than `k`, returning the kept corpus and
    /// the ids that were dropped.
    pub fn without_shorter_than(&self, k: usize) -> (Corpus, Vec<String>) {
        let (kept, dropped): (Vec<_>, Vec<_>) =
            self.records.iter().cloned().partition(|r| r.len() >= k);
        let skipped = dropped.into_iter().map(|r| r.id).collect();
        // Subsets of a valid corpus are valid.
        let corpus = Corpus::new(kept).expect("subset of a valid corpus");
        (corpus, skipped)
    }
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String>)> + '_> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| (i + 1, l.map_err(|e| Error::io(path, e)))))
}

/// Parses a FASTA file into `(id, residues)` pairs. Ids are the header up
/// to the first whitespace; multi-line sequences are joined and uppercased.
pub fn read_fasta(path: &Path) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (line_no, line) in read_lines(path)? {
        let line = line?;
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(Error::Malformed {
                    path: path.into(),
                    line: line_no,
                    message: "empty FASTA header".into(),
                });
            }
            out.push((id, String::new()));
        } else if !line.is_empty() {
            let Some((_, seq)) = out.last_mut() else {
                return Err(Error::Malformed {
                    path: path.into(),
                    line: line_no,
                    message: "sequence data before first header".into(),
                });
            };
            seq.extend(line.chars().filter(|c| !c.is_whitespace()).map(|c| c.to_ascii_uppercase()));
        }
    }
    Ok(out)
}

/// Reads a headerless `id,label` CSV.
pub fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        if row.len() != 2 {
            return Err(Error::Malformed {
                path: path.into(),
                line: i + 1,
                message: format!("expected 2 columns (id,label), found {}", row.len()),
            });
        }
        out.push((row[0].to_string(), row[1].to_string()));
    }
    Ok(out)
}

/// Loads a FASTA corpus, optionally attaching labels from an `id,label` CSV
/// that must cover every record.
pub fn load_fasta(path: &Path, labels_path: Option<&Path>) -> Result<Corpus> {
    let entries = read_fasta(path)?;
    let mut labels: Option<HashMap<String, String>> = None;
    if let Some(lp) = labels_path {
        let ids: HashSet<&str> = entries.iter().map(|(id, _)| id.as_str()).collect();
        let mut map = HashMap::new();
        for (id, label) in read_labels(lp)? {
            if !ids.contains(id.as_str()) {
                return Err(Error::UnknownLabelId(id));
            }
            map.insert(id, label);
        }
        labels = Some(map);
    }

    let mut records = Vec::with_capacity(entries.len());
    for (id, residues) in entries {
        let label = match &mut labels {
            Some(map) => Some(map.remove(&id).ok_or_else(|| Error::MissingLabel(id.clone()))?),
            None => None,
        };
        records.push(SequenceRecord { id, residues, label });
    }
    Corpus::new(records)
}

/// Writes records as FASTA, wrapping sequence lines at `width` (0 = no wrap).
pub fn write_fasta(path: &Path, records: &[SequenceRecord], width: usize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for r in records {
        writeln!(w, ">{}", r.id).map_err(io)?;
        if width == 0 {
            writeln!(w, "{}", r.residues).map_err(io)?;
        } else {
            for chunk in r.as_bytes().chunks(width) {
                w.write_all(chunk).map_err(io)?;
                w.write_all(b"\n").map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// Writes the `id,label` CSV for every labeled record.
pub fn write_labels(path: &Path, records: &[SequenceRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    for r in records {
        if let Some(l) = &r.label {
            w.write_record([r.id.as_str(), l.as_str()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Records per class: one count for every class, or one count per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassSizes {
    Uniform(usize),
    PerClass(Vec<usize>),
}

impl ClassSizes {
    fn size_of(&self, class: usize) -> usize {
        match self {
            ClassSizes::Uniform(n) => *n,
            ClassSizes::PerClass(v) => v[class],
        }
    }
}

/// Parameters of the synthetic labeled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub seqs_per_class: ClassSizes,
    pub base_length: usize,
    pub mutations_per_class: usize,
    pub noise_rate: f64,
    pub rng_seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthSpec(m));
        if self.n_classes == 0 {
            return bad("n_classes must be positive".into());
        }
        if self.base_length == 0 {
            return bad("base_length must be positive".into());
        }
        match &self.seqs_per_class {
            ClassSizes::Uniform(0) => return bad("seqs_per_class must be positive".into()),
            ClassSizes::PerClass(v) if v.len() != self.n_classes => {
                return bad(format!(
                    "seqs_per_class lists {} classes, n_classes is {}",
                    v.len(),
                    self.n_classes
                ))
            }
            ClassSizes::PerClass(v) if v.contains(&0) => {
                return bad("every class needs at least one sequence".into())
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return bad(format!("noise_rate {} outside [0, 1]", self.noise_rate));
        }
        match self.mutations_per_class.checked_mul(self.n_classes) {
            Some(total) if total <= self.base_length => Ok(()),
            _ => bad(format!(
                "{} classes x {} mutations do not fit in {} positions",
                self.n_classes, self.mutations_per_class, self.base_length
            )),
        }
    }

    /// Label of class `c`, zero-padded so lexical order equals class order.
    pub fn class_label(&self, c: usize) -> String {
        let width = (self.n_classes.max(2) - 1).to_string().len();
        format!("L{c:0width$}")
    }
}

fn substitute(rng: &mut ChaCha8Rng, current: u8) -> u8 {
    loop {
        let r = AMINO_ACIDS[rng.gen_range(0..AMINO_ACIDS.len())];
        if r != current {
            return r;
        }
    }
}

/// Generates a labeled corpus: one random ancestor, a fixed set of
/// substitutions per class at class-reserved positions, and independent
/// per-position noise substitutions for every record.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let ancestor: Vec<u8> = (0..spec.base_length)
        .map(|_| AMINO_ACIDS[rng.gen_range(0..AMINO_ACIDS.len())])
        .collect();

    let mut positions: Vec<usize> = (0..spec.base_length).collect();
    positions.shuffle(&mut rng);

    let consensus: Vec<Vec<u8>> = (0..spec.n_classes)
        .map(|c| {
            let mut seq = ancestor.clone();
            let start = c * spec.mutations_per_class;
            for &p in &positions[start..start + spec.mutations_per_class] {
                seq[p] = substitute(&mut rng, seq[p]);
            }
            seq
        })
        .collect();

    let mut records = Vec::new();
    for (c, base) in consensus.iter().enumerate() {
        let label = spec.class_label(c);
        for j in 0..spec.seqs_per_class.size_of(c) {
            let mut seq = base.clone();
            if spec.noise_rate > 0.0 {
                for residue in seq.iter_mut() {
                    if rng.gen_bool(spec.noise_rate) {
                        *residue = substitute(&mut rng, *residue);
                    }
                }
            }
            records.push(SequenceRecord {
                id: format!("{label}_{j:05}"),
                residues: String::from_utf8(seq).expect("amino-acid alphabet is ASCII"),
                label: Some(label.clone()),
            });
        }
    }
    Corpus::new(records)
}
