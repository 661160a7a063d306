//! File formats: RNORM-DENSE v1 matrices, Matrix Market coordinate files, pair lists, and
//! CSV results with a provenance comment block.
//!
//! RNORM-DENSE v1 is a single ASCII header line `RNORM-DENSE v1 <rows> <cols>` followed by
//! `rows·cols` little-endian `f64` values in row-major order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rnorm_core::{CsrMatrix, DenseMatrix, DenseOperator, LinearOperator, PairSet, SparseOperator};

use crate::error::{Error, Result};

pub const DENSE_MAGIC: &str = "RNORM-DENSE v1";

/// Header lines longer than this are rejected before any allocation.
const MAX_HEADER: usize = 128;

/// Above this many entries a sparse input is not densified for the exact oracle.
pub const DENSIFY_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Decided from the first bytes of the file.
    Auto,
    Dense,
    MatrixMarket,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Format::Auto),
            "dense" => Ok(Format::Dense),
            "mtx" | "matrix-market" => Ok(Format::MatrixMarket),
            other => Err(format!("unknown format {other:?} (expected auto, dense or mtx)")),
        }
    }
}

pub fn encode_dense(m: &DenseMatrix) -> Vec<u8> {
    let mut out = format!("{DENSE_MAGIC} {} {}\n", m.rows(), m.cols()).into_bytes();
    out.reserve(m.as_slice().len() * 8);
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses an RNORM-DENSE v1 image. `path` is only used in error messages.
pub fn decode_dense(bytes: &[u8], path: &Path) -> Result<DenseMatrix> {
    let newline = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::data(path, 1, "missing RNORM-DENSE v1 header line"))?;
    let header =
        std::str::from_utf8(&bytes[..newline]).map_err(|_| Error::data(path, 1, "header is not ASCII text"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != "RNORM-DENSE" || fields[1] != "v1" {
        return Err(Error::data(
            path,
            1,
            format!("expected `{DENSE_MAGIC} <rows> <cols>`, found {header:?}"),
        ));
    }
    let parse_dim = |s: &str, what: &str| -> Result<usize> {
        match s.parse::<usize>() {
            // the canonical spelling keeps save(load(file)) byte-identical
            Ok(v) if v > 0 && v.to_string() == s => Ok(v),
            _ => Err(Error::data(path, 1, format!("bad {what} count {s:?}"))),
        }
    };
    let rows = parse_dim(fields[2], "row")?;
    let cols = parse_dim(fields[3], "column")?;
    let payload = &bytes[newline + 1..];
    let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
    if expected != Some(payload.len()) {
        return Err(Error::data(
            path,
            0,
            format!(
                "header declares {rows}x{cols} doubles but the payload has {} bytes",
                payload.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (k, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(Error::data(
                path,
                0,
                format!("entry ({}, {}) is not finite", k / cols, k % cols),
            ));
        }
        data.push(v);
    }
    Ok(DenseMatrix::from_row_major(rows, cols, data)?)
}

pub fn read_dense(path: &Path) -> Result<DenseMatrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dense(&bytes, path)
}

pub fn write_dense(path: &Path, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, encode_dense(m)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

struct NumberedLines<'a, R> {
    inner: std::io::Lines<R>,
    line: usize,
    path: &'a Path,
}

impl<R: BufRead> NumberedLines<'_, R> {
    fn next_line(&mut self) -> Result<Option<(usize, String)>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Ok(l)) => {
                self.line += 1;
                Ok(Some((self.line, l)))
            }
            Some(Err(e)) => Err(Error::io(self.path, e)),
        }
    }
}

/// Reads a Matrix Market `coordinate` file (`real`, `integer` or `pattern`; `general`,
/// `symmetric` or `skew-symmetric`) into CSR form. Entries are 1-based in the file.
pub fn parse_matrix_market(reader: impl BufRead, path: &Path) -> Result<CsrMatrix> {
    let mut lines = NumberedLines {
        inner: reader.lines(),
        line: 0,
        path,
    };

    let (_, banner) = lines.next_line()?.ok_or_else(|| Error::data(path, 1, "empty file"))?;
    let banner_lc = banner.to_ascii_lowercase();
    let tokens: Vec<&str> = banner_lc.split_whitespace().collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::data(
            path,
            1,
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::data(
            path,
            1,
            format!("only coordinate storage is supported, found {:?}", tokens[2]),
        ));
    }
    let pattern = match tokens[3] {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(Error::data(path, 1, format!("unsupported field type {other:?}"))),
    };
    let symmetry = match tokens[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::data(path, 1, format!("unsupported symmetry {other:?}"))),
    };

    let mut size = None;
    while let Some((n, line)) = lines.next_line()? {
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let v: Vec<&str> = t.split_whitespace().collect();
        let parsed: Vec<usize> = v.iter().filter_map(|s| s.parse().ok()).collect();
        if v.len() != 3 || parsed.len() != 3 {
            return Err(Error::data(
                path,
                n,
                format!("expected `<rows> <cols> <entries>`, found {t:?}"),
            ));
        }
        size = Some((parsed[0], parsed[1], parsed[2]));
        break;
    }
    let (rows, cols, nnz) = size.ok_or_else(|| Error::data(path, 0, "missing size line"))?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(Error::data(
            path,
            0,
            format!("{rows}x{cols} matrix cannot be symmetric"),
        ));
    }

    let mut triplets = Vec::with_capacity(nnz.min(1 << 20));
    let mut seen = 0usize;
    let mut last_line = 0;
    while let Some((n, line)) = lines.next_line()? {
        last_line = n;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if seen == nnz {
            return Err(Error::data(path, n, format!("more than the declared {nnz} entries")));
        }
        let v: Vec<&str> = t.split_whitespace().collect();
        let want = if pattern { 2 } else { 3 };
        if v.len() != want {
            return Err(Error::data(
                path,
                n,
                format!("expected {want} fields, found {}", v.len()),
            ));
        }
        let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
                _ => Err(Error::data(path, n, format!("{what} index {s:?} outside 1..={bound}"))),
            }
        };
        let i = index(v[0], rows, "row")?;
        let j = index(v[1], cols, "column")?;
        let value = if pattern {
            1.0
        } else {
            match v[2].parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                _ => return Err(Error::data(path, n, format!("bad value {:?}", v[2]))),
            }
        };
        triplets.push((i, j, value));
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric if i != j => triplets.push((j, i, value)),
            Symmetry::Skew if i == j => {
                return Err(Error::data(path, n, "skew-symmetric file lists a diagonal entry"));
            }
            Symmetry::Skew => triplets.push((j, i, -value)),
            Symmetry::Symmetric => {}
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::data(
            path,
            last_line,
            format!("file ends after {seen} of {nnz} entries"),
        ));
    }
    Ok(CsrMatrix::from_triplets(rows, cols, &triplets)?)
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file), path)
}

/// A matrix loaded from disk, ready to be queried.
#[derive(Debug)]
pub enum LoadedMatrix {
    Dense(DenseOperator<'static>),
    Sparse(SparseOperator),
}

impl LoadedMatrix {
    pub fn operator(&self) -> &dyn LinearOperator {
        match self {
            LoadedMatrix::Dense(op) => op,
            LoadedMatrix::Sparse(op) => op,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.operator().shape()
    }

    /// Dense copy for the exact oracles. Refuses sparse inputs above [`DENSIFY_LIMIT`] entries.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match self {
            LoadedMatrix::Dense(op) => Ok(op.matrix().clone()),
            LoadedMatrix::Sparse(op) => {
                let (r, c) = (op.matrix().rows(), op.matrix().cols());
                if r.saturating_mul(c) > DENSIFY_LIMIT {
                    return Err(Error::Usage(format!(
                        "{r}x{c} sparse input is too large to densify for exact values"
                    )));
                }
                Ok(op.matrix().to_dense())
            }
        }
    }
}

fn sniff(path: &Path) -> Result<Format> {
    let mut head = [0u8; 14];
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let n = file.read(&mut head).map_err(|e| Error::io(path, e))?;
    let head = &head[..n];
    if head.starts_with(b"RNORM-DENSE") {
        Ok(Format::Dense)
    } else if head.eq_ignore_ascii_case(b"%%MatrixMarket") {
        Ok(Format::MatrixMarket)
    } else {
        Err(Error::data(path, 1, "neither an RNORM-DENSE nor a Matrix Market file"))
    }
}

pub fn load_matrix(path: &Path, format: Format) -> Result<LoadedMatrix> {
    let format = match format {
        Format::Auto => sniff(path)?,
        f => f,
    };
    Ok(match format {
        Format::Dense => LoadedMatrix::Dense(DenseOperator::new(read_dense(path)?)),
        _ => LoadedMatrix::Sparse(SparseOperator::new(read_matrix_market(path)?)),
    })
}

/// Reads 0-based `i,j` lines. Blank lines and `#` comments are skipped, as is a leading
/// `i,j` header row. Self-pairs and repeated pairs (in either order) are data errors.
pub fn read_pairs(path: &Path) -> Result<PairSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut pairs = Vec::new();
    let mut first_seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::data(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if k == 0 && record.len() == 2 && &record[0] == "i" && &record[1] == "j" {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::data(
                path,
                line,
                format!("expected `i,j`, found {} fields", record.len()),
            ));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::data(path, line, format!("bad index {s:?}")))
        };
        let (i, j) = (parse(&record[0])?, parse(&record[1])?);
        if i == j {
            return Err(Error::data(
                path,
                line,
                format!("pair ({i}, {j}) joins a point to itself"),
            ));
        }
        if let Some(prev) = first_seen.insert((i.min(j), i.max(j)), line) {
            return Err(Error::data(path, line, format!("pair ({i}, {j}) repeats line {prev}")));
        }
        pairs.push((i, j));
    }
    Ok(PairSet::new(pairs)?)
}

pub fn write_pairs(path: &Path, pairs: &PairSet) -> Result<()> {
    let mut sink = CsvSink::create(Some(path), &[], &["i", "j"])?;
    for (i, j) in pairs.iter() {
        sink.row([i.to_string(), j.to_string()])?;
    }
    sink.finish()
}

/// CSV writer that emits `# ` comment lines before the header.
pub struct CsvSink {
    writer: csv::Writer<Box<dyn Write>>,
    target: String,
}

impl CsvSink {
    /// Writes to `path`, or to standard output when `path` is `None`.
    pub fn create(path: Option<&Path>, comments: &[String], header: &[&str]) -> Result<Self> {
        let (mut out, target): (Box<dyn Write>, String) = match path {
            Some(p) => (
                Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
                p.display().to_string(),
            ),
            None => (Box::new(BufWriter::new(std::io::stdout())), "<stdout>".into()),
        };
        for c in comments {
            writeln!(out, "# {c}").map_err(|e| Error::io(Path::new(&target), e))?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(header)?;
        Ok(Self { writer, target })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(fields)?)
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(Path::new(&self.target), e))
    }
}
