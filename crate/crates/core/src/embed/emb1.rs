//! EMB1 binary embedding files.
//!
//! ```text
//! EMB1\n
//! n=<count> d=<dim>\n
//! n × { u32 LE id byte length | UTF-8 id | dim × f32 LE }
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{normalize, EmbeddingMatrix};
use crate::error::{Error, Result};

const MAGIC: &[u8] = b"EMB1\n";

/// Raw file contents, rows as stored (not normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct Emb1Data {
    pub ids: Vec<String>,
    pub dim: usize,
    pub rows: Vec<f32>,
}

pub fn write_emb1(path: impl AsRef<Path>, ids: &[String], dim: usize, rows: &[f64]) -> Result<()> {
    let path = path.as_ref();
    if rows.len() != ids.len() * dim {
        return Err(Error::DimensionMismatch {
            expected: ids.len() * dim,
            found: rows.len(),
        });
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    out.write_all(MAGIC).map_err(io)?;
    writeln!(out, "n={} d={}", ids.len(), dim).map_err(io)?;
    for (id, row) in ids.iter().zip(rows.chunks(dim.max(1))) {
        let len =
            u32::try_from(id.len()).map_err(|_| Error::Emb1(format!("id `{id}` is too long")))?;
        out.write_all(&len.to_le_bytes()).map_err(io)?;
        out.write_all(id.as_bytes()).map_err(io)?;
        for &x in row {
            out.write_all(&(x as f32).to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<()> {
    write_emb1(path, m.ids(), m.dim(), m.as_slice())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Emb1(format!(
                "truncated file: needed {n} bytes for {what} at offset {}, {} left",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.buf[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Emb1("header line is not terminated".into()))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| Error::Emb1("header is not ASCII".into()))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let bad = || Error::Emb1(format!("bad header `{line}`, expected `n=<count> d=<dim>`"));
    let mut parts = line.split(' ');
    let n = parts
        .next()
        .and_then(|p| p.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let d = parts
        .next()
        .and_then(|p| p.strip_prefix("d="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((n, d))
}

pub fn parse_emb1(bytes: &[u8]) -> Result<Emb1Data> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(MAGIC.len(), "magic").ok() != Some(MAGIC) {
        return Err(Error::Emb1("bad magic, expected `EMB1\\n`".into()));
    }
    let (n, dim) = parse_header(cur.line()?)?;
    if dim == 0 {
        return Err(Error::Emb1("dim must be positive".into()));
    }
    let mut ids = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n.saturating_mul(dim).min(1 << 24));
    for i in 0..n {
        let len = cur.take(4, "id length")?;
        let len = u32::from_le_bytes(len.try_into().unwrap()) as usize;
        let id = cur.take(len, "id")?;
        let id = std::str::from_utf8(id)
            .map_err(|_| Error::Emb1(format!("record {i}: id is not UTF-8")))?;
        ids.push(id.to_string());
        let data = cur.take(dim * 4, &format!("row of `{id}`"))?;
        rows.extend(
            data.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap())),
        );
    }
    if cur.pos != bytes.len() {
        return Err(Error::Emb1(format!(
            "{} trailing bytes after {n} records",
            bytes.len() - cur.pos
        )));
    }
    Ok(Emb1Data { ids, dim, rows })
}

pub fn read_emb1(path: impl AsRef<Path>) -> Result<Emb1Data> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_emb1(&bytes)
}

/// Loads an EMB1 file and reorders its rows to `expected_ids`. Rows are
/// re-normalized; zero rows become the first basis vector and are flagged.
pub fn load_external_embeddings(
    path: impl AsRef<Path>,
    expected_ids: &[String],
) -> Result<EmbeddingMatrix> {
    let data = read_emb1(path)?;
    matrix_from_emb1(data, expected_ids, "external")
}

pub(crate) fn matrix_from_emb1(
    data: Emb1Data,
    expected_ids: &[String],
    backend_tag: &str,
) -> Result<EmbeddingMatrix> {
    let mut by_id: HashMap<&str, usize> = HashMap::with_capacity(data.ids.len());
    for (i, id) in data.ids.iter().enumerate() {
        if by_id.insert(id.as_str(), i).is_some() {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    for id in expected_ids {
        if !by_id.contains_key(id.as_str()) {
            return Err(Error::MissingId(id.clone()));
        }
    }
    if data.ids.len() != expected_ids.len() {
        let expected: std::collections::HashSet<&str> =
            expected_ids.iter().map(String::as_str).collect();
        let extra = data
            .ids
            .iter()
            .find(|id| !expected.contains(id.as_str()))
            .cloned()
            .unwrap_or_default();
        return Err(Error::ExtraId(extra));
    }

    let dim = data.dim;
    let mut rows = Vec::with_capacity(expected_ids.len() * dim);
    let mut sentinels = Vec::new();
    for (out_row, id) in expected_ids.iter().enumerate() {
        let src = by_id[id.as_str()];
        let mut row: Vec<f64> = data.rows[src * dim..(src + 1) * dim]
            .iter()
            .map(|&x| x as f64)
            .collect();
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("row `{id}` has non-finite values")));
        }
        if !normalize(&mut row) {
            row.iter_mut().for_each(|x| *x = 0.0);
            row[0] = 1.0;
            sentinels.push(out_row);
        }
        rows.extend(row);
    }
    Ok(
        EmbeddingMatrix::from_rows(expected_ids.to_vec(), dim, rows, backend_tag)?
            .with_sentinels(sentinels),
    )
}
