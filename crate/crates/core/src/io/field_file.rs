//! Line-oriented text format for nodal fields.
//!
//! ```text
//! HESSMIN-FIELD 1
//! n 2
//! N 17
//! h 1.25e-1
//! values
//! <N^n values, N per line, row-major, last axis fastest>
//! mask
//! <N^n tokens from I/B/E in the same order>
//! ```
//!
//! Values use shortest round-trip scientific notation, so a read after a write
//! reproduces every bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{DiscMesh, NodeClass, ScalarField};

pub const FIELD_MAGIC: &str = "HESSMIN-FIELD 1";

/// Renders `u` in the field format.
pub fn format_field(u: &ScalarField) -> String {
    let mesh = u.mesh();
    let n = mesh.size();
    let mut out = String::with_capacity(mesh.node_count() * 24);
    let _ = writeln!(out, "{FIELD_MAGIC}");
    let _ = writeln!(out, "n {}", mesh.dim());
    let _ = writeln!(out, "N {n}");
    let _ = writeln!(out, "h {:e}", mesh.h());
    out.push_str("values\n");
    for row in u.values().chunks(n) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
    out.push_str("mask\n");
    for row in mesh.classes().chunks(n) {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(c.token());
        }
        out.push('\n');
    }
    out
}

/// Atomically writes `u` to `path` (temp file in the same directory, then rename).
pub fn write_field(u: &ScalarField, path: &Path) -> Result<()> {
    write_atomic(path, format_field(u).as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text).map_err(|reason| Error::format(path, reason))
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> std::result::Result<&'a str, String> {
    let line = lines.next().ok_or_else(|| format!("missing `{key}` line"))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v),
        _ => Err(format!("expected `{key} <value>`, found `{line}`")),
    }
}

/// Parses the field format; errors are plain reasons for the caller to wrap.
pub fn parse_field(text: &str) -> std::result::Result<ScalarField, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim_end() == FIELD_MAGIC => {}
        Some(l) => return Err(format!("bad magic line `{l}`")),
        None => return Err("empty file".into()),
    }
    let dim: usize = header(&mut lines, "n")?.parse().map_err(|_| "unparsable dimension".to_string())?;
    let size: usize = header(&mut lines, "N")?.parse().map_err(|_| "unparsable grid size".to_string())?;
    let h: f64 = header(&mut lines, "h")?.parse().map_err(|_| "unparsable spacing".to_string())?;
    if dim != 2 && dim != 3 {
        return Err(format!("dimension must be 2 or 3, got {dim}"));
    }
    let mesh = DiscMesh::new(dim, size).map_err(|e| e.to_string())?;
    if (h - mesh.h()).abs() > 1e-12 * mesh.h() {
        return Err(format!("spacing {h} does not match N = {size} (expected {})", mesh.h()));
    }
    if lines.next().map(str::trim_end) != Some("values") {
        return Err("missing `values` line".into());
    }
    let expected = mesh.node_count();
    let mut values = Vec::with_capacity(expected);
    let mut mask_seen = false;
    for line in lines.by_ref() {
        if line.trim_end() == "mask" {
            mask_seen = true;
            break;
        }
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| format!("unparsable value `{tok}`"))?);
        }
    }
    if values.len() != expected {
        return Err(format!(
            "value count {} does not match N^n = {expected}",
            values.len()
        ));
    }
    if !mask_seen {
        return Err("missing `mask` line".into());
    }
    let mut count = 0;
    for tok in lines.flat_map(str::split_whitespace) {
        let mut chars = tok.chars();
        let class = match (chars.next().and_then(NodeClass::from_token), chars.next()) {
            (Some(c), None) => c,
            _ => return Err(format!("bad mask token `{tok}`")),
        };
        if count < expected && class != mesh.class(count) {
            return Err(format!("mask disagrees with the grid at node {count}"));
        }
        count += 1;
    }
    if count != expected {
        return Err(format!("mask token count {count} does not match N^n = {expected}"));
    }
    ScalarField::from_values(&mesh, values).map_err(|e| e.to_string())
}
