//! Graph file formats.
//!
//! Matrix Market: `%%MatrixMarket matrix coordinate <field> <symmetry>`,
//! 1-based `row col [value...]` entries. Rows become left vertices and
//! columns right vertices; values are ignored. `symmetric`,
//! `skew-symmetric` and `hermitian` files are expanded to both triangles.
//!
//! Edge list: one `u v` pair per line (0-based left id, right id). Lines
//! starting with `#` and blank lines are ignored. An optional size line
//! `p <n_left> <n_right>` may appear before the first edge; without it the
//! sizes are `max id + 1` on each side.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::matching::Matching;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    let path = path.as_ref();
    read_matrix_market(open(path)?).map_err(|e| attach_path(e, path))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    let path = path.as_ref();
    read_edge_list(open(path)?).map_err(|e| attach_path(e, path))
}

fn attach_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io { path: path.to_path_buf(), source },
        other => other,
    }
}

fn read_lines(reader: impl Read) -> Result<Vec<String>> {
    BufReader::new(reader)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|source| Error::Io { path: Default::default(), source })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Mirrored,
}

pub fn read_matrix_market(reader: impl Read) -> Result<BipartiteGraph> {
    let lines = read_lines(reader)?;
    let header = lines.first().ok_or_else(|| Error::MalformedHeader { line: 1, reason: "empty file".into() })?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    let bad = |reason: &str| Error::MalformedHeader { line: 1, reason: reason.into() };
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(bad("expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(bad("object must be `matrix`"));
    }
    if tokens[2] != "coordinate" {
        return Err(bad("only coordinate format is supported"));
    }
    if !matches!(tokens[3].as_str(), "pattern" | "real" | "integer" | "complex" | "double") {
        return Err(bad("unknown field type"));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" | "skew-symmetric" | "hermitian" => Symmetry::Mirrored,
        _ => return Err(bad("unknown symmetry")),
    };

    let mut idx = 1;
    while idx < lines.len() && is_blank_or_comment(&lines[idx], '%') {
        idx += 1;
    }
    let size_line = idx + 1;
    let sizes: Vec<&str> = lines
        .get(idx)
        .map(|l| l.split_whitespace().collect())
        .ok_or(Error::MalformedHeader { line: size_line, reason: "missing size line".into() })?;
    if sizes.len() != 3 {
        return Err(Error::MalformedHeader { line: size_line, reason: "size line must be `rows cols nnz`".into() });
    }
    let parse_size = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::MalformedHeader { line: size_line, reason: format!("invalid size {t:?}") })
    };
    let (rows, cols, nnz) = (parse_size(sizes[0])?, parse_size(sizes[1])?, parse_size(sizes[2])?);
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::MalformedHeader { line: size_line, reason: "dimension too large".into() });
    }
    idx += 1;

    let mut edges = Vec::with_capacity(nnz);
    let mut found = 0;
    while found < nnz {
        let Some(line) = lines.get(idx) else {
            return Err(Error::TruncatedEntries { line: idx + 1, expected: nnz, found });
        };
        let lineno = idx + 1;
        idx += 1;
        if is_blank_or_comment(line, '%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut coord = || -> Result<u64> {
            let t =
                it.next().ok_or_else(|| Error::MalformedEntry { line: lineno, reason: "expected `row col`".into() })?;
            t.parse::<u64>().map_err(|_| Error::MalformedEntry { line: lineno, reason: format!("invalid index {t:?}") })
        };
        let (r, c) = (coord()?, coord()?);
        if r == 0 || c == 0 || r > rows as u64 || c > cols as u64 {
            return Err(Error::EntryOutOfBounds { line: lineno, row: r, col: c, rows, cols });
        }
        let (u, v) = ((r - 1) as u32, (c - 1) as u32);
        edges.push((u, v));
        if symmetry == Symmetry::Mirrored && u != v {
            // Mirroring a non-square file would leave the declared bounds.
            if (v as usize) < rows && (u as usize) < cols {
                edges.push((v, u));
            }
        }
        found += 1;
    }
    BipartiteGraph::from_edges(rows, cols, &edges)
}

fn is_blank_or_comment(line: &str, marker: char) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with(marker)
}

fn parse_id(token: &str, line: usize) -> Result<u32> {
    if token.starts_with('-') && token[1..].chars().all(|c| c.is_ascii_digit()) && token.len() > 1 {
        return Err(Error::NegativeId { line, token: token.into() });
    }
    token.parse::<u32>().map_err(|_| Error::InvalidToken { line, token: token.into() })
}

pub fn read_edge_list(reader: impl Read) -> Result<BipartiteGraph> {
    let lines = read_lines(reader)?;
    let mut declared: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        if is_blank_or_comment(line, '#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.first() == Some(&"p") {
            if declared.is_some() || !edges.is_empty() {
                return Err(Error::MalformedEntry { line: lineno, reason: "size line must precede all edges".into() });
            }
            if tokens.len() != 3 {
                return Err(Error::MalformedEntry {
                    line: lineno,
                    reason: "size line must be `p n_left n_right`".into(),
                });
            }
            let nl = parse_id(tokens[1], lineno)? as usize;
            let nr = parse_id(tokens[2], lineno)? as usize;
            declared = Some((nl, nr));
            continue;
        }
        if tokens.len() != 2 {
            return Err(Error::MalformedEntry { line: lineno, reason: "expected `u v`".into() });
        }
        let u = parse_id(tokens[0], lineno)?;
        let v = parse_id(tokens[1], lineno)?;
        if let Some((nl, nr)) = declared {
            if u as usize >= nl || v as usize >= nr {
                return Err(Error::MalformedEntry {
                    line: lineno,
                    reason: format!("edge ({u}, {v}) outside declared {nl}x{nr}"),
                });
            }
        }
        edges.push((u, v));
    }
    let (nl, nr) = declared.unwrap_or_else(|| {
        let nl = edges.iter().map(|&(u, _)| u as usize + 1).max().unwrap_or(0);
        let nr = edges.iter().map(|&(_, v)| v as usize + 1).max().unwrap_or(0);
        (nl, nr)
    });
    BipartiteGraph::from_edges(nl, nr, &edges)
}

/// Writes the edge-list format, always with a size line.
pub fn write_edge_list(g: &BipartiteGraph, writer: impl Write) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "p {} {}", g.n_left(), g.n_right())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn save_edge_list(g: &BipartiteGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    write_edge_list(g, file).map_err(io)
}

/// Matched pairs as `u v` lines, `#` comments allowed. Pairs are returned
/// unchecked so that conflicting files can still be verified.
pub fn read_matching_pairs(reader: impl Read) -> Result<Vec<(u32, u32)>> {
    let mut pairs = Vec::new();
    for (i, line) in read_lines(reader)?.iter().enumerate() {
        let lineno = i + 1;
        if is_blank_or_comment(line, '#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::MalformedEntry { line: lineno, reason: "expected `u v`".into() });
        }
        pairs.push((parse_id(tokens[0], lineno)?, parse_id(tokens[1], lineno)?));
    }
    Ok(pairs)
}

pub fn load_matching_pairs(path: impl AsRef<Path>) -> Result<Vec<(u32, u32)>> {
    let path = path.as_ref();
    read_matching_pairs(open(path)?).map_err(|e| attach_path(e, path))
}

pub fn write_matching(m: &Matching, writer: impl Write) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "# {} pairs", m.size())?;
    for (u, v) in m.pairs() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn save_matching(m: &Matching, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io)?;
    write_matching(m, file).map_err(io)
}
