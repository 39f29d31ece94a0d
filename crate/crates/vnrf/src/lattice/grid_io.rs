//! Plain-text grid serialization (format tag `VNRF1`).
//!
//! ```text
//! VNRF1
//! d=2 dims=4x3 alphabet=2 boundary=periodic
//! 0 1 0
//! 1 1 0
//! 0 0 1
//! 1 0 1
//! ```
//!
//! Line 1 is the fixed tag. Line 2 carries dimension, extents (`e1` or
//! `e1xe2`), alphabet size, and boundary mode. Symbols follow row-major, one
//! lattice row per line. Round trips are bit-exact.

use super::{Alphabet, Boundary, Configuration, Window};
use crate::{Error, Result, Sym};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_grid(config: &Configuration, out: &mut impl Write) -> Result<()> {
    let w = config.window();
    let boundary = match config.boundary() {
        Boundary::Free => "free",
        Boundary::Periodic => "periodic",
        Boundary::Fixed(_) => {
            return Err(Error::InvalidParameter(
                "fixed boundary mode is not representable in VNRF1".into(),
            ))
        }
    };
    writeln!(out, "VNRF1")?;
    let dims = if w.d() == 1 {
        format!("{}", w.extents()[0])
    } else {
        format!("{}x{}", w.extents()[0], w.extents()[1])
    };
    writeln!(
        out,
        "d={} dims={} alphabet={} boundary={}",
        w.d(),
        dims,
        config.alphabet().size(),
        boundary
    )?;
    let row_len = if w.d() == 1 { w.extents()[0] } else { w.extents()[1] };
    for row in config.data().chunks(row_len) {
        let mut line = String::with_capacity(row.len() * 2);
        for (i, s) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&s.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_grid_file(config: &Configuration, path: impl AsRef<Path>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_grid(config, &mut f)?;
    f.flush()?;
    Ok(())
}

fn header_field<'a>(fields: &'a [&str], name: &str, line: usize) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(&format!("{name}=")))
        .ok_or_else(|| Error::Parse(format!("line {line}: missing field '{name}='")))
}

pub fn read_grid(input: &mut impl BufRead) -> Result<Configuration> {
    let mut lines = input.lines().enumerate();
    let (_, tag) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let tag = tag?;
    if tag.trim() != "VNRF1" {
        return Err(Error::Parse(format!("line 1: expected tag VNRF1, got '{}'", tag.trim())));
    }
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header line".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let d: usize = header_field(&fields, "d", 2)?
        .parse()
        .map_err(|e| Error::Parse(format!("line 2: bad dimension: {e}")))?;
    if d != 1 && d != 2 {
        return Err(Error::Parse(format!("line 2: dimension must be 1 or 2, got {d}")));
    }
    let dims_str = header_field(&fields, "dims", 2)?;
    let parts: Vec<&str> = dims_str.split('x').collect();
    if parts.len() != d {
        return Err(Error::Parse(format!(
            "line 2: dims '{dims_str}' does not match d={d}"
        )));
    }
    let mut ext = [0usize; 2];
    for (a, p) in parts.iter().enumerate() {
        ext[a] = p
            .parse()
            .map_err(|e| Error::Parse(format!("line 2: bad extent '{p}': {e}")))?;
    }
    let alphabet_size: usize = header_field(&fields, "alphabet", 2)?
        .parse()
        .map_err(|e| Error::Parse(format!("line 2: bad alphabet size: {e}")))?;
    let alphabet = Alphabet::new(alphabet_size)?;
    let boundary = match header_field(&fields, "boundary", 2)? {
        "free" => Boundary::Free,
        "periodic" => Boundary::Periodic,
        other => {
            return Err(Error::Parse(format!(
                "line 2: boundary must be 'free' or 'periodic', got '{other}'"
            )))
        }
    };
    let window = if d == 1 { Window::line(ext[0])? } else { Window::rect(ext[0], ext[1])? };
    let (n_rows, row_len) = if d == 1 { (1, ext[0]) } else { (ext[0], ext[1]) };

    let mut data: Vec<Sym> = Vec::with_capacity(window.len());
    let mut rows_seen = 0usize;
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows_seen += 1;
        if rows_seen > n_rows {
            return Err(Error::Parse(format!("line {}: more rows than dims declare", idx + 1)));
        }
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad symbol '{tok}': {e}", idx + 1)))?;
            if v >= alphabet_size {
                return Err(Error::Parse(format!(
                    "line {}: symbol {v} outside alphabet of size {alphabet_size}",
                    idx + 1
                )));
            }
            data.push(v as Sym);
            count += 1;
        }
        if count != row_len {
            return Err(Error::Parse(format!(
                "line {}: expected {row_len} symbols in row, got {count}",
                idx + 1
            )));
        }
    }
    if rows_seen != n_rows {
        return Err(Error::Parse(format!(
            "expected {n_rows} symbol rows, got {rows_seen}"
        )));
    }
    Configuration::from_data(window, alphabet, boundary, data)
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<Configuration> {
    let mut f = BufReader::new(File::open(path)?);
    read_grid(&mut f)
}
