//! Plain-text complex matrix fixtures.
//!
//! A matrix section is a header `matrix <name> <rows> <cols>` followed by
//! `rows` lines of space-separated `re,im` cells. Floats use the shortest
//! representation that round-trips. Lines starting with `#` are comments.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::{CVector, C64};

pub fn format_cell(x: C64) -> String {
    format!("{},{}", x.re, x.im)
}

pub fn parse_cell(s: &str) -> Option<C64> {
    let (re, im) = s.split_once(',')?;
    Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

/// Writes equally sized row vectors as one matrix section.
pub fn write_rows<W: Write>(w: &mut W, name: &str, rows: &[CVector]) -> Result<()> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!("ragged rows in `{name}`")));
    }
    writeln!(w, "matrix {name} {} {cols}", rows.len())?;
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| format_cell(x)).collect();
        writeln!(w, "{}", cells.join(" "))?;
    }
    Ok(())
}

/// Line reader that skips comments/blank lines and tracks line numbers.
pub struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    pub fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line: 0,
        }
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<String> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(self.error("unexpected end of input")),
                Some(l) => {
                    let l = l?;
                    let t = l.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        return Ok(t.to_string());
                    }
                }
            }
        }
    }

    /// Reads `key v1 v2 ...` and returns the values.
    pub fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.next_line()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.error(format!("expected `{key}`")));
        }
        Ok(it.map(str::to_string).collect())
    }
}

pub fn read_rows<R: BufRead>(lines: &mut Lines<R>, name: &str) -> Result<Vec<CVector>> {
    let head = lines.keyed("matrix")?;
    let [n, rows, cols] = head.as_slice() else {
        return Err(lines.error("malformed matrix header"));
    };
    if n != name {
        return Err(lines.error(format!("expected matrix `{name}`, found `{n}`")));
    }
    let rows: usize = rows.parse().map_err(|_| lines.error("bad row count"))?;
    let cols: usize = cols.parse().map_err(|_| lines.error("bad column count"))?;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let l = lines.next_line()?;
        let cells = l
            .split_whitespace()
            .map(|c| parse_cell(c).ok_or_else(|| lines.error(format!("bad cell `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != cols {
            return Err(lines.error(format!("expected {cols} cells, found {}", cells.len())));
        }
        out.push(CVector::from_vec(cells));
    }
    Ok(out)
}
