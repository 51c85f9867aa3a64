//! Extended alist format for matrices over GF(q).
//!
//! ```text
//! N M q [poly]
//! max_col_weight max_row_weight
//! col_weight_1 ... col_weight_N
//! row_weight_1 ... row_weight_M
//! N lines, one per column:  i_1 h_1 i_2 h_2 ...   (check index, label)
//! M lines, one per row:     j_1 h_1 j_2 h_2 ...   (variable index, label)
//! ```
//!
//! Indices are 1-based, entries within a line ascend by index, values are
//! separated by single spaces and every line ends with `\n`. `poly` is
//! written (as `0x..`) only when the field does not use the default
//! primitive polynomial. A `0 0` pair is padding and ignored on input.
//!
//! Binary codes over the default GF(2) are written in the classic layout
//! instead: a two-value header `N M` and bare indices, with each entry line
//! zero-padded to the maximum weight. The reader accepts both layouts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Code;
use crate::error::{Error, Result};
use crate::galois::{Field, DEFAULT_PRIMITIVE_POLYS};

pub fn write_alist<W: Write>(code: &Code, mut w: W) -> std::io::Result<()> {
    let field = code.field();
    let default_poly = field.poly() == DEFAULT_PRIMITIVE_POLYS[field.m() as usize];
    let classic = field.q() == 2 && default_poly;
    let (n, m) = (code.n(), code.m());
    let (max_col, max_row) = (code.max_col_weight(), code.max_row_weight());

    if classic {
        writeln!(w, "{n} {m}")?;
    } else if default_poly {
        writeln!(w, "{n} {m} {}", field.q())?;
    } else {
        writeln!(w, "{n} {m} {} {:#x}", field.q(), field.poly())?;
    }
    writeln!(w, "{max_col} {max_row}")?;
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    writeln!(w, "{}", join(&mut code.cols().iter().map(|c| c.len().to_string())))?;
    writeln!(w, "{}", join(&mut code.rows().iter().map(|r| r.len().to_string())))?;

    for (lists, width) in [(code.cols(), max_col), (code.rows(), max_row)] {
        for list in lists {
            let line = if classic {
                let mut t: Vec<String> = list.iter().map(|e| (e.index + 1).to_string()).collect();
                t.resize(width, "0".to_string());
                t.join(" ")
            } else {
                list.iter().map(|e| format!("{} {}", e.index + 1, e.label)).collect::<Vec<_>>().join(" ")
            };
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

pub fn save_alist(code: &Code, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_alist(code, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_alist(path: impl AsRef<Path>) -> Result<Code> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_alist(BufReader::new(file))
}

struct Lines {
    lines: Vec<(usize, Vec<u64>)>,
    pos: usize,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Alist { line, msg: msg.into() }
}

impl Lines {
    fn parse<R: BufRead>(r: R) -> Result<Lines> {
        let mut lines = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| err(lineno, e.to_string()))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let values = trimmed
                .split_whitespace()
                .map(|tok| {
                    let parsed = match tok.strip_prefix("0x") {
                        Some(hex) => u64::from_str_radix(hex, 16),
                        None => tok.parse::<u64>(),
                    };
                    parsed.map_err(|_| err(lineno, format!("invalid number `{tok}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            lines.push((lineno, values));
        }
        Ok(Lines { lines, pos: 0 })
    }

    fn next(&mut self, what: &str) -> Result<(usize, &[u64])> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let (lineno, values) = self
            .lines
            .get(self.pos)
            .ok_or_else(|| err(last + 1, format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok((*lineno, values))
    }
}

pub fn read_alist<R: Read>(r: R) -> Result<Code> {
    let mut lines = Lines::parse(BufReader::new(r))?;

    let (lineno, header) = lines.next("header")?;
    let (n, m, field, classic) = match *header {
        [n, m] => (n as usize, m as usize, Field::new(1, None)?, true),
        [n, m, q] | [n, m, q, _] => {
            if !(2..=256).contains(&q) || !q.is_power_of_two() {
                return Err(err(lineno, format!("field order {q} is not a power of two in 2..=256")));
            }
            let poly = header.get(3).map(|&p| p as u32);
            let field = Field::new(q.trailing_zeros(), poly).map_err(|e| err(lineno, e.to_string()))?;
            (n as usize, m as usize, field, false)
        }
        _ => return Err(err(lineno, "header must be `N M` or `N M q [poly]`")),
    };
    if n == 0 || m == 0 {
        return Err(err(lineno, "N and M must be positive"));
    }

    let (lineno, maxes) = lines.next("maximum weights")?;
    let &[max_col, max_row] = maxes else {
        return Err(err(lineno, "expected two maximum weights"));
    };

    let mut read_degrees = |count: usize, max: u64, what: &str| -> Result<Vec<usize>> {
        let (lineno, values) = lines.next(what)?;
        if values.len() != count {
            return Err(err(lineno, format!("expected {count} {what}, found {}", values.len())));
        }
        if let Some(&bad) = values.iter().find(|&&d| d > max) {
            return Err(err(lineno, format!("weight {bad} exceeds declared maximum {max}")));
        }
        Ok(values.iter().map(|&d| d as usize).collect())
    };
    let col_deg = read_degrees(n, max_col, "column weights")?;
    let row_deg = read_degrees(m, max_row, "row weights")?;

    let q = field.q() as u64;
    // Parses one entry line into (1-based index checked against `bound`, label).
    let mut read_entries = |expected: usize, bound: usize, what: &str| -> Result<(usize, Vec<(usize, u8)>)> {
        let (lineno, values) = lines.next(what)?;
        let pairs: Vec<(u64, u64)> = if classic {
            values.iter().map(|&i| (i, 1)).collect()
        } else {
            if values.len() % 2 != 0 {
                return Err(err(lineno, "odd number of values in (index, label) list"));
            }
            values.chunks_exact(2).map(|c| (c[0], c[1])).collect()
        };
        let mut out = Vec::with_capacity(expected);
        for (idx, label) in pairs {
            if idx == 0 {
                continue;
            }
            if idx as usize > bound {
                return Err(err(lineno, format!("index {idx} out of range 1..={bound}")));
            }
            if label == 0 {
                return Err(err(lineno, format!("zero label at index {idx}")));
            }
            if label >= q {
                return Err(err(lineno, format!("label {label} not in GF({q})")));
            }
            out.push((idx as usize - 1, label as u8));
        }
        if out.len() != expected {
            return Err(err(lineno, format!("expected {expected} entries, found {}", out.len())));
        }
        Ok((lineno, out))
    };

    let mut rows: Vec<Vec<(usize, u8)>> = vec![Vec::new(); m];
    for (j, &d) in col_deg.iter().enumerate() {
        let (_, entries) = read_entries(d, m, "column entries")?;
        for (i, label) in entries {
            rows[i].push((j, label));
        }
    }
    for (i, &d) in row_deg.iter().enumerate() {
        let (lineno, mut entries) = read_entries(d, n, "row entries")?;
        entries.sort();
        let mut from_cols = rows[i].clone();
        from_cols.sort();
        if entries != from_cols {
            return Err(err(lineno, format!("row {} disagrees with the column lists", i + 1)));
        }
    }
    if let Some(m) = lines.lines.get(lines.pos) {
        return Err(err(m.0, "trailing data after row lists"));
    }
    Code::from_rows(field, n, rows).map_err(|e| err(lineno, e.to_string()))
}
