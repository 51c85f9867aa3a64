//! LDPC codes over GF(q): sparse parity-check matrices, their Tanner
//! graphs, systematic encoding, PEG construction and alist I/O.

mod alist;
mod encoder;
mod girth;
mod peg;

pub use alist::{load_alist, read_alist, save_alist, write_alist};
pub use peg::peg_construct;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{Field, Symbol};
use encoder::Encoder;

/// One nonzero entry of H seen from a row (index = variable) or from a
/// column (index = check).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub index: usize,
    pub label: Symbol,
}

/// An LDPC code: the null space of a sparse `M x N` matrix over GF(q).
#[derive(Debug, Clone)]
pub struct Code {
    field: Field,
    n: usize,
    rows: Vec<Vec<Entry>>,
    cols: Vec<Vec<Entry>>,
    encoder: Encoder,
}

impl PartialEq for Code {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n && self.rows == other.rows
    }
}

impl Code {
    /// Builds a code from the nonzero entries of each row, given as
    /// `(variable index, label)` pairs.
    pub fn from_rows(field: Field, n: usize, rows: Vec<Vec<(usize, Symbol)>>) -> Result<Code> {
        if n == 0 || rows.is_empty() {
            return Err(Error::InvalidArgument("code needs N >= 1 and M >= 1".into()));
        }
        let q = field.q();
        let mut cols: Vec<Vec<Entry>> = vec![Vec::new(); n];
        let mut sorted_rows = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let mut row: Vec<Entry> = row.into_iter().map(|(index, label)| Entry { index, label }).collect();
            row.sort_by_key(|e| e.index);
            for (k, e) in row.iter().enumerate() {
                if e.index >= n {
                    return Err(Error::InvalidArgument(format!("row {i}: column {} out of range (N = {n})", e.index)));
                }
                if e.label == 0 || e.label as usize >= q {
                    return Err(Error::InvalidArgument(format!(
                        "row {i}: label {} is not a nonzero element of GF({q})",
                        e.label
                    )));
                }
                if k > 0 && row[k - 1].index == e.index {
                    return Err(Error::InvalidArgument(format!("row {i}: duplicate column {}", e.index)));
                }
                cols[e.index].push(Entry { index: i, label: e.label });
            }
            sorted_rows.push(row);
        }
        let encoder = Encoder::build(&field, n, &sorted_rows);
        if encoder.rank() < sorted_rows.len() {
            log::warn!(
                "parity-check matrix is rank deficient: rank {} < M = {}; K = {}",
                encoder.rank(),
                sorted_rows.len(),
                n - encoder.rank()
            );
        }
        Ok(Code { field, n, rows: sorted_rows, cols, encoder })
    }

    /// Builds a code from a dense matrix (row-major, `m` rows of `n`).
    pub fn from_dense(field: Field, dense: &[Vec<Symbol>]) -> Result<Code> {
        let n = dense.first().map_or(0, |r| r.len());
        let rows = dense
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: r.len() });
                }
                Ok(r.iter().enumerate().filter(|(_, &h)| h != 0).map(|(j, &h)| (j, h)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Code::from_rows(field, n, rows)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Block length in symbols.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of checks (rows of H).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of information symbols, `N - rank(H)`.
    pub fn k(&self) -> usize {
        self.n - self.encoder.rank()
    }

    pub fn rank(&self) -> usize {
        self.encoder.rank()
    }

    /// Actual rate `(N - rank H) / N`.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Lower bound `1 - M/N = 1 - avg col weight / avg row weight`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.m() as f64 / self.n as f64
    }

    pub fn rows(&self) -> &[Vec<Entry>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<Entry>] {
        &self.cols
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn avg_col_weight(&self) -> f64 {
        self.edge_count() as f64 / self.n as f64
    }

    pub fn avg_row_weight(&self) -> f64 {
        self.edge_count() as f64 / self.m() as f64
    }

    pub fn max_row_weight(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_col_weight(&self) -> usize {
        self.cols.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Positions of the information symbols inside a codeword, ascending.
    pub fn info_positions(&self) -> &[usize] {
        self.encoder.info_positions()
    }

    /// `H word^T`.
    pub fn syndrome(&self, word: &[Symbol]) -> Result<Vec<Symbol>> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: word.len() });
        }
        let q = self.field.q();
        if let Some(&bad) = word.iter().find(|&&s| s as usize >= q) {
            return Err(Error::SymbolOutOfRange { value: bad as u32, q });
        }
        Ok(self.rows.iter().map(|row| self.check_sum(row, word)).collect())
    }

    #[inline]
    fn check_sum(&self, row: &[Entry], word: &[Symbol]) -> Symbol {
        row.iter().fold(0, |acc, e| acc ^ self.field.mul(e.label, word[e.index]))
    }

    /// True if every check is satisfied. `word` must have length N.
    pub fn is_codeword(&self, word: &[Symbol]) -> bool {
        word.len() == self.n && self.rows.iter().all(|row| self.check_sum(row, word) == 0)
    }

    /// Systematic encoding: `info` lands on [`Code::info_positions`].
    pub fn encode(&self, info: &[Symbol]) -> Result<Vec<Symbol>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch { expected: self.k(), got: info.len() });
        }
        let q = self.field.q();
        if let Some(&bad) = info.iter().find(|&&s| s as usize >= q) {
            return Err(Error::SymbolOutOfRange { value: bad as u32, q });
        }
        Ok(self.encoder.encode(&self.field, self.n, info))
    }

    /// Extracts the information symbols from a codeword.
    pub fn extract_info(&self, word: &[Symbol]) -> Vec<Symbol> {
        self.info_positions().iter().map(|&j| word[j]).collect()
    }

    /// Shortest cycle of the Tanner graph, `None` if the graph is a forest.
    pub fn girth(&self) -> Option<usize> {
        girth::girth(self)
    }
}

/// Column weights for PEG construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    /// Number of columns (variable nodes).
    pub n: usize,
    /// Number of rows (check nodes).
    pub m: usize,
    pub column_weights: Vec<usize>,
}

impl DegreeProfile {
    pub fn regular(n: usize, m: usize, weight: usize) -> Self {
        DegreeProfile { n, m, column_weights: vec![weight; n] }
    }

    /// Mixed-weight profile from `(weight, fraction of columns)` pairs.
    /// Counts are rounded by largest remainder so they sum to `n`; columns
    /// are listed in ascending weight.
    pub fn from_fractions(n: usize, m: usize, fractions: &[(usize, f64)]) -> Result<Self> {
        let total: f64 = fractions.iter().map(|(_, f)| f).sum();
        if fractions.is_empty() || !(total > 0.0) || fractions.iter().any(|(_, f)| *f < 0.0) {
            return Err(Error::InfeasibleProfile("fractions must be nonnegative with positive sum".into()));
        }
        let exact: Vec<f64> = fractions.iter().map(|(_, f)| f / total * n as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut short = n - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..fractions.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if short == 0 {
                break;
            }
            counts[i] += 1;
            short -= 1;
        }
        let mut pairs: Vec<(usize, usize)> = fractions.iter().map(|(w, _)| *w).zip(counts).collect();
        pairs.sort();
        let column_weights = pairs.into_iter().flat_map(|(w, c)| std::iter::repeat_n(w, c)).collect();
        Ok(DegreeProfile { n, m, column_weights })
    }

    pub fn edge_count(&self) -> usize {
        self.column_weights.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InfeasibleProfile("N and M must be at least 1".into()));
        }
        if self.column_weights.len() != self.n {
            return Err(Error::InfeasibleProfile(format!(
                "{} column weights for N = {}",
                self.column_weights.len(),
                self.n
            )));
        }
        if let Some(&w) = self.column_weights.iter().find(|&&w| w == 0 || w > self.m) {
            return Err(Error::InfeasibleProfile(format!("column weight {w} not in 1..={} (M)", self.m)));
        }
        Ok(())
    }
}
