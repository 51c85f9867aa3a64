//! Systematic encoder from Gauss-Jordan elimination of H.
//!
//! Pivot columns are searched from the last column backwards, so parity
//! symbols collect at the tail of the codeword whenever H allows it. After
//! reduction, pivot row `r` reads `c[p_r] + sum_j A[r][j] c[j] = 0` over the
//! non-pivot columns `j`; in characteristic 2 that is directly
//! `c[p_r] = sum_j A[r][j] c[j]`.

use super::Entry;
use crate::galois::{Field, Symbol};

#[derive(Debug, Clone)]
pub(crate) struct Encoder {
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    repr: ParityRepr,
}

#[derive(Debug, Clone)]
enum ParityRepr {
    /// `rank x K` coefficients over GF(q).
    Dense(Vec<Vec<Symbol>>),
    /// Bit-packed `rank x K` matrix for q = 2.
    Binary(Vec<Vec<u64>>),
}

impl Encoder {
    pub(crate) fn build(field: &Field, n: usize, rows: &[Vec<Entry>]) -> Encoder {
        if field.q() == 2 {
            build_binary(n, rows)
        } else {
            build_dense(field, n, rows)
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub(crate) fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub(crate) fn encode(&self, field: &Field, n: usize, info: &[Symbol]) -> Vec<Symbol> {
        let mut word = vec![0; n];
        for (&j, &s) in self.info_positions.iter().zip(info) {
            word[j] = s;
        }
        match &self.repr {
            ParityRepr::Dense(a) => {
                for (row, &p) in a.iter().zip(&self.parity_positions) {
                    word[p] = row.iter().zip(info).fold(0, |acc, (&h, &s)| acc ^ field.mul(h, s));
                }
            }
            ParityRepr::Binary(a) => {
                let packed = pack_bits(info);
                for (row, &p) in a.iter().zip(&self.parity_positions) {
                    let ones: u32 = row.iter().zip(&packed).map(|(x, y)| (x & y).count_ones()).sum();
                    word[p] = (ones & 1) as Symbol;
                }
            }
        }
        word
    }
}

fn pack_bits(bits: &[Symbol]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (k, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[k / 64] |= 1 << (k % 64);
        }
    }
    out
}

fn split_positions(n: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; n];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..n).filter(|&j| !is_pivot[j]).collect()
}

fn build_dense(field: &Field, n: usize, rows: &[Vec<Entry>]) -> Encoder {
    let m = rows.len();
    let mut a: Vec<Vec<Symbol>> = rows
        .iter()
        .map(|row| {
            let mut dense = vec![0; n];
            for e in row {
                dense[e.index] = e.label;
            }
            dense
        })
        .collect();

    let mut pivots = Vec::new();
    for col in (0..n).rev() {
        let rank = pivots.len();
        if rank == m {
            break;
        }
        let Some(r) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, r);
        let scale = field.mul_row(field.inv_nonzero(a[rank][col]));
        for v in a[rank].iter_mut() {
            *v = scale[*v as usize];
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let f = field.mul_row(row[col]);
            for (v, &p) in row.iter_mut().zip(&pivot_row) {
                *v ^= f[p as usize];
            }
        }
        pivots.push(col);
    }

    let info_positions = split_positions(n, &pivots);
    let reduced = a.iter().take(pivots.len()).map(|row| info_positions.iter().map(|&j| row[j]).collect()).collect();
    Encoder { info_positions, parity_positions: pivots, repr: ParityRepr::Dense(reduced) }
}

fn build_binary(n: usize, rows: &[Vec<Entry>]) -> Encoder {
    let m = rows.len();
    let words = n.div_ceil(64);
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let mut dense = vec![0u64; words];
            for e in row {
                dense[e.index / 64] |= 1 << (e.index % 64);
            }
            dense
        })
        .collect();
    let bit = |row: &[u64], j: usize| (row[j / 64] >> (j % 64)) & 1 == 1;

    let mut pivots = Vec::new();
    for col in (0..n).rev() {
        let rank = pivots.len();
        if rank == m {
            break;
        }
        let Some(r) = (rank..m).find(|&r| bit(&a[r], col)) else {
            continue;
        };
        a.swap(rank, r);
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && bit(row, col) {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v ^= p;
                }
            }
        }
        pivots.push(col);
    }

    let info_positions = split_positions(n, &pivots);
    let reduced = a
        .iter()
        .take(pivots.len())
        .map(|row| {
            let bits: Vec<Symbol> = info_positions.iter().map(|&j| bit(row, j) as Symbol).collect();
            pack_bits(&bits)
        })
        .collect();
    Encoder { info_positions, parity_positions: pivots, repr: ParityRepr::Binary(reduced) }
}
