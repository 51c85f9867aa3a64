//! Probability distributions over GF(2^m) and the operations the q-ary
//! sum-product decoder applies to them.
//!
//! Convolution is over the additive group of the field, i.e. index XOR.
//! The Walsh-Hadamard transform diagonalises it: the transform is a size-2
//! butterfly applied along each of the `m` binary index dimensions, so one
//! transform of a length-`q` array costs exactly `q * m` additions or
//! subtractions, and `wht(wht(x)) = q * x`.

use crate::error::{Error, Result};
use crate::galois::{Field, Symbol};

/// Operation tallies gathered by instrumented kernels.
///
/// Counting conventions:
/// - `gf_mul`: one per message relabelled by a nonzero field coefficient
///   (the permutation `x -> h x` is one field multiplication applied as an
///   index map).
/// - `float_add`: one per butterfly addition or subtraction inside a
///   Walsh-Hadamard transform.
/// - `float_mul`: one per real product of two message or spectrum entries.
/// - `aux_flops`: normalisation work (the sum and the rescale of each
///   message), clamping, and the `1/q` scaling of inverse transforms.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub gf_mul: u64,
    pub float_add: u64,
    pub float_mul: u64,
    pub aux_flops: u64,
}

impl OpCounts {
    pub fn accumulate(&mut self, other: &OpCounts) {
        self.gf_mul += other.gf_mul;
        self.float_add += other.float_add;
        self.float_mul += other.float_mul;
        self.aux_flops += other.aux_flops;
    }
}

/// A (possibly unnormalised) nonnegative weight vector over the `q`
/// elements of a field; `p[x]` is the weight of element `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    p: Vec<f64>,
}

/// Walsh-Hadamard image of a [`Dist`]. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    s: Vec<f64>,
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() || len > 256 {
        return Err(Error::InvalidArgument(format!("distribution length {len} is not a power of two in 2..=256")));
    }
    Ok(())
}

impl Dist {
    /// Wraps raw weights. Rejects negative or non-finite entries.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_len(p.len())?;
        if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidArgument(format!("invalid probability {bad}")));
        }
        Ok(Dist { p })
    }

    pub(crate) fn from_raw(p: Vec<f64>) -> Self {
        debug_assert!(p.iter().all(|v| *v >= 0.0));
        Dist { p }
    }

    pub fn uniform(q: usize) -> Self {
        Dist { p: vec![1.0 / q as f64; q] }
    }

    pub fn point_mass(q: usize, at: Symbol) -> Self {
        let mut p = vec![0.0; q];
        p[at as usize] = 1.0;
        Dist { p }
    }

    pub fn q(&self) -> usize {
        self.p.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    /// Index of the largest entry, ties resolved toward the smallest value.
    pub fn argmax(&self) -> Symbol {
        argmax(&self.p)
    }

    /// Rescales to unit sum.
    pub fn normalize(&self) -> Result<Dist> {
        let mut p = self.p.clone();
        normalize_in_place(&mut p, &mut OpCounts::default())?;
        Ok(Dist { p })
    }

    pub fn to_spectrum(&self) -> Spectrum {
        let mut s = self.p.clone();
        wht_in_place(&mut s, &mut OpCounts::default());
        Spectrum { s }
    }
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn from_values(s: Vec<f64>) -> Result<Self> {
        check_len(s.len())?;
        Ok(Spectrum { s })
    }

    /// Inverse transform, negative rounding residue clamped, normalised.
    pub fn to_dist(&self) -> Result<Dist> {
        let mut p = self.s.clone();
        wht_in_place(&mut p, &mut OpCounts::default());
        normalize_in_place(&mut p, &mut OpCounts::default())?;
        Ok(Dist { p })
    }
}

pub(crate) fn argmax(p: &[f64]) -> Symbol {
    let mut best = 0usize;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best as Symbol
}

/// Clamps negative entries to zero and rescales to unit sum.
pub(crate) fn normalize_in_place(p: &mut [f64], counts: &mut OpCounts) -> Result<()> {
    let mut sum = 0.0;
    for v in p.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
        sum += *v;
    }
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::DegenerateMessage);
    }
    let scale = 1.0 / sum;
    for v in p.iter_mut() {
        *v *= scale;
    }
    counts.aux_flops += 3 * p.len() as u64;
    Ok(())
}

/// Unnormalised Walsh-Hadamard transform, in place.
pub fn wht_in_place(x: &mut [f64], counts: &mut OpCounts) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let a = *u;
                let b = *v;
                *u = a + b;
                *v = a - b;
            }
        }
        half <<= 1;
    }
    counts.float_add += (n * n.trailing_zeros() as usize) as u64;
}

/// Unnormalised Walsh-Hadamard transform of an arbitrary power-of-two array.
pub fn wht(x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    wht_in_place(&mut y, &mut OpCounts::default());
    y
}

/// Distribution of `h * X` for `X ~ d`: `out[h x] = d[x]`.
pub fn scale_permute(field: &Field, h: Symbol, d: &Dist) -> Result<Dist> {
    if h == 0 {
        return Err(Error::InvalidArgument("scaling by zero".into()));
    }
    if d.q() != field.q() {
        return Err(Error::LengthMismatch { expected: field.q(), got: d.q() });
    }
    let row = field.mul_row(h);
    let mut out = vec![0.0; d.q()];
    for (x, &v) in d.p.iter().enumerate() {
        out[row[x] as usize] = v;
    }
    Ok(Dist { p: out })
}

/// Convolution over the additive group: `out[x] = sum_y a[y] b[x ^ y]`,
/// evaluated as `iwht(wht(a) * wht(b))` and normalised.
pub fn convolve(a: &Dist, b: &Dist) -> Result<Dist> {
    convolve_counted(a, b, &mut OpCounts::default())
}

pub fn convolve_counted(a: &Dist, b: &Dist, counts: &mut OpCounts) -> Result<Dist> {
    if a.q() != b.q() {
        return Err(Error::LengthMismatch { expected: a.q(), got: b.q() });
    }
    let mut fa = a.p.clone();
    let mut fb = b.p.clone();
    wht_in_place(&mut fa, counts);
    wht_in_place(&mut fb, counts);
    for (u, v) in fa.iter_mut().zip(&fb) {
        *u *= *v;
    }
    counts.float_mul += a.q() as u64;
    wht_in_place(&mut fa, counts);
    normalize_in_place(&mut fa, counts)?;
    Ok(Dist { p: fa })
}

/// Entrywise product of one or more distributions, normalised.
pub fn pointwise_product(ds: &[Dist]) -> Result<Dist> {
    let first = ds.first().ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    let mut p = first.p.clone();
    for d in &ds[1..] {
        if d.q() != p.len() {
            return Err(Error::LengthMismatch { expected: p.len(), got: d.q() });
        }
        for (u, v) in p.iter_mut().zip(&d.p) {
            *u *= *v;
        }
    }
    normalize_in_place(&mut p, &mut OpCounts::default())?;
    Ok(Dist { p })
}
