//! Square QAM, per-axis labelings, multilevel set partitioning and soft
//! demapping.
//!
//! A point is a pair of per-axis indices `(i, j)` in `0..side` with
//! amplitude `(2 i - (side - 1)) / sqrt(E_avg)`, so the mean symbol energy
//! is 1 (`E_avg = 2 (M - 1) / 3`: 42 for QAM-64, 170 for QAM-256).
//!
//! A [`LevelPartition`] splits the `log2 M` label bits into levels. Each
//! level owns `a_I` bits of the in-phase axis label and `a_Q` bits of the
//! quadrature axis label, allocated as evenly as the remaining axis bits
//! allow, with the in-phase axis taking the extra bit of an odd width.
//! Level 0 occupies the least significant bits of both axis labels, level 1
//! the next ones, and so on. Inside a level symbol the low `a_I` bits go to
//! the in-phase axis and the next `a_Q` bits to the quadrature axis.
//!
//! With [`AxisLabeling::Natural`] the axis label is the axis index itself,
//! so fixing the symbols of levels `< l` leaves a coset on a coarser
//! square grid: the set-partitioning structure used for multistage
//! decoding. [`AxisLabeling::Gray`] maps the axis label through the binary
//! reflected Gray code and is the labeling of single-level schemes.
//!
//! The full label of a point concatenates the level symbols, level 0 in the
//! least significant bits.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galois::Symbol;
use crate::messages::Dist;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    bits: u32,
    side: usize,
    scale: f64,
}

impl Constellation {
    /// Square `2^bits`-QAM; `bits` even, 2..=8.
    pub fn square(bits: u32) -> Result<Self> {
        if !(2..=8).contains(&bits) || !bits.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "square QAM needs an even number of bits in 2..=8, got {bits}"
            )));
        }
        let size = 1usize << bits;
        let side = 1usize << (bits / 2);
        let e_avg = 2.0 * (size as f64 - 1.0) / 3.0;
        Ok(Constellation { bits, side, scale: 1.0 / e_avg.sqrt() })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn size(&self) -> usize {
        1 << self.bits
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits_per_axis(&self) -> u32 {
        self.bits / 2
    }

    /// Amplitude of axis index `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        (2.0 * i as f64 - (self.side as f64 - 1.0)) * self.scale
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.amplitude(i), self.amplitude(j))
    }

    /// Distance between neighbouring points of the full grid.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    /// Mean of `|s|^2` over all points.
    pub fn mean_energy(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.side {
            for j in 0..self.side {
                total += self.point(i, j).norm_sqr();
            }
        }
        total / self.size() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisLabeling {
    Gray,
    Natural,
}

impl AxisLabeling {
    fn index(self, label: usize) -> usize {
        match self {
            AxisLabeling::Natural => label,
            AxisLabeling::Gray => {
                let mut idx = label;
                let mut shift = label >> 1;
                while shift != 0 {
                    idx ^= shift;
                    shift >>= 1;
                }
                idx
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisBits {
    pub i: u32,
    pub q: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelPartition {
    constellation: Constellation,
    labeling: AxisLabeling,
    widths: Vec<u32>,
    alloc: Vec<AxisBits>,
    // axis bits consumed by levels before each level
    offset: Vec<AxisBits>,
    // amplitude indexed by axis label
    axis_amp: Vec<f64>,
}

impl LevelPartition {
    /// Partition with the default labeling: Gray for a single level,
    /// natural set partitioning otherwise.
    pub fn new(constellation: Constellation, widths: &[u32]) -> Result<Self> {
        let labeling = if widths.len() == 1 { AxisLabeling::Gray } else { AxisLabeling::Natural };
        Self::with_labeling(constellation, widths, labeling)
    }

    /// Single level, Gray per axis.
    pub fn gray(constellation: Constellation) -> Self {
        let bits = constellation.bits();
        Self::with_labeling(constellation, &[bits], AxisLabeling::Gray).expect("single-level partition is always valid")
    }

    pub fn with_labeling(constellation: Constellation, widths: &[u32], labeling: AxisLabeling) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::InvalidArgument("level widths must be positive".into()));
        }
        let total: u32 = widths.iter().sum();
        if total != constellation.bits() {
            return Err(Error::InvalidArgument(format!(
                "level widths sum to {total}, constellation carries {} bits",
                constellation.bits()
            )));
        }
        let per_axis = constellation.bits_per_axis();
        let (mut rem_i, mut rem_q) = (per_axis, per_axis);
        let mut alloc = Vec::with_capacity(widths.len());
        let mut offset = Vec::with_capacity(widths.len());
        for &w in widths {
            offset.push(AxisBits { i: per_axis - rem_i, q: per_axis - rem_q });
            let mut i = w.div_ceil(2).min(rem_i);
            let mut q = w - i;
            if q > rem_q {
                q = rem_q;
                i = w - q;
            }
            rem_i -= i;
            rem_q -= q;
            alloc.push(AxisBits { i, q });
        }
        let axis_amp = (0..constellation.side()).map(|label| constellation.amplitude(labeling.index(label))).collect();
        let p = LevelPartition { constellation, labeling, widths: widths.to_vec(), alloc, offset, axis_amp };

        let distances: Vec<f64> = (0..p.levels()).map(|l| p.intra_coset_min_distance(l)).collect();
        if labeling == AxisLabeling::Natural && distances.windows(2).any(|w| w[1] <= w[0] * (1.0 + 1e-9)) {
            return Err(Error::InvalidArgument(format!(
                "partition {widths:?} does not increase the intra-coset distance at every level"
            )));
        }
        Ok(p)
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn labeling(&self) -> AxisLabeling {
        self.labeling
    }

    pub fn levels(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn axis_bits(&self, level: usize) -> AxisBits {
        self.alloc[level]
    }

    /// Bit offset of `level` inside the full label.
    pub fn label_offset(&self, level: usize) -> u32 {
        self.widths[..level].iter().sum()
    }

    /// Per-axis labels of the point carrying `symbols` (one per level).
    fn axis_labels(&self, symbols: &[Symbol]) -> (usize, usize) {
        let (mut li, mut lq) = (0usize, 0usize);
        for (l, &s) in symbols.iter().enumerate() {
            let a = self.alloc[l];
            let o = self.offset[l];
            let s = s as usize;
            li |= (s & ((1 << a.i) - 1)) << o.i;
            lq |= (s >> a.i) << o.q;
        }
        (li, lq)
    }

    /// Axis indices of the point carrying `symbols`.
    pub fn axis_indices(&self, symbols: &[Symbol]) -> (usize, usize) {
        let (li, lq) = self.axis_labels(symbols);
        (self.labeling.index(li), self.labeling.index(lq))
    }

    pub fn modulate(&self, symbols: &[Symbol]) -> Result<Complex64> {
        if symbols.len() != self.levels() {
            return Err(Error::LengthMismatch { expected: self.levels(), got: symbols.len() });
        }
        for (l, &s) in symbols.iter().enumerate() {
            if (s as u32) >> self.widths[l] != 0 {
                return Err(Error::SymbolOutOfRange { value: s as u32, q: 1 << self.widths[l] });
            }
        }
        Ok(self.modulate_unchecked(symbols))
    }

    #[inline]
    pub(crate) fn modulate_unchecked(&self, symbols: &[Symbol]) -> Complex64 {
        let (li, lq) = self.axis_labels(symbols);
        Complex64::new(self.axis_amp[li], self.axis_amp[lq])
    }

    /// Splits a full label into level symbols.
    pub fn split_label(&self, label: usize) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.levels());
        let mut rest = label;
        for &w in &self.widths {
            out.push((rest & ((1 << w) - 1)) as Symbol);
            rest >>= w;
        }
        out
    }

    pub fn join_label(&self, symbols: &[Symbol]) -> usize {
        symbols.iter().zip(&self.widths).rev().fold(0usize, |acc, (&s, &w)| (acc << w) | s as usize)
    }

    /// The point with the given full label.
    pub fn point_of_label(&self, label: usize) -> Complex64 {
        self.modulate_unchecked(&self.split_label(label))
    }

    /// Minimum distance between distinct points that agree on all levels
    /// below `level`, by enumeration.
    pub fn intra_coset_min_distance(&self, level: usize) -> f64 {
        let low_bits = self.label_offset(level);
        let mask = (1usize << low_bits) - 1;
        let size = self.constellation.size();
        let points: Vec<Complex64> = (0..size).map(|l| self.point_of_label(l)).collect();
        let mut best = f64::INFINITY;
        for a in 0..size {
            for b in a + 1..size {
                if a & mask == b & mask {
                    best = best.min((points[a] - points[b]).norm());
                }
            }
        }
        best
    }

    /// Per-axis log-weights of the level's axis sub-labels given the lower
    /// axis bits, marginalised over every higher-level bit.
    fn axis_metric(&self, y: f64, n0: f64, low: usize, low_bits: u32, bits: u32, out: &mut [f64]) {
        let per_axis = self.constellation.bits_per_axis();
        let high_bits = per_axis - low_bits - bits;
        for (v, slot) in out.iter_mut().enumerate().take(1 << bits) {
            let mut terms = [0.0f64; 16];
            let count = 1usize << high_bits;
            for (h, t) in terms.iter_mut().enumerate().take(count) {
                let label = low | (v << low_bits) | (h << (low_bits + bits));
                let d = y - self.axis_amp[label];
                *t = -d * d / n0;
            }
            *slot = log_sum_exp(&terms[..count]);
        }
    }

    /// Posterior of the level-`level` symbol of the point behind `y`, given
    /// the symbols of all lower levels. Writes `2^width` weights into `out`.
    pub fn demap_level_into(&self, y: Complex64, n0: f64, level: usize, lower: &[Symbol], out: &mut [f64]) {
        debug_assert_eq!(lower.len(), level);
        let (li, lq) = self.axis_labels(lower);
        let a = self.alloc[level];
        let o = self.offset[level];
        let mut mi = [0.0f64; 16];
        let mut mq = [0.0f64; 16];
        self.axis_metric(y.re, n0, li, o.i, a.i, &mut mi);
        self.axis_metric(y.im, n0, lq, o.q, a.q, &mut mq);
        let ni = 1usize << a.i;
        let nq = 1usize << a.q;
        let max_i = mi[..ni].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_q = mq[..nq].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for sq in 0..nq {
            let eq = (mq[sq] - max_q).exp();
            for si in 0..ni {
                let v = (mi[si] - max_i).exp() * eq;
                out[si | (sq << a.i)] = v;
                sum += v;
            }
        }
        for v in &mut out[..ni * nq] {
            *v /= sum;
        }
    }

    /// [`LevelPartition::demap_level_into`] returning a [`Dist`].
    pub fn demap_level(&self, y: Complex64, n0: f64, level: usize, lower: &[Symbol]) -> Result<Dist> {
        if level >= self.levels() {
            return Err(Error::InvalidArgument(format!("level {level} of {}", self.levels())));
        }
        if lower.len() != level {
            return Err(Error::LengthMismatch { expected: level, got: lower.len() });
        }
        check_n0(n0)?;
        for (l, &s) in lower.iter().enumerate() {
            if (s as u32) >> self.widths[l] != 0 {
                return Err(Error::SymbolOutOfRange { value: s as u32, q: 1 << self.widths[l] });
            }
        }
        let mut out = vec![0.0; 1 << self.widths[level]];
        self.demap_level_into(y, n0, level, lower, &mut out);
        Ok(Dist::from_raw(out))
    }

    /// Posterior over full labels: `out[L] ~ exp(-|y - s(L)|^2 / N0)`.
    pub fn demap_symbol_full(&self, y: Complex64, n0: f64) -> Result<Dist> {
        check_n0(n0)?;
        let size = self.constellation.size();
        let metrics: Vec<f64> = (0..size).map(|l| -(y - self.point_of_label(l)).norm_sqr() / n0).collect();
        let max = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = metrics.iter().map(|m| (m - max).exp()).collect();
        let sum: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= sum);
        Ok(Dist::from_raw(p))
    }

    /// Per-bit posteriors of the full label, bit `k` at index `k`. Writes
    /// `P(bit = 1)` for each label bit into `out`.
    pub fn demap_bits_into(&self, y: Complex64, n0: f64, out: &mut [f64]) {
        let per_axis = self.constellation.bits_per_axis() as usize;
        let side = self.constellation.side();
        let mut idx = 0;
        for coord in [y.re, y.im] {
            let metrics: Vec<f64> = (0..side)
                .map(|l| {
                    let d = coord - self.axis_amp[l];
                    -d * d / n0
                })
                .collect();
            let max = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = metrics.iter().map(|m| (m - max).exp()).collect();
            let total: f64 = w.iter().sum();
            for b in 0..per_axis {
                let ones: f64 = w.iter().enumerate().filter(|(l, _)| l >> b & 1 == 1).map(|(_, v)| v).sum();
                out[idx] = ones / total;
                idx += 1;
            }
        }
        debug_assert!(self.levels() == 1 || self.labeling == AxisLabeling::Natural);
        self.reorder_axis_bits(out);
    }

    // Axis-major bit order (I bits then Q bits) to full-label order.
    fn reorder_axis_bits(&self, bits: &mut [f64]) {
        let per_axis = self.constellation.bits_per_axis() as usize;
        let axis: Vec<f64> = bits.to_vec();
        for (l, (a, o)) in self.alloc.iter().zip(&self.offset).enumerate() {
            let base = self.label_offset(l) as usize;
            for k in 0..a.i as usize {
                bits[base + k] = axis[o.i as usize + k];
            }
            for k in 0..a.q as usize {
                bits[base + a.i as usize + k] = axis[per_axis + o.q as usize + k];
            }
        }
    }

    /// Binary posteriors of each label bit.
    pub fn demap_bits_binary(&self, y: Complex64, n0: f64) -> Result<Vec<Dist>> {
        check_n0(n0)?;
        let mut p1 = vec![0.0; self.constellation.bits() as usize];
        self.demap_bits_into(y, n0, &mut p1);
        Ok(p1.into_iter().map(|p| Dist::from_raw(vec![1.0 - p, p])).collect())
    }

    /// Nearest point's level symbols (hard decision over the full grid).
    pub fn slice(&self, y: Complex64) -> Vec<Symbol> {
        let mut best = (f64::INFINITY, 0usize);
        for l in 0..self.constellation.size() {
            let d = (y - self.point_of_label(l)).norm_sqr();
            if d < best.0 {
                best = (d, l);
            }
        }
        self.split_label(best.1)
    }
}

fn check_n0(n0: f64) -> Result<()> {
    if n0 > 0.0 && n0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("noise density N0 = {n0} must be positive")))
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qam(bits: u32) -> Constellation {
        Constellation::square(bits).unwrap()
    }

    #[test]
    fn unit_energy() {
        for bits in [2, 4, 6, 8] {
            assert!((qam(bits).mean_energy() - 1.0).abs() < 1e-12);
        }
        assert!((qam(6).min_distance() - 2.0 / 42f64.sqrt()).abs() < 1e-15);
        assert!((qam(8).min_distance() - 2.0 / 170f64.sqrt()).abs() < 1e-15);
        assert!(Constellation::square(5).is_err());
    }

    #[test]
    fn gray_labeling_is_a_bijection_with_single_bit_neighbours() {
        let p = LevelPartition::gray(qam(6));
        let mut seen = std::collections::HashSet::new();
        for l in 0..64 {
            let (i, j) = p.axis_indices(&[l as u8]);
            assert!(seen.insert((i, j)));
        }
        for a in 0..64usize {
            for b in 0..64usize {
                let (ia, ja) = p.axis_indices(&[a as u8]);
                let (ib, jb) = p.axis_indices(&[b as u8]);
                if ia.abs_diff(ib) + ja.abs_diff(jb) == 1 {
                    assert_eq!((a ^ b).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn allocation_follows_the_axis_rules() {
        let p = LevelPartition::new(qam(6), &[4, 2]).unwrap();
        assert_eq!(p.axis_bits(0), AxisBits { i: 2, q: 2 });
        assert_eq!(p.axis_bits(1), AxisBits { i: 1, q: 1 });
        let p = LevelPartition::new(qam(6), &[3, 3]).unwrap();
        assert_eq!(p.axis_bits(0), AxisBits { i: 2, q: 1 });
        assert_eq!(p.axis_bits(1), AxisBits { i: 1, q: 2 });
        let p = LevelPartition::new(qam(8), &[4, 4]).unwrap();
        assert_eq!(p.axis_bits(1), AxisBits { i: 2, q: 2 });
        assert!(LevelPartition::new(qam(6), &[4, 1]).is_err());
        assert!(LevelPartition::new(qam(6), &[6, 0]).is_err());
        // level 0 on a single axis leaves the level-1 cosets as dense as the grid
        assert!(LevelPartition::new(qam(6), &[1, 5]).is_err());
    }

    #[test]
    fn qam64_four_two_cosets() {
        let p = LevelPartition::new(qam(6), &[4, 2]).unwrap();
        let fine = qam(6).min_distance();
        // 16 cosets of 4 points, each a 2x2 grid with spacing 4 steps
        for s0 in 0..16u8 {
            let pts: Vec<(usize, usize)> = (0..4u8).map(|s1| p.axis_indices(&[s0, s1])).collect();
            for a in 0..4 {
                for b in a + 1..4 {
                    let (di, dj) = (pts[a].0.abs_diff(pts[b].0), pts[a].1.abs_diff(pts[b].1));
                    assert!(di % 4 == 0 && dj % 4 == 0 && di + dj > 0);
                }
            }
            // level-0 symbols cover every residue class mod 4 on both axes
            let (i, j) = p.axis_indices(&[s0, 0]);
            assert_eq!((i % 4 + 4 * (j % 4)) as u8, s0);
        }
        assert!((p.intra_coset_min_distance(0) - fine).abs() < 1e-12);
        assert!((p.intra_coset_min_distance(1) - 4.0 * fine).abs() < 1e-12);
    }

    #[test]
    fn qam256_four_four_cosets() {
        let p = LevelPartition::new(qam(8), &[4, 4]).unwrap();
        let fine = qam(8).min_distance();
        let d1 = p.intra_coset_min_distance(1);
        assert!((d1 - 4.0 * 2.0 / 170f64.sqrt()).abs() < 1e-12);
        assert!((d1 * d1 / (fine * fine) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn modulate_rejects_bad_symbols() {
        let p = LevelPartition::new(qam(6), &[4, 2]).unwrap();
        assert!(p.modulate(&[16, 0]).is_err());
        assert!(p.modulate(&[1]).is_err());
        assert!(p.modulate(&[15, 3]).is_ok());
    }

    #[test]
    fn on_point_small_noise_gives_point_mass() {
        let p = LevelPartition::new(qam(6), &[4, 2]).unwrap();
        let y = p.modulate(&[9, 2]).unwrap();
        let d0 = p.demap_level(y, 1e-4, 0, &[]).unwrap();
        assert!(d0.probs()[9] > 1.0 - 1e-12);
        let d1 = p.demap_level(y, 1e-4, 1, &[9]).unwrap();
        assert!(d1.probs()[2] > 1.0 - 1e-12);
    }

    #[test]
    fn symmetric_observation_gives_equal_halves() {
        // QPSK, one level of 2 bits: y on the Q axis is equidistant in I
        let p = LevelPartition::new(qam(2), &[2]).unwrap();
        let y = Complex64::new(0.0, 0.3);
        let d = p.demap_level(y, 0.5, 0, &[]).unwrap();
        let pr = d.probs();
        assert!((pr[0] - pr[1]).abs() < 1e-15 && (pr[2] - pr[3]).abs() < 1e-15);
        let bits = p.demap_bits_binary(y, 0.5).unwrap();
        assert!((bits[0].probs()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_point_closed_form() {
        // level 1 of QAM-16 (2,2): given level 0 the I axis holds two points
        // 2 fine steps apart; place y on one of them with N0 = 4 d^2 where
        // d is half the spacing, so the ratio is e : 1 on that axis.
        let c = qam(4);
        let p = LevelPartition::new(c.clone(), &[2, 2]).unwrap();
        let a = p.modulate(&[0, 0]).unwrap();
        let b = p.modulate(&[0, 1]).unwrap();
        assert!((a.im - b.im).abs() < 1e-15);
        let half = (a.re - b.re).abs() / 2.0;
        let n0 = 4.0 * half * half;
        let y = Complex64::new(a.re, a.im);
        let d = p.demap_level(y, n0, 1, &[0]).unwrap();
        // bit 0 of the level-1 symbol is the I part; marginalise the Q part
        let pr = d.probs();
        let p_i0 = pr[0] + pr[2];
        assert!((p_i0 - 0.731_058_578_630_004_9).abs() < 1e-12, "{p_i0}");
    }

    #[test]
    fn gray_bit_demapper_on_point() {
        let p = LevelPartition::gray(qam(6));
        for label in [0usize, 13, 42, 63] {
            let y = p.point_of_label(label);
            let bits = p.demap_bits_binary(y, 1e-4).unwrap();
            for (k, b) in bits.iter().enumerate() {
                assert!(b.probs()[(label >> k) & 1] > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn split_and_join_labels() {
        let p = LevelPartition::new(qam(8), &[4, 4]).unwrap();
        assert_eq!(p.split_label(0xA7), vec![7, 10]);
        assert_eq!(p.join_label(&[7, 10]), 0xA7);
    }

    #[test]
    fn slicer_matches_nearest_point() {
        let p = LevelPartition::new(qam(6), &[3, 3]).unwrap();
        let y = p.modulate(&[5, 6]).unwrap() + Complex64::new(0.01, -0.02);
        assert_eq!(p.slice(y), vec![5, 6]);
    }

    #[test]
    fn bad_noise_density() {
        let p = LevelPartition::gray(qam(4));
        assert!(p.demap_symbol_full(Complex64::new(0.0, 0.0), 0.0).is_err());
        assert!(p.demap_level(Complex64::new(0.0, 0.0), -1.0, 0, &[]).is_err());
    }
}
