//! Per-iteration complexity accounting, constellation-constrained capacity
//! and Shannon limits, and the error floor of an uncoded top level.

use std::ops::Add;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel_sim::ebn0_to_n0;
use crate::codes::Code;
use crate::error::{Error, Result};
use crate::mlc::{Level, Scheme};
use crate::modem::Constellation;

/// Code parameters entering the complexity formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub n: usize,
    pub rate: f64,
    pub q: usize,
    /// Mean check-node degree.
    pub avg_check_degree: f64,
    /// Mean variable-node degree.
    pub avg_var_degree: f64,
    pub max_check_degree: usize,
}

impl ComplexityParams {
    /// Measured parameters of a code, with the design rate `1 - M/N`.
    pub fn of_code(code: &Code) -> Self {
        ComplexityParams {
            n: code.n(),
            rate: code.design_rate(),
            q: code.field().q(),
            avg_check_degree: code.avg_row_weight(),
            avg_var_degree: code.avg_col_weight(),
            max_check_degree: code.max_row_weight(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub gf_mul: u64,
    pub float_add: u64,
    pub float_mul: u64,
    pub memory: u64,
}

impl Add for ComplexityReport {
    type Output = ComplexityReport;

    fn add(self, o: Self) -> Self {
        ComplexityReport {
            gf_mul: self.gf_mul + o.gf_mul,
            float_add: self.float_add + o.float_add,
            float_mul: self.float_mul + o.float_mul,
            memory: self.memory + o.memory,
        }
    }
}

/// Operations and message memory of one FFT-QSPA iteration:
///
/// * GF multiplications `2 (1-R) N D`
/// * real additions `2 (1-R) N D q log2 q`
/// * real multiplications `(1-R) N (2D - 1)(q - 1) + N (2L - 1)(q - 1)`
/// * memory `(1-R) N Dmax (q - 1)`
///
/// with `D`, `L` the mean check and variable degrees and `Dmax` the largest
/// check degree. Each value is rounded to the nearest integer.
pub fn complexity_estimate(p: &ComplexityParams) -> Result<ComplexityReport> {
    if !(p.rate > 0.0 && p.rate < 1.0) {
        return Err(Error::InvalidArgument(format!("rate {} must lie in (0, 1)", p.rate)));
    }
    if p.q < 2 || !p.q.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("field order {} is not a power of two >= 2", p.q)));
    }
    let n = p.n as f64;
    let checks = (1.0 - p.rate) * n;
    let q = p.q as f64;
    let log_q = p.q.trailing_zeros() as f64;
    let d = p.avg_check_degree;
    let l = p.avg_var_degree;
    let round = |x: f64| x.round() as u64;
    Ok(ComplexityReport {
        gf_mul: round(2.0 * checks * d),
        float_add: round(2.0 * checks * d * q * log_q),
        float_mul: round(checks * (2.0 * d - 1.0) * (q - 1.0) + n * (2.0 * l - 1.0) * (q - 1.0)),
        memory: round(checks * p.max_check_degree as f64 * (q - 1.0)),
    })
}

/// Sum of the estimates over the coded levels of a scheme, using each
/// code's measured parameters.
pub fn scheme_complexity(scheme: &Scheme) -> Result<ComplexityReport> {
    scheme
        .codes()
        .into_iter()
        .map(|c| complexity_estimate(&ComplexityParams::of_code(c)))
        .try_fold(ComplexityReport::default(), |acc, r| Ok(acc + r?))
}

/// Coded levels of a scheme, for reporting.
pub fn coded_level_count(scheme: &Scheme) -> usize {
    if scheme.is_binary() {
        1
    } else {
        scheme.levels().iter().filter(|l| matches!(l, Level::Coded(_))).count()
    }
}

/// Parameters reproducing the published per-iteration table for the full
/// length presets that appear in it. For the GF(16) multilevel presets the
/// table only fits mean column weight 2.25 and (for QAM-256) the preset
/// with an uncoded top level.
pub fn reference_parameters(preset: &str) -> Option<ComplexityParams> {
    let p = |n, rate, q, d, l, dmax| ComplexityParams {
        n,
        rate,
        q,
        avg_check_degree: d,
        avg_var_degree: l,
        max_check_degree: dmax,
    };
    match preset {
        "qam64-gf64" => Some(p(2000, 0.8, 64, 10.0, 2.0, 11)),
        "qam256-gf256" => Some(p(1500, 0.8, 256, 10.0, 2.0, 11)),
        "qam256-gf16-mlc" => Some(p(1500, 0.6, 16, 5.625, 2.25, 6)),
        "qam64-gf16-mlc" => Some(p(2000, 0.7, 16, 7.5, 2.25, 8)),
        _ => None,
    }
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Gauss-Hermite nodes and weights for `int exp(-t^2) f(t) dt`, by Newton
/// iteration on the orthonormal Hermite recurrence.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const HERMITE_NODES: usize = 96;

/// Mutual information of uniform `L`-PAM with amplitudes `amps` in real
/// noise of variance `sigma2`, by Gauss-Hermite quadrature.
fn pam_capacity(amps: &[f64], sigma2: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let l = amps.len() as f64;
    let scale = (2.0 * sigma2).sqrt();
    let mut penalty = 0.0;
    for &a in amps {
        for (&t, &w) in nodes.iter().zip(weights) {
            let n = scale * t;
            // log sum_j exp((n^2 - (a - a_j + n)^2) / (2 sigma^2))
            let exps: Vec<f64> = amps
                .iter()
                .map(|&b| {
                    let d = a - b + n;
                    (n * n - d * d) / (2.0 * sigma2)
                })
                .collect();
            let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
            penalty += w * lse;
        }
    }
    let penalty = penalty / (l * std::f64::consts::PI.sqrt()) / std::f64::consts::LN_2;
    l.log2() - penalty
}

/// Constellation-constrained capacity of uniform square QAM in bits per
/// channel use at `Es/N0 = snr_db` (unit symbol energy). Square QAM is the
/// product of two independent PAM constellations, so the capacity is twice
/// the PAM capacity at noise variance `N0 / 2`.
pub fn cm_capacity(bits: u32, snr_db: f64) -> Result<f64> {
    let c = Constellation::square(bits)?;
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!("SNR {snr_db} dB is not finite")));
    }
    let n0 = 10f64.powf(-snr_db / 10.0);
    let amps: Vec<f64> = (0..c.side()).map(|i| c.amplitude(i)).collect();
    let (nodes, weights) = gauss_hermite(HERMITE_NODES);
    Ok(2.0 * pam_capacity(&amps, n0 / 2.0, &nodes, &weights))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub bits: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of [`cm_capacity`] over the two-dimensional
/// constellation directly.
pub fn cm_capacity_mc(bits: u32, snr_db: f64, samples: usize, seed: u64) -> Result<CapacityEstimate> {
    let c = Constellation::square(bits)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n0 = 10f64.powf(-snr_db / 10.0);
    let sigma = (n0 / 2.0).sqrt();
    let points: Vec<(f64, f64)> = (0..c.side())
        .flat_map(|i| (0..c.side()).map(move |j| (i, j)))
        .map(|(i, j)| (c.amplitude(i), c.amplitude(j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut exps = vec![0.0; points.len()];
    for s in 0..samples {
        let x = points[s % points.len()];
        let nr: f64 = StandardNormal.sample(&mut rng);
        let ni: f64 = StandardNormal.sample(&mut rng);
        let (nr, ni) = (sigma * nr, sigma * ni);
        let base = nr * nr + ni * ni;
        for (e, p) in exps.iter_mut().zip(&points) {
            let dr = x.0 - p.0 + nr;
            let di = x.1 - p.1 + ni;
            *e = (base - dr * dr - di * di) / n0;
        }
        let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let v = (max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln()) / std::f64::consts::LN_2;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(CapacityEstimate { bits: bits as f64 - mean, std_error: (var / n).sqrt() })
}

/// Smallest Eb/N0 (dB) at which uniform square `2^bits`-QAM supports
/// `rate * bits` bits per channel use.
pub fn shannon_limit(bits: u32, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!("rate {rate} must lie in (0, 1)")));
    }
    let target = rate * bits as f64;
    let capacity_at = |ebn0_db: f64| -> Result<f64> {
        let n0 = ebn0_to_n0(ebn0_db, rate, bits as f64)?;
        cm_capacity(bits, -10.0 * n0.log10())
    };
    let (mut lo, mut hi) = (-2.0, 40.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if capacity_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Block error probability of the uncoded top level of a multilevel scheme
/// when every lower level is decided correctly. The top level then sees a
/// PAM grid per axis with spacing `2^(lower axis bits)` times the fine grid
/// spacing; each axis contributes `2 (L-1)/L Q(d / (2 sigma))` and the
/// block fails if any of its `N_s` symbols does.
pub fn error_floor_uncoded(scheme: &Scheme, ebn0_db: f64) -> Result<f64> {
    let levels = scheme.levels();
    let top = levels
        .len()
        .checked_sub(1)
        .filter(|&t| matches!(levels[t], Level::Uncoded))
        .ok_or_else(|| Error::InvalidScheme(format!("scheme `{}` has no uncoded top level", scheme.name())))?;
    let partition = scheme.partition();
    let c = partition.constellation();
    let n0 = ebn0_to_n0(ebn0_db, scheme.total_rate(), c.bits() as f64)?;
    let sigma = (n0 / 2.0).sqrt();
    let per_axis_lower = |axis_bits: fn(&crate::modem::AxisBits) -> u32| -> u32 {
        (0..top).map(|l| axis_bits(&partition.axis_bits(l))).sum()
    };
    let axis_error = |bits: u32, lower: u32| -> f64 {
        if bits == 0 {
            return 0.0;
        }
        let l = (1u64 << bits) as f64;
        let d = (1u64 << lower) as f64 * c.min_distance();
        2.0 * (l - 1.0) / l * q_function(d / (2.0 * sigma))
    };
    let bits = partition.axis_bits(top);
    let p_i = axis_error(bits.i, per_axis_lower(|a| a.i));
    let p_q = axis_error(bits.q, per_axis_lower(|a| a.q));
    let p = 1.0 - (1.0 - p_i) * (1.0 - p_q);
    Ok(-(scheme.n_symbols() as f64 * (-p).ln_1p()).exp_m1())
}
