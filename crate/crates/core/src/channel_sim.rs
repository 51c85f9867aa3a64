//! AWGN channel, Eb/N0 bookkeeping and the Monte-Carlo BLER harness.
//!
//! Symbol energy is 1, so `N0 = 1 / (R b 10^(Eb/N0 / 10))` for total rate
//! `R` and `b` bits per symbol. Every trial draws its information and its
//! noise from a ChaCha8 stream seeded by a hash of `(base seed, Eb/N0,
//! trial index)`. Trials run in fixed batches; the stop rule is applied by
//! scanning trials in index order, so results never depend on how many
//! workers ran the batch.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mlc::{MsdDecoder, Scheme};
use crate::qspa::DecoderOptions;

/// Trials simulated between stop-rule checks.
const BATCH: usize = 64;

/// Adds circularly symmetric Gaussian noise of variance `N0 / 2` per real
/// dimension.
pub fn awgn(x: &[Complex64], n0: f64, seed: u64) -> Result<Vec<Complex64>> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise density N0 = {n0} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = x.to_vec();
    add_noise(&mut y, n0, &mut rng);
    Ok(y)
}

fn add_noise<R: Rng>(y: &mut [Complex64], n0: f64, rng: &mut R) {
    let sigma = (n0 / 2.0).sqrt();
    for v in y {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(sigma * re, sigma * im);
    }
}

pub fn ebn0_to_n0(ebn0_db: f64, rate: f64, bits_per_symbol: f64) -> Result<f64> {
    let eff = rate * bits_per_symbol;
    if !(eff > 0.0 && eff.is_finite()) {
        return Err(Error::InvalidArgument(format!("rate times bits per symbol must be positive, got {eff}")));
    }
    Ok(1.0 / (eff * 10f64.powf(ebn0_db / 10.0)))
}

/// `Es/N0` in dB for unit symbol energy.
pub fn esn0_db(ebn0_db: f64, rate: f64, bits_per_symbol: f64) -> f64 {
    ebn0_db + 10.0 * (rate * bits_per_symbol).log10()
}

/// When to stop simulating a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub min_block_errors: u64,
    pub max_trials: u64,
    /// Checked between batches; makes results depend on machine speed.
    pub max_wall_time: Option<Duration>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_block_errors: 100, max_trials: 1_000_000, max_wall_time: None }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_trials == 0 {
            return Err(Error::InvalidArgument("max_trials must be at least 1".into()));
        }
        if self.min_block_errors == 0 {
            return Err(Error::InvalidArgument("min_block_errors must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub ebn0_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    /// Information bits compared.
    pub bits: u64,
    /// Sum over trials of the mean QSPA iterations per coded level.
    pub iterations: f64,
    /// Blocks in which each information stream was wrong.
    pub level_errors: Vec<u64>,
    pub wall_time: Duration,
}

impl SimPoint {
    pub fn bler(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.block_errors as f64 / self.trials as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn avg_iterations(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.iterations / self.trials as f64
        }
    }
}

/// Harness settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct SimConfig {
    pub stop: StopRule,
    pub decoder: DecoderOptions,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Feed true lower-level symbols to each level's demapper.
    pub genie: bool,
}


/// Seed of one trial; keyed on the Eb/N0 value so any subset of a grid
/// reproduces the corresponding rows of the full grid.
pub fn trial_seed(base_seed: u64, ebn0_db: f64, trial: u64) -> u64 {
    let mut h = splitmix(base_seed);
    h = splitmix(h ^ ebn0_db.to_bits());
    splitmix(h ^ trial)
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Default)]
struct Trial {
    block_error: bool,
    bit_errors: u64,
    bits: u64,
    iterations: f64,
    level_errors: Vec<bool>,
}

fn run_trial(decoder: &mut MsdDecoder<'_>, n0: f64, seed: u64, config: &SimConfig) -> Result<Trial> {
    let scheme = decoder.scheme();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let info = scheme.random_info(&mut rng);
    let words = scheme.encode_words(&info)?;
    let mut y = scheme.map_words(&words);
    add_noise(&mut y, n0, &mut rng);
    let out = if config.genie {
        decoder.decode_genie(&y, n0, config.decoder, &words)?
    } else {
        decoder.decode(&y, n0, config.decoder)?
    };
    let mut trial = Trial { iterations: out.mean_iterations(), ..Trial::default() };
    for (level, sent) in out.levels.iter().zip(&info) {
        let wrong: u64 = level.info.iter().zip(sent).map(|(a, b)| (a ^ b).count_ones() as u64).sum();
        trial.level_errors.push(wrong > 0);
        trial.bit_errors += wrong;
    }
    trial.bits = scheme.info_bits() as u64;
    trial.block_error = trial.level_errors.iter().any(|&e| e);
    Ok(trial)
}

/// Simulates one Eb/N0 point.
pub fn run_point(scheme: &Scheme, ebn0_db: f64, config: &SimConfig, base_seed: u64) -> Result<SimPoint> {
    config.stop.validate()?;
    if config.workers == 0 {
        return run_point_in_pool(scheme, ebn0_db, config, base_seed);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {} workers: {e}", config.workers)))?;
    pool.install(|| run_point_in_pool(scheme, ebn0_db, config, base_seed))
}

fn run_point_in_pool(scheme: &Scheme, ebn0_db: f64, config: &SimConfig, base_seed: u64) -> Result<SimPoint> {
    let start = Instant::now();
    let n0 = ebn0_to_n0(ebn0_db, scheme.total_rate(), scheme.constellation().bits() as f64)?;
    let stop = config.stop;
    let mut point = SimPoint {
        ebn0_db,
        trials: 0,
        block_errors: 0,
        bit_errors: 0,
        bits: 0,
        iterations: 0.0,
        level_errors: vec![0; scheme.stream_count()],
        wall_time: Duration::ZERO,
    };
    let template = MsdDecoder::new(scheme);
    'outer: while point.trials < stop.max_trials {
        let first = point.trials;
        let count = (stop.max_trials - first).min(BATCH as u64);
        let batch: Vec<Trial> = (first..first + count)
            .into_par_iter()
            .map_init(
                || template.clone(),
                |decoder, t| run_trial(decoder, n0, trial_seed(base_seed, ebn0_db, t), config),
            )
            .collect::<Result<_>>()?;
        for trial in batch {
            point.trials += 1;
            point.bits += trial.bits;
            point.bit_errors += trial.bit_errors;
            point.iterations += trial.iterations;
            for (acc, &e) in point.level_errors.iter_mut().zip(&trial.level_errors) {
                *acc += e as u64;
            }
            if trial.block_error {
                point.block_errors += 1;
                if point.block_errors >= stop.min_block_errors {
                    break 'outer;
                }
            }
        }
        if let Some(limit) = stop.max_wall_time {
            if start.elapsed() >= limit {
                break;
            }
        }
    }
    point.wall_time = start.elapsed();
    log::info!(
        "{} Eb/N0 {:.3} dB: {} / {} blocks in error (BLER {:.3e}) in {:.1?}",
        scheme.name(),
        ebn0_db,
        point.block_errors,
        point.trials,
        point.bler(),
        point.wall_time
    );
    Ok(point)
}

pub const CSV_HEADER: &str = "scheme,ebn0_db,trials,block_errors,bler,ber,avg_iters,level_errors,seed";

/// One CSV row (no trailing newline). Wall time is deliberately absent so
/// rows are reproducible.
pub fn csv_row(scheme: &str, point: &SimPoint, seed: u64) -> String {
    let levels: Vec<String> = point.level_errors.iter().map(u64::to_string).collect();
    format!(
        "{},{:.4},{},{},{:.6e},{:.6e},{:.4},{},{}",
        scheme,
        point.ebn0_db,
        point.trials,
        point.block_errors,
        point.bler(),
        point.ber(),
        point.avg_iterations(),
        levels.join(";"),
        seed
    )
}

/// Simulates every grid point and writes the CSV to `out`.
pub fn sweep_to_writer<W: Write>(
    scheme: &Scheme,
    grid: &[f64],
    config: &SimConfig,
    seed: u64,
    out: &mut W,
) -> Result<Vec<SimPoint>> {
    let io = |e| Error::io("<csv output>", e);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    let mut points = Vec::with_capacity(grid.len());
    for &ebn0 in grid {
        let point = run_point(scheme, ebn0, config, seed)?;
        writeln!(out, "{}", csv_row(scheme.name(), &point, seed)).map_err(io)?;
        out.flush().map_err(io)?;
        points.push(point);
    }
    Ok(points)
}

/// [`sweep_to_writer`] into a file.
pub fn sweep(scheme: &Scheme, grid: &[f64], config: &SimConfig, seed: u64, out_path: &Path) -> Result<Vec<SimPoint>> {
    let file = std::fs::File::create(out_path).map_err(|e| Error::io(out_path, e))?;
    let mut w = std::io::BufWriter::new(file);
    sweep_to_writer(scheme, grid, config, seed, &mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(out_path, source),
        other => other,
    })
}

/// Grid `start, start + step, ...` up to `stop` inclusive (within half a
/// step of rounding).
pub fn ebn0_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidArgument(format!("bad grid {start}:{step}:{stop}")));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlc::SchemeSpec;

    #[test]
    fn noise_variance() {
        let x = vec![Complex64::new(0.0, 0.0); 1_000_000];
        let n0 = 0.3;
        let y = awgn(&x, n0, 42).unwrap();
        let n = y.len() as f64;
        let var_re: f64 = y.iter().map(|v| v.re * v.re).sum::<f64>() / n;
        let var_im: f64 = y.iter().map(|v| v.im * v.im).sum::<f64>() / n;
        assert!((var_re / (n0 / 2.0) - 1.0).abs() < 0.01, "{var_re}");
        assert!((var_im / (n0 / 2.0) - 1.0).abs() < 0.01, "{var_im}");
        assert_eq!(awgn(&x[..10], n0, 42).unwrap(), y[..10].to_vec());
        assert_eq!(awgn(&x[..10], 0.0, 42).unwrap(), x[..10].to_vec());
    }

    #[test]
    fn snr_conversion() {
        assert!((ebn0_to_n0(0.0, 0.5, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((esn0_db(8.61, 0.8, 6.0) - 15.42).abs() < 0.005);
        let a = ebn0_to_n0(3.0, 0.4, 6.0).unwrap();
        let b = ebn0_to_n0(3.0, 0.8, 6.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(ebn0_to_n0(1.0, 0.0, 6.0).is_err());
    }

    #[test]
    fn grid_construction() {
        assert_eq!(ebn0_grid(1.0, 2.0, 0.5).unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(ebn0_grid(2.0, 1.0, 0.5).unwrap().is_empty());
        assert!(ebn0_grid(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn seeds_depend_on_every_key() {
        let s = trial_seed(1, 5.0, 0);
        assert_ne!(s, trial_seed(2, 5.0, 0));
        assert_ne!(s, trial_seed(1, 5.25, 0));
        assert_ne!(s, trial_seed(1, 5.0, 1));
        assert_eq!(s, trial_seed(1, 5.0, 0));
    }

    fn tiny_scheme() -> Scheme {
        SchemeSpec::preset("qam64-gf16-mlc").unwrap().with_block_symbols(40).unwrap().build(3).unwrap()
    }

    #[test]
    fn high_snr_is_error_free() {
        let scheme = tiny_scheme();
        let config = SimConfig {
            stop: StopRule { min_block_errors: 1, max_trials: 200, max_wall_time: None },
            ..SimConfig::default()
        };
        let p = run_point(&scheme, 40.0, &config, 9).unwrap();
        assert_eq!(p.trials, 200);
        assert_eq!(p.block_errors, 0);
        assert_eq!(p.bler(), 0.0);
    }

    #[test]
    fn stops_at_the_error_target() {
        let scheme = tiny_scheme();
        let config = SimConfig {
            stop: StopRule { min_block_errors: 10, max_trials: 100_000, max_wall_time: None },
            ..SimConfig::default()
        };
        let p = run_point(&scheme, 0.0, &config, 9).unwrap();
        assert_eq!(p.block_errors, 10);
        assert!(p.trials >= 10 && p.block_errors <= p.trials);
    }

    #[test]
    fn empty_grid_is_header_only() {
        let scheme = tiny_scheme();
        let mut out = Vec::new();
        sweep_to_writer(&scheme, &[], &SimConfig::default(), 1, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
