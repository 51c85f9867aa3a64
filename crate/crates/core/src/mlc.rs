//! Multilevel coding over square QAM and multistage decoding.
//!
//! A [`Scheme`] is either *binary*: one GF(2) code of length `N_s log2 M`
//! whose bits `t*b .. t*b+b` label symbol `t` (bit `k` is label bit `k`)
//! under per-axis Gray labeling; or *multilevel*: one entry per partition
//! level, each a code over GF(2^width) of length `N_s` or an uncoded
//! stream of `N_s` symbols. A single-level multilevel scheme is a plain
//! non-binary code with symbol-wise Gray mapping.
//!
//! Information is a list of streams, one per level (a single stream of bits
//! for binary schemes). Packed as bits, streams are concatenated level by
//! level, symbols in order, each symbol least significant bit first.
//!
//! Multistage decoding demaps level 0, decodes it, then demaps level 1
//! conditioned on the level-0 hard decisions, and so on. Decisions are
//! never revised.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::{peg_construct, Code, DegreeProfile};
use crate::error::{Error, Result};
use crate::galois::{Field, Symbol};
use crate::modem::{Constellation, LevelPartition};
use crate::qspa::{DecodeResult, Decoder, DecoderOptions};

/// Rebuild attempts when a PEG matrix comes out rank deficient.
const PEG_ATTEMPTS: u64 = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    Coded(Code),
    Uncoded,
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Binary(Code),
    Multilevel(Vec<Level>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    name: String,
    partition: LevelPartition,
    n_symbols: usize,
    body: Body,
}

impl Scheme {
    /// Binary code over Gray-labeled QAM; `code.n()` must be a multiple of
    /// the bits per symbol.
    pub fn binary(name: impl Into<String>, constellation: Constellation, code: Code) -> Result<Self> {
        let bits = constellation.bits() as usize;
        if code.field().q() != 2 {
            return Err(Error::InvalidScheme(format!(
                "binary scheme needs a GF(2) code, got GF({})",
                code.field().q()
            )));
        }
        if !code.n().is_multiple_of(bits) {
            return Err(Error::InvalidScheme(format!(
                "binary code length {} is not a multiple of {bits} bits per symbol",
                code.n()
            )));
        }
        Ok(Scheme {
            name: name.into(),
            n_symbols: code.n() / bits,
            partition: LevelPartition::gray(constellation),
            body: Body::Binary(code),
        })
    }

    /// One code or uncoded stream per partition level.
    pub fn multilevel(
        name: impl Into<String>,
        partition: LevelPartition,
        n_symbols: usize,
        levels: Vec<Level>,
    ) -> Result<Self> {
        if levels.len() != partition.levels() {
            return Err(Error::InvalidScheme(format!(
                "{} level entries for a {}-level partition",
                levels.len(),
                partition.levels()
            )));
        }
        if n_symbols == 0 {
            return Err(Error::InvalidScheme("block length must be at least one symbol".into()));
        }
        for (l, level) in levels.iter().enumerate() {
            if let Level::Coded(code) = level {
                let width = partition.widths()[l];
                if code.field().m() != width {
                    return Err(Error::InvalidScheme(format!(
                        "level {l} carries {width} bits but its code is over GF({})",
                        code.field().q()
                    )));
                }
                if code.n() != n_symbols {
                    return Err(Error::InvalidScheme(format!(
                        "level {l} code length {} differs from the block length {n_symbols}",
                        code.n()
                    )));
                }
            }
        }
        Ok(Scheme { name: name.into(), partition, n_symbols, body: Body::Multilevel(levels) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn constellation(&self) -> &Constellation {
        self.partition.constellation()
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.body, Body::Binary(_))
    }

    /// Multilevel entries; empty for binary schemes.
    pub fn levels(&self) -> &[Level] {
        match &self.body {
            Body::Binary(_) => &[],
            Body::Multilevel(levels) => levels,
        }
    }

    /// Codes in level order (the single code of a binary scheme).
    pub fn codes(&self) -> Vec<&Code> {
        match &self.body {
            Body::Binary(code) => vec![code],
            Body::Multilevel(levels) => levels
                .iter()
                .filter_map(|l| match l {
                    Level::Coded(c) => Some(c),
                    Level::Uncoded => None,
                })
                .collect(),
        }
    }

    /// Number of information streams (levels, or 1 for binary).
    pub fn stream_count(&self) -> usize {
        match &self.body {
            Body::Binary(_) => 1,
            Body::Multilevel(levels) => levels.len(),
        }
    }

    /// Bits per symbol of each information stream.
    pub fn stream_widths(&self) -> Vec<u32> {
        match &self.body {
            Body::Binary(_) => vec![1],
            Body::Multilevel(_) => self.partition.widths().to_vec(),
        }
    }

    /// Information symbols per block of each stream.
    pub fn info_lengths(&self) -> Vec<usize> {
        match &self.body {
            Body::Binary(code) => vec![code.k()],
            Body::Multilevel(levels) => levels
                .iter()
                .map(|l| match l {
                    Level::Coded(c) => c.k(),
                    Level::Uncoded => self.n_symbols,
                })
                .collect(),
        }
    }

    pub fn info_bits(&self) -> usize {
        self.info_lengths().iter().zip(self.stream_widths()).map(|(&k, w)| k * w as usize).sum()
    }

    /// Information bits per coded bit.
    pub fn total_rate(&self) -> f64 {
        self.info_bits() as f64 / (self.n_symbols * self.constellation().bits() as usize) as f64
    }

    /// Information bits per channel symbol.
    pub fn spectral_efficiency(&self) -> f64 {
        self.info_bits() as f64 / self.n_symbols as f64
    }

    /// Uniformly random information streams.
    pub fn random_info<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<Symbol>> {
        self.info_lengths()
            .iter()
            .zip(self.stream_widths())
            .map(|(&k, w)| (0..k).map(|_| rng.random_range(0..1u32 << w) as Symbol).collect())
            .collect()
    }

    fn check_info(&self, info: &[Vec<Symbol>]) -> Result<()> {
        if info.len() != self.stream_count() {
            return Err(Error::LengthMismatch { expected: self.stream_count(), got: info.len() });
        }
        for ((stream, &k), w) in info.iter().zip(&self.info_lengths()).zip(self.stream_widths()) {
            if stream.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: stream.len() });
            }
            if let Some(&bad) = stream.iter().find(|&&s| (s as u32) >> w != 0) {
                return Err(Error::SymbolOutOfRange { value: bad as u32, q: 1 << w });
            }
        }
        Ok(())
    }

    /// Per-stream codewords: `N_s` symbols per level, or `N_s log2 M` bits
    /// for a binary scheme.
    pub fn encode_words(&self, info: &[Vec<Symbol>]) -> Result<Vec<Vec<Symbol>>> {
        self.check_info(info)?;
        match &self.body {
            Body::Binary(code) => Ok(vec![code.encode(&info[0])?]),
            Body::Multilevel(levels) => levels
                .iter()
                .zip(info)
                .map(|(level, stream)| match level {
                    Level::Coded(c) => c.encode(stream),
                    Level::Uncoded => Ok(stream.clone()),
                })
                .collect(),
        }
    }

    /// Maps per-stream codewords to channel points.
    pub fn map_words(&self, words: &[Vec<Symbol>]) -> Vec<Complex64> {
        match &self.body {
            Body::Binary(_) => {
                let b = self.constellation().bits() as usize;
                words[0]
                    .chunks(b)
                    .map(|bits| {
                        let label = bits.iter().rev().fold(0u8, |acc, &x| (acc << 1) | x);
                        self.partition.modulate_unchecked(&[label])
                    })
                    .collect()
            }
            Body::Multilevel(_) => {
                let mut symbols = vec![0; words.len()];
                (0..self.n_symbols)
                    .map(|t| {
                        for (s, w) in symbols.iter_mut().zip(words) {
                            *s = w[t];
                        }
                        self.partition.modulate_unchecked(&symbols)
                    })
                    .collect()
            }
        }
    }

    /// Encodes and maps one block.
    pub fn encode(&self, info: &[Vec<Symbol>]) -> Result<Vec<Complex64>> {
        Ok(self.map_words(&self.encode_words(info)?))
    }

    /// Packs information streams into bits (one per byte, value 0 or 1).
    pub fn pack_info_bits(&self, info: &[Vec<Symbol>]) -> Result<Vec<u8>> {
        self.check_info(info)?;
        let mut bits = Vec::with_capacity(self.info_bits());
        for (stream, w) in info.iter().zip(self.stream_widths()) {
            for &s in stream {
                bits.extend((0..w).map(|k| (s >> k) & 1));
            }
        }
        Ok(bits)
    }

    pub fn unpack_info_bits(&self, bits: &[u8]) -> Result<Vec<Vec<Symbol>>> {
        if bits.len() != self.info_bits() {
            return Err(Error::LengthMismatch { expected: self.info_bits(), got: bits.len() });
        }
        let mut it = bits.iter();
        let mut info = Vec::with_capacity(self.stream_count());
        for (&k, w) in self.info_lengths().iter().zip(self.stream_widths()) {
            let stream = (0..k).map(|_| (0..w).fold(0u8, |acc, b| acc | ((*it.next().unwrap() & 1) << b))).collect();
            info.push(stream);
        }
        Ok(info)
    }
}

/// Outcome of one level of multistage decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    /// Hard decisions on the level's codeword (or uncoded symbols).
    pub word: Vec<Symbol>,
    pub info: Vec<Symbol>,
    /// QSPA result for coded levels.
    pub decode: Option<DecodeResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdOutput {
    pub levels: Vec<LevelOutcome>,
}

impl MsdOutput {
    pub fn info(&self) -> Vec<Vec<Symbol>> {
        self.levels.iter().map(|l| l.info.clone()).collect()
    }

    /// Mean QSPA iterations over coded levels.
    pub fn mean_iterations(&self) -> f64 {
        let its: Vec<usize> = self.levels.iter().filter_map(|l| l.decode.as_ref().map(|d| d.iterations)).collect();
        if its.is_empty() {
            0.0
        } else {
            its.iter().sum::<usize>() as f64 / its.len() as f64
        }
    }
}

/// Multistage receiver with reusable decoder workspaces.
#[derive(Debug, Clone)]
pub struct MsdDecoder<'a> {
    scheme: &'a Scheme,
    decoders: Vec<Option<Decoder>>,
    priors: Vec<f64>,
}

impl<'a> MsdDecoder<'a> {
    pub fn new(scheme: &'a Scheme) -> Self {
        let decoders = match &scheme.body {
            Body::Binary(code) => vec![Some(Decoder::new(code))],
            Body::Multilevel(levels) => levels
                .iter()
                .map(|l| match l {
                    Level::Coded(c) => Some(Decoder::new(c)),
                    Level::Uncoded => None,
                })
                .collect(),
        };
        MsdDecoder { scheme, decoders, priors: Vec::new() }
    }

    pub fn scheme(&self) -> &'a Scheme {
        self.scheme
    }

    /// Multistage decoding with hard decisions passed upward.
    pub fn decode(&mut self, y: &[Complex64], n0: f64, opts: DecoderOptions) -> Result<MsdOutput> {
        self.run(y, n0, opts, None)
    }

    /// Multistage decoding where level `l` is demapped with the true
    /// codewords of levels `< l` instead of the decisions.
    pub fn decode_genie(
        &mut self,
        y: &[Complex64],
        n0: f64,
        opts: DecoderOptions,
        true_words: &[Vec<Symbol>],
    ) -> Result<MsdOutput> {
        if true_words.len() != self.scheme.stream_count() {
            return Err(Error::LengthMismatch { expected: self.scheme.stream_count(), got: true_words.len() });
        }
        self.run(y, n0, opts, Some(true_words))
    }

    fn run(
        &mut self,
        y: &[Complex64],
        n0: f64,
        opts: DecoderOptions,
        genie: Option<&[Vec<Symbol>]>,
    ) -> Result<MsdOutput> {
        let scheme = self.scheme;
        let ns = scheme.n_symbols;
        if y.len() != ns {
            return Err(Error::LengthMismatch { expected: ns, got: y.len() });
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise density N0 = {n0} must be positive")));
        }
        match &scheme.body {
            Body::Binary(code) => {
                let b = scheme.constellation().bits() as usize;
                self.priors.resize(2 * ns * b, 0.0);
                let mut p1 = [0.0f64; 8];
                for (t, &yt) in y.iter().enumerate() {
                    scheme.partition.demap_bits_into(yt, n0, &mut p1[..b]);
                    for k in 0..b {
                        self.priors[2 * (t * b + k)] = 1.0 - p1[k];
                        self.priors[2 * (t * b + k) + 1] = p1[k];
                    }
                }
                let decoder = self.decoders[0].as_mut().expect("binary decoder");
                let result = decoder.decode_flat(&self.priors, opts)?;
                let info = code.extract_info(&result.word);
                Ok(MsdOutput { levels: vec![LevelOutcome { word: result.word.clone(), info, decode: Some(result) }] })
            }
            Body::Multilevel(levels) => {
                let mut out: Vec<LevelOutcome> = Vec::with_capacity(levels.len());
                let mut lower = Vec::with_capacity(levels.len());
                for (l, level) in levels.iter().enumerate() {
                    let q = 1usize << scheme.partition.widths()[l];
                    self.priors.resize(ns * q, 0.0);
                    for (t, &yt) in y.iter().enumerate() {
                        lower.clear();
                        for prev in 0..l {
                            lower.push(match genie {
                                Some(words) => words[prev][t],
                                None => out[prev].word[t],
                            });
                        }
                        scheme.partition.demap_level_into(yt, n0, l, &lower, &mut self.priors[t * q..(t + 1) * q]);
                    }
                    let outcome = match level {
                        Level::Coded(code) => {
                            let decoder = self.decoders[l].as_mut().expect("coded level decoder");
                            let result = decoder.decode_flat(&self.priors, opts)?;
                            LevelOutcome {
                                word: result.word.clone(),
                                info: code.extract_info(&result.word),
                                decode: Some(result),
                            }
                        }
                        Level::Uncoded => {
                            let word: Vec<Symbol> = self.priors.chunks(q).map(crate::messages::argmax).collect();
                            LevelOutcome { info: word.clone(), word, decode: None }
                        }
                    };
                    out.push(outcome);
                }
                Ok(MsdOutput { levels: out })
            }
        }
    }
}

/// Encodes and maps one block of information streams.
pub fn mlc_encode(scheme: &Scheme, info: &[Vec<Symbol>]) -> Result<Vec<Complex64>> {
    scheme.encode(info)
}

/// One-shot multistage decoding.
pub fn msd_decode(scheme: &Scheme, y: &[Complex64], n0: f64, opts: DecoderOptions) -> Result<MsdOutput> {
    MsdDecoder::new(scheme).decode(y, n0, opts)
}

/// Fraction of columns with a given weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFraction {
    pub weight: usize,
    pub fraction: f64,
}

fn weights(pairs: &[(usize, f64)]) -> Vec<WeightFraction> {
    pairs.iter().map(|&(weight, fraction)| WeightFraction { weight, fraction }).collect()
}

/// Column profile of the non-binary preset codes.
pub fn nonbinary_weight_two() -> Vec<WeightFraction> {
    weights(&[(2, 1.0)])
}

/// Mixed non-binary profile with mean column weight 2.25.
pub fn nonbinary_mixed() -> Vec<WeightFraction> {
    weights(&[(2, 0.75), (3, 0.25)])
}

/// Column profile of the binary preset codes.
pub fn binary_default_weights() -> Vec<WeightFraction> {
    weights(&[(2, 0.18), (3, 0.72), (6, 0.10)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LevelSpec {
    Coded { width: u32, k: usize, column_weights: Vec<WeightFraction> },
    Uncoded { width: u32 },
}

impl LevelSpec {
    pub fn width(&self) -> u32 {
        match self {
            LevelSpec::Coded { width, .. } | LevelSpec::Uncoded { width } => *width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Structure {
    /// `k` information bits out of `n_symbols * constellation_bits`.
    Binary {
        k: usize,
        column_weights: Vec<WeightFraction>,
    },
    Multilevel {
        levels: Vec<LevelSpec>,
    },
}

/// Buildable description of a scheme; PEG supplies the codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub name: String,
    pub constellation_bits: u32,
    pub n_symbols: usize,
    pub structure: Structure,
}

const PRESETS: [&str; 9] = [
    "qam64-binary",
    "qam64-gf64",
    "qam64-gf16-mlc",
    "qam64-gf8-mlc",
    "qam256-binary",
    "qam256-gf256",
    "qam256-gf16-mlc",
    "qam256-gf16-mlc-915",
    "qam256-gf16-mlc-930",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESETS
}

impl SchemeSpec {
    /// Named full-length scheme, 12000 coded bits at total rate 0.8.
    pub fn preset(name: &str) -> Result<Self> {
        let coded = |width, k| LevelSpec::Coded { width, k, column_weights: nonbinary_weight_two() };
        let multi = |bits, ns, levels| SchemeSpec {
            name: name.to_string(),
            constellation_bits: bits,
            n_symbols: ns,
            structure: Structure::Multilevel { levels },
        };
        let binary = |bits, ns| SchemeSpec {
            name: name.to_string(),
            constellation_bits: bits,
            n_symbols: ns,
            structure: Structure::Binary { k: 9600, column_weights: binary_default_weights() },
        };
        Ok(match name {
            "qam64-binary" => binary(6, 2000),
            "qam64-gf64" => multi(6, 2000, vec![coded(6, 1600)]),
            "qam64-gf16-mlc" => multi(6, 2000, vec![coded(4, 1400), LevelSpec::Uncoded { width: 2 }]),
            "qam64-gf8-mlc" => multi(6, 2000, vec![coded(3, 1300), coded(3, 1900)]),
            "qam256-binary" => binary(8, 1500),
            "qam256-gf256" => multi(8, 1500, vec![coded(8, 1200)]),
            "qam256-gf16-mlc" => multi(8, 1500, vec![coded(4, 900), LevelSpec::Uncoded { width: 4 }]),
            "qam256-gf16-mlc-915" => multi(8, 1500, vec![coded(4, 915), coded(4, 1485)]),
            "qam256-gf16-mlc-930" => multi(8, 1500, vec![coded(4, 930), coded(4, 1470)]),
            _ => return Err(Error::UnknownPreset(name.to_string())),
        })
    }

    /// Same structure at a different block length; code dimensions scale
    /// proportionally (rounded).
    pub fn with_block_symbols(&self, n_symbols: usize) -> Result<Self> {
        if n_symbols == 0 {
            return Err(Error::InvalidScheme("block length must be at least one symbol".into()));
        }
        let scale = |k: usize| ((k as f64) * n_symbols as f64 / self.n_symbols as f64).round() as usize;
        let structure = match &self.structure {
            Structure::Binary { k, column_weights } => {
                Structure::Binary { k: scale(*k), column_weights: column_weights.clone() }
            }
            Structure::Multilevel { levels } => Structure::Multilevel {
                levels: levels
                    .iter()
                    .map(|l| match l {
                        LevelSpec::Coded { width, k, column_weights } => {
                            LevelSpec::Coded { width: *width, k: scale(*k), column_weights: column_weights.clone() }
                        }
                        u => u.clone(),
                    })
                    .collect(),
            },
        };
        Ok(SchemeSpec { name: self.name.clone(), constellation_bits: self.constellation_bits, n_symbols, structure })
    }

    /// Replaces the column profile of every non-binary coded level.
    pub fn with_nonbinary_weights(&self, column_weights: &[WeightFraction]) -> Self {
        let mut spec = self.clone();
        if let Structure::Multilevel { levels } = &mut spec.structure {
            for l in levels {
                if let LevelSpec::Coded { column_weights: w, .. } = l {
                    *w = column_weights.to_vec();
                }
            }
        }
        spec
    }

    /// Number of codes the structure calls for.
    pub fn coded_levels(&self) -> usize {
        match &self.structure {
            Structure::Binary { .. } => 1,
            Structure::Multilevel { levels } => levels.iter().filter(|l| matches!(l, LevelSpec::Coded { .. })).count(),
        }
    }

    /// Builds every code by PEG from `seed`.
    pub fn build(&self, seed: u64) -> Result<Scheme> {
        self.build_with(seed, Vec::new())
    }

    /// Builds the scheme, taking codes from `supplied` (in level order) and
    /// constructing the remainder by PEG.
    pub fn build_with(&self, seed: u64, supplied: Vec<Code>) -> Result<Scheme> {
        if supplied.len() > self.coded_levels() {
            return Err(Error::InvalidScheme(format!(
                "{} matrices supplied for {} coded levels",
                supplied.len(),
                self.coded_levels()
            )));
        }
        let constellation = Constellation::square(self.constellation_bits)?;
        let mut supplied = supplied.into_iter();
        match &self.structure {
            Structure::Binary { k, column_weights } => {
                let n = self.n_symbols * self.constellation_bits as usize;
                let code = match supplied.next() {
                    Some(c) => c,
                    None => build_code(1, n, *k, column_weights, seed, 0)?,
                };
                Scheme::binary(self.name.clone(), constellation, code)
            }
            Structure::Multilevel { levels } => {
                let widths: Vec<u32> = levels.iter().map(LevelSpec::width).collect();
                let partition = LevelPartition::new(constellation, &widths)?;
                let mut built = Vec::with_capacity(levels.len());
                for (l, spec) in levels.iter().enumerate() {
                    built.push(match spec {
                        LevelSpec::Uncoded { .. } => Level::Uncoded,
                        LevelSpec::Coded { width, k, column_weights } => Level::Coded(match supplied.next() {
                            Some(c) => c,
                            None => build_code(*width, self.n_symbols, *k, column_weights, seed, l as u64)?,
                        }),
                    });
                }
                Scheme::multilevel(self.name.clone(), partition, self.n_symbols, built)
            }
        }
    }
}

/// PEG code of length `n` and dimension exactly `k` over GF(2^m).
pub fn build_code(
    m: u32,
    n: usize,
    k: usize,
    column_weights: &[WeightFraction],
    seed: u64,
    level: u64,
) -> Result<Code> {
    if k == 0 || k >= n {
        return Err(Error::InvalidScheme(format!("code dimension {k} must lie in 1..{n}")));
    }
    let field = Field::new(m, None)?;
    let fractions: Vec<(usize, f64)> = column_weights.iter().map(|w| (w.weight, w.fraction)).collect();
    let profile = DegreeProfile::from_fractions(n, n - k, &fractions)?;
    let base = seed ^ level.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for attempt in 0..PEG_ATTEMPTS {
        let code = peg_construct(&field, &profile, base.wrapping_add(attempt))?;
        if code.k() == k {
            return Ok(code);
        }
        log::debug!("PEG attempt {attempt} gave dimension {} instead of {k}", code.k());
    }
    Err(Error::InfeasibleProfile(format!(
        "no full-rank ({n}, {k}) matrix over GF({}) in {PEG_ATTEMPTS} PEG attempts",
        field.q()
    )))
}
