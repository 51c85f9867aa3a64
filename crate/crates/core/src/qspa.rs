//! FFT-based q-ary sum-product decoding (FFT-QSPA), probability domain,
//! flooding schedule.
//!
//! Check node `i` with neighbours `k` and labels `h_k` enforces
//! `sum_k h_k X_k = 0`. Its message to neighbour `j` is the distribution of
//! `X_j = h_j^{-1} sum_{k != j} h_k X_k`: every incoming message is relabelled
//! by its coefficient, transformed, the leave-one-out spectral products are
//! formed with forward and backward running products (no division, since
//! spectra may contain zeros), transformed back and relabelled by `h_j`.
//!
//! Variable node `j` sends the normalised product of its channel prior and
//! all other incoming check messages. After each iteration the posterior
//! argmax (ties toward the smallest field value) is tested against H.
//!
//! Instrumentation follows the conventions of [`OpCounts`]: per iteration
//! the transforms cost exactly `2 E q log2 q` additions for `E` edges,
//! one transform forward and one back per edge.

use crate::codes::Code;
use crate::error::{Error, Result};
use crate::galois::{Field, Symbol};
use crate::messages::{argmax, normalize_in_place, wht_in_place, Dist, OpCounts};

pub const DEFAULT_MAX_ITERATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderOptions {
    pub max_iterations: usize,
    /// Stop as soon as the hard decision satisfies every check.
    pub early_stop: bool,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        DecoderOptions { max_iterations: DEFAULT_MAX_ITERATIONS, early_stop: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub word: Vec<Symbol>,
    /// The decided word satisfies every check.
    pub converged: bool,
    pub iterations: usize,
    pub ops: OpCounts,
    /// Reals held in edge message storage (both directions).
    pub message_memory: usize,
    /// Decoding stopped because some message vanished identically.
    pub degenerate: bool,
}

impl DecodeResult {
    /// Operation counts averaged over the iterations run.
    pub fn ops_per_iteration(&self) -> OpCounts {
        let it = self.iterations.max(1) as u64;
        OpCounts {
            gf_mul: self.ops.gf_mul / it,
            float_add: self.ops.float_add / it,
            float_mul: self.ops.float_mul / it,
            aux_flops: self.ops.aux_flops / it,
        }
    }
}

/// Decoder state for one code. Reusable across blocks; one block at a time.
#[derive(Debug, Clone)]
pub struct Decoder {
    field: Field,
    n: usize,
    q: usize,
    // edges in check-major order
    row_start: Vec<usize>,
    edge_var: Vec<usize>,
    edge_label: Vec<Symbol>,
    // per variable, its edge ids
    col_start: Vec<usize>,
    col_edges: Vec<usize>,
    to_check: Vec<f64>,
    to_var: Vec<f64>,
    posterior: Vec<f64>,
    scratch: CheckScratch,
}

#[derive(Debug, Clone, Default)]
struct CheckScratch {
    spectra: Vec<f64>,
    suffix: Vec<f64>,
    running: Vec<f64>,
    tmp: Vec<f64>,
}

impl CheckScratch {
    fn ensure(&mut self, degree: usize, q: usize) {
        if self.spectra.len() < degree * q {
            self.spectra.resize(degree * q, 0.0);
            self.suffix.resize(degree * q, 0.0);
        }
        self.running.resize(q, 0.0);
        self.tmp.resize(q, 0.0);
    }
}

/// Check-node kernel over contiguous `degree x q` buffers.
fn check_kernel(
    field: &Field,
    labels: &[Symbol],
    input: &[f64],
    output: &mut [f64],
    s: &mut CheckScratch,
    counts: &mut OpCounts,
) {
    let q = field.q();
    let d = labels.len();
    s.ensure(d, q);
    let spectra = &mut s.spectra[..d * q];
    for (t, &h) in labels.iter().enumerate() {
        let row = field.mul_row(h);
        let src = &input[t * q..(t + 1) * q];
        let dst = &mut spectra[t * q..(t + 1) * q];
        for x in 0..q {
            dst[row[x] as usize] = src[x];
        }
        wht_in_place(dst, counts);
    }
    counts.gf_mul += d as u64;

    // suffix[t] = prod_{k > t} spectra[k]
    let suffix = &mut s.suffix[..d * q];
    suffix[(d - 1) * q..].fill(1.0);
    for t in (0..d - 1).rev() {
        let (head, tail) = suffix.split_at_mut((t + 1) * q);
        let next = &tail[..q];
        let here = &mut head[t * q..];
        let f = &spectra[(t + 1) * q..(t + 2) * q];
        for x in 0..q {
            here[x] = next[x] * f[x];
        }
    }
    counts.float_mul += (d.saturating_sub(2) * q) as u64;

    let running = &mut s.running;
    running.fill(1.0);
    for (t, &h) in labels.iter().enumerate() {
        let out_spec = &mut s.tmp;
        for x in 0..q {
            out_spec[x] = running[x] * suffix[t * q + x];
        }
        wht_in_place(out_spec, counts);
        // z is the law of h_t X_t; X_t = x has weight z[h_t x]
        let row = field.mul_row(h);
        let dst = &mut output[t * q..(t + 1) * q];
        for x in 0..q {
            dst[x] = out_spec[row[x] as usize];
        }
        normalize_in_place(dst, counts).expect("convolution of distributions has positive mass");
        if t + 1 < d {
            let f = &spectra[t * q..(t + 1) * q];
            for x in 0..q {
                running[x] *= f[x];
            }
        }
    }
    counts.gf_mul += d as u64;
    // interior outputs need prefix * suffix; the prefix chain adds d - 2 more
    counts.float_mul += (2 * d.saturating_sub(2) * q) as u64;
}

impl Decoder {
    pub fn new(code: &Code) -> Decoder {
        let q = code.field().q();
        let n = code.n();
        let mut row_start = Vec::with_capacity(code.m() + 1);
        let mut edge_var = Vec::with_capacity(code.edge_count());
        let mut edge_label = Vec::with_capacity(code.edge_count());
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        row_start.push(0);
        for row in code.rows() {
            for e in row {
                per_var[e.index].push(edge_var.len());
                edge_var.push(e.index);
                edge_label.push(e.label);
            }
            row_start.push(edge_var.len());
        }
        let mut col_start = Vec::with_capacity(n + 1);
        let mut col_edges = Vec::with_capacity(edge_var.len());
        col_start.push(0);
        for edges in per_var {
            col_edges.extend(edges);
            col_start.push(col_edges.len());
        }
        let e = edge_var.len();
        Decoder {
            field: code.field().clone(),
            n,
            q,
            row_start,
            edge_var,
            edge_label,
            col_start,
            col_edges,
            to_check: vec![0.0; e * q],
            to_var: vec![0.0; e * q],
            posterior: vec![0.0; n * q],
            scratch: CheckScratch::default(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    /// Decodes with per-symbol priors.
    pub fn decode(&mut self, priors: &[Dist], opts: DecoderOptions) -> Result<DecodeResult> {
        if priors.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: priors.len() });
        }
        let mut flat = Vec::with_capacity(self.n * self.q);
        for d in priors {
            if d.q() != self.q {
                return Err(Error::LengthMismatch { expected: self.q, got: d.q() });
            }
            flat.extend_from_slice(d.probs());
        }
        self.decode_flat(&flat, opts)
    }

    /// Decodes with priors laid out as `N` consecutive rows of `q` weights.
    /// Rows need not be normalised.
    pub fn decode_flat(&mut self, priors: &[f64], opts: DecoderOptions) -> Result<DecodeResult> {
        let (n, q) = (self.n, self.q);
        if priors.len() != n * q {
            return Err(Error::LengthMismatch { expected: n * q, got: priors.len() });
        }
        if opts.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        let mut ops = OpCounts::default();
        let mut prior = priors.to_vec();
        for j in 0..n {
            if let Some(&bad) = prior[j * q..(j + 1) * q].iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("prior of symbol {j} has entry {bad}")));
            }
            normalize_in_place(&mut prior[j * q..(j + 1) * q], &mut ops)?;
        }
        for (e, &j) in self.edge_var.iter().enumerate() {
            self.to_check[e * q..(e + 1) * q].copy_from_slice(&prior[j * q..(j + 1) * q]);
        }

        let mut word: Vec<Symbol> = (0..n).map(|j| argmax(&prior[j * q..(j + 1) * q])).collect();
        let message_memory = 2 * self.edge_var.len() * q;
        let mut iterations = 0;
        let mut converged = false;
        let mut degenerate = false;
        while iterations < opts.max_iterations {
            iterations += 1;
            self.check_update(&mut ops);
            if self.variable_update(&prior, &mut ops).is_err() {
                degenerate = true;
                break;
            }
            for j in 0..n {
                word[j] = argmax(&self.posterior[j * q..(j + 1) * q]);
            }
            converged = self.satisfied(&word);
            if converged && opts.early_stop {
                break;
            }
        }
        Ok(DecodeResult { word, converged, iterations, ops, message_memory, degenerate })
    }

    fn check_update(&mut self, ops: &mut OpCounts) {
        let q = self.q;
        for i in 0..self.row_start.len() - 1 {
            let (a, b) = (self.row_start[i], self.row_start[i + 1]);
            if a == b {
                continue;
            }
            check_kernel(
                &self.field,
                &self.edge_label[a..b],
                &self.to_check[a * q..b * q],
                &mut self.to_var[a * q..b * q],
                &mut self.scratch,
                ops,
            );
        }
    }

    fn variable_update(&mut self, prior: &[f64], ops: &mut OpCounts) -> Result<()> {
        let q = self.q;
        let mut running = vec![0.0; q];
        let mut suffix: Vec<f64> = Vec::new();
        for j in 0..self.n {
            let edges = &self.col_edges[self.col_start[j]..self.col_start[j + 1]];
            let d = edges.len();
            let post = &mut self.posterior[j * q..(j + 1) * q];
            post.copy_from_slice(&prior[j * q..(j + 1) * q]);
            if d == 0 {
                continue;
            }
            // suffix[t] = prod_{k > t} R_k
            suffix.resize(d * q, 0.0);
            suffix[(d - 1) * q..].fill(1.0);
            for t in (0..d - 1).rev() {
                let r = &self.to_var[edges[t + 1] * q..(edges[t + 1] + 1) * q];
                for x in 0..q {
                    suffix[t * q + x] = suffix[(t + 1) * q + x] * r[x];
                }
            }
            running.copy_from_slice(&prior[j * q..(j + 1) * q]);
            for (t, &e) in edges.iter().enumerate() {
                let out = &mut self.to_check[e * q..(e + 1) * q];
                for x in 0..q {
                    out[x] = running[x] * suffix[t * q + x];
                }
                normalize_in_place(out, ops)?;
                let r = &self.to_var[e * q..(e + 1) * q];
                for x in 0..q {
                    running[x] *= r[x];
                }
            }
            post.copy_from_slice(&running);
            normalize_in_place(post, ops)?;
            ops.float_mul += ((3 * d).saturating_sub(1) * q) as u64;
        }
        Ok(())
    }

    fn satisfied(&self, word: &[Symbol]) -> bool {
        (0..self.row_start.len() - 1).all(|i| {
            (self.row_start[i]..self.row_start[i + 1])
                .fold(0u8, |acc, e| acc ^ self.field.mul(self.edge_label[e], word[self.edge_var[e]]))
                == 0
        })
    }

    /// Posterior distributions from the last decode, `N x q` row-major.
    pub fn posteriors(&self) -> &[f64] {
        &self.posterior
    }
}

/// One-shot decode with default options and the given iteration cap.
pub fn decode(code: &Code, priors: &[Dist], max_iterations: usize) -> Result<DecodeResult> {
    Decoder::new(code).decode(priors, DecoderOptions { max_iterations, early_stop: true })
}

/// Messages from one check node to each of its neighbours.
pub fn check_node_update(field: &Field, labels: &[Symbol], incoming: &[Dist]) -> Result<Vec<Dist>> {
    let q = field.q();
    if labels.len() != incoming.len() || labels.is_empty() {
        return Err(Error::InvalidArgument(format!("{} labels for {} messages", labels.len(), incoming.len())));
    }
    if labels.contains(&0) {
        return Err(Error::InvalidArgument("zero edge label".into()));
    }
    let mut input = Vec::with_capacity(labels.len() * q);
    for d in incoming {
        if d.q() != q {
            return Err(Error::LengthMismatch { expected: q, got: d.q() });
        }
        let mut p = d.probs().to_vec();
        normalize_in_place(&mut p, &mut OpCounts::default())?;
        input.extend(p);
    }
    let mut output = vec![0.0; input.len()];
    check_kernel(field, labels, &input, &mut output, &mut CheckScratch::default(), &mut OpCounts::default());
    Ok(output.chunks_exact(q).map(|c| Dist::from_raw(c.to_vec())).collect())
}

/// Leave-one-out product of the prior and the incoming check messages,
/// excluding `incoming[exclude]`.
pub fn variable_node_update(prior: &Dist, incoming: &[Dist], exclude: usize) -> Result<Dist> {
    if exclude >= incoming.len() {
        return Err(Error::InvalidArgument(format!("exclude index {exclude} for {} messages", incoming.len())));
    }
    let mut p = prior.probs().to_vec();
    for (k, d) in incoming.iter().enumerate() {
        if d.q() != p.len() {
            return Err(Error::LengthMismatch { expected: p.len(), got: d.q() });
        }
        if k != exclude {
            for (u, v) in p.iter_mut().zip(d.probs()) {
                *u *= *v;
            }
        }
    }
    normalize_in_place(&mut p, &mut OpCounts::default())?;
    Ok(Dist::from_raw(p))
}
