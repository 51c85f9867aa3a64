//! Reference implementations used as test oracles. Each is written from the
//! definitions, independently of the library's fast paths.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

/// Carry-less multiplication modulo `poly` in GF(2^m).
pub fn gf_mul_slow(a: u8, b: u8, m: u32, poly: u32) -> u8 {
    let mut acc: u32 = 0;
    for k in 0..m {
        if b >> k & 1 == 1 {
            acc ^= (a as u32) << k;
        }
    }
    for k in (m..2 * m).rev() {
        if acc >> k & 1 == 1 {
            acc ^= poly << (k - m);
        }
    }
    acc as u8
}

/// `c[z] = sum_x a[x] b[x ^ z]`, read off the definition.
pub fn direct_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let q = a.len();
    let mut c = vec![0.0; q];
    for (z, cz) in c.iter_mut().enumerate() {
        for x in 0..q {
            *cz += a[x] * b[x ^ z];
        }
    }
    c
}

pub fn random_distribution<R: Rng>(rng: &mut R, q: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..q).map(|_| rng.random::<f64>()).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    p
}

/// Posterior over constellation points by direct evaluation of the
/// Gaussian likelihood.
pub fn brute_posterior(points: &[Complex64], y: Complex64, n0: f64) -> Vec<f64> {
    let logs: Vec<f64> = points.iter().map(|p| -(y - p).norm_sqr() / n0).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Binary sum-product decoding in the log-likelihood-ratio domain with the
/// tanh rule, flooding schedule. `llr[j] = ln P(0)/P(1)`; `rows[i]` lists
/// the variables of check `i`. Stops after the first iteration whose hard
/// decision satisfies every check. Returns the decision and the number of
/// iterations run.
pub fn textbook_binary_spa(rows: &[Vec<usize>], llr: &[f64], max_iterations: usize) -> (Vec<u8>, usize) {
    let n = llr.len();
    let mut var_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for (k, &j) in row.iter().enumerate() {
            var_edges[j].push((i, k));
        }
    }
    let mut v2c: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&j| llr[j]).collect()).collect();
    let mut c2v: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut decision = vec![0u8; n];
    for it in 1..=max_iterations {
        for (i, row) in rows.iter().enumerate() {
            for k in 0..row.len() {
                let mut prod = 1.0;
                for (t, &m) in v2c[i].iter().enumerate() {
                    if t != k {
                        prod *= (m / 2.0).tanh();
                    }
                }
                let prod = prod.clamp(-1.0 + 1e-16, 1.0 - 1e-16);
                c2v[i][k] = 2.0 * prod.atanh();
            }
        }
        for j in 0..n {
            let total: f64 = llr[j] + var_edges[j].iter().map(|&(i, k)| c2v[i][k]).sum::<f64>();
            for &(i, k) in &var_edges[j] {
                v2c[i][k] = total - c2v[i][k];
            }
            decision[j] = (total < 0.0) as u8;
        }
        let ok = rows.iter().all(|r| r.iter().fold(0u8, |acc, &j| acc ^ decision[j]) == 0);
        if ok {
            return (decision, it);
        }
    }
    (decision, max_iterations)
}
