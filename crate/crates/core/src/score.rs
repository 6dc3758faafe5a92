//! Orthonormal mid-rank score functions.
//!
//! `S_1(u) = (u - 1/2) / sigma_mid`, and `S_k` for `k > 1` is obtained by
//! Gram-Schmidt on `S_1^k` against the constant and the earlier scores. The
//! inner product is the pooled empirical measure, computed over distinct
//! atoms so the result does not depend on sample order.

use crate::error::{Error, Result};
use crate::midrank::MidRankVector;

pub const DEFAULT_COMPONENTS: usize = 4;
pub const MAX_COMPONENTS: usize = 6;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ScoreBasis {
    m: usize,
    sample_u: Vec<f64>,
    /// Row-major `n x m`; entry `(i, k)` is `S_{k+1}(u_i)`.
    score_matrix: Vec<f64>,
    /// Row `k` holds the coefficients of `S_{k+1}` in powers `u^0..u^m`.
    poly_coeffs: Vec<Vec<f64>>,
}

pub fn build_score_basis(u: &MidRankVector, m: usize) -> Result<ScoreBasis> {
    if m == 0 || m > MAX_COMPONENTS {
        return Err(Error::InvalidTruncation(m));
    }
    let sigma = u.sigma_mid();
    if sigma <= 0.0 {
        return Err(Error::DegenerateVariable);
    }
    let n = u.n_effective();
    if n <= m + 1 {
        return Err(Error::TooFewSamples {
            needed: m + 1,
            got: n,
        });
    }

    let atoms = u.atoms();
    let nf = n as f64;
    let weights: Vec<f64> = atoms.iter().map(|&(_, c)| c as f64 / nf).collect();
    let s: Vec<f64> = atoms.iter().map(|&(a, _)| (a - 0.5) / sigma).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&weights)
            .map(|((x, y), w)| w * x * y)
            .sum()
    };

    // Orthonormal vectors over atoms, starting with the constant; each entry
    // carries its coefficients in powers s^0..s^m.
    let mut vectors: Vec<Vec<f64>> = vec![vec![1.0; atoms.len()], s.clone()];
    let mut coeffs: Vec<Vec<f64>> = vec![unit(0, m), unit(1, m)];

    for k in 2..=m {
        let mut v: Vec<f64> = s.iter().map(|x| x.powi(k as i32)).collect();
        let mut c = unit(k, m);
        let start_norm = dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for (q, qc) in vectors.iter().zip(&coeffs) {
                let r = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= r * b);
                c.iter_mut().zip(qc).for_each(|(a, b)| *a -= r * b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if !(norm > RESIDUAL_TOL * start_norm) {
            return Err(Error::RankDeficient {
                component: k,
                requested: m,
            });
        }
        v.iter_mut().for_each(|a| *a /= norm);
        c.iter_mut().for_each(|a| *a /= norm);
        vectors.push(v);
        coeffs.push(c);
    }

    let poly_coeffs: Vec<Vec<f64>> = coeffs[1..]
        .iter()
        .map(|cs| s_poly_to_u_poly(cs, sigma))
        .collect();

    let mut score_matrix = Vec::with_capacity(n * m);
    for &a in u.atom_of() {
        score_matrix.extend(vectors[1..].iter().map(|v| v[a]));
    }

    Ok(ScoreBasis {
        m,
        sample_u: u.u().to_vec(),
        score_matrix,
        poly_coeffs,
    })
}

fn unit(k: usize, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[k] = 1.0;
    v
}

/// Re-expand `sum_j c_j s^j` with `s = (u - 1/2)/sigma` in powers of `u`.
fn s_poly_to_u_poly(c: &[f64], sigma: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        let scale = cj / sigma.powi(j as i32);
        let mut binom = 1.0;
        for i in 0..=j {
            out[i] += scale * binom * (-0.5f64).powi((j - i) as i32);
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    out
}

impl ScoreBasis {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.sample_u.len()
    }

    pub fn sample_u(&self) -> &[f64] {
        &self.sample_u
    }

    /// Scores `S_1..S_m` at sample point `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.score_matrix[i * self.m..(i + 1) * self.m]
    }

    /// Values of `S_{k+1}` over the sample.
    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.score_matrix.iter().skip(k).step_by(self.m).copied()
    }

    pub fn score_matrix(&self) -> &[f64] {
        &self.score_matrix
    }

    pub fn poly_coeffs(&self) -> &[Vec<f64>] {
        &self.poly_coeffs
    }

    /// `(S_1(u), ..., S_m(u))` at an arbitrary `u` in `(0, 1)`.
    pub fn evaluate(&self, u: f64) -> Result<Vec<f64>> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::OutOfDomain(u));
        }
        Ok(self.poly_coeffs.iter().map(|c| horner(c, u)).collect())
    }

    /// Empirical Gram matrix `(1/n) S^T S`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let n = self.n() as f64;
        let mut g = vec![vec![0.0; self.m]; self.m];
        for i in 0..self.n() {
            let r = self.row(i);
            for a in 0..self.m {
                for b in 0..self.m {
                    g[a][b] += r[a] * r[b];
                }
            }
        }
        g.iter_mut().flatten().for_each(|x| *x /= n);
        g
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Largest usable truncation point for a variable with `distinct` atoms.
pub fn max_components(distinct: usize) -> usize {
    distinct.saturating_sub(1).min(MAX_COMPONENTS)
}
