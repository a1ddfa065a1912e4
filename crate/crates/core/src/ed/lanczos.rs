//! Lanczos eigensolver with full reorthogonalization, explicit restarts and deflation.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Largest Krylov basis before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Residual target relative to the Gershgorin bound of the operator.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_basis: 160,
            max_restarts: 60,
            rel_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

/// Keeps the Krylov basis within roughly 320 MB.
fn basis_limit(dim: usize, requested: usize) -> usize {
    requested.min(dim).min((40_000_000 / dim.max(1)).max(20))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Two passes of classical Gram-Schmidt against each vector set.
fn orthogonalize(w: &mut [f64], sets: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for set in sets {
            for v in set.iter() {
                let c = dot(v, w);
                axpy(w, -c, v);
            }
        }
    }
}

/// A converged eigenpair.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Lowest `count` eigenpairs of `h` restricted to the basis states where `mask` is true.
///
/// `h` must leave the masked subspace invariant. Pairs come out in increasing order; fewer
/// are returned only when the subspace is smaller than `count`.
pub fn lowest_eigenpairs(h: &CsrMatrix, mask: &[bool], count: usize, opts: &LanczosOptions) -> Result<Vec<EigenPair>> {
    let sector_dim = mask.iter().filter(|&&m| m).count();
    let count = count.min(sector_dim);
    let tol = opts.rel_tol * h.norm_bound().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<EigenPair> = Vec::with_capacity(count);
    let mut locked_vecs: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let start: Vec<f64> = mask
            .iter()
            .map(|&m| if m { rng.gen::<f64>() - 0.5 } else { 0.0 })
            .collect();
        let pair = lowest_deflated(h, &locked_vecs, start, tol, opts)?;
        locked_vecs.push(pair.vector.clone());
        locked.push(pair);
    }
    locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(locked)
}

fn lowest_deflated(
    h: &CsrMatrix,
    locked: &[Vec<f64>],
    mut start: Vec<f64>,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<EigenPair> {
    let dim = h.dim;
    let m_max = basis_limit(dim, opts.max_basis);
    orthogonalize(&mut start, &[locked]);
    if normalize(&mut start) == 0.0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let mut hv = vec![0.0; dim];
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let ritz = loop {
            let j = basis.len() - 1;
            h.mul_real(&basis[j], &mut hv);
            iterations += 1;
            let alpha = dot(&basis[j], &hv);
            let mut w = hv.clone();
            axpy(&mut w, -alpha, &basis[j]);
            if j > 0 {
                axpy(&mut w, -betas[j - 1], &basis[j - 1]);
            }
            orthogonalize(&mut w, &[locked, &basis]);
            alphas.push(alpha);
            let beta = dot(&w, &w).sqrt();
            let exhausted = beta <= 1e-12 * alpha.abs().max(tol);
            let full = basis.len() >= m_max;
            if exhausted || full || basis.len().is_multiple_of(4) {
                let s = tridiagonal_lowest(&alphas, &betas);
                if exhausted || full || beta * s[s.len() - 1].abs() <= 0.1 * tol {
                    break s;
                }
            }
            w.iter_mut().for_each(|x| *x /= beta);
            betas.push(beta);
            basis.push(w);
        };
        let mut x = vec![0.0; dim];
        for (c, v) in ritz.iter().zip(&basis) {
            axpy(&mut x, *c, v);
        }
        orthogonalize(&mut x, &[locked]);
        normalize(&mut x);
        h.mul_real(&x, &mut hv);
        let value = dot(&x, &hv);
        axpy(&mut hv, -value, &x);
        let residual = dot(&hv, &hv).sqrt();
        if residual <= tol {
            return Ok(EigenPair {
                value,
                vector: x,
                residual,
            });
        }
        best_residual = best_residual.min(residual);
        start = x;
    }
    Err(Error::NoConvergence {
        iterations,
        residual: best_residual,
    })
}

/// Eigenvector of the lowest eigenvalue of the symmetric tridiagonal matrix with the given diagonals.
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> Vec<f64> {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imin();
    eig.eigenvectors.column(k).iter().copied().collect()
}
