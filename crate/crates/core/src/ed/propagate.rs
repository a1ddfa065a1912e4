//! Time propagators: dense spectral, Krylov-Lanczos and third-order splitting.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::layout::{Factor, Layout};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest dimension the automatic choice hands to the dense propagator.
pub const EXACT_DIM_LIMIT: usize = 4096;
/// Per-step error target of the Krylov propagator.
pub const KRYLOV_TOL: f64 = 1e-9;
const KRYLOV_MAX_BASIS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Propagator {
    /// Exact below [`EXACT_DIM_LIMIT`], Krylov above.
    #[default]
    Auto,
    Exact,
    Krylov,
    /// Ruth's third-order splitting into the diagonal part and the couplings.
    Trotter3,
}

impl Propagator {
    pub fn resolve(self, dim: usize) -> Self {
        match self {
            Propagator::Auto if dim <= EXACT_DIM_LIMIT => Propagator::Exact,
            Propagator::Auto => Propagator::Krylov,
            p => p,
        }
    }
}

/// A σ^x ⊗ x coupling between a spin factor and a cavity factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub spin: usize,
    pub cavity: usize,
    pub strength: f64,
}

/// Stepper holding whatever precomputation the chosen propagator needs.
pub(crate) enum Stepper<'a> {
    Exact {
        energies: DVector<f64>,
        vectors: DMatrix<f64>,
    },
    Krylov {
        h: &'a CsrMatrix,
    },
    Trotter {
        layout: &'a Layout,
        diagonal: Vec<f64>,
        /// Coupling energy of each basis state of the rotated frame.
        coupling_diagonal: Vec<f64>,
        /// Per factor: row-major rotation into the frame where its coupling operator is diagonal.
        rotations: Vec<Vec<f64>>,
    },
}

/// Coefficients (diagonal weight, coupling weight) of each stage, first stage applied first.
const RUTH: [(f64, f64); 3] = [(7.0 / 24.0, 2.0 / 3.0), (3.0 / 4.0, -2.0 / 3.0), (-1.0 / 24.0, 1.0)];

impl<'a> Stepper<'a> {
    pub fn new(kind: Propagator, h: &'a CsrMatrix, layout: &'a Layout, couplings: &[Coupling]) -> Self {
        match kind.resolve(h.dim) {
            Propagator::Exact | Propagator::Auto => {
                let eig = SymmetricEigen::new(h.to_dense());
                Stepper::Exact {
                    energies: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                }
            }
            Propagator::Krylov => Stepper::Krylov { h },
            Propagator::Trotter3 => {
                let (rotations, eigen): (Vec<Vec<f64>>, Vec<Vec<f64>>) = layout
                    .kinds
                    .iter()
                    .zip(&layout.dims)
                    .map(|(kind, &d)| match kind {
                        Factor::Spin => {
                            let r = std::f64::consts::FRAC_1_SQRT_2;
                            (vec![r, r, r, -r], vec![1.0, -1.0])
                        }
                        Factor::Cavity => quadrature_eigenbasis(d),
                    })
                    .unzip();
                let coupling_diagonal = (0..h.dim)
                    .map(|i| {
                        couplings
                            .iter()
                            .map(|c| {
                                c.strength
                                    * eigen[c.spin][layout.digit(i, c.spin)]
                                    * eigen[c.cavity][layout.digit(i, c.cavity)]
                            })
                            .sum()
                    })
                    .collect();
                Stepper::Trotter {
                    layout,
                    diagonal: h.diagonal(),
                    coupling_diagonal,
                    rotations,
                }
            }
        }
    }

    /// Advances `psi` by `dt` in place.
    pub fn step(&self, psi: &mut [C64], dt: f64, time: f64) -> Result<()> {
        match self {
            Stepper::Exact { energies, vectors } => {
                let v = vectors;
                let coeffs: Vec<C64> = (0..v.ncols())
                    .map(|k| {
                        let c: C64 = v.column(k).iter().zip(psi.iter()).map(|(a, b)| b * a).sum();
                        c * C64::from_polar(1.0, -energies[k] * dt)
                    })
                    .collect();
                for (r, out) in psi.iter_mut().enumerate() {
                    *out = v.row(r).iter().zip(&coeffs).map(|(a, c)| c * a).sum();
                }
                Ok(())
            }
            Stepper::Krylov { h } => krylov_step(h, psi, dt, time),
            Stepper::Trotter {
                layout,
                diagonal,
                coupling_diagonal,
                rotations,
            } => {
                for &(ca, cb) in &RUTH {
                    apply_phases(psi, diagonal, ca * dt);
                    rotate(layout, psi, rotations, true);
                    apply_phases(psi, coupling_diagonal, cb * dt);
                    rotate(layout, psi, rotations, false);
                }
                Ok(())
            }
        }
    }
}

fn apply_phases(psi: &mut [C64], energies: &[f64], tau: f64) {
    psi.iter_mut()
        .zip(energies)
        .for_each(|(z, e)| *z *= C64::from_polar(1.0, -e * tau));
}

/// Applies Rᵀ (into the coupling frame) or R (back) on every factor.
fn rotate(layout: &Layout, psi: &mut [C64], rotations: &[Vec<f64>], forward: bool) {
    for (f, r) in rotations.iter().enumerate() {
        if forward {
            let d = layout.dims[f];
            let rt: Vec<f64> = (0..d * d).map(|k| r[(k % d) * d + k / d]).collect();
            layout.apply_local(psi, f, &rt);
        } else {
            layout.apply_local(psi, f, r);
        }
    }
}

/// Eigenvectors (row-major, as columns) and eigenvalues of the truncated a + a†.
fn quadrature_eigenbasis(d: usize) -> (Vec<f64>, Vec<f64>) {
    let x = DMatrix::from_fn(d, d, |r, c| {
        if r + 1 == c {
            (c as f64).sqrt()
        } else if c + 1 == r {
            (r as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(x);
    let rot = (0..d * d).map(|k| eig.eigenvectors[(k / d, k % d)]).collect();
    (rot, eig.eigenvalues.iter().copied().collect())
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One Krylov step of length `dt`, split into substeps until each meets [`KRYLOV_TOL`].
fn krylov_step(h: &CsrMatrix, psi: &mut [C64], dt: f64, time: f64) -> Result<()> {
    let mut remaining = dt;
    let mut guard = 0;
    while remaining > 0.0 {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::Propagation {
                time,
                message: "Krylov substep count exceeded 10000".into(),
            });
        }
        let norm = cdot(psi, psi).re.sqrt();
        let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|z| z / norm).collect()];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut w = vec![C64::new(0.0, 0.0); h.dim];
        let mut tau = remaining;
        let (coeffs, used_tau) = loop {
            let j = basis.len() - 1;
            h.mul_complex(&basis[j], &mut w);
            let alpha = cdot(&basis[j], &w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for v in &basis {
                    let c = cdot(v, &w);
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let beta = cdot(&w, &w).re.sqrt();
            let (vals, vecs) = tridiagonal_eigen(&alphas, &betas);
            let propagate = |t: f64| -> Vec<C64> {
                (0..alphas.len())
                    .map(|r| {
                        (0..alphas.len())
                            .map(|k| C64::from_polar(vecs[(r, k)] * vecs[(0, k)], -vals[k] * t))
                            .sum()
                    })
                    .collect()
            };
            let error = |c: &[C64]| beta * c[c.len() - 1].norm();
            let c = propagate(tau);
            let breakdown = beta <= 1e-14 * alpha.abs().max(1.0);
            if breakdown || error(&c) <= KRYLOV_TOL {
                break (c, tau);
            }
            if basis.len() >= KRYLOV_MAX_BASIS.min(h.dim) {
                // shrink the substep until this basis is accurate enough
                loop {
                    tau *= 0.5;
                    if tau < 1e-12 * dt.max(1e-300) {
                        return Err(Error::Propagation {
                            time,
                            message: format!("Krylov substep underflow, residual estimate {}", error(&c)),
                        });
                    }
                    let c = propagate(tau);
                    if error(&c) <= KRYLOV_TOL {
                        break;
                    }
                }
                break (propagate(tau), tau);
            }
            w.iter_mut().for_each(|z| *z /= beta);
            betas.push(beta);
            basis.push(std::mem::replace(&mut w, vec![C64::new(0.0, 0.0); h.dim]));
        };
        psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (c, v) in coeffs.iter().zip(&basis) {
            psi.iter_mut().zip(v).for_each(|(p, vi)| *p += c * vi * norm);
        }
        remaining -= used_tau;
        if remaining < 1e-14 * dt {
            remaining = 0.0;
        }
    }
    Ok(())
}

fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
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
    (eig.eigenvalues, eig.eigenvectors)
}
