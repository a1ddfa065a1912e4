//! Polaron (Lang–Firsov) variational ground state.
//!
//! Displacing every cavity conditioned on the neighbouring spins removes the linear
//! coupling and leaves an antiferromagnetic Ising chain in the renormalized field
//! `h̃ = h·exp(−4(g/ω)²)`. Cavity and spin polarizations are locked by `2g/ω`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ising::{ising_gs_energy, ising_magnetization};
use crate::model::{derive_scales, momentum_grid, Boundary, DerivedScales, ModelParams, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzGroundState {
    pub scales: DerivedScales,
    pub h_tilde: f64,
    pub lambda: Ratio,
    /// Renormalized Ising energy −Σ_q ε̃_q on the periodic grid.
    pub energy: f64,
    /// Constant −N·J generated by the displacement of the cavities.
    pub polaron_shift: f64,
    pub ordered: bool,
}

impl AnsatzGroundState {
    /// Variational energy of the full spin-boson Hamiltonian.
    pub fn total_energy(&self) -> f64 {
        self.energy + self.polaron_shift
    }
}

pub fn ansatz_ground_state(params: &ModelParams) -> Result<AnsatzGroundState> {
    let scales = derive_scales(params)?;
    let grid = momentum_grid(params.n_sites, Boundary::Periodic)?;
    Ok(AnsatzGroundState {
        scales,
        h_tilde: scales.h_tilde,
        lambda: scales.lambda,
        energy: ising_gs_energy(scales.j, scales.h_tilde, &grid),
        polaron_shift: -(params.n_sites as f64) * scales.j,
        ordered: scales.lambda.is_ordered(),
    })
}

/// Critical qubit frequency ω₀/ω = 4x²e^{4x²}, x = g/ω.
pub fn ansatz_critical_omega0(g_over_omega: f64) -> f64 {
    let y = 4.0 * g_over_omega * g_over_omega;
    y * y.exp()
}

/// Inverse of [`ansatz_critical_omega0`] by bisection to 1e-10.
pub fn ansatz_critical_g(omega0_over_omega: f64) -> f64 {
    if omega0_over_omega <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ansatz_critical_omega0(hi) < omega0_over_omega {
        hi *= 2.0;
    }
    bisect(|x| ansatz_critical_omega0(x) - omega0_over_omega, 0.0, hi, 1e-12)
}

/// Root of an increasing function on `[lo, hi]`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Spin and cavity polarization at a 0-based `site`; `|a| = (2g/ω)|sx|`.
pub fn ansatz_polarizations(state: &AnsatzGroundState, site: usize) -> (f64, f64) {
    let s = state.scales.coupling_pattern.stagger(site);
    let m = ising_magnetization(state.lambda);
    (s * m, -s * state.scales.lock_ratio() * m)
}
