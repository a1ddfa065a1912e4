//! Exact diagonalization of the Fock-truncated chain, optionally with the probe cavity.
//!
//! The basis is the tensor product spin₁ ⊗ cav₁ ⊗ spin₂ ⊗ cav₂ ⊗ … with the extra cavity
//! of the open chain and then the probe cavity at the end. The Hamiltonian is real
//! symmetric and conserves the parity Π σ^z · Π (−1)^n, so eigenpairs are computed per
//! parity sector.

mod cache;
mod lanczos;
mod layout;
mod propagate;
mod sparse;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::GroundStateCache;
pub use lanczos::{lowest_eigenpairs, EigenPair, LanczosOptions};
pub use layout::{Factor, Layout};
pub use propagate::{Coupling, Propagator, EXACT_DIM_LIMIT, KRYLOV_TOL};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::model::{derive_scales, Boundary, ModelParams};
use crate::spectroscopy::{sine_time_fourier, ProbeParams, SpectroscopyResult, TransformOptions, Window};

pub const DEFAULT_DIM_CAP: usize = 2_000_000;
/// Sector ground energies closer than this are reported as a degenerate doublet.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Largest tolerated |‖ψ(t)‖ − 1| along a trajectory.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSpec {
    /// Largest photon number kept in each chain cavity.
    pub n_max: usize,
    pub n_max_probe: usize,
    /// Ground-energy change that ends a truncation sweep.
    pub convergence_tol: f64,
    pub dim_cap: usize,
    /// Sweeps stop here even when not converged.
    pub max_n_max: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            n_max: 6,
            n_max_probe: 8,
            convergence_tol: 1e-6,
            dim_cap: DEFAULT_DIM_CAP,
            max_n_max: 16,
        }
    }
}

impl TruncationSpec {
    /// Same spec starting at `n_max`; the sweep limit is raised if needed.
    pub fn with_n_max(self, n_max: usize) -> Self {
        Self {
            n_max,
            max_n_max: self.max_n_max.max(n_max),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::validation("n_max", "must be at least 1"));
        }
        if self.n_max_probe < 1 {
            return Err(Error::validation("n_max_probe", "must be at least 1"));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::validation("convergence_tol", "must be positive"));
        }
        if self.max_n_max < self.n_max {
            return Err(Error::validation("max_n_max", "must be at least n_max"));
        }
        Ok(())
    }
}

fn n_cavities(params: &ModelParams) -> usize {
    match params.boundary {
        Boundary::Periodic => params.n_sites,
        Boundary::Open => params.n_sites + 1,
    }
}

/// Basis dimension of the chain at this truncation, or `None` on overflow.
pub fn hilbert_dim(params: &ModelParams, n_max: usize, probe_n_max: Option<usize>) -> Option<usize> {
    Layout::checked_dim(params.n_sites, n_cavities(params), n_max, probe_n_max)
}

/// Sparse Hamiltonian together with its basis layout and coupling list.
#[derive(Debug, Clone)]
pub struct EdHamiltonian {
    pub params: ModelParams,
    pub probe: Option<ProbeParams>,
    pub layout: Layout,
    pub matrix: CsrMatrix,
    pub couplings: Vec<Coupling>,
}

impl EdHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// Basis states of parity `sign`.
    pub fn sector_mask(&self, sign: i8) -> Vec<bool> {
        (0..self.dim()).map(|i| self.layout.parity(i) == sign).collect()
    }
}

/// Sparse Hamiltonian of the chain, with the probe cavity on qubit 1 when `probe` is given.
///
/// Besides the usual N ≥ 2 models this accepts a single qubit between two cavities (open, N = 1).
pub fn build_hamiltonian(
    params: &ModelParams,
    trunc: &TruncationSpec,
    probe: Option<&ProbeParams>,
) -> Result<EdHamiltonian> {
    if params.n_sites == 1 && params.boundary == Boundary::Open {
        ModelParams { n_sites: 2, ..*params }.validate()?;
    } else {
        params.validate()?;
    }
    trunc.validate()?;
    if let Some(p) = probe {
        p.validate()?;
    }
    let n = params.n_sites;
    let n_cav = n_cavities(params);
    let probe_n = probe.map(|_| trunc.n_max_probe);
    let dim = Layout::checked_dim(n, n_cav, trunc.n_max, probe_n).unwrap_or(usize::MAX);
    if dim > trunc.dim_cap {
        return Err(Error::SizeExceeded {
            dim,
            cap: trunc.dim_cap,
        });
    }
    let layout = Layout::new(n, n_cav, trunc.n_max, probe_n);
    let right = params.coupling_pattern.right_sign();
    let mut couplings: Vec<Coupling> = (0..n)
        .flat_map(|i| {
            let spin = layout.spins[i];
            [
                Coupling {
                    spin,
                    cavity: layout.cavities[i],
                    strength: params.g,
                },
                Coupling {
                    spin,
                    cavity: layout.cavities[(i + 1) % n_cav],
                    strength: right * params.g,
                },
            ]
        })
        .collect();
    if let (Some(p), Some(f)) = (probe, layout.probe) {
        couplings.push(Coupling {
            spin: layout.spins[0],
            cavity: f,
            strength: p.g_p,
        });
    }
    let omega_p = probe.map_or(0.0, |p| p.omega_p);
    let rows: Vec<Vec<(usize, f64)>> = (0..dim)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let mut diag = 0.0;
            for &f in &layout.spins {
                diag += 0.5 * params.omega0 * layout.sz(i, f);
            }
            for &f in &layout.cavities {
                diag += params.omega * layout.digit(i, f) as f64;
            }
            if let Some(f) = layout.probe {
                diag += omega_p * layout.digit(i, f) as f64;
            }
            let mut row = vec![(i, diag)];
            for c in &couplings {
                let flipped = if layout.digit(i, c.spin) == 0 {
                    i + layout.strides[c.spin]
                } else {
                    i - layout.strides[c.spin]
                };
                let photons = layout.digit(i, c.cavity);
                let stride = layout.strides[c.cavity];
                if photons + 1 < layout.dims[c.cavity] {
                    row.push((flipped + stride, c.strength * ((photons + 1) as f64).sqrt()));
                }
                if photons > 0 {
                    row.push((flipped - stride, c.strength * (photons as f64).sqrt()));
                }
            }
            row
        })
        .collect();
    Ok(EdHamiltonian {
        params: *params,
        probe: probe.copied(),
        layout,
        matrix: CsrMatrix::from_rows(rows),
        couplings,
    })
}

/// Lowest eigenstate over both parity sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub parity: i8,
    /// Lowest energy of the opposite parity sector minus `energy`.
    pub sector_gap: f64,
    /// The two sector ground states are degenerate within [`DEGENERACY_TOL`].
    pub degenerate: bool,
    pub residual: f64,
}

impl GroundState {
    pub fn complex_vector(&self) -> Vec<C64> {
        self.vector.iter().map(|&x| C64::new(x, 0.0)).collect()
    }
}

pub fn ground_state(h: &EdHamiltonian, opts: &LanczosOptions) -> Result<GroundState> {
    let mut sectors = Vec::new();
    for sign in [1i8, -1] {
        let mask = h.sector_mask(sign);
        if let Some(pair) = lowest_eigenpairs(&h.matrix, &mask, 1, opts)?.pop() {
            sectors.push((sign, pair));
        }
    }
    sectors.sort_by(|a, b| a.1.value.total_cmp(&b.1.value));
    let gap = match sectors.as_slice() {
        [a, b] => b.1.value - a.1.value,
        _ => f64::INFINITY,
    };
    let (parity, pair) = sectors.into_iter().next().ok_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    })?;
    Ok(GroundState {
        energy: pair.value,
        vector: pair.vector,
        parity,
        sector_gap: gap,
        degenerate: gap < DEGENERACY_TOL,
        residual: pair.residual,
    })
}

/// The `count` lowest eigenvalues over both parity sectors, non-decreasing.
pub fn low_spectrum(h: &EdHamiltonian, count: usize, opts: &LanczosOptions) -> Result<Vec<f64>> {
    let mut levels = Vec::with_capacity(2 * count);
    for sign in [1i8, -1] {
        let mask = h.sector_mask(sign);
        levels.extend(
            lowest_eigenpairs(&h.matrix, &mask, count, opts)?
                .into_iter()
                .map(|p| p.value),
        );
    }
    levels.sort_by(f64::total_cmp);
    levels.truncate(count);
    Ok(levels)
}

/// Ground state for `params` at truncation `n_max`, served from `cache` when present.
/// Returns the state and whether it was a cache hit.
pub fn cached_ground_state(
    params: &ModelParams,
    trunc: &TruncationSpec,
    opts: &LanczosOptions,
    cache: Option<&GroundStateCache>,
) -> Result<(GroundState, bool)> {
    let key = GroundStateCache::key(params, trunc.n_max, opts.seed);
    if let Some(c) = cache {
        if let Some(state) = c.load(&key)? {
            return Ok((state, true));
        }
    }
    let h = build_hamiltonian(params, trunc, None)?;
    let state = ground_state(&h, opts)?;
    if let Some(c) = cache {
        c.store(&key, &state)?;
    }
    Ok((state, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinObservables {
    pub sx: f64,
    pub sz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityObservables {
    /// ⟨a⟩; real because the Hamiltonian and its eigenvectors are real.
    pub a: f64,
    pub occupation: f64,
}

pub fn spin_observables(h: &EdHamiltonian, state: &[C64]) -> Vec<SpinObservables> {
    h.layout
        .spins
        .iter()
        .map(|&f| SpinObservables {
            sx: h.layout.sigma_x(state, f),
            sz: h.layout.sigma_z(state, f),
        })
        .collect()
}

pub fn cavity_observables(h: &EdHamiltonian, state: &[C64]) -> Vec<CavityObservables> {
    h.layout
        .cavities
        .iter()
        .map(|&f| CavityObservables {
            a: h.layout.annihilation(state, f).re,
            occupation: h.layout.occupation(state, f),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPoint {
    pub n_max: usize,
    pub dim: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    pub params: ModelParams,
    /// Truncation of the final, reported point.
    pub n_max: usize,
    pub gs_energy: f64,
    pub spins: Vec<SpinObservables>,
    pub cavities: Vec<CavityObservables>,
    pub low_spectrum: Vec<f64>,
    pub truncation_report: Vec<TruncationPoint>,
    /// The last two sweep energies differ by at most the convergence tolerance.
    pub converged: bool,
    pub degenerate: bool,
}

/// Ground state, observables and the `levels` lowest eigenvalues, with the truncation
/// raised one photon at a time from `trunc.n_max` until the ground energy settles.
///
/// The sweep stops unconverged at `trunc.max_n_max` or at the dimension cap; it fails only
/// when the starting truncation is already too large.
pub fn solve(params: &ModelParams, trunc: &TruncationSpec, levels: usize, opts: &LanczosOptions) -> Result<EdResult> {
    trunc.validate()?;
    let mut report: Vec<TruncationPoint> = Vec::new();
    let mut best: Option<(EdHamiltonian, GroundState)> = None;
    let mut converged = false;
    for n_max in trunc.n_max..=trunc.max_n_max {
        let h = match build_hamiltonian(params, &trunc.with_n_max(n_max), None) {
            Ok(h) => h,
            Err(Error::SizeExceeded { .. }) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        let gs = ground_state(&h, opts)?;
        let prev = report.last().map(|p| p.energy);
        report.push(TruncationPoint {
            n_max,
            dim: h.dim(),
            energy: gs.energy,
        });
        best = Some((h, gs));
        if prev.is_some_and(|e| (e - report[report.len() - 1].energy).abs() <= trunc.convergence_tol) {
            converged = true;
            break;
        }
    }
    let (h, gs) = best.expect("at least one truncation point");
    let psi = gs.complex_vector();
    Ok(EdResult {
        params: *params,
        n_max: report[report.len() - 1].n_max,
        gs_energy: gs.energy,
        spins: spin_observables(&h, &psi),
        cavities: cavity_observables(&h, &psi),
        low_spectrum: low_spectrum(&h, levels, opts)?,
        truncation_report: report,
        converged,
        degenerate: gs.degenerate,
    })
}

/// Long-range order read from two-point correlators, which survive the finite-size
/// restoration of the Z₂ symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    /// Site separation of the correlated pair.
    pub distance: usize,
    pub spin_correlator: f64,
    pub quadrature_correlator: f64,
    /// √|⟨σ^x_i σ^x_j⟩|.
    pub spin_order: f64,
    /// √|⟨x_i x_j⟩| / 2, the coherent cavity amplitude.
    pub cavity_order: f64,
}

impl OrderParameters {
    /// Cavity amplitude per unit spin polarization; 2g/ω when the cavities follow the spins.
    pub fn lock_ratio(&self) -> f64 {
        self.cavity_order / self.spin_order
    }
}

/// Correlators between site 1 and the site farthest from it.
pub fn order_parameters(h: &EdHamiltonian, state: &[C64]) -> Result<OrderParameters> {
    let n = h.params.n_sites;
    if n < 2 {
        return Err(Error::validation("n_sites", "correlators need at least two sites"));
    }
    let far = match h.params.boundary {
        Boundary::Periodic => n / 2,
        Boundary::Open => n - 1,
    };
    let l = &h.layout;
    let spin_correlator = l.sigma_x_pair(state, l.spins[0], l.spins[far]);
    let quadrature_correlator = l.quadrature_pair(state, l.cavities[0], l.cavities[far]);
    Ok(OrderParameters {
        distance: far,
        spin_correlator,
        quadrature_correlator,
        spin_order: spin_correlator.abs().sqrt(),
        cavity_order: 0.5 * quadrature_correlator.abs().sqrt(),
    })
}

/// Observables sampled along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// ⟨a + a†⟩ per chain cavity, then the probe if present; `[cavity][time]`.
    pub quadratures: Vec<Vec<f64>>,
    /// ⟨σ^x⟩ per qubit; `[qubit][time]`.
    pub spin_x: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub propagator: Propagator,
    pub norm_drift: f64,
    /// max |E(t) − E(0)| / |E(0)|.
    pub energy_drift: f64,
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Ok(0.0);
    }
    let dt = times[1] - times[0];
    let span = times[times.len() - 1] - times[0];
    if !(dt.is_finite() && dt > 0.0)
        || times
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * span.max(1.0))
    {
        return Err(Error::validation("times", "time grid must be uniform and increasing"));
    }
    Ok(dt)
}

/// Evolves `initial` under `h`, sampling at every point of the uniform grid `times`.
/// The state is taken to be `initial` at `times[0]`.
pub fn evolve(h: &EdHamiltonian, initial: &[C64], times: &[f64], propagator: Propagator) -> Result<Trajectory> {
    if initial.len() != h.dim() {
        return Err(Error::validation(
            "state",
            format!("length {} does not match dimension {}", initial.len(), h.dim()),
        ));
    }
    let dt = check_uniform(times)?;
    let kind = propagator.resolve(h.dim());
    let stepper = propagate::Stepper::new(kind, &h.matrix, &h.layout, &h.couplings);
    let mut cavities: Vec<usize> = h.layout.cavities.clone();
    cavities.extend(h.layout.probe);
    let mut psi = initial.to_vec();
    let mut traj = Trajectory {
        times: times.to_vec(),
        quadratures: vec![Vec::with_capacity(times.len()); cavities.len()],
        spin_x: vec![Vec::with_capacity(times.len()); h.layout.spins.len()],
        energy: Vec::with_capacity(times.len()),
        propagator: kind,
        norm_drift: 0.0,
        energy_drift: 0.0,
    };
    let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for (it, &t) in times.iter().enumerate() {
        if it > 0 {
            stepper.step(&mut psi, dt, t)?;
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - norm0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::Propagation {
                time: t,
                message: format!("norm drift {drift:e} at step {it} exceeds {NORM_DRIFT_TOL:e}"),
            });
        }
        traj.norm_drift = traj.norm_drift.max(drift);
        for (row, &f) in traj.quadratures.iter_mut().zip(&cavities) {
            row.push(2.0 * h.layout.annihilation(&psi, f).re);
        }
        for (row, &f) in traj.spin_x.iter_mut().zip(&h.layout.spins) {
            row.push(h.layout.sigma_x(&psi, f));
        }
        traj.energy.push(h.matrix.expectation(&psi));
    }
    let e0 = traj.energy[0];
    let spread = traj.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
    traj.energy_drift = spread / e0.abs().max(f64::MIN_POSITIVE);
    Ok(traj)
}

/// Fock amplitudes of the coherent state |α⟩ up to `n_max`, renormalized.
///
/// Fails when the discarded weight exceeds 10⁻⁸.
pub fn coherent_amplitudes(alpha: f64, n_max: usize) -> Result<Vec<f64>> {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = (-0.5 * alpha * alpha).exp();
    for n in 0..=n_max {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let weight: f64 = amps.iter().map(|c| c * c).sum();
    let deficit = 1.0 - weight;
    if deficit > 1e-8 {
        return Err(Error::validation(
            "n_max_probe",
            format!("coherent amplitude {alpha} loses weight {deficit:e} at truncation {n_max}"),
        ));
    }
    let norm = weight.sqrt();
    Ok(amps.into_iter().map(|c| c / norm).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions<'a> {
    pub propagator: Propagator,
    pub transform: TransformOptions,
    pub lanczos: LanczosOptions,
    pub cache: Option<&'a GroundStateCache>,
}

impl Default for ExperimentOptions<'_> {
    fn default() -> Self {
        Self {
            propagator: Propagator::Auto,
            transform: TransformOptions {
                window: Window::Hann,
                ..TransformOptions::default()
            },
            lanczos: LanczosOptions::default(),
            cache: None,
        }
    }
}

/// Quadrature of the field each qubit couples to, x_j ± x_{j+1}, per qubit along the trajectory.
pub fn bond_quadratures(params: &ModelParams, traj: &Trajectory) -> Vec<Vec<f64>> {
    let n_cav = n_cavities(params);
    let right = params.coupling_pattern.right_sign();
    (0..params.n_sites)
        .map(|j| {
            traj.quadratures[j]
                .iter()
                .zip(&traj.quadratures[(j + 1) % n_cav])
                .map(|(l, r)| l + right * r)
                .collect()
        })
        .collect()
}

/// Numerical spectroscopy run: ground state of the chain, probe cavity appended in the
/// coherent state α_p, evolution under the coupled Hamiltonian, and the sine/time
/// transform of the bond quadratures (see [`bond_quadratures`]).
pub fn spectroscopy_experiment(
    params: &ModelParams,
    probe: &ProbeParams,
    trunc: &TruncationSpec,
    times: &[f64],
    nu_grid: &[f64],
    options: &ExperimentOptions,
) -> Result<SpectroscopyResult> {
    derive_scales(params)?;
    probe.validate()?;
    if params.boundary != Boundary::Open {
        return Err(Error::validation(
            "boundary",
            "the sine-grid readout needs an open chain",
        ));
    }
    let (gs, cache_hit) = cached_ground_state(params, trunc, &options.lanczos, options.cache)?;
    let h = build_hamiltonian(params, trunc, Some(probe))?;
    let amps = coherent_amplitudes(probe.alpha_p, trunc.n_max_probe)?;
    if gs.vector.len() * amps.len() != h.dim() {
        return Err(Error::validation(
            "cache",
            "cached ground state does not match the truncation",
        ));
    }
    let initial: Vec<C64> = gs
        .vector
        .iter()
        .flat_map(|&s| amps.iter().map(move |&c| C64::new(s * c, 0.0)))
        .collect();
    let traj = evolve(&h, &initial, times, options.propagator)?;
    let signal = bond_quadratures(params, &traj);
    let mut result = sine_time_fourier(&signal, times, nu_grid, &options.transform)?;
    result.metadata = serde_json::json!({
        "engine": "ed",
        "signal": "bond_quadrature",
        "params": params,
        "probe": probe,
        "truncation": trunc,
        "dim": h.dim(),
        "propagator": traj.propagator,
        "norm_drift": traj.norm_drift,
        "energy_drift": traj.energy_drift,
        "gs_energy": gs.energy,
        "gs_degenerate": gs.degenerate,
        "cache_hit": cache_hit,
        "transform": result.metadata,
    });
    Ok(result)
}
