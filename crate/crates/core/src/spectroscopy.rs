//! Probe-cavity spectroscopy of the hybrid quasiparticles.
//!
//! A weakly coupled probe cavity attached to the first qubit is treated as one more
//! single-particle level next to the per-momentum photon/fermion blocks of the ansatz.
//! The response surface is the sine/time transform of cavity quadratures, either built
//! from resolvent Green's functions or from a measured trajectory.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excitations::{ansatz_block, Convention};
use crate::ising::ising_magnetization;
use crate::model::{
    derive_scales, momentum_grid, Boundary, CouplingPattern, GridConvention, ModelParams, MomentumGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub omega_p: f64,
    pub g_p: f64,
    /// Initial coherent amplitude of the probe cavity.
    pub alpha_p: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            omega_p: 0.1,
            g_p: 1e-3,
            alpha_p: 0.5,
        }
    }
}

impl ProbeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_p.is_finite() && self.omega_p > 0.0) {
            return Err(Error::validation(
                "omega_p",
                format!("must be positive, got {}", self.omega_p),
            ));
        }
        if !(self.g_p.is_finite() && self.g_p >= 0.0) {
            return Err(Error::validation(
                "g_p",
                format!("must be non-negative, got {}", self.g_p),
            ));
        }
        if !self.alpha_p.is_finite() {
            return Err(Error::validation("alpha_p", "must be finite"));
        }
        Ok(())
    }

    /// The probe barely perturbs the chain: g_p < 10⁻²·min(g, ω, ω₀).
    pub fn is_non_invasive(&self, params: &ModelParams) -> bool {
        self.g_p < 1e-2 * params.g.min(params.omega).min(params.omega0)
    }
}

/// Single-particle Hamiltonian of probe plus hybrid quasiparticles.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecMatrix {
    pub dim: usize,
    /// Ordered as (probe, fermion q₁, photon q₁, fermion q₂, photon q₂, …).
    pub entries: DMatrix<C64>,
    /// Probe couplings g_{p,q} to each fermion level.
    pub couplings: Vec<C64>,
    pub momenta: Vec<f64>,
    /// Bogoliubov dressing ũ_q + ṽ_q* per momentum.
    pub dressing: Vec<C64>,
}

impl SpecMatrix {
    pub fn fermion_index(m: usize) -> usize {
        1 + 2 * m
    }

    pub fn photon_index(m: usize) -> usize {
        2 + 2 * m
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

fn require_antiferromagnetic(params: &ModelParams) -> Result<()> {
    if params.coupling_pattern != CouplingPattern::Antiferromagnetic {
        return Err(Error::validation(
            "coupling_pattern",
            "spectroscopy is implemented for the antiferromagnetic chain",
        ));
    }
    Ok(())
}

pub fn build_spec_matrix(params: &ModelParams, probe: &ProbeParams, convention: Convention) -> Result<SpecMatrix> {
    probe.validate()?;
    require_antiferromagnetic(params)?;
    let scales = derive_scales(params)?;
    let grid = momentum_grid(params.n_sites, Boundary::Open)?;
    let n = grid.len();
    let dim = 2 * n + 1;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    h[(0, 0)] = C64::new(probe.omega_p, 0.0);
    let norm = (params.n_sites as f64).sqrt();
    let mut couplings = Vec::with_capacity(n);
    let mut dressing = Vec::with_capacity(n);
    for (m, &q) in grid.values.iter().enumerate() {
        let block = ansatz_block(q, &scales, convention);
        let (f, b) = (SpecMatrix::fermion_index(m), SpecMatrix::photon_index(m));
        h[(f, f)] = C64::new(block.eps_q, 0.0);
        h[(b, b)] = C64::new(block.omega_q, 0.0);
        h[(b, f)] = block.g_q;
        h[(f, b)] = block.g_q.conj();
        let gp = probe.g_p * C64::from_polar(1.0, q) * block.dressing / norm;
        h[(0, f)] = gp;
        h[(f, 0)] = gp.conj();
        couplings.push(gp);
        dressing.push(block.dressing);
    }
    Ok(SpecMatrix {
        dim,
        entries: h,
        couplings,
        momenta: grid.values,
        dressing,
    })
}

/// System-probe Green's functions at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensFunctions {
    pub nu: f64,
    pub eta: f64,
    /// Photon-probe entries G^b_{q,p}, one per momentum.
    pub g_b: Vec<C64>,
    /// Fermion-probe entries G^f_{q,p}.
    pub g_f: Vec<C64>,
    /// Probe-probe entry.
    pub g_pp: C64,
}

/// Solves `[(ν + iη)I − H]·G = I` for the probe column.
pub fn resolvent_greens(matrix: &SpecMatrix, nu: f64, eta: f64) -> Result<GreensFunctions> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::validation("eta", format!("must be positive, got {eta}")));
    }
    let z = C64::new(nu, eta);
    let lhs = DMatrix::<C64>::identity(matrix.dim, matrix.dim) * z - &matrix.entries;
    let mut rhs = nalgebra::DVector::<C64>::zeros(matrix.dim);
    rhs[0] = C64::new(1.0, 0.0);
    let col = lhs.lu().solve(&rhs).ok_or_else(|| Error::Propagation {
        time: nu,
        message: "singular resolvent".into(),
    })?;
    let n = matrix.momenta.len();
    Ok(GreensFunctions {
        nu,
        eta,
        g_b: (0..n).map(|m| col[SpecMatrix::photon_index(m)]).collect(),
        g_f: (0..n).map(|m| col[SpecMatrix::fermion_index(m)]).collect(),
        g_pp: col[0],
    })
}

/// Rank-one contact self-energy Σ(ν) = g_p†g_p / ((ν − ω_p) − iη) on the fermion levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfEnergy {
    pub matrix: DMatrix<C64>,
}

impl SelfEnergy {
    /// Real part: level shifts.
    pub fn shift(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// Imaginary part: broadening.
    pub fn broadening(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.im)
    }
}

pub fn contact_self_energy(probe: &ProbeParams, couplings: &[C64], nu: f64, eta: f64) -> SelfEnergy {
    let denom = C64::new(nu - probe.omega_p, -eta);
    let n = couplings.len();
    let matrix = DMatrix::from_fn(n, n, |r, c| couplings[r].conj() * couplings[c] / denom);
    SelfEnergy { matrix }
}

/// A resolved peak of a response surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub k: f64,
    pub nu: f64,
    pub height: f64,
    /// Full width at half maximum, when both half-height crossings lie on the grid.
    pub width: Option<f64>,
}

/// The zero-frequency Bragg peak of the ordered phase at k = π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticPeak {
    pub k: f64,
    pub nu: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyResult {
    pub k: Vec<f64>,
    pub nu: Vec<f64>,
    /// `amplitude[i][j]` at `(k[i], nu[j])`.
    pub amplitude: Vec<Vec<f64>>,
    pub peaks: Vec<Peak>,
    pub static_peak: Option<StaticPeak>,
    /// The frequency grid is coarser than the broadening.
    pub coarse_grid: bool,
    pub metadata: serde_json::Value,
}

impl SpectroscopyResult {
    /// Long-format CSV with header `k,nu,amplitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,nu,amplitude\n");
        for (i, &k) in self.k.iter().enumerate() {
            for (j, &nu) in self.nu.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    crate::fmt17(k),
                    crate::fmt17(nu),
                    crate::fmt17(self.amplitude[i][j])
                ));
            }
        }
        out
    }

    /// JSON sidecar with peaks, static peak, grids and metadata.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "nu": self.nu,
            "peaks": self.peaks,
            "static_peak": self.static_peak,
            "coarse_grid": self.coarse_grid,
            "metadata": self.metadata,
        })
    }

    /// Peaks at momentum index `i`.
    pub fn peaks_at(&self, i: usize) -> impl Iterator<Item = &Peak> {
        let k = self.k[i];
        self.peaks.iter().filter(move |p| p.k == k)
    }
}

fn max_step(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Response surface |𝒜_k(ν) + c.c.| built from resolvent Green's functions, with
/// 𝒜_k = iα_p(G^b + χ_k G^f) on the sine grid. Delta functions are Lorentzians of width η.
pub fn analytic_response(
    params: &ModelParams,
    probe: &ProbeParams,
    k_grid: &MomentumGrid,
    nu_grid: &[f64],
    eta: f64,
    convention: Convention,
) -> Result<SpectroscopyResult> {
    if k_grid.convention != GridConvention::OpenSine || k_grid.len() != params.n_sites {
        return Err(Error::validation(
            "k_grid",
            "must be the open-chain sine grid of the model",
        ));
    }
    if nu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("nu_grid", "must be strictly increasing"));
    }
    let matrix = build_spec_matrix(params, probe, convention)?;
    let scales = derive_scales(params)?;
    let chi: Vec<C64> = matrix
        .momenta
        .iter()
        .zip(&matrix.dressing)
        .map(|(&q, &d)| scales.g / scales.omega * probe.alpha_p * d * (C64::from_polar(1.0, -q) - 1.0))
        .collect();
    let columns: Vec<Vec<f64>> = nu_grid
        .par_iter()
        .map(|&nu| {
            let gf = resolvent_greens(&matrix, nu, eta)?;
            Ok((0..chi.len())
                .map(|m| {
                    let a = C64::new(0.0, probe.alpha_p) * (gf.g_b[m] + chi[m] * gf.g_f[m]);
                    (a + a.conj()).norm()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let amplitude: Vec<Vec<f64>> = (0..chi.len()).map(|m| columns.iter().map(|c| c[m]).collect()).collect();
    let a_pi = -scales.lock_ratio() * ising_magnetization(scales.lambda);
    let static_peak = scales.lambda.is_ordered().then_some(StaticPeak {
        k: PI,
        nu: 0.0,
        magnitude: a_pi.abs(),
    });
    let peaks = extract_peaks(&k_grid.values, nu_grid, &amplitude, DEFAULT_PEAK_THRESHOLD);
    Ok(SpectroscopyResult {
        k: k_grid.values.clone(),
        nu: nu_grid.to_vec(),
        amplitude,
        peaks,
        static_peak,
        coarse_grid: max_step(nu_grid) > eta,
        metadata: serde_json::json!({
            "engine": "analytic",
            "params": params,
            "probe": probe,
            "eta": eta,
            "convention": convention,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Left Riemann sum over all but the last sample.
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    None,
    /// sin²(πt/T), suppresses sinc side lobes of the finite record.
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformOptions {
    pub quadrature: Quadrature,
    pub window: Window,
    /// Relative peak threshold, fraction of each row's maximum.
    pub peak_threshold: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            quadrature: Quadrature::Trapezoid,
            window: Window::None,
            peak_threshold: DEFAULT_PEAK_THRESHOLD,
        }
    }
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;
/// Rows whose maximum is below this are treated as numerically silent.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// 𝒳_q(ν) = (1/T)√(2/N) Σ_j ∫ e^{iνt} sin(qj) X_j(t) dt for sites j = 1..N on the sine grid.
///
/// `signal[j - 1][t]` holds site j. Frequencies come from the caller.
pub fn sine_time_fourier(
    signal: &[Vec<f64>],
    times: &[f64],
    nu_grid: &[f64],
    options: &TransformOptions,
) -> Result<SpectroscopyResult> {
    let n_sites = signal.len();
    if n_sites == 0 {
        return Err(Error::validation("signal", "needs at least one site"));
    }
    if times.len() < 2 || signal.iter().any(|row| row.len() != times.len()) {
        return Err(Error::validation("signal", "every site needs one sample per time"));
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
    let n = n_sites as f64;
    let k: Vec<f64> = (1..=n_sites).map(|m| PI * m as f64 / (n + 1.0)).collect();
    let weights: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let quad = match options.quadrature {
                Quadrature::Trapezoid if i == 0 || i + 1 == times.len() => 0.5 * dt,
                Quadrature::Trapezoid => dt,
                Quadrature::Rectangle if i + 1 == times.len() => 0.0,
                Quadrature::Rectangle => dt,
            };
            let win = match options.window {
                Window::None => 1.0,
                Window::Hann => (PI * (t - times[0]) / span).sin().powi(2),
            };
            quad * win
        })
        .collect();
    // Sine transform over sites first, then time.
    let modes: Vec<Vec<f64>> = k
        .iter()
        .map(|&q| {
            (0..times.len())
                .map(|it| {
                    signal
                        .iter()
                        .enumerate()
                        .map(|(j, row)| (q * (j + 1) as f64).sin() * row[it])
                        .sum::<f64>()
                        * weights[it]
                })
                .collect()
        })
        .collect();
    let prefactor = (2.0 / n).sqrt() / span;
    let amplitude: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|mode| {
            nu_grid
                .iter()
                .map(|&nu| {
                    let sum: C64 = times.iter().zip(mode).map(|(&t, &x)| C64::from_polar(x, nu * t)).sum();
                    prefactor * sum.norm()
                })
                .collect()
        })
        .collect();
    let peaks = extract_peaks(&k, nu_grid, &amplitude, options.peak_threshold);
    Ok(SpectroscopyResult {
        k,
        nu: nu_grid.to_vec(),
        amplitude,
        peaks,
        static_peak: None,
        coarse_grid: max_step(nu_grid) > 2.0 * PI / span,
        metadata: serde_json::json!({
            "duration": span,
            "dt": dt,
            "quadrature": options.quadrature,
            "window": options.window,
        }),
    })
}

/// Local maxima per momentum row above `threshold` times the row maximum, refined by a
/// three-point parabola. Sorted by k, then ν.
pub fn extract_peaks(k: &[f64], nu: &[f64], amplitude: &[Vec<f64>], threshold: f64) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for (row, &kv) in amplitude.iter().zip(k) {
        let top = row.iter().copied().fold(0.0, f64::max);
        if top <= AMPLITUDE_FLOOR {
            continue;
        }
        for i in 1..row.len().saturating_sub(1) {
            let (a, b, c) = (row[i - 1], row[i], row[i + 1]);
            if !(b > a && b >= c && b >= threshold * top) {
                continue;
            }
            let (x0, x1, x2) = (nu[i - 1], nu[i], nu[i + 1]);
            let (nu_peak, height) = parabola_vertex((x0, a), (x1, b), (x2, c));
            peaks.push(Peak {
                k: kv,
                nu: nu_peak,
                height,
                width: half_width(nu, row, i, height),
            });
        }
    }
    peaks.sort_by(|p, q| p.k.total_cmp(&q.k).then(p.nu.total_cmp(&q.nu)));
    peaks
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv >= 0.0 {
        return (x1, y1);
    }
    let slope = d01 + curv * (x1 - x0);
    // y = y1 + slope·(x − x1) + curv·(x − x1)²
    let dx = (-slope / (2.0 * curv)).clamp(x0 - x1, x2 - x1);
    (x1 + dx, y1 + slope * dx + curv * dx * dx)
}

fn half_width(nu: &[f64], row: &[f64], i: usize, height: f64) -> Option<f64> {
    let half = 0.5 * height;
    let cross = |j: usize, l: usize| nu[j] + (half - row[j]) * (nu[l] - nu[j]) / (row[l] - row[j]);
    let left = (1..=i).rev().find(|&j| row[j - 1] < half).map(|j| cross(j - 1, j))?;
    let right = (i..row.len() - 1)
        .find(|&j| row[j + 1] < half)
        .map(|j| cross(j, j + 1))?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe_chain() -> ModelParams {
        ModelParams::new(1.0, 0.69, 0.2, 6).with_boundary(Boundary::Open)
    }

    #[test]
    fn decoupled_probe() {
        let probe = ProbeParams {
            g_p: 0.0,
            ..ProbeParams::default()
        };
        let m = build_spec_matrix(&probe_chain(), &probe, Convention::SineSquared).unwrap();
        assert_eq!(m.dim, 13);
        let e = m.eigenvalues();
        assert!(e.iter().any(|&x| (x - probe.omega_p).abs() < 1e-14));
        let g = resolvent_greens(&m, 0.5, 1e-3).unwrap();
        assert!(g.g_b.iter().chain(&g.g_f).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn shape_and_hermiticity() {
        let p = ModelParams::new(1.0, 0.69, 0.2, 2);
        let m = build_spec_matrix(&p, &ProbeParams::default(), Convention::SineSquared).unwrap();
        assert_eq!(m.dim, 5);
        let diff = &m.entries - m.entries.adjoint();
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn rejects_non_positive_eta() {
        let m = build_spec_matrix(&probe_chain(), &ProbeParams::default(), Convention::SineSquared).unwrap();
        assert!(resolvent_greens(&m, 0.5, 0.0).is_err());
    }

    #[test]
    fn self_energy_scaling() {
        let m = build_spec_matrix(&probe_chain(), &ProbeParams::default(), Convention::SineSquared).unwrap();
        let probe = ProbeParams::default();
        let s = contact_self_energy(&probe, &m.couplings, probe.omega_p, 1e-3);
        let n = 6.0;
        for i in 0..6 {
            let z = s.matrix[(i, i)];
            assert!(z.re.abs() < 1e-18);
            assert!((z.im - probe.g_p * probe.g_p / (n * 1e-3)).abs() < 1e-15);
        }
        let doubled: Vec<C64> = m.couplings.iter().map(|c| c * 2.0).collect();
        let s2 = contact_self_energy(&probe, &doubled, 0.3, 1e-3);
        let s1 = contact_self_energy(&probe, &m.couplings, 0.3, 1e-3);
        assert!((s2.matrix.clone() - s1.matrix * C64::new(4.0, 0.0))
            .iter()
            .all(|z| z.norm() < 1e-18));
        assert!(contact_self_energy(&probe, &[C64::new(0.0, 0.0); 3], 0.3, 1e-3)
            .matrix
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn static_peak_in_ordered_phase() {
        let p = ModelParams::new(1.0, 0.1, 0.2, 4).with_boundary(Boundary::Open);
        let grid = momentum_grid(4, Boundary::Open).unwrap();
        let r = analytic_response(
            &p,
            &ProbeParams::default(),
            &grid,
            &[0.5, 0.6, 0.7],
            1e-3,
            Convention::SineSquared,
        )
        .unwrap();
        let s = derive_scales(&p).unwrap();
        let expect = 0.4 * (1.0 - s.lambda.value().powi(2)).powf(0.125);
        assert!((r.static_peak.unwrap().magnitude - expect).abs() < 1e-14);
        assert!(r.coarse_grid);
    }

    #[test]
    fn zero_signal_gives_zero_surface() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let sig = vec![vec![0.0; 50]; 3];
        let r = sine_time_fourier(&sig, &times, &[0.1, 0.2], &TransformOptions::default()).unwrap();
        assert!(r.amplitude.iter().flatten().all(|&a| a == 0.0));
        assert!(r.peaks.is_empty());
    }

    #[test]
    fn rejects_non_uniform_times() {
        let times = vec![0.0, 0.1, 0.25];
        let sig = vec![vec![0.0; 3]; 2];
        assert!(sine_time_fourier(&sig, &times, &[0.1], &TransformOptions::default()).is_err());
    }

    #[test]
    fn lorentzian_peak_position() {
        let nu: Vec<f64> = (0..2001).map(|i| i as f64 * 1e-3).collect();
        let eta = 0.01;
        let row: Vec<f64> = nu.iter().map(|&x| 1.0 / ((x - 0.7373).powi(2) + eta * eta)).collect();
        let p = extract_peaks(&[1.0], &nu, &[row], 0.05);
        assert_eq!(p.len(), 1);
        assert!((p[0].nu - 0.7373).abs() < eta / 10.0);
        assert!((p[0].width.unwrap() - 2.0 * eta).abs() < 0.05 * eta);
    }

    #[test]
    fn two_separated_lorentzians() {
        let nu: Vec<f64> = (0..2001).map(|i| i as f64 * 1e-3).collect();
        let eta = 0.005;
        let l = |x: f64, c: f64| eta / ((x - c).powi(2) + eta * eta);
        let row: Vec<f64> = nu.iter().map(|&x| l(x, 0.4) + 0.5 * l(x, 1.2)).collect();
        let p = extract_peaks(&[1.0], &nu, &[row], 0.05);
        assert_eq!(p.len(), 2, "{p:?}");
        assert!((p[0].nu - 0.4).abs() < 1e-3 && (p[1].nu - 1.2).abs() < 1e-3, "{p:?}");
    }
}
