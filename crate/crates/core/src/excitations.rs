//! Excitation bands of the three theories and critical-exponent fits.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{ansatz_critical_omega0, bisect};
use crate::error::{Error, Result};
use crate::ising::{bogoliubov_mode, dispersive_critical_omega0};
use crate::meanfield::mf_critical_omega0;
use crate::model::{derive_scales, CouplingPattern, DerivedScales, ModelParams, MomentumGrid, Ratio};

/// Which excitation theory produced a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theory {
    SpinWave,
    Dispersive,
    Ansatz,
}

impl Theory {
    pub const ALL: [Theory; 3] = [Theory::SpinWave, Theory::Dispersive, Theory::Ansatz];

    pub fn name(self) -> &'static str {
        match self {
            Theory::SpinWave => "spin_wave",
            Theory::Dispersive => "dispersive",
            Theory::Ansatz => "ansatz",
        }
    }

    /// Field-to-coupling ratio whose unit value marks this theory's transition.
    pub fn control_ratio(self, scales: &DerivedScales) -> Ratio {
        match self {
            Theory::SpinWave => scales.lambda_mf,
            Theory::Dispersive => scales.lambda_d,
            Theory::Ansatz => scales.lambda,
        }
    }

    /// Critical ω₀/ω of this theory at coupling g/ω.
    pub fn critical_omega0(self, g_over_omega: f64) -> f64 {
        match self {
            Theory::SpinWave => mf_critical_omega0(g_over_omega),
            Theory::Dispersive => dispersive_critical_omega0(g_over_omega),
            Theory::Ansatz => ansatz_critical_omega0(g_over_omega),
        }
    }
}

/// Photon dispersion used in the hybrid block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// ω + 4h̃(2g/ω)² sin²(q/2).
    #[default]
    SineSquared,
    /// ω + 4h̃(2g/ω)² cos q, with the two-mode squeezing ξ_q exposed but left out of the block.
    Linearized,
}

/// Lower and upper band at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPair {
    pub minus: f64,
    pub plus: f64,
    /// The lower mode is dynamically unstable (negative frequency or stiffness).
    pub unstable: bool,
}

/// Eigenvalues of the Hermitian matrix `[[a, c], [c*, b]]` in ascending order.
pub fn hermitian_pair(a: f64, b: f64, c_norm_sqr: f64) -> (f64, f64) {
    let mean = 0.5 * (a + b);
    let half = 0.5 * (a - b);
    let root = (half * half + c_norm_sqr).sqrt();
    let plus = mean + root;
    let det = a * b - c_norm_sqr;
    // The product form avoids cancellation near a soft mode.
    let minus = if plus > 0.0 && mean > 0.0 {
        det / plus
    } else {
        mean - root
    };
    (minus, plus)
}

fn spin_wave_stiffness(q: f64, scales: &DerivedScales) -> (f64, f64, C64) {
    let step = scales.lambda_mf.ordered_step();
    let lam = scales.lambda_mf.value();
    let (delta, g_sw) = if step > 0.0 {
        (4.0 * scales.j_mf, -scales.g * lam)
    } else {
        (2.0 * scales.h, -scales.g)
    };
    let w = scales.omega;
    let c = 2.0 * g_sw * (w * delta).sqrt() * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -q));
    (w * w, delta * delta, c)
}

/// The 2×2 stiffness matrix of spin waves over the mean-field state, `[[ω², c], [c*, Δ²]]`.
pub fn sw_stiffness(q: f64, scales: &DerivedScales) -> [[C64; 2]; 2] {
    let (a, b, c) = spin_wave_stiffness(q, scales);
    [[C64::new(a, 0.0), c], [c.conj(), C64::new(b, 0.0)]]
}

/// Spin-wave bands: square roots of the stiffness eigenvalues.
pub fn sw_bands(q: f64, scales: &DerivedScales) -> BandPair {
    let (a, b, c) = spin_wave_stiffness(q, scales);
    // |c|² written out so that it vanishes exactly where the closed form does
    let (minus, plus) = hermitian_pair(a, b, c.norm_sqr());
    BandPair {
        minus: minus.signum() * minus.abs().sqrt(),
        plus: plus.max(0.0).sqrt(),
        unstable: minus < 0.0,
    }
}

/// Dispersive theory: spin band 2√((J cos q + h)² + (J sin q)²) and the flat photon band ω.
pub fn dispersive_bands(q: f64, scales: &DerivedScales) -> BandPair {
    let j = scales.j;
    let re = j * q.cos() + scales.h;
    let im = j * q.sin();
    BandPair {
        minus: 2.0 * (re * re + im * im).sqrt(),
        plus: scales.omega,
        unstable: false,
    }
}

/// Hybrid photon-fermion block of the linearized ansatz at momentum q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiparticleBlock {
    pub q: f64,
    pub omega_q: f64,
    pub eps_q: f64,
    /// Off-diagonal entry `⟨photon|H|fermion⟩`.
    pub g_q: C64,
    /// Two-mode squeezing amplitude, present only for the linearized convention.
    pub xi_q: Option<C64>,
    /// Bogoliubov combination ũ + ṽ* at the renormalized field.
    pub dressing: C64,
    pub convention: Convention,
}

impl QuasiparticleBlock {
    /// Dense matrix in (photon, fermion) order.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.omega_q, 0.0), self.g_q],
            [self.g_q.conj(), C64::new(self.eps_q, 0.0)],
        ]
    }
}

pub fn ansatz_block(q: f64, scales: &DerivedScales, convention: Convention) -> QuasiparticleBlock {
    let mode = bogoliubov_mode(q, scales.j, scales.h_tilde);
    let x = scales.lock_ratio();
    let ht = scales.h_tilde;
    let (omega_q, xi_q) = match convention {
        Convention::SineSquared => (scales.omega + 4.0 * ht * x * x * (0.5 * q).sin().powi(2), None),
        Convention::Linearized => (
            scales.omega + 4.0 * ht * x * x * q.cos(),
            Some(-ht * x * x * C64::from_polar(1.0, q)),
        ),
    };
    let dressing = mode.u_plus_v_conj();
    let g_q = ht * x * (C64::new(1.0, 0.0) - C64::from_polar(1.0, -q)) * dressing;
    QuasiparticleBlock {
        q,
        omega_q,
        eps_q: mode.eps_q,
        g_q,
        xi_q,
        dressing,
        convention,
    }
}

/// Hybrid quasiparticle energies ½(ω_q + ε̃_q) ± ½√((ω_q − ε̃_q)² + 4|g_q|²).
pub fn ansatz_bands(q: f64, scales: &DerivedScales, convention: Convention) -> BandPair {
    let b = ansatz_block(q, scales, convention);
    let (minus, plus) = hermitian_pair(b.omega_q, b.eps_q, b.g_q.norm_sqr());
    BandPair {
        minus,
        plus,
        unstable: minus < 0.0,
    }
}

/// Bands of `theory` at momentum q.
pub fn bands(theory: Theory, q: f64, scales: &DerivedScales, convention: Convention) -> BandPair {
    match theory {
        Theory::SpinWave => sw_bands(q, scales),
        Theory::Dispersive => dispersive_bands(q, scales),
        Theory::Ansatz => ansatz_bands(q, scales, convention),
    }
}

/// Band formulas are written for the antiferromagnetic chain; the ferromagnetic one is
/// its gauge transform with momentum q ↦ π − q.
pub fn antiferromagnetic_momentum(q: f64, pattern: CouplingPattern) -> f64 {
    match pattern {
        CouplingPattern::Antiferromagnetic => q,
        CouplingPattern::Ferromagnetic => PI - q,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub q: f64,
    pub eps_minus: f64,
    pub eps_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScan {
    pub theory: Theory,
    pub points: Vec<BandPoint>,
    pub params: ModelParams,
}

impl BandScan {
    /// Long-format CSV with header `q,eps_minus,eps_plus,theory`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,eps_minus,eps_plus,theory\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::fmt17(p.q),
                crate::fmt17(p.eps_minus),
                crate::fmt17(p.eps_plus),
                self.theory.name()
            ));
        }
        out
    }
}

pub fn band_scan(
    params: &ModelParams,
    theory: Theory,
    convention: Convention,
    grid: &MomentumGrid,
) -> Result<BandScan> {
    let scales = derive_scales(params)?;
    let points = grid
        .values
        .iter()
        .map(|&q| {
            let b = bands(
                theory,
                antiferromagnetic_momentum(q, params.coupling_pattern),
                &scales,
                convention,
            );
            BandPoint {
                q,
                eps_minus: b.minus,
                eps_plus: b.plus,
            }
        })
        .collect();
    Ok(BandScan {
        theory,
        points,
        params: *params,
    })
}

/// Fit window for [`fit_exponents`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitWindow {
    /// Smallest distance to criticality, in |1 − λ| and in |δq|.
    pub min_distance: f64,
    pub decades: f64,
    pub points_per_decade: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            min_distance: 1e-3,
            decades: 2.0,
            points_per_decade: 8,
        }
    }
}

impl FitWindow {
    /// Log-spaced distances covering the window, endpoints included.
    pub fn distances(&self) -> Vec<f64> {
        let n = (self.decades * self.points_per_decade as f64).round() as usize;
        (0..=n)
            .map(|k| self.min_distance * 10f64.powf(self.decades * k as f64 / n as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub theory: Theory,
    pub z: f64,
    pub z_nu: f64,
    /// (|1 − λ|, gap at q = π) along the path.
    pub gap_series: Vec<(f64, f64)>,
    /// (|δq|, eps_minus(π − δq)) at the critical point.
    pub dispersion_series: Vec<(f64, f64)>,
}

/// Parameters approaching `theory`'s critical line from the ordered side at fixed g/ω.
pub fn critical_path(theory: Theory, base: &ModelParams, window: &FitWindow) -> Vec<ModelParams> {
    let crit = theory.critical_omega0(base.g_over_omega()) * base.omega;
    window
        .distances()
        .into_iter()
        .rev()
        .map(|d| ModelParams {
            omega0: crit * (1.0 - d),
            ..*base
        })
        .collect()
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

fn decades_spanned(xs: impl Iterator<Item = f64> + Clone) -> (f64, usize) {
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.clone().fold(0.0, f64::max);
    ((hi / lo).log10(), xs.count())
}

/// Dynamical exponent z from the dispersion at criticality and zν from the gap closing
/// along `params_path`.
pub fn fit_exponents(
    params_path: &[ModelParams],
    theory: Theory,
    convention: Convention,
    window: &FitWindow,
) -> Result<ExponentFit> {
    let mut gap_series = Vec::with_capacity(params_path.len());
    for p in params_path {
        let scales = derive_scales(p)?;
        let lam = theory.control_ratio(&scales);
        if !lam.is_ordered() {
            return Err(Error::Fit(format!(
                "path point omega0 = {} has lambda = {} outside the ordered side",
                p.omega0,
                lam.value()
            )));
        }
        let b = bands(theory, PI, &scales, convention);
        if b.unstable || b.minus <= 0.0 {
            return Err(Error::Fit(format!(
                "{} lower band at q = pi is {:e} at lambda = {}: the mode softens before the critical line",
                theory.name(),
                b.minus,
                lam.value()
            )));
        }
        gap_series.push((1.0 - lam.value(), b.minus));
    }
    check_series(&gap_series, window, "|1 - lambda|")?;
    let z_nu = log_log_slope(&gap_series);

    let last = params_path
        .last()
        .ok_or_else(|| Error::Fit("empty parameter path".into()))?;
    let critical = ModelParams {
        omega0: theory.critical_omega0(last.g_over_omega()) * last.omega,
        ..*last
    };
    let scales = derive_scales(&critical)?;
    let mut dispersion_series = Vec::new();
    for dq in window.distances() {
        let b = bands(theory, PI - dq, &scales, convention);
        if b.unstable || b.minus <= 0.0 {
            return Err(Error::Fit(format!(
                "{} lower band at q = pi - {dq:e} is {:e} on the critical line",
                theory.name(),
                b.minus
            )));
        }
        dispersion_series.push((dq, b.minus));
    }
    check_series(&dispersion_series, window, "|dq|")?;
    let z = log_log_slope(&dispersion_series);
    Ok(ExponentFit {
        theory,
        z,
        z_nu,
        gap_series,
        dispersion_series,
    })
}

fn check_series(series: &[(f64, f64)], window: &FitWindow, label: &str) -> Result<()> {
    let (decades, count) = decades_spanned(series.iter().map(|p| p.0));
    let needed = (window.decades * window.points_per_decade as f64).floor() as usize;
    if decades + 1e-9 < window.decades || count < needed {
        return Err(Error::Fit(format!(
            "{count} points over {decades:.3} decades of {label}; need {} decades with {} per decade",
            window.decades, window.points_per_decade
        )));
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = sorted.windows(2).find(|w| w[1].1 < w[0].1) {
        return Err(Error::Fit(format!(
            "gap is not monotone in {label}: {:e} at {:e} exceeds {:e} at {:e}",
            w[0].1, w[0].0, w[1].1, w[1].0
        )));
    }
    Ok(())
}

/// The largest qubit frequency at which the hybrid lower band reaches zero at q = π,
/// scanning down from the paramagnet at fixed g/ω. `None` if it stays gapped.
pub fn hybrid_soft_omega0(g_over_omega: f64, convention: Convention) -> Option<f64> {
    let gap = |omega0: f64| match derive_scales(&ModelParams::new(1.0, omega0, g_over_omega, 2)) {
        Ok(s) => ansatz_bands(PI, &s, convention).minus,
        Err(_) => f64::NAN,
    };
    let mut hi = 2.0 * ansatz_critical_omega0(g_over_omega).max(1e-6);
    while gap(hi) <= 0.0 {
        hi *= 2.0;
    }
    let steps = 4000;
    let lo = (1..=steps)
        .map(|k| hi * (1.0 - k as f64 / steps as f64))
        .find(|&w| gap(w) <= 0.0)?;
    Some(bisect(gap, lo, lo + hi / steps as f64, 1e-14))
}
