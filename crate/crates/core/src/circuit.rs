//! Lumped-element circuit mapping with the diamagnetic renormalization of the resonators.
//!
//! Inputs are SI (farad, henry, joule). Frequencies come out as angular frequencies in rad/s.

use serde::{Deserialize, Serialize};

use crate::ansatz::bisect;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Elementary charge in coulomb.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant in joule-seconds.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QubitKind {
    /// Capacitive coupling: resonator capacitance is renormalized.
    #[default]
    Charge,
    /// Inductive coupling without a diamagnetic term.
    Flux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Coupling capacitance; `None` is the decoupled limit C_g → ∞.
    #[serde(rename = "C_g")]
    pub c_g: Option<f64>,
    #[serde(rename = "C_qb")]
    pub c_qb: f64,
    #[serde(rename = "E_J")]
    pub e_j: f64,
    /// Lattice coordination number.
    pub z: u32,
    #[serde(default)]
    pub kind: QubitKind,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(field, format!("must be positive, got {v}")))
            }
        };
        positive("C", self.c)?;
        positive("L", self.l)?;
        positive("C_qb", self.c_qb)?;
        positive("E_J", self.e_j)?;
        if let Some(cg) = self.c_g {
            positive("C_g", cg)?;
        }
        if self.z == 0 {
            return Err(Error::validation("z", "coordination number must be at least 1"));
        }
        Ok(())
    }
}

/// Renormalized model parameters of a circuit, angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub omega_tilde: f64,
    /// Resonator frequency 1/√(LC) before renormalization.
    pub omega_bare: f64,
    #[serde(rename = "Z_tilde")]
    pub z_tilde: f64,
    pub g_tilde: f64,
    pub omega0: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
}

impl EffectiveModel {
    /// g̃/ω₀, the argument of [`critical_cavity_frequency`].
    pub fn g_rel(&self) -> f64 {
        self.g_tilde / self.omega0
    }

    /// Model parameters in units of the renormalized cavity frequency.
    pub fn to_model_params(&self, n_sites: usize) -> ModelParams {
        ModelParams::new(
            1.0,
            self.omega0 / self.omega_tilde,
            self.g_tilde / self.omega_tilde,
            n_sites,
        )
    }
}

pub fn renormalize_circuit(circuit: &CircuitParams) -> Result<EffectiveModel> {
    circuit.validate()?;
    let c_tilde = match (circuit.kind, circuit.c_g) {
        (QubitKind::Charge, Some(cg)) => 1.0 / (1.0 / circuit.c + 2.0 * circuit.z as f64 / cg),
        _ => circuit.c,
    };
    let omega_tilde = 1.0 / (circuit.l * c_tilde).sqrt();
    let z_tilde = (circuit.l / c_tilde).sqrt();
    let g_tilde = circuit
        .c_g
        .map_or(0.0, |cg| ELEMENTARY_CHARGE / (cg * (2.0 * HBAR * z_tilde).sqrt()));
    Ok(EffectiveModel {
        omega_tilde,
        omega_bare: 1.0 / (circuit.l * circuit.c).sqrt(),
        z_tilde,
        g_tilde,
        omega0: circuit.e_j / HBAR,
        c_tilde,
    })
}

/// Critical cavity frequency ω̃/ω₀ for a coupling g_rel = g̃/ω₀.
///
/// Solves 1/g_rel = 4r·e^{4r²} for r = g̃/ω̃ and returns g_rel/r.
pub fn critical_cavity_frequency(g_rel: f64) -> Result<f64> {
    if !(g_rel.is_finite() && g_rel > 0.0) {
        return Err(Error::validation("g_rel", format!("must be positive, got {g_rel}")));
    }
    let target = 1.0 / g_rel;
    let f = |r: f64| 4.0 * r * (4.0 * r * r).exp() - target;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let r = bisect(f, 0.0, hi, 1e-14);
    Ok(g_rel / r)
}
