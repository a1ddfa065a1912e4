//! Model definition, parameter validation, derived energy scales and momentum grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign arrangement of the qubit-cavity couplings along the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingPattern {
    /// Qubit i couples to `a_i - a_{i+1}`; orders into a Néel state.
    #[default]
    Antiferromagnetic,
    /// Qubit i couples to `a_i + a_{i+1}`.
    Ferromagnetic,
}

impl CouplingPattern {
    /// Sign of the coupling to the right-hand cavity.
    pub fn right_sign(self) -> f64 {
        match self {
            CouplingPattern::Antiferromagnetic => -1.0,
            CouplingPattern::Ferromagnetic => 1.0,
        }
    }

    /// Staggering factor applied to order parameters at `site`.
    pub fn stagger(self, site: usize) -> f64 {
        match self {
            CouplingPattern::Antiferromagnetic if site % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Ring of N qubits and N cavities.
    #[default]
    Periodic,
    /// Chain of N qubits between N + 1 cavities.
    Open,
}

/// Bare Hamiltonian parameters. Serializes to the flat JSON object used as CLI config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub omega: f64,
    pub omega0: f64,
    pub g: f64,
    pub n_sites: usize,
    #[serde(default)]
    pub coupling_pattern: CouplingPattern,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            omega0: 0.69,
            g: 0.2,
            n_sites: 22,
            coupling_pattern: CouplingPattern::Antiferromagnetic,
            boundary: Boundary::Periodic,
        }
    }
}

impl ModelParams {
    /// Antiferromagnetic periodic chain with the given frequencies.
    pub fn new(omega: f64, omega0: f64, g: f64, n_sites: usize) -> Self {
        Self {
            omega,
            omega0,
            g,
            n_sites,
            ..Self::default()
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_pattern(mut self, pattern: CouplingPattern) -> Self {
        self.coupling_pattern = pattern;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::validation(
                "omega",
                format!("must be positive and finite, got {}", self.omega),
            ));
        }
        if !(self.omega0.is_finite() && self.omega0 >= 0.0) {
            return Err(Error::validation(
                "omega0",
                format!("must be non-negative and finite, got {}", self.omega0),
            ));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::validation(
                "g",
                format!("must be non-negative and finite, got {}", self.g),
            ));
        }
        if self.n_sites < 2 {
            return Err(Error::validation(
                "n_sites",
                format!("must be at least 2, got {}", self.n_sites),
            ));
        }
        Ok(())
    }

    /// The same physics expressed in units of the cavity frequency.
    pub fn normalized(&self) -> Self {
        Self {
            omega: 1.0,
            omega0: self.omega0 / self.omega,
            g: self.g / self.omega,
            ..*self
        }
    }

    pub fn g_over_omega(&self) -> f64 {
        self.g / self.omega
    }
}

/// A ratio of field to Ising coupling that may be infinite when the coupling vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Finite(f64),
    /// Zero coupling: deep paramagnet.
    Infinite,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Self {
        if den > 0.0 {
            Ratio::Finite(num / den)
        } else {
            Ratio::Infinite
        }
    }

    /// Numeric value, `f64::INFINITY` for the infinite flag.
    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(x) => x,
            Ratio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinite)
    }

    /// Heaviside θ(1 − λ) with θ(0) = 1.
    pub fn ordered_step(self) -> f64 {
        heaviside(1.0 - self.value())
    }

    /// Strictly inside the ordered phase.
    pub fn is_ordered(self) -> bool {
        self.value() < 1.0
    }

    /// `1 - λ²` clipped at zero on the paramagnetic side.
    pub fn order_deficit(self) -> f64 {
        match self {
            Ratio::Finite(x) if x <= 1.0 => 1.0 - x * x,
            _ => 0.0,
        }
    }
}

/// Heaviside step with the convention θ(0) = 1.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Energy scales derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Dispersive Ising coupling 2g²/ω.
    pub j: f64,
    /// Mean-field coupling 4g²/ω.
    pub j_mf: f64,
    /// Bare transverse field ω₀/2.
    pub h: f64,
    /// Polaron-renormalized field h·exp(−4(g/ω)²).
    pub h_tilde: f64,
    pub lambda: Ratio,
    pub lambda_mf: Ratio,
    pub lambda_d: Ratio,
    pub omega: f64,
    pub g: f64,
    pub coupling_pattern: CouplingPattern,
}

impl DerivedScales {
    pub fn g_over_omega(&self) -> f64 {
        self.g / self.omega
    }

    /// Displacement scale 2g/ω locking cavity and spin polarizations.
    pub fn lock_ratio(&self) -> f64 {
        2.0 * self.g / self.omega
    }
}

pub fn derive_scales(params: &ModelParams) -> Result<DerivedScales> {
    params.validate()?;
    let x = params.g_over_omega();
    let j = 2.0 * params.g * params.g / params.omega;
    let j_mf = 2.0 * j;
    let h = params.omega0 / 2.0;
    let h_tilde = h * (-4.0 * x * x).exp();
    Ok(DerivedScales {
        j,
        j_mf,
        h,
        h_tilde,
        lambda: Ratio::of(h_tilde, j),
        lambda_mf: Ratio::of(h, 2.0 * j_mf),
        lambda_d: Ratio::of(h, j),
        omega: params.omega,
        g: params.g,
        coupling_pattern: params.coupling_pattern,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridConvention {
    /// Positive momenta π(2m−1)/N of the anti-periodic sector, m = 1..⌈N/2⌉.
    PeriodicHalfBZ,
    /// Standing-wave momenta πm/(N+1), m = 1..N.
    OpenSine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub values: Vec<f64>,
    pub convention: GridConvention,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weight of each momentum in a half-zone sum. Only q = π, reached for odd N on the
    /// periodic grid, is its own partner and counts one half.
    pub fn pair_weight(&self, q: f64) -> f64 {
        if self.convention == GridConvention::PeriodicHalfBZ && (q - PI).abs() < 1e-12 {
            0.5
        } else {
            1.0
        }
    }
}

pub fn momentum_grid(n_sites: usize, boundary: Boundary) -> Result<MomentumGrid> {
    if n_sites < 2 {
        return Err(Error::validation(
            "n_sites",
            format!("must be at least 2, got {n_sites}"),
        ));
    }
    let n = n_sites as f64;
    let grid = match boundary {
        Boundary::Open => MomentumGrid {
            values: (1..=n_sites).map(|m| PI * m as f64 / (n + 1.0)).collect(),
            convention: GridConvention::OpenSine,
        },
        Boundary::Periodic => MomentumGrid {
            values: (1..=n_sites.div_ceil(2)).map(|m| PI * (2 * m - 1) as f64 / n).collect(),
            convention: GridConvention::PeriodicHalfBZ,
        },
    };
    Ok(grid)
}
