//! Tensor-product layout of spins and truncated cavities.

use num_complex::Complex64 as C64;

/// Kind of a tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Spin,
    Cavity,
}

/// Mixed-radix basis with the first factor most significant.
///
/// Spin state 0 is σ^z = +1 and state 1 is σ^z = −1; cavity state n is the Fock state |n⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub dims: Vec<usize>,
    pub strides: Vec<usize>,
    pub kinds: Vec<Factor>,
    /// Factor index of each qubit.
    pub spins: Vec<usize>,
    /// Factor index of each chain cavity.
    pub cavities: Vec<usize>,
    /// Factor index of the probe cavity, always last.
    pub probe: Option<usize>,
}

impl Layout {
    /// Site-major ordering spin₁, cav₁, spin₂, cav₂, …, then any extra cavities, then the probe.
    pub fn new(n_qubits: usize, n_cavities: usize, n_max: usize, probe_n_max: Option<usize>) -> Self {
        let mut kinds = Vec::new();
        let mut dims = Vec::new();
        let mut spins = Vec::new();
        let mut cavities = Vec::new();
        for i in 0..n_qubits.max(n_cavities) {
            if i < n_qubits {
                spins.push(kinds.len());
                kinds.push(Factor::Spin);
                dims.push(2);
            }
            if i < n_cavities {
                cavities.push(kinds.len());
                kinds.push(Factor::Cavity);
                dims.push(n_max + 1);
            }
        }
        let probe = probe_n_max.map(|p| {
            kinds.push(Factor::Cavity);
            dims.push(p + 1);
            kinds.len() - 1
        });
        let mut strides = vec![1; dims.len()];
        for f in (0..dims.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1] * dims[f + 1];
        }
        Self {
            dims,
            strides,
            kinds,
            spins,
            cavities,
            probe,
        }
    }

    /// Total dimension, or `None` on overflow.
    pub fn checked_dim(n_qubits: usize, n_cavities: usize, n_max: usize, probe_n_max: Option<usize>) -> Option<usize> {
        let mut d = 1usize;
        for _ in 0..n_qubits {
            d = d.checked_mul(2)?;
        }
        for _ in 0..n_cavities {
            d = d.checked_mul(n_max + 1)?;
        }
        if let Some(p) = probe_n_max {
            d = d.checked_mul(p + 1)?;
        }
        Some(d)
    }

    pub fn dim(&self) -> usize {
        self.strides.first().map_or(1, |s| s * self.dims[0])
    }

    #[inline]
    pub fn digit(&self, index: usize, factor: usize) -> usize {
        (index / self.strides[factor]) % self.dims[factor]
    }

    /// σ^z eigenvalue of a spin factor in basis state `index`.
    #[inline]
    pub fn sz(&self, index: usize, factor: usize) -> f64 {
        if self.digit(index, factor) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Z₂ parity Π σ^z · Π (−1)^n, which commutes with the Hamiltonian.
    pub fn parity(&self, index: usize) -> i8 {
        // spin-down and odd photon numbers each contribute a sign
        let odd: usize = (0..self.dims.len()).map(|f| self.digit(index, f)).sum();
        if odd.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Applies a real d×d matrix (row-major) to one factor of a complex state, in place.
    pub fn apply_local(&self, state: &mut [C64], factor: usize, matrix: &[f64]) {
        let d = self.dims[factor];
        let s = self.strides[factor];
        let block = d * s;
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for base in (0..state.len()).step_by(block) {
            for inner in 0..s {
                let off = base + inner;
                for (a, b) in buf.iter_mut().enumerate() {
                    *b = (0..d).map(|c| state[off + c * s] * matrix[a * d + c]).sum();
                }
                for (a, b) in buf.iter().enumerate() {
                    state[off + a * s] = *b;
                }
            }
        }
    }

    /// ⟨ψ|σ^x|ψ⟩ on a spin factor.
    pub fn sigma_x(&self, state: &[C64], factor: usize) -> f64 {
        let s = self.strides[factor];
        (0..state.len())
            .filter(|&i| self.digit(i, factor) == 0)
            .map(|i| 2.0 * (state[i].conj() * state[i + s]).re)
            .sum()
    }

    /// ⟨ψ|σ^z|ψ⟩ on a spin factor.
    pub fn sigma_z(&self, state: &[C64], factor: usize) -> f64 {
        state
            .iter()
            .enumerate()
            .map(|(i, z)| self.sz(i, factor) * z.norm_sqr())
            .sum()
    }

    /// ⟨ψ|a|ψ⟩ on a cavity factor.
    pub fn annihilation(&self, state: &[C64], factor: usize) -> C64 {
        let s = self.strides[factor];
        (0..state.len())
            .filter_map(|i| {
                let n = self.digit(i, factor);
                (n > 0).then(|| state[i - s].conj() * state[i] * (n as f64).sqrt())
            })
            .sum()
    }

    /// ⟨ψ|a†a|ψ⟩ on a cavity factor.
    pub fn occupation(&self, state: &[C64], factor: usize) -> f64 {
        state
            .iter()
            .enumerate()
            .map(|(i, z)| self.digit(i, factor) as f64 * z.norm_sqr())
            .sum()
    }

    /// ⟨ψ|σ^x_a σ^x_b|ψ⟩ for two distinct spin factors.
    pub fn sigma_x_pair(&self, state: &[C64], fa: usize, fb: usize) -> f64 {
        let (sa, sb) = (self.strides[fa], self.strides[fb]);
        state
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let ja = if self.digit(i, fa) == 0 { i + sa } else { i - sa };
                let j = if self.digit(ja, fb) == 0 { ja + sb } else { ja - sb };
                (z.conj() * state[j]).re
            })
            .sum()
    }

    /// ⟨ψ|x_a x_b|ψ⟩ with x = a + a†, for two distinct cavity factors.
    pub fn quadrature_pair(&self, state: &[C64], fa: usize, fb: usize) -> f64 {
        let mut tmp = state.to_vec();
        self.apply_quadrature(&mut tmp, fb);
        self.apply_quadrature(&mut tmp, fa);
        state.iter().zip(&tmp).map(|(a, b)| (a.conj() * b).re).sum()
    }

    fn apply_quadrature(&self, state: &mut [C64], factor: usize) {
        let d = self.dims[factor];
        let x: Vec<f64> = (0..d * d)
            .map(|k| {
                let (r, c) = (k / d, k % d);
                if r + 1 == c {
                    (c as f64).sqrt()
                } else if c + 1 == r {
                    (r as f64).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        self.apply_local(state, factor, &x);
    }
}
