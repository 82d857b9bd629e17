//! Perturbation magnitudes.
//!
//! With `L = ln(2HSAk²)` and `d = n + 1`:
//!
//! ```text
//! σ_Ho = H √(L / d) + H / d
//! σ_Be = √(16 𝕍(P̃, V̄_{h+1}) L / d) + 65 H L / d + √(L / d)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{variance, Dims};

/// Which concentration inequality the noise magnitude follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Hoeffding,
    Bernstein,
}

/// Noise magnitude formula plus a positive multiplier applied to every `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub scale: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!(
                "noise scale must be positive, got {scale}"
            )));
        }
        Ok(Self { kind, scale })
    }

    /// Unit-scale noise of the given kind.
    pub fn unit(kind: NoiseKind) -> Self {
        Self { kind, scale: 1.0 }
    }
}

/// `ln(2HSAk²)`.
#[inline]
pub fn log_term(dims: Dims, k: u64) -> f64 {
    let k = k as f64;
    (2.0 * dims.hsa() * k * k).ln()
}

/// Per-episode evaluator for both magnitudes; caches `ln(2HSAk²)`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseMagnitude {
    horizon: f64,
    log_term: f64,
}

impl NoiseMagnitude {
    pub fn new(dims: Dims, k: u64) -> Self {
        debug_assert!(k >= 1);
        Self {
            horizon: dims.horizon as f64,
            log_term: log_term(dims, k),
        }
    }

    #[inline]
    pub fn log_term(&self) -> f64 {
        self.log_term
    }

    #[inline]
    pub fn hoeffding(&self, n: u64) -> f64 {
        let d = (n + 1) as f64;
        self.horizon * (self.log_term / d).sqrt() + self.horizon / d
    }

    /// Bernstein magnitude given `𝕍(P̃, V̄_{h+1})`.
    #[inline]
    pub fn bernstein(&self, n: u64, next_variance: f64) -> f64 {
        let d = (n + 1) as f64;
        (16.0 * next_variance * self.log_term / d).sqrt()
            + 65.0 * self.horizon * self.log_term / d
            + (self.log_term / d).sqrt()
    }
}

/// Hoeffding-type magnitude `σ_Ho` at episode `k` for a cell visited `n` times.
pub fn sigma_ho(dims: Dims, k: u64, n: u64) -> f64 {
    NoiseMagnitude::new(dims, k).hoeffding(n)
}

/// Bernstein-type magnitude `σ_Be`; `v_next` is the clipped `V̄_{h+1}`.
pub fn sigma_be(dims: Dims, k: u64, n: u64, p_tilde_row: &[f64], v_next: &[f64]) -> Result<f64> {
    let var = variance(p_tilde_row, v_next)?;
    Ok(NoiseMagnitude::new(dims, k).bernstein(n, var))
}
