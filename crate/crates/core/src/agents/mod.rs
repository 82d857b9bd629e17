//! Planners that turn an empirical model into a per-episode `Q̄` table and a
//! greedy policy.
//!
//! - SSR: one standard Gaussian `ẑ_k` per episode shared by every `(h, s, a)`,
//!   values clipped to `[-2(H-h), 2(H-h)]` (steps are 0-based).
//! - RLSVI: same magnitudes and clipping, but an independent Gaussian per cell.
//! - UCBVI: deterministic Hoeffding bonus, values truncated to `[0, H-h]`.

mod noise;
mod planners;

use serde::{Deserialize, Serialize};

pub use noise::{log_term, sigma_be, sigma_ho, NoiseKind, NoiseMagnitude, NoiseSpec};
pub use planners::{rlsvi_plan, ssr_plan, ucbvi_plan};

use crate::error::{Error, Result};
use crate::estimators::EmpiricalModel;
use crate::mdp::{argmax, Dims, Policy, ValueTable};
use crate::rng::NormalSource;

/// Gaussian draws behind one plan.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseDraw {
    /// Deterministic planner.
    None,
    /// One seed for the whole episode.
    Single(f64),
    /// One seed per `(h, s, a)` cell, flat in cell order.
    PerCell(Vec<f64>),
}

impl NoiseDraw {
    /// The seed that multiplied `σ` at `cell`.
    pub fn seed(&self, cell: usize) -> Option<f64> {
        match self {
            NoiseDraw::None => None,
            NoiseDraw::Single(z) => Some(*z),
            NoiseDraw::PerCell(zs) => zs.get(cell).copied(),
        }
    }
}

/// Output of one planning pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// `Q̄` in `q`, the (clipped or truncated) `V̄` in `v`.
    pub values: ValueTable,
    pub policy: Policy,
    pub draw: NoiseDraw,
    /// Effective magnitude per cell, scale included.
    pub sigma: Vec<f64>,
    /// Amount added to each cell: `σ · z` for the randomized planners, the bonus for UCBVI.
    pub perturbation: Vec<f64>,
    /// `(h, s)` where `|max_a Q̄|` exceeded `2(H - h)`.
    pub clip_events: Vec<(usize, usize)>,
}

impl PlanResult {
    #[inline]
    pub fn dims(&self) -> Dims {
        self.values.dims()
    }

    #[inline]
    pub fn q_bar(&self, h: usize, s: usize, a: usize) -> f64 {
        self.values.q(h, s, a)
    }

    #[inline]
    pub fn v_bar(&self, h: usize, s: usize) -> f64 {
        self.values.v(h, s)
    }
}

/// Greedy action under `Q̄`, smallest index on ties.
#[inline]
pub fn act(plan: &PlanResult, h: usize, s: usize) -> usize {
    argmax(plan.values.q_row(h, s))
}

/// Anything the harness can ask for a plan each episode.
pub trait Planner: Sync {
    fn plan(&self, model: &EmpiricalModel, noise: &mut dyn NormalSource) -> PlanResult;

    /// Confidence-set family used when diagnosing this planner's episodes.
    fn confidence_kind(&self) -> NoiseKind {
        NoiseKind::Hoeffding
    }
}

/// Identifier accepted by the harness config and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    SsrHo,
    SsrBe,
    RlsviHo,
    RlsviBe,
    UcbviHo,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::SsrHo,
        AlgorithmId::SsrBe,
        AlgorithmId::RlsviHo,
        AlgorithmId::RlsviBe,
        AlgorithmId::UcbviHo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmId::SsrHo => "ssr_ho",
            AlgorithmId::SsrBe => "ssr_be",
            AlgorithmId::RlsviHo => "rlsvi_ho",
            AlgorithmId::RlsviBe => "rlsvi_be",
            AlgorithmId::UcbviHo => "ucbvi_ho",
        }
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm id {s:?}")))
    }
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A configured planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Ssr(NoiseSpec),
    Rlsvi { noise: NoiseSpec, clip: bool },
    Ucbvi { scale: f64 },
}

impl Algorithm {
    /// Resolves an id with the given noise scale. `rlsvi_clip` only affects RLSVI.
    pub fn from_id(id: AlgorithmId, scale: f64, rlsvi_clip: bool) -> Result<Self> {
        let ho = NoiseSpec::new(NoiseKind::Hoeffding, scale)?;
        let be = NoiseSpec::new(NoiseKind::Bernstein, scale)?;
        Ok(match id {
            AlgorithmId::SsrHo => Algorithm::Ssr(ho),
            AlgorithmId::SsrBe => Algorithm::Ssr(be),
            AlgorithmId::RlsviHo => Algorithm::Rlsvi {
                noise: ho,
                clip: rlsvi_clip,
            },
            AlgorithmId::RlsviBe => Algorithm::Rlsvi {
                noise: be,
                clip: rlsvi_clip,
            },
            AlgorithmId::UcbviHo => Algorithm::Ucbvi { scale },
        })
    }
}

impl Planner for Algorithm {
    fn plan(&self, model: &EmpiricalModel, noise: &mut dyn NormalSource) -> PlanResult {
        match *self {
            Algorithm::Ssr(spec) => ssr_plan(model, spec, noise),
            Algorithm::Rlsvi { noise: spec, clip } => rlsvi_plan(model, spec, clip, noise),
            Algorithm::Ucbvi { scale } => ucbvi_plan(model, scale),
        }
    }

    fn confidence_kind(&self) -> NoiseKind {
        match self {
            Algorithm::Ssr(spec) | Algorithm::Rlsvi { noise: spec, .. } => spec.kind,
            Algorithm::Ucbvi { .. } => NoiseKind::Hoeffding,
        }
    }
}
