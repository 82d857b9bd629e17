//! Runtime checks of the quantities the regret analysis relies on.
//!
//! These read `V*` of the true MDP, which is only available because the
//! environments are synthetic. Nothing here feeds back into planning.

use crate::agents::{log_term, NoiseKind, PlanResult};
use crate::error::{Error, Result};
use crate::estimators::EmpiricalModel;
use crate::harness::EpisodeRecord;
use crate::mdp::{dot, variance, Dims, TabularMdp, ValueTable};

/// Slack used by the optimism and pessimism comparisons.
pub const FLAG_SLACK: f64 = 1e-12;

/// Standard normal CDF, `Φ(x) = (1 + erf(x / √2)) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Constant-probability floors for optimism and pessimism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    /// `Φ(1.9) - Φ(1)`
    pub c_ho: f64,
    /// `Φ(1.5) - Φ(1)`
    pub c_be: f64,
    /// `1 / c_be`
    pub c1: f64,
}

impl TheoryConstants {
    pub fn new() -> Self {
        let c_ho = normal_cdf(1.9) - normal_cdf(1.0);
        let c_be = normal_cdf(1.5) - normal_cdf(1.0);
        Self {
            c_ho,
            c_be,
            c1: 1.0 / c_be,
        }
    }
}

impl Default for TheoryConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// `ln(40k⁴)`
#[inline]
fn envelope_log(k: u64) -> f64 {
    let k = k as f64;
    (40.0 * k * k * k * k).ln()
}

/// Visit threshold `α_k = 200 H² ln(2HSAk²) ln(40k⁴)` above which clipping cannot fire
/// on the good event.
pub fn alpha_k(dims: Dims, k: u64) -> f64 {
    let h = dims.horizon as f64;
    200.0 * h * h * log_term(dims, k) * envelope_log(k)
}

/// Noise envelope `γ = σ √ln(40k⁴)`.
pub fn gamma_k(sigma: f64, k: u64) -> f64 {
    sigma * envelope_log(k).sqrt()
}

/// Whether `|ẑ_k| ≤ √ln(40k⁴)`, i.e. the noise stays inside the `γ` envelope.
pub fn within_noise_envelope(z: f64, k: u64) -> bool {
    z.abs() <= envelope_log(k).sqrt()
}

/// Confidence width `√e` for one cell.
///
/// - Hoeffding: `H √(L/d) + H/d`
/// - Bernstein: `√(6 𝕍(P̃, V*_{h+1}) L/d) + 9 H L/d + √(L/d)`
///
/// with `L = ln(2HSAk²)` and `d = n + 1`.
pub fn conf_width(
    kind: NoiseKind,
    dims: Dims,
    k: u64,
    n: u64,
    p_tilde_row: &[f64],
    v_star_next: &[f64],
) -> Result<f64> {
    let var = variance(p_tilde_row, v_star_next)?;
    Ok(width_from_variance(kind, dims, log_term(dims, k), n, var))
}

fn width_from_variance(kind: NoiseKind, dims: Dims, log: f64, n: u64, var: f64) -> f64 {
    let h = dims.horizon as f64;
    let d = (n + 1) as f64;
    match kind {
        NoiseKind::Hoeffding => h * (log / d).sqrt() + h / d,
        NoiseKind::Bernstein => (6.0 * var * log / d).sqrt() + 9.0 * h * log / d + (log / d).sqrt(),
    }
}

fn check_dims(model: &EmpiricalModel, mdp: &TabularMdp, v_star: &ValueTable) -> Result<()> {
    if model.dims() != mdp.dims() || v_star.dims() != mdp.dims() {
        return Err(Error::DimensionMismatch(format!(
            "model {:?}, mdp {:?}, values {:?}",
            model.dims(),
            mdp.dims(),
            v_star.dims()
        )));
    }
    Ok(())
}

/// Whether the empirical model lies in the confidence set:
/// `|(R̂ - R) + ⟨P̂ - P, V*_{h+1}⟩| ≤ √e` for every `(h, s, a)`.
pub fn good_event(
    model: &EmpiricalModel,
    mdp: &TabularMdp,
    v_star: &ValueTable,
    kind: NoiseKind,
) -> Result<bool> {
    check_dims(model, mdp, v_star)?;
    let dims = mdp.dims();
    let log = log_term(dims, model.episode());
    for h in 0..dims.horizon {
        let next = v_star.v_row(h + 1);
        for s in 0..dims.states {
            for a in 0..dims.actions {
                let deviation = (model.r_hat(h, s, a) - mdp.reward(h, s, a))
                    + (model.p_hat_dot(h, s, a, next) - dot(mdp.transition(h, s, a), next));
                let var = match kind {
                    NoiseKind::Hoeffding => 0.0,
                    NoiseKind::Bernstein => model.p_tilde_variance(h, s, a, next),
                };
                let width = width_from_variance(kind, dims, log, model.count(h, s, a), var);
                if deviation.abs() > width {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn compare(v_bar: &[f64], v_star: &[f64], pred: impl Fn(f64, f64) -> bool) -> Result<bool> {
    if v_bar.len() != v_star.len() {
        return Err(Error::LengthMismatch {
            expected: v_star.len(),
            got: v_bar.len(),
        });
    }
    Ok(v_bar.iter().zip(v_star).all(|(&b, &s)| pred(b, s)))
}

/// `V̄_h(s) ≥ V*_h(s)` for all `(h, s)`, up to [`FLAG_SLACK`].
pub fn optimism_flag(v_bar: &[f64], v_star: &[f64]) -> Result<bool> {
    compare(v_bar, v_star, |b, s| b >= s - FLAG_SLACK)
}

/// `V̄_h(s) ≤ V*_h(s)` for all `(h, s)`, up to [`FLAG_SLACK`].
pub fn pessimism_flag(v_bar: &[f64], v_star: &[f64]) -> Result<bool> {
    compare(v_bar, v_star, |b, s| b <= s + FLAG_SLACK)
}

/// Whether some step of the episode visited `(h, s_h, a_h)` fewer than `α_k` times
/// before this episode.
pub fn any_visit_below_alpha(model: &EmpiricalModel, episode: &EpisodeRecord) -> bool {
    let alpha = alpha_k(model.dims(), model.episode());
    episode
        .steps()
        .iter()
        .enumerate()
        .any(|(h, st)| (model.count(h, st.state, st.action) as f64) < alpha)
}

/// Clip events that hit a state the episode actually visited at that step.
pub fn clips_on_path(plan: &PlanResult, episode: &EpisodeRecord) -> usize {
    plan.clip_events
        .iter()
        .filter(|&&(h, s)| episode.steps().get(h).is_some_and(|st| st.state == s))
        .count()
}
