use super::noise::{NoiseKind, NoiseMagnitude, NoiseSpec};
use super::{NoiseDraw, PlanResult};
use crate::estimators::EmpiricalModel;
use crate::mdp::{argmax, clip_unchecked, Policy, ValueTable};
use crate::rng::NormalSource;

#[derive(Clone, Copy)]
enum Seeding {
    Shared,
    PerCell,
}

/// Single-seed randomized planning on the empirical model.
///
/// Draws exactly one standard Gaussian and runs
/// `Q̄ = R̂ + ⟨P̂, V̄_{h+1}⟩ + scale·σ·ẑ`, `V̄_h = clip_{2(H-h)}(max_a Q̄)`.
pub fn ssr_plan(
    model: &EmpiricalModel,
    noise: NoiseSpec,
    src: &mut dyn NormalSource,
) -> PlanResult {
    randomized_plan(model, noise, true, Seeding::Shared, src)
}

/// RLSVI-style planning: identical to [`ssr_plan`] except for one independent
/// Gaussian per `(h, s, a)`, drawn in backward order (`h` descending, then `s`, then `a`).
///
/// With `clip = false` the values are left unclipped (clip events are still recorded).
pub fn rlsvi_plan(
    model: &EmpiricalModel,
    noise: NoiseSpec,
    clip: bool,
    src: &mut dyn NormalSource,
) -> PlanResult {
    randomized_plan(model, noise, clip, Seeding::PerCell, src)
}

fn randomized_plan(
    model: &EmpiricalModel,
    noise: NoiseSpec,
    clip: bool,
    seeding: Seeding,
    src: &mut dyn NormalSource,
) -> PlanResult {
    let dims = model.dims();
    let (ns, na) = (dims.states, dims.actions);
    let magnitude = NoiseMagnitude::new(dims, model.episode());

    let shared = match seeding {
        Seeding::Shared => Some(src.standard_normal()),
        Seeding::PerCell => None,
    };
    let mut seeds = match seeding {
        Seeding::Shared => Vec::new(),
        Seeding::PerCell => vec![0.0; dims.cells()],
    };

    let mut v = vec![0.0; (dims.horizon + 1) * ns];
    let mut q = vec![0.0; dims.cells()];
    let mut sigma = vec![0.0; dims.cells()];
    let mut perturbation = vec![0.0; dims.cells()];
    let mut policy = vec![0; dims.horizon * ns];
    let mut clip_events = Vec::new();

    for h in (0..dims.horizon).rev() {
        let threshold = 2.0 * (dims.horizon - h) as f64;
        let (head, tail) = v.split_at_mut((h + 1) * ns);
        let next = &tail[..ns];
        let current = &mut head[h * ns..];
        for s in 0..ns {
            for a in 0..na {
                let cell = dims.cell(h, s, a);
                let n = model.count(h, s, a);
                let base = model.r_hat(h, s, a) + model.p_hat_dot(h, s, a, next);
                let raw = match noise.kind {
                    NoiseKind::Hoeffding => magnitude.hoeffding(n),
                    NoiseKind::Bernstein => {
                        magnitude.bernstein(n, model.p_tilde_variance(h, s, a, next))
                    }
                };
                let sd = noise.scale * raw;
                let z = match shared {
                    Some(z) => z,
                    None => {
                        let z = src.standard_normal();
                        seeds[cell] = z;
                        z
                    }
                };
                let w = sd * z;
                sigma[cell] = sd;
                perturbation[cell] = w;
                q[cell] = base + w;
            }
            let row = &q[dims.cell(h, s, 0)..dims.cell(h, s, 0) + na];
            let best = argmax(row);
            let max_q = row[best];
            policy[h * ns + s] = best;
            if max_q.abs() > threshold {
                clip_events.push((h, s));
            }
            current[s] = if clip {
                clip_unchecked(threshold, max_q)
            } else {
                max_q
            };
        }
    }

    let draw = match shared {
        Some(z) => NoiseDraw::Single(z),
        None => NoiseDraw::PerCell(seeds),
    };
    PlanResult {
        values: ValueTable::from_parts(dims, v, q).expect("table sizes follow dims"),
        policy: Policy::from_table_unchecked(dims, policy),
        draw,
        sigma,
        perturbation,
        clip_events,
    }
}

/// Optimistic planning with the scaled Hoeffding bonus and `[0, H-h]` truncation (0-based `h`).
/// Consumes no randomness.
pub fn ucbvi_plan(model: &EmpiricalModel, scale: f64) -> PlanResult {
    let dims = model.dims();
    let (ns, na) = (dims.states, dims.actions);
    let magnitude = NoiseMagnitude::new(dims, model.episode());

    let mut v = vec![0.0; (dims.horizon + 1) * ns];
    let mut q = vec![0.0; dims.cells()];
    let mut bonus = vec![0.0; dims.cells()];
    let mut policy = vec![0; dims.horizon * ns];
    let mut clip_events = Vec::new();

    for h in (0..dims.horizon).rev() {
        let remaining = (dims.horizon - h) as f64;
        let (head, tail) = v.split_at_mut((h + 1) * ns);
        let next = &tail[..ns];
        let current = &mut head[h * ns..];
        for s in 0..ns {
            for a in 0..na {
                let cell = dims.cell(h, s, a);
                let b = scale * magnitude.hoeffding(model.count(h, s, a));
                bonus[cell] = b;
                q[cell] = model.r_hat(h, s, a) + model.p_hat_dot(h, s, a, next) + b;
            }
            let row = &q[dims.cell(h, s, 0)..dims.cell(h, s, 0) + na];
            let best = argmax(row);
            let max_q = row[best];
            policy[h * ns + s] = best;
            if max_q.abs() > 2.0 * remaining {
                clip_events.push((h, s));
            }
            current[s] = max_q.min(remaining).max(0.0);
        }
    }

    PlanResult {
        values: ValueTable::from_parts(dims, v, q).expect("table sizes follow dims"),
        policy: Policy::from_table_unchecked(dims, policy),
        draw: NoiseDraw::None,
        sigma: bonus.clone(),
        perturbation: bonus,
        clip_events,
    }
}
