//! Seeded multi-trial experiments.
//!
//! Each trial owns a fresh empirical model and two private streams (planning
//! noise, environment), both keyed by `(base_seed, trial)`. Per episode the
//! planner runs once, the policy is rolled out for `H` steps, its exact regret
//! against the true MDP is recorded, and only then is the model updated.

mod config;
mod output;

use rand::Rng;
use serde::Serialize;

pub use config::{EnvKind, ExperimentConfig, DEEP_SEA_NOISE_SCALE};
pub use output::{write_outputs, CONFIG_FILE, DIAGNOSTICS_FILE, REGRET_FILE};

use crate::agents::{NoiseDraw, PlanResult, Planner};
use crate::diagnostics;
use crate::environments::step;
use crate::error::Result;
use crate::estimators::EmpiricalModel;
use crate::mdp::{optimal_values, start_value, TabularMdp, ValueTable};
use crate::rng::{stream, NormalSource, Purpose};

/// One step of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

/// Trajectory of one episode: exactly `H` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    k: u64,
    steps: Vec<Step>,
}

impl EpisodeRecord {
    pub fn new(k: u64, steps: Vec<Step>) -> Self {
        Self { k, steps }
    }

    pub fn episode(&self) -> u64 {
        self.k
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Sum of realized rewards.
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Plans once on `model` and rolls the greedy policy out for `H` steps.
/// The model is left untouched.
pub fn run_episode<R: Rng + ?Sized>(
    env: &TabularMdp,
    model: &EmpiricalModel,
    planner: &dyn Planner,
    noise: &mut dyn NormalSource,
    env_rng: &mut R,
) -> (EpisodeRecord, PlanResult) {
    let plan = planner.plan(model, noise);
    let mut s = env.start();
    let mut steps = Vec::with_capacity(env.dims().horizon);
    for h in 0..env.dims().horizon {
        let a = plan.policy.action(h, s);
        let (next, reward) = step(env, h, s, a, env_rng);
        steps.push(Step {
            state: s,
            action: a,
            reward,
        });
        s = next;
    }
    (EpisodeRecord::new(model.episode(), steps), plan)
}

/// Exact regret of plans against a fixed true MDP; caches `V*_1(s_1)`.
#[derive(Debug, Clone)]
pub struct RegretEvaluator<'a> {
    mdp: &'a TabularMdp,
    optimal_start: f64,
}

impl<'a> RegretEvaluator<'a> {
    pub fn new(mdp: &'a TabularMdp) -> Self {
        let (v, _) = optimal_values(mdp);
        Self {
            mdp,
            optimal_start: v.v(0, mdp.start()),
        }
    }

    pub fn optimal_start(&self) -> f64 {
        self.optimal_start
    }

    /// `V*_1(s_1) - V^π_1(s_1)`; rounding noise below zero is reported as zero.
    pub fn regret(&self, plan: &PlanResult) -> f64 {
        let gap = self.optimal_start - start_value(self.mdp, &plan.policy);
        debug_assert!(gap >= -1e-9, "negative regret {gap}");
        gap.max(0.0)
    }
}

/// `V*_1(s_1) - V^{π}_1(s_1)` for the plan's greedy policy.
pub fn instantaneous_regret(true_mdp: &TabularMdp, plan: &PlanResult) -> f64 {
    RegretEvaluator::new(true_mdp).regret(plan)
}

/// Per-episode theory diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub trial: u64,
    pub k: u64,
    /// The shared seed for single-seed plans, `null` otherwise.
    pub z: Option<f64>,
    pub clip_count: usize,
    pub path_clip_count: usize,
    pub optimism: bool,
    pub pessimism: bool,
    pub good_event: bool,
    /// `|ẑ_k| ≤ √ln(40k⁴)`; `null` without a shared seed.
    pub noise_envelope: Option<bool>,
    /// Some visited `(h, s_h, a_h)` had fewer than `α_k` prior visits.
    pub below_alpha: bool,
}

/// What one trial produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub instantaneous: Vec<f64>,
    pub diagnostics: Vec<DiagnosticRecord>,
}

struct DiagnosticsContext {
    v_star: ValueTable,
}

fn diagnose(
    ctx: &DiagnosticsContext,
    env: &TabularMdp,
    model: &EmpiricalModel,
    planner: &dyn Planner,
    record: &EpisodeRecord,
    plan: &PlanResult,
    trial: u64,
) -> Result<DiagnosticRecord> {
    let k = model.episode();
    let z = match plan.draw {
        NoiseDraw::Single(z) => Some(z),
        _ => None,
    };
    Ok(DiagnosticRecord {
        trial,
        k,
        z,
        clip_count: plan.clip_events.len(),
        path_clip_count: diagnostics::clips_on_path(plan, record),
        optimism: diagnostics::optimism_flag(plan.values.v_flat(), ctx.v_star.v_flat())?,
        pessimism: diagnostics::pessimism_flag(plan.values.v_flat(), ctx.v_star.v_flat())?,
        good_event: diagnostics::good_event(model, env, &ctx.v_star, planner.confidence_kind())?,
        noise_envelope: z.map(|z| diagnostics::within_noise_envelope(z, k)),
        below_alpha: diagnostics::any_visit_below_alpha(model, record),
    })
}

/// Runs one trial of `episodes` episodes with streams derived from `(base_seed, trial)`.
pub fn run_trial(
    env: &TabularMdp,
    planner: &dyn Planner,
    episodes: u64,
    base_seed: u64,
    trial: u64,
    with_diagnostics: bool,
) -> Result<TrialOutcome> {
    let evaluator = RegretEvaluator::new(env);
    let ctx = with_diagnostics.then(|| DiagnosticsContext {
        v_star: optimal_values(env).0,
    });
    let mut model = EmpiricalModel::new(env.dims());
    let mut noise = stream(base_seed, trial, Purpose::Planning);
    let mut env_rng = stream(base_seed, trial, Purpose::Environment);
    let mut instantaneous = Vec::with_capacity(episodes as usize);
    let mut records = Vec::new();
    for _ in 0..episodes {
        let (record, plan) = run_episode(env, &model, planner, &mut noise, &mut env_rng);
        instantaneous.push(evaluator.regret(&plan));
        if let Some(ctx) = &ctx {
            records.push(diagnose(ctx, env, &model, planner, &record, &plan, trial)?);
        }
        model.update(&record)?;
    }
    Ok(TrialOutcome {
        instantaneous,
        diagnostics: records,
    })
}

/// Runs trials `0..trials` one after another.
pub fn run_trials_sequential(
    env: &TabularMdp,
    planner: &dyn Planner,
    episodes: u64,
    trials: u64,
    base_seed: u64,
    with_diagnostics: bool,
) -> Result<Vec<TrialOutcome>> {
    (0..trials)
        .map(|t| run_trial(env, planner, episodes, base_seed, t, with_diagnostics))
        .collect()
}

/// Runs trials `0..trials` on the rayon pool. Output order is by trial index.
#[cfg(feature = "parallel")]
pub fn run_trials_parallel(
    env: &TabularMdp,
    planner: &dyn Planner,
    episodes: u64,
    trials: u64,
    base_seed: u64,
    with_diagnostics: bool,
) -> Result<Vec<TrialOutcome>> {
    use rayon::prelude::*;
    (0..trials)
        .into_par_iter()
        .map(|t| run_trial(env, planner, episodes, base_seed, t, with_diagnostics))
        .collect()
}

/// Runs all trials, in parallel when the `parallel` feature is on.
pub fn run_trials(
    env: &TabularMdp,
    planner: &dyn Planner,
    episodes: u64,
    trials: u64,
    base_seed: u64,
    with_diagnostics: bool,
) -> Result<Vec<TrialOutcome>> {
    #[cfg(feature = "parallel")]
    {
        run_trials_parallel(env, planner, episodes, trials, base_seed, with_diagnostics)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_sequential(env, planner, episodes, trials, base_seed, with_diagnostics)
    }
}

/// Instantaneous and cumulative regret per trial, plus per-episode aggregates of
/// the cumulative curves.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub instantaneous: Vec<Vec<f64>>,
    pub cumulative: Vec<Vec<f64>>,
    /// Mean of the cumulative curves per episode.
    pub mean: Vec<f64>,
    /// Sample standard deviation (`T - 1` denominator) per episode; 0 when `T = 1`.
    pub std: Vec<f64>,
}

impl RegretCurve {
    /// Aggregates per-trial instantaneous regrets. All trials must have equal length.
    pub fn from_instantaneous(instantaneous: Vec<Vec<f64>>) -> Self {
        let cumulative: Vec<Vec<f64>> = instantaneous
            .iter()
            .map(|inst| {
                inst.iter()
                    .scan(0.0, |acc, &x| {
                        *acc += x;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let episodes = cumulative.first().map_or(0, Vec::len);
        let trials = cumulative.len() as f64;
        let mut mean = Vec::with_capacity(episodes);
        let mut std = Vec::with_capacity(episodes);
        for k in 0..episodes {
            let m = cumulative.iter().map(|c| c[k]).sum::<f64>() / trials;
            let sd = if cumulative.len() > 1 {
                let ss: f64 = cumulative.iter().map(|c| (c[k] - m) * (c[k] - m)).sum();
                (ss / (trials - 1.0)).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            std.push(sd);
        }
        Self {
            instantaneous,
            cumulative,
            mean,
            std,
        }
    }

    pub fn trials(&self) -> usize {
        self.cumulative.len()
    }

    pub fn episodes(&self) -> usize {
        self.mean.len()
    }

    /// Final cumulative regret of each trial.
    pub fn final_regrets(&self) -> Vec<f64> {
        self.cumulative
            .iter()
            .map(|c| c.last().copied().unwrap_or(0.0))
            .collect()
    }
}

/// Curve plus the optional per-trial diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub curve: RegretCurve,
    pub diagnostics: Vec<Vec<DiagnosticRecord>>,
}

/// Resolves the config, runs every trial, and writes outputs when `out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let env = config.build_env()?;
    let planner = config.algorithm()?;
    let outcomes = run_trials(
        &env,
        &planner,
        config.episodes,
        config.trials,
        config.seed,
        config.diagnostics,
    )?;
    let (inst, diags): (Vec<_>, Vec<_>) = outcomes
        .into_iter()
        .map(|o| (o.instantaneous, o.diagnostics))
        .unzip();
    let result = ExperimentResult {
        curve: RegretCurve::from_instantaneous(inst),
        diagnostics: diags,
    };
    if let Some(dir) = &config.out {
        write_outputs(&result, config, dir)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Algorithm, NoiseKind, NoiseSpec};
    use crate::environments::{deep_sea, random_mdp, DeepSeaSpec};
    use crate::mdp::{Policy, RewardKind};
    use crate::rng::FixedNormal;

    /// Test planner that always plays a fixed policy.
    struct FixedPolicy(Policy);

    impl Planner for FixedPolicy {
        fn plan(&self, model: &EmpiricalModel, _noise: &mut dyn NormalSource) -> PlanResult {
            let dims = model.dims();
            PlanResult {
                values: ValueTable::zeros(dims),
                policy: self.0.clone(),
                draw: NoiseDraw::None,
                sigma: vec![0.0; dims.cells()],
                perturbation: vec![0.0; dims.cells()],
                clip_events: vec![],
            }
        }
    }

    fn deep_sea_deterministic(n: usize) -> TabularMdp {
        let mdp = deep_sea(&DeepSeaSpec::new(n, 3)).unwrap();
        assert_eq!(mdp.reward_kind(), RewardKind::Deterministic);
        mdp
    }

    #[test]
    fn deterministic_episode_repeats() {
        let env = deep_sea_deterministic(5);
        let model = EmpiricalModel::new(env.dims());
        let planner = Algorithm::Ucbvi { scale: 1.0 };
        let mut a_rng = stream(1, 0, Purpose::Environment);
        let mut b_rng = stream(99, 4, Purpose::Environment);
        let (a, _) = run_episode(&env, &model, &planner, &mut FixedNormal(0.0), &mut a_rng);
        let (b, _) = run_episode(&env, &model, &planner, &mut FixedNormal(0.0), &mut b_rng);
        assert_eq!(a, b);
        assert_eq!(a.steps().len(), 5);
    }

    #[test]
    fn optimal_policy_collects_point_nine_nine() {
        let env = deep_sea_deterministic(7);
        let (_, pi) = optimal_values(&env);
        let model = EmpiricalModel::new(env.dims());
        let mut rng = stream(0, 0, Purpose::Environment);
        let (record, plan) = run_episode(
            &env,
            &model,
            &FixedPolicy(pi),
            &mut FixedNormal(0.0),
            &mut rng,
        );
        assert!((record.total_reward() - 0.99).abs() < 1e-12);
        assert_eq!(instantaneous_regret(&env, &plan), 0.0);
    }

    #[test]
    fn always_left_misses_everything() {
        let spec = DeepSeaSpec::new(2, 5);
        let env = deep_sea(&spec).unwrap();
        let right = spec.right_actions();
        let left: Vec<usize> = (0..2).flat_map(|_| right.iter().map(|&r| 1 - r)).collect();
        let planner = FixedPolicy(Policy::new(env.dims(), left).unwrap());
        let plan = planner.plan(&EmpiricalModel::new(env.dims()), &mut FixedNormal(0.0));
        assert!((instantaneous_regret(&env, &plan) - 0.99).abs() < 1e-12);
    }

    #[test]
    fn zero_knowledge_regret_is_bounded() {
        for seed in 0..10 {
            let env = deep_sea(&DeepSeaSpec::new(6, seed)).unwrap();
            let planner = FixedPolicy(Policy::constant(env.dims(), 0).unwrap());
            let plan = planner.plan(&EmpiricalModel::new(env.dims()), &mut FixedNormal(0.0));
            let r = instantaneous_regret(&env, &plan);
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn oracle_planner_has_zero_regret() {
        let env = random_mdp(3, 3, 2, 4).unwrap();
        let (_, pi) = optimal_values(&env);
        let outcomes = run_trials(&env, &FixedPolicy(pi), 50, 3, 7, false).unwrap();
        let curve = RegretCurve::from_instantaneous(
            outcomes.into_iter().map(|o| o.instantaneous).collect(),
        );
        assert!(curve.mean.iter().all(|&m| m == 0.0));
        assert!(curve.std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn trials_do_not_depend_on_scheduling() {
        let env = random_mdp(3, 3, 2, 2).unwrap();
        let planner = Algorithm::Ssr(NoiseSpec::unit(NoiseKind::Bernstein));
        let all = run_trials(&env, &planner, 200, 4, 11, true).unwrap();
        let seq = run_trials_sequential(&env, &planner, 200, 4, 11, true).unwrap();
        assert_eq!(all, seq);
        // trial 2 alone reproduces column 2
        let alone = run_trial(&env, &planner, 200, 11, 2, true).unwrap();
        assert_eq!(alone, all[2]);
    }

    #[test]
    fn curve_aggregates() {
        let curve = RegretCurve::from_instantaneous(vec![vec![1.0, 0.5, 0.0], vec![0.0, 0.5, 1.0]]);
        assert_eq!(
            curve.cumulative,
            vec![vec![1.0, 1.5, 1.5], vec![0.0, 0.5, 1.5]]
        );
        assert_eq!(curve.mean, vec![0.5, 1.0, 1.5]);
        assert!((curve.std[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(curve.std[2], 0.0);
        let single = RegretCurve::from_instantaneous(vec![vec![0.3, 0.2]]);
        assert_eq!(single.std, vec![0.0, 0.0]);
        assert_eq!(single.final_regrets(), vec![0.5]);
    }

    #[test]
    fn diagnostics_are_recorded_per_episode() {
        let env = random_mdp(2, 2, 2, 6).unwrap();
        let planner = Algorithm::Ssr(NoiseSpec::unit(NoiseKind::Hoeffding));
        let out = run_trial(&env, &planner, 30, 1, 0, true).unwrap();
        assert_eq!(out.diagnostics.len(), 30);
        for (i, d) in out.diagnostics.iter().enumerate() {
            assert_eq!(d.k, i as u64 + 1);
            assert!(d.z.is_some());
        }
        let plain = run_trial(&env, &planner, 30, 1, 0, false).unwrap();
        assert_eq!(plain.instantaneous, out.instantaneous);
        assert!(plain.diagnostics.is_empty());
    }
}
