//! Benchmark MDPs.
//!
//! Deep sea is an `N × N` grid walked top to bottom in `N` steps. Cell `(row, col)`
//! is state `row * N + col` and the start is `(0, 0)`. At each cell a hidden mask
//! decides which of the two actions means "right" (down-right) and which means
//! "left" (down-left, clamped at column 0).
//!
//! Rewards per step:
//! - every "right" move on the diagonal costs `0.01 / N`,
//! - "right" from the bottom-right corner additionally pays the goal reward.
//!
//! Going right `N` times therefore collects `1 - N · 0.01 / N = 0.99`; every other
//! policy misses the goal. Rows clamp at the bottom, but the last row is only
//! reached on the final step, whose successor is never used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Dims, RewardKind, TabularMdp};

/// Total cost of moving right along the whole diagonal.
pub const DEEP_SEA_MOVE_COST: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepSeaSpec {
    pub size: usize,
    pub mask_seed: u64,
    pub goal_reward: f64,
}

impl DeepSeaSpec {
    pub fn new(size: usize, mask_seed: u64) -> Self {
        Self {
            size,
            mask_seed,
            goal_reward: 1.0,
        }
    }

    /// Action index that means "right" at each cell, row-major.
    ///
    /// Drawn once from `mask_seed`, so every trial of an experiment sees the same grid.
    pub fn right_actions(&self) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.mask_seed);
        (0..self.size * self.size)
            .map(|_| usize::from(rng.random_bool(0.5)))
            .collect()
    }

    /// Per-step cost of a diagonal "right" move.
    pub fn move_cost(&self) -> f64 {
        DEEP_SEA_MOVE_COST / self.size as f64
    }

    pub fn cell(&self, state: usize) -> (usize, usize) {
        (state / self.size, state % self.size)
    }

    pub fn state(&self, row: usize, col: usize) -> usize {
        row * self.size + col
    }
}

/// Builds the deep-sea MDP: `H = N`, `S = N²`, `A = 2`, deterministic transitions.
pub fn deep_sea(spec: &DeepSeaSpec) -> Result<TabularMdp> {
    let n = spec.size;
    if n < 2 {
        return Err(Error::Config(format!("deep sea needs N >= 2, got {n}")));
    }
    if !spec.goal_reward.is_finite() {
        return Err(Error::Config("goal reward must be finite".into()));
    }
    let dims = Dims::new(n, n * n, 2)?;
    let right = spec.right_actions();
    let cost = spec.move_cost();

    let mut transitions = vec![0.0; dims.cells() * dims.states];
    let mut rewards = vec![0.0; dims.cells()];
    for h in 0..n {
        for s in 0..dims.states {
            let (row, col) = spec.cell(s);
            let next_row = (row + 1).min(n - 1);
            for a in 0..2 {
                let cell = dims.cell(h, s, a);
                let goes_right = a == right[s];
                let next_col = if goes_right {
                    (col + 1).min(n - 1)
                } else {
                    col.saturating_sub(1)
                };
                transitions[cell * dims.states + spec.state(next_row, next_col)] = 1.0;
                let mut r = 0.0;
                if goes_right && row == col {
                    r -= cost;
                }
                if goes_right && row == n - 1 && col == n - 1 {
                    r += spec.goal_reward;
                }
                rewards[cell] = r;
            }
        }
    }
    TabularMdp::new(dims, transitions, rewards, RewardKind::Deterministic, 0)
}

/// Random MDP: transition rows uniform on the simplex, mean rewards uniform on
/// `[0, 1]`, Bernoulli rewards, start state 0.
pub fn random_mdp(horizon: usize, states: usize, actions: usize, seed: u64) -> Result<TabularMdp> {
    let dims = Dims::new(horizon, states, actions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = Vec::with_capacity(dims.cells() * states);
    let mut rewards = Vec::with_capacity(dims.cells());
    for _ in 0..dims.cells() {
        let row: Vec<f64> = (0..states).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            transitions.extend(row.iter().map(|x| x / total));
        } else {
            transitions.extend(std::iter::repeat_n(1.0 / states as f64, states));
        }
        rewards.push(rng.random::<f64>());
    }
    TabularMdp::new(dims, transitions, rewards, RewardKind::Bernoulli, 0)
}

/// Samples `(s', r)` for taking `a` in `s` at step `h`.
pub fn step<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    h: usize,
    s: usize,
    a: usize,
    rng: &mut R,
) -> (usize, f64) {
    let row = mdp.transition(h, s, a);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut next = None;
    for (i, &p) in row.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        acc += p;
        next = Some(i);
        if u < acc {
            break;
        }
    }
    // rows are validated stochastic, so some entry is positive
    let next = next.expect("transition row has positive mass");
    let mean = mdp.reward(h, s, a);
    let reward = match mdp.reward_kind() {
        RewardKind::Deterministic => mean,
        RewardKind::Bernoulli => {
            if rng.random::<f64>() < mean {
                1.0
            } else {
                0.0
            }
        }
    };
    (next, reward)
}
