//! Tabular time-inhomogeneous finite-horizon MDPs and exact dynamic programming.
//!
//! Tables are stored flat. A transition row for `(h, s, a)` is the slice
//! `transitions[cell * S .. (cell + 1) * S]` with `cell = (h * S + s) * A + a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for a transition row to count as a probability distribution.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Largest reward magnitude accepted for deterministic rewards.
///
/// Bernoulli rewards must lie in `[0, 1]`. Deterministic rewards may be signed
/// (deep sea pays `-0.01 / N` per diagonal move and `±1` at the corner).
pub const MAX_DETERMINISTIC_REWARD: f64 = 2.0;

/// Horizon, state count and action count of a tabular problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub horizon: usize,
    pub states: usize,
    pub actions: usize,
}

impl Dims {
    pub fn new(horizon: usize, states: usize, actions: usize) -> Result<Self> {
        if horizon == 0 || states == 0 || actions == 0 {
            return Err(Error::InvalidModel(format!(
                "dimensions must be positive, got H={horizon}, S={states}, A={actions}"
            )));
        }
        Ok(Self {
            horizon,
            states,
            actions,
        })
    }

    /// Number of `(h, s, a)` cells.
    #[inline]
    pub fn cells(&self) -> usize {
        self.horizon * self.states * self.actions
    }

    #[inline]
    pub fn cell(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.states && a < self.actions);
        (h * self.states + s) * self.actions + a
    }

    /// `H * S * A` as a float, the product inside every `ln(2HSAk²)` term.
    #[inline]
    pub fn hsa(&self) -> f64 {
        self.cells() as f64
    }
}

/// How a realized reward relates to the stored mean reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// The realized reward equals the mean.
    Deterministic,
    /// The realized reward is a Bernoulli draw with the mean as success probability.
    Bernoulli,
}

/// Ground-truth episodic MDP with step-dependent transitions and rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    dims: Dims,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    reward_kind: RewardKind,
    start: usize,
}

impl TabularMdp {
    /// Builds and validates an MDP from flat tables.
    ///
    /// `transitions` has `H * S * A * S` entries, `rewards` has `H * S * A`.
    pub fn new(
        dims: Dims,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        reward_kind: RewardKind,
        start: usize,
    ) -> Result<Self> {
        let cells = dims.cells();
        if transitions.len() != cells * dims.states {
            return Err(Error::LengthMismatch {
                expected: cells * dims.states,
                got: transitions.len(),
            });
        }
        if rewards.len() != cells {
            return Err(Error::LengthMismatch {
                expected: cells,
                got: rewards.len(),
            });
        }
        if start >= dims.states {
            return Err(Error::InvalidModel(format!(
                "start state {start} out of range for S={}",
                dims.states
            )));
        }
        for (cell, row) in transitions.chunks_exact(dims.states).enumerate() {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidModel(format!(
                    "transition row {cell} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidModel(format!(
                    "transition row {cell} sums to {sum}"
                )));
            }
        }
        let (lo, hi) = match reward_kind {
            RewardKind::Bernoulli => (0.0, 1.0),
            RewardKind::Deterministic => (-MAX_DETERMINISTIC_REWARD, MAX_DETERMINISTIC_REWARD),
        };
        if let Some((cell, r)) = rewards
            .iter()
            .enumerate()
            .find(|(_, r)| !(lo..=hi).contains(*r))
        {
            return Err(Error::InvalidModel(format!(
                "reward {r} at cell {cell} outside [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            dims,
            transitions,
            rewards,
            reward_kind,
            start,
        })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    /// Transition distribution `P_h(· | s, a)`.
    #[inline]
    pub fn transition(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let cell = self.dims.cell(h, s, a);
        let n = self.dims.states;
        &self.transitions[cell * n..(cell + 1) * n]
    }

    /// Mean reward `R_h(s, a)`.
    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.rewards[self.dims.cell(h, s, a)]
    }
}

/// State values `V` with a terminal zero row, and action values `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    dims: Dims,
    v: Vec<f64>,
    q: Vec<f64>,
}

impl ValueTable {
    /// All-zero table.
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            v: vec![0.0; (dims.horizon + 1) * dims.states],
            q: vec![0.0; dims.cells()],
        }
    }

    /// Wraps flat tables; `v` has `(H + 1) * S` entries and `q` has `H * S * A`.
    pub fn from_parts(dims: Dims, v: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if v.len() != (dims.horizon + 1) * dims.states {
            return Err(Error::LengthMismatch {
                expected: (dims.horizon + 1) * dims.states,
                got: v.len(),
            });
        }
        if q.len() != dims.cells() {
            return Err(Error::LengthMismatch {
                expected: dims.cells(),
                got: q.len(),
            });
        }
        Ok(Self { dims, v, q })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.dims.states + s]
    }

    /// `V[h][·]`, for `h` in `0..=H`.
    #[inline]
    pub fn v_row(&self, h: usize) -> &[f64] {
        let n = self.dims.states;
        &self.v[h * n..(h + 1) * n]
    }

    #[inline]
    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.dims.cell(h, s, a)]
    }

    /// `Q[h][s][·]`.
    #[inline]
    pub fn q_row(&self, h: usize, s: usize) -> &[f64] {
        let start = self.dims.cell(h, s, 0);
        &self.q[start..start + self.dims.actions]
    }

    /// Flat state values, `(H + 1) * S` entries.
    pub fn v_flat(&self) -> &[f64] {
        &self.v
    }

    /// Flat action values, `H * S * A` entries.
    pub fn q_flat(&self) -> &[f64] {
        &self.q
    }
}

/// Deterministic step-dependent policy `π_h(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    dims: Dims,
    table: Vec<usize>,
}

impl Policy {
    /// Validates an `H * S` action table laid out by `h * S + s`.
    pub fn new(dims: Dims, table: Vec<usize>) -> Result<Self> {
        if table.len() != dims.horizon * dims.states {
            return Err(Error::LengthMismatch {
                expected: dims.horizon * dims.states,
                got: table.len(),
            });
        }
        if let Some(a) = table.iter().find(|&&a| a >= dims.actions) {
            return Err(Error::InvalidModel(format!(
                "policy action {a} out of range for A={}",
                dims.actions
            )));
        }
        Ok(Self { dims, table })
    }

    /// The policy that plays `action` everywhere.
    pub fn constant(dims: Dims, action: usize) -> Result<Self> {
        Self::new(dims, vec![action; dims.horizon * dims.states])
    }

    pub(crate) fn from_table_unchecked(dims: Dims, table: Vec<usize>) -> Self {
        Self { dims, table }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.table[h * self.dims.states + s]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.table
    }
}

/// Index of the largest entry; ties go to the smallest index.
#[inline]
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Optimal values by backward induction, with the greedy (smallest-index) policy.
pub fn optimal_values(mdp: &TabularMdp) -> (ValueTable, Policy) {
    let dims = mdp.dims();
    let mut table = ValueTable::zeros(dims);
    let mut policy = vec![0; dims.horizon * dims.states];
    for h in (0..dims.horizon).rev() {
        let (head, tail) = table.v.split_at_mut((h + 1) * dims.states);
        let next = &tail[..dims.states];
        let current = &mut head[h * dims.states..];
        for s in 0..dims.states {
            for a in 0..dims.actions {
                table.q[dims.cell(h, s, a)] =
                    mdp.reward(h, s, a) + dot(mdp.transition(h, s, a), next);
            }
            let start = dims.cell(h, s, 0);
            let best = argmax(&table.q[start..start + dims.actions]);
            policy[h * dims.states + s] = best;
            current[s] = table.q[start + best];
        }
    }
    (table, Policy::from_table_unchecked(dims, policy))
}

/// Exact values of `policy` by backward recursion. `Q` holds the one-step
/// lookahead `R + ⟨P, V^π_{h+1}⟩` for every action.
pub fn policy_values(mdp: &TabularMdp, policy: &Policy) -> Result<ValueTable> {
    let dims = mdp.dims();
    if policy.dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "policy dims {:?} vs mdp dims {:?}",
            policy.dims(),
            dims
        )));
    }
    let mut table = ValueTable::zeros(dims);
    for h in (0..dims.horizon).rev() {
        let (head, tail) = table.v.split_at_mut((h + 1) * dims.states);
        let next = &tail[..dims.states];
        let current = &mut head[h * dims.states..];
        for s in 0..dims.states {
            for a in 0..dims.actions {
                table.q[dims.cell(h, s, a)] =
                    mdp.reward(h, s, a) + dot(mdp.transition(h, s, a), next);
            }
            current[s] = table.q[dims.cell(h, s, policy.action(h, s))];
        }
    }
    Ok(table)
}

/// `V^π_1(s_1)` by pushing the state distribution forward from the start state.
///
/// Only states with positive mass are expanded, so this is much cheaper than
/// [`policy_values`] when the reachable set is small.
pub fn start_value(mdp: &TabularMdp, policy: &Policy) -> f64 {
    let dims = mdp.dims();
    let mut dist = vec![0.0; dims.states];
    let mut next = vec![0.0; dims.states];
    dist[mdp.start()] = 1.0;
    let mut value = 0.0;
    for h in 0..dims.horizon {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let a = policy.action(h, s);
            value += mass * mdp.reward(h, s, a);
            for (acc, &p) in next.iter_mut().zip(mdp.transition(h, s, a)) {
                *acc += mass * p;
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    value
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Variance of `values` under a (possibly deficient) distribution:
/// `∑ D(s) (V(s) - ⟨D, V⟩)²`, clamped at zero.
pub fn variance(dist: &[f64], values: &[f64]) -> Result<f64> {
    if dist.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            got: dist.len(),
        });
    }
    let mean = dot(dist, values);
    let var: f64 = dist
        .iter()
        .zip(values)
        .map(|(d, v)| d * (v - mean) * (v - mean))
        .sum();
    Ok(var.max(0.0))
}

/// [`variance`] over a sparse distribution given as `(state, mass)` pairs.
pub(crate) fn variance_sparse(
    dist: impl Iterator<Item = (usize, f64)> + Clone,
    values: &[f64],
) -> f64 {
    let mean: f64 = dist.clone().map(|(s, d)| d * values[s]).sum();
    let var: f64 = dist
        .map(|(s, d)| {
            let dev = values[s] - mean;
            d * dev * dev
        })
        .sum();
    var.max(0.0)
}

/// `clip_a(x) = max(-a, min(a, x))`.
pub fn clip(threshold: f64, x: f64) -> Result<f64> {
    if threshold < 0.0 || threshold.is_nan() {
        return Err(Error::NegativeThreshold(threshold));
    }
    Ok(clip_unchecked(threshold, x))
}

#[inline]
pub(crate) fn clip_unchecked(threshold: f64, x: f64) -> f64 {
    x.min(threshold).max(-threshold)
}
