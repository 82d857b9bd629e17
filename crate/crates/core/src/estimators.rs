//! Visit counts and running sums behind the empirical model.
//!
//! Counters are raw sums, so every estimator is recomputed exactly per query:
//! - `R̂ = reward_sum / (n + 1)`
//! - `P̂(s') = count(s') / (n + 1)`, a deficient row summing to `n / (n + 1)`
//! - `P̃(s') = count(s') / max(n, 1)`, a proper row once `n ≥ 1`
//!
//! The last step of an episode has no successor, so for `h = H - 1` the successor
//! counts stay empty and `P̂`, `P̃` are zero rows. Their only use is against the
//! terminal value `V[H] = 0`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::EpisodeRecord;
use crate::mdp::Dims;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    dims: Dims,
    counts: Vec<u64>,
    reward_sums: Vec<f64>,
    // Per cell, `(next_state, count)` sorted by next state.
    successors: Vec<Vec<(u32, u64)>>,
    episode: u64,
}

impl EmpiricalModel {
    /// Model before the first episode (`k = 1`, all counts zero).
    pub fn new(dims: Dims) -> Self {
        let cells = dims.cells();
        Self {
            dims,
            counts: vec![0; cells],
            reward_sums: vec![0.0; cells],
            successors: vec![Vec::new(); cells],
            episode: 1,
        }
    }

    /// Builds a model from raw tables, for fixtures and replay.
    ///
    /// `successor_counts[cell]` maps next states to counts; each cell's successor
    /// total must not exceed its visit count.
    pub fn from_raw(
        dims: Dims,
        counts: Vec<u64>,
        reward_sums: Vec<f64>,
        successor_counts: Vec<BTreeMap<usize, u64>>,
        episode: u64,
    ) -> Result<Self> {
        let cells = dims.cells();
        for (name, len) in [
            ("counts", counts.len()),
            ("reward_sums", reward_sums.len()),
            ("successor_counts", successor_counts.len()),
        ] {
            if len != cells {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has {len} cells, expected {cells}"
                )));
            }
        }
        if episode == 0 {
            return Err(Error::InvalidModel("episode index is 1-based".into()));
        }
        let mut successors = Vec::with_capacity(cells);
        for (cell, map) in successor_counts.into_iter().enumerate() {
            let total: u64 = map.values().sum();
            if total > counts[cell] {
                return Err(Error::InvalidModel(format!(
                    "cell {cell}: {total} successors but only {} visits",
                    counts[cell]
                )));
            }
            if let Some(&s) = map.keys().find(|&&s| s >= dims.states) {
                return Err(Error::InvalidModel(format!("successor {s} out of range")));
            }
            successors.push(
                map.into_iter()
                    .filter(|&(_, c)| c > 0)
                    .map(|(s, c)| (s as u32, c))
                    .collect(),
            );
        }
        Ok(Self {
            dims,
            counts,
            reward_sums,
            successors,
            episode,
        })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Current episode index `k`, 1-based: the model holds data from episodes `1..k`.
    #[inline]
    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Visit count `n_k(h, s, a)`.
    #[inline]
    pub fn count(&self, h: usize, s: usize, a: usize) -> u64 {
        self.counts[self.dims.cell(h, s, a)]
    }

    #[inline]
    pub fn reward_sum(&self, h: usize, s: usize, a: usize) -> f64 {
        self.reward_sums[self.dims.cell(h, s, a)]
    }

    /// Observed `(next_state, count)` pairs for a cell, sorted by state.
    #[inline]
    pub fn successors(&self, h: usize, s: usize, a: usize) -> &[(u32, u64)] {
        &self.successors[self.dims.cell(h, s, a)]
    }

    /// `R̂ = reward_sum / (n + 1)`.
    #[inline]
    pub fn r_hat(&self, h: usize, s: usize, a: usize) -> f64 {
        let cell = self.dims.cell(h, s, a);
        self.reward_sums[cell] / (self.counts[cell] + 1) as f64
    }

    /// `P̂(·) = count(·) / (n + 1)` as a dense row.
    pub fn p_hat(&self, h: usize, s: usize, a: usize) -> Vec<f64> {
        let denom = (self.count(h, s, a) + 1) as f64;
        self.dense_row(h, s, a, denom)
    }

    /// `P̃(·) = count(·) / max(n, 1)` as a dense row.
    pub fn p_tilde(&self, h: usize, s: usize, a: usize) -> Vec<f64> {
        let denom = self.count(h, s, a).max(1) as f64;
        self.dense_row(h, s, a, denom)
    }

    fn dense_row(&self, h: usize, s: usize, a: usize, denom: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.dims.states];
        for &(next, c) in self.successors(h, s, a) {
            row[next as usize] = c as f64 / denom;
        }
        row
    }

    /// `⟨P̂, values⟩` without materializing the row.
    #[inline]
    pub fn p_hat_dot(&self, h: usize, s: usize, a: usize, values: &[f64]) -> f64 {
        let cell = self.dims.cell(h, s, a);
        let succ = &self.successors[cell];
        if succ.is_empty() {
            return 0.0;
        }
        let weighted: f64 = succ
            .iter()
            .map(|&(next, c)| c as f64 * values[next as usize])
            .sum();
        weighted / (self.counts[cell] + 1) as f64
    }

    /// `𝕍(P̃, values)` over the observed successors.
    #[inline]
    pub fn p_tilde_variance(&self, h: usize, s: usize, a: usize, values: &[f64]) -> f64 {
        let cell = self.dims.cell(h, s, a);
        let succ = &self.successors[cell];
        if succ.is_empty() {
            return 0.0;
        }
        let denom = self.counts[cell].max(1) as f64;
        crate::mdp::variance_sparse(
            succ.iter()
                .map(move |&(next, c)| (next as usize, c as f64 / denom)),
            values,
        )
    }

    /// Folds one episode into the counters and advances `k`.
    pub fn update(&mut self, episode: &EpisodeRecord) -> Result<()> {
        let dims = self.dims;
        let steps = episode.steps();
        if steps.len() != dims.horizon {
            return Err(Error::DimensionMismatch(format!(
                "episode has {} steps, horizon is {}",
                steps.len(),
                dims.horizon
            )));
        }
        if let Some(step) = steps
            .iter()
            .find(|st| st.state >= dims.states || st.action >= dims.actions)
        {
            return Err(Error::DimensionMismatch(format!(
                "step (s={}, a={}) outside S={}, A={}",
                step.state, step.action, dims.states, dims.actions
            )));
        }
        for (h, step) in steps.iter().enumerate() {
            let cell = dims.cell(h, step.state, step.action);
            self.counts[cell] += 1;
            self.reward_sums[cell] += step.reward;
            if let Some(next) = steps.get(h + 1) {
                let succ = &mut self.successors[cell];
                let key = next.state as u32;
                match succ.binary_search_by_key(&key, |&(s, _)| s) {
                    Ok(i) => succ[i].1 += 1,
                    Err(i) => succ.insert(i, (key, 1)),
                }
            }
        }
        self.episode += 1;
        Ok(())
    }

    /// Nonzero visit counts keyed `"h,s,a"` (0-based), for debugging dumps.
    pub fn counts_snapshot(&self) -> serde_json::Value {
        let dims = self.dims;
        let mut map = serde_json::Map::new();
        for h in 0..dims.horizon {
            for s in 0..dims.states {
                for a in 0..dims.actions {
                    let n = self.count(h, s, a);
                    if n > 0 {
                        map.insert(format!("{h},{s},{a}"), n.into());
                    }
                }
            }
        }
        serde_json::Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Step;
    use proptest::prelude::*;

    fn record(k: u64, steps: &[(usize, usize, f64)]) -> EpisodeRecord {
        EpisodeRecord::new(
            k,
            steps
                .iter()
                .map(|&(state, action, reward)| Step {
                    state,
                    action,
                    reward,
                })
                .collect(),
        )
    }

    /// Single-step model with transition counts injected through a 2-step horizon.
    fn model_with_successors(next_states: &[usize], rewards: &[f64]) -> EmpiricalModel {
        let dims = Dims::new(2, 3, 1).unwrap();
        let mut m = EmpiricalModel::new(dims);
        for (i, &next) in next_states.iter().enumerate() {
            let r = rewards.get(i).copied().unwrap_or(0.0);
            m.update(&record(i as u64 + 1, &[(0, 0, r), (next, 0, 0.0)]))
                .unwrap();
        }
        m
    }

    #[test]
    fn one_episode_marks_visited_cells() {
        let dims = Dims::new(3, 2, 2).unwrap();
        let mut m = EmpiricalModel::new(dims);
        m.update(&record(1, &[(0, 1, 1.0), (1, 0, 0.0), (1, 1, 1.0)]))
            .unwrap();
        assert_eq!(m.count(0, 0, 1), 1);
        assert_eq!(m.count(1, 1, 0), 1);
        assert_eq!(m.count(2, 1, 1), 1);
        assert_eq!(m.counts.iter().sum::<u64>(), 3);
        assert_eq!(m.episode(), 2);
        m.update(&record(2, &[(0, 1, 1.0), (1, 0, 0.0), (1, 1, 1.0)]))
            .unwrap();
        assert_eq!(m.count(0, 0, 1), 2);
        assert_eq!(m.successors(0, 0, 1), &[(1, 2)]);
    }

    #[test]
    fn r_hat_uses_n_plus_one() {
        let m = model_with_successors(&[0, 0, 0], &[1.0, 0.0, 1.0]);
        assert_eq!(m.r_hat(0, 0, 0), 0.5);
        let m1 = model_with_successors(&[0], &[1.0]);
        assert_eq!(m1.r_hat(0, 0, 0), 0.5);
        let m0 = EmpiricalModel::new(Dims::new(2, 3, 1).unwrap());
        assert_eq!(m0.r_hat(0, 0, 0), 0.0);
    }

    #[test]
    fn p_hat_examples() {
        let m = model_with_successors(&[2, 2, 2], &[]);
        assert_eq!(m.p_hat(0, 0, 0), vec![0.0, 0.0, 0.75]);
        let m = model_with_successors(&[0, 1, 0, 1], &[]);
        assert_eq!(m.p_hat(0, 0, 0), vec![0.4, 0.4, 0.0]);
        let m0 = EmpiricalModel::new(Dims::new(2, 3, 1).unwrap());
        assert_eq!(m0.p_hat(0, 0, 0), vec![0.0; 3]);
    }

    #[test]
    fn p_tilde_examples() {
        let m0 = EmpiricalModel::new(Dims::new(2, 3, 1).unwrap());
        assert_eq!(m0.p_tilde(0, 0, 0), vec![0.0; 3]);
        let m = model_with_successors(&[2, 2, 2], &[]);
        assert_eq!(m.p_tilde(0, 0, 0), vec![0.0, 0.0, 1.0]);
        let m = model_with_successors(&[0, 1, 1, 1], &[]);
        assert_eq!(m.p_tilde(0, 0, 0), vec![0.25, 0.75, 0.0]);
    }

    #[test]
    fn sparse_queries_match_dense_rows() {
        let m = model_with_successors(&[0, 1, 1, 2, 1], &[]);
        let values = [1.5, -2.0, 4.0];
        let dense_dot: f64 = m
            .p_hat(0, 0, 0)
            .iter()
            .zip(&values)
            .map(|(p, v)| p * v)
            .sum();
        assert!((m.p_hat_dot(0, 0, 0, &values) - dense_dot).abs() < 1e-14);
        let dense_var = crate::mdp::variance(&m.p_tilde(0, 0, 0), &values).unwrap();
        assert!((m.p_tilde_variance(0, 0, 0, &values) - dense_var).abs() < 1e-12);
    }

    #[test]
    fn update_rejects_bad_episodes() {
        let mut m = EmpiricalModel::new(Dims::new(2, 2, 2).unwrap());
        assert!(m.update(&record(1, &[(0, 0, 0.0)])).is_err());
        assert!(m.update(&record(1, &[(0, 0, 0.0), (2, 0, 0.0)])).is_err());
        assert!(m.update(&record(1, &[(0, 2, 0.0), (1, 0, 0.0)])).is_err());
        assert_eq!(m.episode(), 1);
    }

    #[test]
    fn snapshot_lists_nonzero_counts() {
        let m = model_with_successors(&[2, 2], &[]);
        let snap = m.counts_snapshot();
        assert_eq!(snap["0,0,0"], 2);
        assert_eq!(snap["1,2,0"], 2);
        assert_eq!(snap.as_object().unwrap().len(), 2);
    }

    #[test]
    fn from_raw_validates() {
        let dims = Dims::new(1, 2, 1).unwrap();
        let mut succ = vec![BTreeMap::new(); 2];
        succ[0].insert(1, 3);
        assert!(EmpiricalModel::from_raw(dims, vec![2, 0], vec![0.0; 2], succ.clone(), 1).is_err());
        assert!(EmpiricalModel::from_raw(dims, vec![3, 0], vec![0.0; 2], succ, 1).is_ok());
    }

    fn episode_strategy() -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
        // dyadic rewards keep the float sums exact under reordering
        prop::collection::vec(
            (0usize..3, 0usize..2, (0u8..=4).prop_map(|q| q as f64 / 4.0)),
            3,
        )
    }

    proptest! {
        #[test]
        fn estimator_row_sums(episodes in prop::collection::vec(episode_strategy(), 0..30)) {
            let dims = Dims::new(3, 3, 2).unwrap();
            let mut m = EmpiricalModel::new(dims);
            for (i, ep) in episodes.iter().enumerate() {
                m.update(&record(i as u64 + 1, ep)).unwrap();
            }
            for h in 0..2 {
                for s in 0..3 {
                    for a in 0..2 {
                        let n = m.count(h, s, a) as f64;
                        let hat: f64 = m.p_hat(h, s, a).iter().sum();
                        prop_assert!((hat - n / (n + 1.0)).abs() < 1e-12);
                        let tilde: f64 = m.p_tilde(h, s, a).iter().sum();
                        prop_assert!(tilde.abs() < 1e-12 || (tilde - 1.0).abs() < 1e-12);
                        prop_assert!(m.r_hat(h, s, a) < 1.0);
                        let total: u64 = m.successors(h, s, a).iter().map(|&(_, c)| c).sum();
                        prop_assert_eq!(total, m.count(h, s, a));
                    }
                }
            }
        }

        #[test]
        fn update_is_order_insensitive(
            episodes in prop::collection::vec(episode_strategy(), 1..20),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let dims = Dims::new(3, 3, 2).unwrap();
            let mut shuffled = episodes.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut a = EmpiricalModel::new(dims);
            let mut b = EmpiricalModel::new(dims);
            for (i, ep) in episodes.iter().enumerate() {
                a.update(&record(i as u64 + 1, ep)).unwrap();
            }
            for (i, ep) in shuffled.iter().enumerate() {
                b.update(&record(i as u64 + 1, ep)).unwrap();
            }
            prop_assert_eq!(a, b);
        }
    }
}
