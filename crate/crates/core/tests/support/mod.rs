//! Brute-force oracles shared by the integration tests and the acceptance run.
//! Nothing here calls the library's dynamic programming.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssrlab::{Dims, Policy, RewardKind, TabularMdp};

/// Random small MDP with dimensions drawn from `1..=max` per axis.
pub fn small_mdp(seed: u64, max_h: usize, max_s: usize, max_a: usize) -> TabularMdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = rng.random_range(1..=max_h);
    let s = rng.random_range(1..=max_s);
    let a = rng.random_range(1..=max_a);
    mdp_with_dims(&mut rng, Dims::new(h, s, a).unwrap())
}

pub fn mdp_with_dims(rng: &mut impl Rng, dims: Dims) -> TabularMdp {
    let mut transitions = Vec::new();
    let mut rewards = Vec::new();
    for _ in 0..dims.cells() {
        let raw: Vec<f64> = (0..dims.states)
            .map(|_| rng.random::<f64>() + 1e-3)
            .collect();
        let total: f64 = raw.iter().sum();
        transitions.extend(raw.iter().map(|x| x / total));
        rewards.push(rng.random::<f64>());
    }
    let start = rng.random_range(0..dims.states);
    TabularMdp::new(dims, transitions, rewards, RewardKind::Bernoulli, start).unwrap()
}

/// Expected return from `(h, s)` by summing over every trajectory.
pub fn trajectory_return(mdp: &TabularMdp, actions: &[usize], h: usize, s: usize) -> f64 {
    let dims = mdp.dims();
    if h == dims.horizon {
        return 0.0;
    }
    let a = actions[h * dims.states + s];
    let mut total = mdp.reward(h, s, a);
    for (next, &p) in mdp.transition(h, s, a).iter().enumerate() {
        if p > 0.0 {
            total += p * trajectory_return(mdp, actions, h + 1, next);
        }
    }
    total
}

/// Every deterministic Markov policy, as flat `(h, s)` action tables.
pub fn all_policies(dims: Dims) -> Vec<Vec<usize>> {
    let slots = dims.horizon * dims.states;
    let count = dims.actions.pow(slots as u32);
    (0..count)
        .map(|mut code| {
            (0..slots)
                .map(|_| {
                    let a = code % dims.actions;
                    code /= dims.actions;
                    a
                })
                .collect()
        })
        .collect()
}

/// `max_π V^π_h(s)` by enumeration, for every `(h, s)`; row `H` is zero.
pub fn brute_force_optimal(mdp: &TabularMdp) -> Vec<Vec<f64>> {
    let dims = mdp.dims();
    let policies = all_policies(dims);
    let mut best = vec![vec![f64::NEG_INFINITY; dims.states]; dims.horizon + 1];
    best[dims.horizon].fill(0.0);
    for actions in &policies {
        for h in 0..dims.horizon {
            for s in 0..dims.states {
                let v = trajectory_return(mdp, actions, h, s);
                if v > best[h][s] {
                    best[h][s] = v;
                }
            }
        }
    }
    best
}

pub fn policy_from(mdp: &TabularMdp, actions: Vec<usize>) -> Policy {
    Policy::new(mdp.dims(), actions).unwrap()
}
