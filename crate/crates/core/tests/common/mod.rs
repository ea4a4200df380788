//! Fixtures, seeded instance generators and independent reference computations shared by
//! the integration suites.

#![allow(dead_code)]

pub mod suites;

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use pomdp_finmem::io;
use pomdp_finmem::model::{Dist, Objective, Pomdp, PomdpBuilder};
use pomdp_finmem::sets::StateSet;
use pomdp_finmem::strategy::FiniteMemoryStrategy;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture(name: &str) -> (Pomdp, Objective) {
    let (p, o, warnings) = io::parse_model(&fixture_text(name)).unwrap();
    assert!(warnings.is_empty(), "{name}: {warnings:?}");
    (p, o)
}

pub fn strategy_fixture(name: &str, pomdp: &Pomdp) -> FiniteMemoryStrategy {
    io::parse_strategy(&fixture_text(name), pomdp).unwrap()
}

pub fn state(p: &Pomdp, name: &str) -> u32 {
    p.state_id(name).unwrap_or_else(|| panic!("no state {name}"))
}

pub fn action(p: &Pomdp, name: &str) -> u32 {
    p.action_id(name).unwrap()
}

/// Non-empty random subset of `0..n`.
pub fn nonempty_subset(rng: &mut TestRng, n: usize) -> Vec<u32> {
    loop {
        let v: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.5)).collect();
        if !v.is_empty() {
            return v;
        }
    }
}

/// Random subset of `0..n` as a state set.
pub fn random_set(rng: &mut TestRng, n: usize, p: f64) -> StateSet {
    let mut s = FixedBitSet::with_capacity(n);
    for i in 0..n {
        if rng.gen_bool(p) {
            s.insert(i);
        }
    }
    s
}

/// Random POMDP with `states` states. State 0 is initial and carries its own observation;
/// the others share `obs - 1` observations. Every action is available everywhere and
/// transitions are uniform over random non-empty supports.
pub fn random_pomdp(rng: &mut TestRng, states: usize, actions: usize, obs: usize) -> Pomdp {
    assert!(obs >= 1 && states >= 1);
    let mut b = PomdpBuilder::new();
    for s in 0..states {
        b.add_state(format!("s{s}"));
    }
    for a in 0..actions {
        b.add_action(format!("a{a}"));
    }
    let obs = obs.min(states);
    for o in 0..obs {
        b.add_observation(format!("o{o}"));
    }
    b.set_observation(0, 0);
    // Every non-initial observation gets at least one state.
    let mut labels: Vec<u32> = (1..obs as u32).collect();
    while labels.len() < states - 1 {
        labels.push(if obs > 1 { rng.gen_range(1..obs as u32) } else { 0 });
    }
    labels.shuffle(rng);
    for (i, &o) in labels.iter().enumerate() {
        b.set_observation(i as u32 + 1, o);
    }
    b.set_initial(0);
    for s in 0..states as u32 {
        for a in 0..actions as u32 {
            b.set_transition(s, a, Dist::uniform(nonempty_subset(rng, states)));
        }
    }
    b.build().unwrap()
}

/// Random POMDP where every state carries its own observation.
pub fn random_mdp(rng: &mut TestRng, states: usize, actions: usize) -> Pomdp {
    let mut b = PomdpBuilder::new();
    for s in 0..states {
        b.add_state(format!("s{s}"));
        b.add_observation(format!("o{s}"));
        b.set_observation(s as u32, s as u32);
    }
    for a in 0..actions {
        b.add_action(format!("a{a}"));
    }
    b.set_initial(0);
    for s in 0..states as u32 {
        for a in 0..actions as u32 {
            b.set_transition(s, a, Dist::uniform(nonempty_subset(rng, states)));
        }
    }
    b.build().unwrap()
}

/// Random belief-observation POMDP: for every observation `o` and action `a`, each
/// observation touched by the successors of `γ⁻¹(o)` is covered completely. State 0 is
/// initial with its own observation.
pub fn random_belief_obs_pomdp(rng: &mut TestRng, obs: usize, actions: usize, max_per_obs: usize) -> Pomdp {
    let mut b = PomdpBuilder::new();
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let mut n = 0u32;
    for o in 0..obs {
        b.add_observation(format!("o{o}"));
        let size = if o == 0 { 1 } else { rng.gen_range(1..=max_per_obs) };
        let mut block = Vec::new();
        for _ in 0..size {
            b.add_state(format!("s{n}"));
            b.set_observation(n, o as u32);
            block.push(n);
            n += 1;
        }
        blocks.push(block);
    }
    for a in 0..actions {
        b.add_action(format!("a{a}"));
    }
    b.set_initial(0);
    for block in &blocks {
        for a in 0..actions as u32 {
            let targets = nonempty_subset(rng, obs);
            let mut supp: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); block.len()];
            for &t in &targets {
                for &s2 in &blocks[t as usize] {
                    supp[rng.gen_range(0..block.len())].insert(s2);
                }
                // A few extra edges keep supports from being partitions only.
                for sup in supp.iter_mut() {
                    if rng.gen_bool(0.3) {
                        let b2 = &blocks[t as usize];
                        sup.insert(b2[rng.gen_range(0..b2.len())]);
                    }
                }
            }
            for (i, sup) in supp.into_iter().enumerate() {
                let sup = if sup.is_empty() {
                    // Any state of a touched observation keeps the cover property.
                    let b2 = &blocks[targets[0] as usize];
                    BTreeSet::from([b2[rng.gen_range(0..b2.len())]])
                } else {
                    sup
                };
                b.set_transition(block[i], a, Dist::uniform(sup));
            }
        }
    }
    b.build().unwrap()
}

/// Random priorities in `0..=max`.
pub fn random_priorities(rng: &mut TestRng, n: usize, max: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..=max)).collect()
}

/// Random finite-memory strategy with uniform weights; updates are defined for every
/// observation and every selected action. Assumes every action is available everywhere.
pub fn random_strategy(rng: &mut TestRng, pomdp: &Pomdp, memories: usize) -> FiniteMemoryStrategy {
    let names = (0..memories).map(|m| format!("m{m}")).collect();
    let mut s = FiniteMemoryStrategy::new(names, pomdp.num_observations(), pomdp.num_actions(), 0);
    for m in 0..memories as u32 {
        let acts = nonempty_subset(rng, pomdp.num_actions());
        s.set_select(m, Dist::uniform(acts.iter().copied()));
        for o in 0..pomdp.num_observations() as u32 {
            for &a in &acts {
                s.set_update(m, o, a, Dist::uniform(nonempty_subset(rng, memories)));
            }
        }
    }
    s
}

/// Reflexive-transitive closure by Warshall's algorithm: `r[i][j]` iff a path of length
/// at least zero leads from `i` to `j`.
pub fn closure(adj: &[Vec<u32>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        for &j in &adj[i] {
            r[i][j as usize] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Bottom strongly connected components via the closure matrix: `i` is in a bottom
/// component iff everything it reaches reaches it back.
pub fn closure_bottom_sccs(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let r = closure(adj);
    let n = adj.len();
    let mut out: Vec<Vec<u32>> = Vec::new();
    for i in 0..n {
        if (0..n).all(|j| !r[i][j] || r[j][i]) {
            let class: Vec<u32> = (0..n as u32).filter(|&j| r[i][j as usize]).collect();
            if !out.contains(&class) {
                out.push(class);
            }
        }
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Colors of recurrent classes reachable from each node, by the closure matrix.
pub fn closure_set_rec(adj: &[Vec<u32>], col: &[u32]) -> Vec<BTreeSet<u64>> {
    let r = closure(adj);
    let bottoms = closure_bottom_sccs(adj);
    (0..adj.len())
        .map(|i| {
            bottoms
                .iter()
                .filter(|c| r[i][c[0] as usize])
                .map(|c| c.iter().fold(0u64, |acc, &v| acc | 1 << col[v as usize]))
                .collect()
        })
        .collect()
}
