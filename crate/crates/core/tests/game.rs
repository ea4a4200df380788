//! Structure of the belief-observation game: beliefs, routing to the sink, allowed actions
//! and memory actions, rechecked from the input model.

mod common;

use common::*;
use pomdp_finmem::beliefobs::{
    is_belief_observation, is_belief_observation_model, BeliefObsGame, BuildOptions, MemoryDomain, ObsKind, RedKind,
    SINK_STATE,
};
use pomdp_finmem::model::Pomdp;
use pomdp_finmem::sets;
use pomdp_finmem::solve::QualModel;
use proptest::prelude::*;

/// Bit of the two-color set `z` in the packed `L` masks.
fn mask_bit(z: u64, lo: u32, hi: u32) -> u8 {
    let mut k = 0;
    if z >> lo & 1 == 1 {
        k |= 1;
    }
    if z >> hi & 1 == 1 {
        k |= 2;
    }
    1 << k
}

fn check_game(p: &Pomdp, pr: &[u32], kind: RedKind) -> Result<(), String> {
    let (lo, hi) = match kind {
        RedKind::AlmostCoBuchi => (1, 2),
        RedKind::PositiveBuchi => (0, 1),
    };
    let g = BeliefObsGame::build(p, pr, kind, BuildOptions::default()).map_err(|e| e.to_string())?;
    if !is_belief_observation_model(&g) {
        return Err("game is not belief-observation".into());
    }
    for &m in g.initial_memories_ids() {
        if sets::members(&g.memory(m).y) != vec![p.initial()] {
            return Err(format!("initial memory {m} has another belief"));
        }
    }
    for m in 0..g.num_memories() as u32 {
        let y = sets::members(&g.memory(m).y);
        if y.is_empty() || y.iter().any(|&s| p.obs(s) != p.obs(y[0])) {
            return Err(format!("memory {m} has a mixed belief {y:?}"));
        }
    }
    let mut buf = Vec::new();
    for o in 0..g.num_obs() as u32 {
        match g.obs_kind(o) {
            ObsKind::Act(m) => {
                let mem = g.memory(m);
                let elem = g.element(m);
                let ob = p.obs(sets::members(&mem.y)[0]);
                for (idx, &a) in p.available(ob).iter().enumerate() {
                    // Independent allowance: pseudo-recurrent states keep their colors.
                    let allowed = mem.y.ones().all(|s| {
                        let z = &elem.srec[s];
                        if !mem.b.contains(s) || z.len() != 1 || z[0] >> pr[s] & 1 == 0 {
                            return true;
                        }
                        p.support(s as u32, a).iter().all(|&t| z[0] >> pr[t as usize] & 1 == 1)
                    });
                    if allowed != g.is_allowed_play(m, idx as u32) {
                        return Err(format!("memory {m} action {a}: allowance differs"));
                    }
                    for s in g.obs_states(o) {
                        buf.clear();
                        g.successors(s, idx as u32, &mut buf);
                        let to_sink = buf.iter().filter(|&&t| t == SINK_STATE).count();
                        if allowed && to_sink > 0 || !allowed && (to_sink != buf.len() || buf.is_empty()) {
                            return Err(format!("memory {m} action {a}: routing is not total"));
                        }
                    }
                }
            }
            ObsKind::Sel(q) => {
                let sel = g.sel(q);
                let mem = g.memory(sel.mem);
                let o2 = p.obs(sets::members(&sel.y)[0]);
                let want = p.belief_update(&mem.y, sel.action, o2).map_err(|e| e.to_string())?;
                if want != sel.y {
                    return Err(format!("selection {q}: belief does not follow the update"));
                }
                for &n in &sel.next {
                    let next = g.memory(n);
                    if next.y != sel.y {
                        return Err(format!("selection {q}: memory {n} has another belief"));
                    }
                    for s in mem.y.ones() {
                        for &t in p.support(s as u32, sel.action) {
                            if !next.y.contains(t as usize) {
                                continue;
                            }
                            if mem.b.contains(s) && !next.b.contains(t as usize) {
                                return Err(format!("selection {q}: memory {n} drops recurrence"));
                            }
                            if next.l[t as usize] & !mem.l[s] != 0 {
                                return Err(format!("selection {q}: memory {n} grows L"));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    if kind == RedKind::AlmostCoBuchi {
        for &m in g.initial_memories_ids() {
            let l = &g.memory(m).l;
            if l[p.initial() as usize] != mask_bit(1 << hi, lo, hi) {
                return Err(format!("initial memory {m} is not restricted to {{{{{hi}}}}}"));
            }
        }
    }
    let gp = g.to_pomdp().map_err(|e| e.to_string())?;
    if gp.num_states() < 200 && !is_belief_observation(&gp, usize::MAX) {
        return Err("explicit game is not belief-observation".into());
    }
    Ok(())
}

#[test]
fn fixture_games_are_well_formed() {
    for name in ["EX1.pomdp", "EX2.pomdp"] {
        let (p, obj) = fixture(name);
        let pr = obj.colors(p.num_states()).unwrap();
        check_game(&p, &pr, RedKind::AlmostCoBuchi).unwrap();
    }
    let (p, obj) = fixture("EX2-absorbing-B.pomdp");
    check_game(&p, &obj.colors(p.num_states()).unwrap(), RedKind::PositiveBuchi).unwrap();
}

#[test]
fn verbatim_domain_builds_on_tiny_models() {
    let mut r = rng(11);
    let p = random_pomdp(&mut r, 2, 2, 2);
    let g = BeliefObsGame::build(&p, &[1, 2], RedKind::AlmostCoBuchi, BuildOptions { domain: MemoryDomain::Verbatim, budget: 1_000_000 }).unwrap();
    assert_eq!(g.domain(), MemoryDomain::Verbatim);
    assert!(is_belief_observation_model(&g));
}

#[test]
fn budget_overflow_names_the_count() {
    let (p, obj) = fixture("EX1.pomdp");
    let pr = obj.colors(p.num_states()).unwrap();
    let err = BeliefObsGame::build(&p, &pr, RedKind::AlmostCoBuchi, BuildOptions { budget: 20, ..Default::default() }).unwrap_err();
    assert!(matches!(err, pomdp_finmem::Error::Budget { budget: 20, .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_games_are_well_formed(seed in any::<u64>(), n in 1usize..4, na in 1usize..3) {
        let mut r = rng(seed);
        let no = 1 + (seed % n as u64) as usize;
        let p = random_pomdp(&mut r, n, na, no);
        let co: Vec<u32> = random_priorities(&mut r, n, 1).into_iter().map(|q| q + 1).collect();
        let bu = random_priorities(&mut r, n, 1);
        prop_assert_eq!(check_game(&p, &co, RedKind::AlmostCoBuchi), Ok(()));
        prop_assert_eq!(check_game(&p, &bu, RedKind::PositiveBuchi), Ok(()));
    }
}
