//! Projected strategies: recurrence preservation, winner preservation, the memory bound,
//! and the invariants of the projection graph and of the projected strategy's chain.

mod common;

use common::suites::{projection_suite, reference_rec};
use common::*;
use pomdp_finmem::chain::compute_rec_functions;
use pomdp_finmem::strategy::{build_projection_graph, project_strategy};
use proptest::prelude::*;

#[test]
fn random_projections_preserve_recurrence_and_winners() {
    let (pres, inv) = projection_suite(0x5eed_0001, 150);
    pres.assert_ok();
    inv.assert_ok();
}

#[test]
fn ex1_alternating_projection_keeps_the_belief_u() {
    let (p, obj) = fixture("EX1.pomdp");
    let sigma = strategy_fixture("sigma_alt.strat", &p);
    let col = obj.colors(p.num_states()).unwrap();
    let pg = build_projection_graph(&p, &sigma, &col).unwrap();
    let u: Vec<u32> = ["X", "X'", "Y", "Y'", "Z", "Z'"].iter().map(|s| state(&p, s)).collect();
    let mut u = u;
    u.sort_unstable();
    assert_eq!(pomdp_finmem::sets::members(&pg.vertices[pg.initial as usize].belief), vec![p.initial()]);
    for (i, v) in pg.vertices.iter().enumerate() {
        if i as u32 != pg.initial {
            assert_eq!(pomdp_finmem::sets::members(&v.belief), u);
        }
    }
    let proj = project_strategy(&p, &sigma, &col).unwrap();
    let before = reference_rec(&p, &sigma, &col);
    let after = reference_rec(&p, &proj, &col);
    assert_eq!(before[0][p.initial() as usize].1, after[0][p.initial() as usize].1);
}

#[test]
fn memoryless_projection_has_one_label() {
    let (p, obj) = fixture("EX2.pomdp");
    let sigma = pomdp_finmem::strategy::FiniteMemoryStrategy::memoryless(&p, &[0]);
    let col = obj.colors(p.num_states()).unwrap();
    let pg = build_projection_graph(&p, &sigma, &col).unwrap();
    let first = &pg.vertices[0];
    assert!(pg.vertices.iter().all(|v| v.brec == first.brec && v.srec == first.srec));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The library's recurrence functions equal the closure computation on every pair.
    #[test]
    fn rec_functions_match_closure(seed in any::<u64>(), n in 1usize..5, m in 1usize..4) {
        let mut r = rng(seed);
        let p = random_pomdp(&mut r, n, 2, 2);
        let sigma = random_strategy(&mut r, &p, m);
        let col = random_priorities(&mut r, n, 3);
        let rec = compute_rec_functions(&p, &sigma, &col);
        let want = reference_rec(&p, &sigma, &col);
        for mm in 0..m as u32 {
            for s in 0..n as u32 {
                prop_assert_eq!(rec.bool_rec(mm, s), want[mm as usize][s as usize].0);
                prop_assert_eq!(rec.set_rec(mm, s), &want[mm as usize][s as usize].1[..]);
            }
        }
    }
}
