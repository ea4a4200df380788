//! Objective reductions: sizes, copy structure, observation opacity and per-strategy
//! verdict transfer.

mod common;

use common::suites::reduction_suite;
use common::*;
use pomdp_finmem::chain;
use pomdp_finmem::model::{Objective, WinningMode};
use pomdp_finmem::reduce::{self, lift_strategy, Origin};

#[test]
fn random_reductions_transfer_verdicts() {
    let rep = reduction_suite(0x5eed_0002, 40);
    rep.assert_ok();
    assert!(rep.checks > rep.instances * 4);
}

#[test]
fn all_zero_priorities_keep_one_copy() {
    let (p, _) = fixture("EX1.pomdp");
    let pr = vec![0; p.num_states()];
    let red = reduce::positive_parity_to_buchi(&p, &pr).unwrap();
    assert_eq!(red.d, 0);
    assert_eq!(red.pomdp.num_states(), p.num_states() + 2);
    let sigma = strategy_fixture("sigma_a.strat", &p);
    assert!(chain::verify(&red.pomdp, &lift_strategy(&red, &sigma), &red.objective, WinningMode::AlmostSure).unwrap());
}

#[test]
fn absorbing_b_fixture_passes_through_positive_reduction() {
    let (p, obj) = fixture("EX2-absorbing-B.pomdp");
    let (base, pr) = pomdp_finmem::model::objective_as_parity(&p, &obj).unwrap();
    let red = reduce::positive_parity_to_buchi(&base, &pr).unwrap();
    assert_eq!(red.d, 1);
    let sigma = strategy_fixture("sigma_alt_ex2.strat", &p);
    let lifted = lift_strategy(&red, &sigma);
    assert!(chain::verify(&p, &sigma, &obj, WinningMode::Positive).unwrap());
    assert!(chain::verify(&red.pomdp, &lifted, &red.objective, WinningMode::Positive).unwrap());
}

#[test]
fn priority_two_states_never_leave_the_top_copy() {
    let (p, _) = fixture("EX1.pomdp");
    let pr = vec![2; p.num_states()];
    let red = reduce::parity_to_three(&p, &pr).unwrap();
    assert_eq!(red.d, 1);
    for s in 0..red.pomdp.num_states() as u32 {
        let Origin::Copy { copy: 1, .. } = red.origin[s as usize] else { continue };
        for a in 0..red.pomdp.num_actions() as u32 {
            for &t in red.pomdp.support(s, a) {
                assert!(matches!(red.origin[t as usize], Origin::Copy { copy: 1, .. }));
            }
        }
    }
}

#[test]
fn no_priority_zero_leaves_the_fresh_state_unreachable() {
    let (p, _) = fixture("EX1.pomdp");
    let pr: Vec<u32> = (0..p.num_states() as u32).map(|s| 1 + s % 2).collect();
    let red = reduce::three_to_cobuchi(&p, &pr).unwrap();
    assert_eq!(red.pomdp.num_states(), p.num_states() + 1);
    let fresh = red.origin.iter().position(|o| *o == Origin::FreshRecurrent).unwrap() as u32;
    for s in 0..red.pomdp.num_states() as u32 {
        if s == fresh {
            continue;
        }
        for a in 0..red.pomdp.num_actions() as u32 {
            assert!(!red.pomdp.support(s, a).contains(&fresh));
            let orig: Vec<u32> = p.support(s, a).to_vec();
            assert_eq!(red.pomdp.support(s, a), &orig[..]);
        }
    }
}

#[test]
fn ex1_alternating_strategy_survives_the_almost_sure_reduction() {
    let (p, obj) = fixture("EX1.pomdp");
    let (base, pr) = pomdp_finmem::model::objective_as_parity(&p, &obj).unwrap();
    let red = reduce::almost_parity_to_cobuchi(&base, &pr).unwrap();
    for (name, wins) in [("sigma_alt.strat", true), ("sigma_a.strat", false), ("sigma_ab.strat", false)] {
        let sigma = strategy_fixture(name, &p);
        let lifted = lift_strategy(&red, &sigma);
        assert_eq!(chain::verify(&red.pomdp, &lifted, &red.objective, WinningMode::AlmostSure).unwrap(), wins, "{name}");
        assert_eq!(chain::verify(&base, &sigma, &Objective::Parity(pr.clone()), WinningMode::AlmostSure).unwrap(), wins);
    }
}
