//! Objective reductions: positive parity to positive Büchi, almost-sure parity to three
//! priorities, and three priorities to almost-sure coBüchi.
//!
//! All three preserve the memory of strategies. A strategy on the input model is carried
//! over by [`lift_strategy`] and brought back by [`restrict_strategy`].

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::Result;
use crate::model::{Dist, Objective, Pomdp, PomdpBuilder, Weight};
use crate::sets;
use crate::strategy::FiniteMemoryStrategy;

/// Where a state of a reduced model comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// `(state, copy)` of the input model.
    Copy { state: u32, copy: u32 },
    /// The fresh initial state of the positive reduction.
    FreshInitial,
    /// The absorbing losing state of the positive reduction.
    FreshSink,
    /// The absorbing priority-2 state added by the coBüchi reduction.
    FreshRecurrent,
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub pomdp: Pomdp,
    pub objective: Objective,
    /// The priorities of the produced objective, one per state.
    pub priorities: Vec<u32>,
    /// `origin[s]` for each state `s` of `pomdp`.
    pub origin: Vec<Origin>,
    /// Number of copies minus one.
    pub d: u32,
}

impl ReductionOutput {
    /// Text table mapping each reduced state to its origin, one line per state.
    pub fn origin_table(&self, input: &Pomdp) -> String {
        let mut out = String::new();
        for (s, o) in self.origin.iter().enumerate() {
            let what = match *o {
                Origin::Copy { state, copy } => format!("{} {}", input.state_name(state), copy),
                Origin::FreshInitial => "fresh-initial".into(),
                Origin::FreshSink => "fresh-sink".into(),
                Origin::FreshRecurrent => "fresh-recurrent".into(),
            };
            out.push_str(&format!("{} {}\n", self.pomdp.state_name(s as u32), what));
        }
        out
    }
}

fn half() -> Weight {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

/// Appends primes to `base` until it is not in `taken`.
fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Starts a builder with the actions and observations of `pomdp`.
fn skeleton(pomdp: &Pomdp) -> PomdpBuilder {
    let mut b = PomdpBuilder::new();
    for a in pomdp.action_names() {
        b.add_action(a.clone());
    }
    for o in pomdp.obs_names() {
        b.add_observation(o.clone());
    }
    for o in 0..pomdp.num_observations() as u32 {
        b.set_available(o, pomdp.available(o).to_vec());
    }
    b
}

fn copy_name(pomdp: &Pomdp, s: u32, i: u32) -> String {
    format!("{}@{}", pomdp.state_name(s), i)
}

/// `d` such that all priorities lie in `{0, …, 2d}`.
pub fn positive_copies(p: &[u32]) -> u32 {
    p.iter().copied().max().unwrap_or(0).div_ceil(2)
}

/// `d` such that all priorities lie in `{0, …, 2d+1}`.
pub fn almost_copies(p: &[u32]) -> u32 {
    p.iter().copied().max().unwrap_or(0) / 2
}

/// Positive parity to positive Büchi. States are `(s, i)` at index `i·|S| + s`,
/// followed by the fresh initial state and the absorbing losing state.
pub fn positive_parity_to_buchi(pomdp: &Pomdp, p: &[u32]) -> Result<ReductionOutput> {
    Objective::Parity(p.to_vec()).check(pomdp.num_states())?;
    let n = pomdp.num_states() as u32;
    let d = positive_copies(p);
    let copies = d + 1;
    let mut b = skeleton(pomdp);
    let mut origin = Vec::new();
    let mut taken: HashSet<String> = HashSet::new();
    for i in 0..copies {
        for s in 0..n {
            let name = copy_name(pomdp, s, i);
            taken.insert(name.clone());
            let id = b.add_state(name);
            b.set_observation(id, pomdp.obs(s));
            origin.push(Origin::Copy { state: s, copy: i });
        }
    }
    let init_name = fresh_name("init", &taken);
    taken.insert(init_name.clone());
    let init = b.add_state(init_name);
    let sink = b.add_state(fresh_name("sink", &taken));
    origin.push(Origin::FreshInitial);
    origin.push(Origin::FreshSink);
    let obs_taken: HashSet<String> = pomdp.obs_names().iter().cloned().collect();
    let sink_obs = b.add_observation(fresh_name("sink", &obs_taken));
    b.set_observation(init, pomdp.obs(pomdp.initial()));
    b.set_observation(sink, sink_obs);
    b.set_available(sink_obs, (0..pomdp.num_actions() as u32).collect());
    b.set_initial(init);

    let h = half();
    for i in 0..copies {
        for s in 0..n {
            for a in 0..pomdp.num_actions() as u32 {
                let Some(dist) = pomdp.transition(s, a) else { continue };
                let moved = dist.entries().iter().map(|(t, w)| (i * n + t, w.clone()));
                let new = if p[s as usize] >= 2 * i {
                    Dist::from_accumulated(moved)
                } else {
                    Dist::from_accumulated(
                        moved.map(|(t, w)| (t, w * &h)).chain([(sink, h.clone())]),
                    )
                };
                b.set_transition(i * n + s, a, new);
            }
        }
    }
    let share = BigRational::new(BigInt::from(1), BigInt::from(copies));
    for &a in pomdp.available(pomdp.obs(pomdp.initial())) {
        let Some(dist) = pomdp.transition(pomdp.initial(), a) else { continue };
        let entries = (0..copies).flat_map(|i| dist.scaled(&share).map(move |(t, w)| (i * n + t, w)));
        b.set_transition(init, a, Dist::from_accumulated(entries));
    }
    for a in 0..pomdp.num_actions() as u32 {
        b.set_transition(sink, a, Dist::point(sink));
    }
    let pomdp2 = b.build()?;
    let mut pr = vec![1u32; pomdp2.num_states()];
    for i in 0..copies {
        for s in 0..n {
            if p[s as usize] == 2 * i {
                pr[(i * n + s) as usize] = 0;
            }
        }
    }
    let target = sets::set_of(pr.len(), (0..pr.len() as u32).filter(|&s| pr[s as usize] == 0));
    Ok(ReductionOutput { pomdp: pomdp2, objective: Objective::Buchi(target), priorities: pr, origin, d })
}

/// Almost-sure parity to parity with priorities `{0, 1, 2}`. States are `(s, i)` at index
/// `i·|S| + s`; the play starts in `(s0, d)`.
pub fn parity_to_three(pomdp: &Pomdp, p: &[u32]) -> Result<ReductionOutput> {
    Objective::Parity(p.to_vec()).check(pomdp.num_states())?;
    let n = pomdp.num_states() as u32;
    let d = almost_copies(p);
    let copies = d + 1;
    let mut b = skeleton(pomdp);
    let mut origin = Vec::new();
    for i in 0..copies {
        for s in 0..n {
            let id = b.add_state(copy_name(pomdp, s, i));
            b.set_observation(id, pomdp.obs(s));
            origin.push(Origin::Copy { state: s, copy: i });
        }
    }
    b.set_initial(d * n + pomdp.initial());
    let h = half();
    for i in 0..copies {
        for s in 0..n {
            for a in 0..pomdp.num_actions() as u32 {
                let Some(dist) = pomdp.transition(s, a) else { continue };
                let new = if p[s as usize] >= 2 * i {
                    Dist::from_accumulated(dist.entries().iter().map(|(t, w)| (i * n + t, w.clone())))
                } else {
                    let stay = dist.scaled(&h).map(|(t, w)| (i * n + t, w));
                    let down = dist.scaled(&h).map(|(t, w)| ((i - 1) * n + t, w));
                    Dist::from_accumulated(stay.chain(down))
                };
                b.set_transition(i * n + s, a, new);
            }
        }
    }
    let pomdp2 = b.build()?;
    let mut pr = Vec::with_capacity(pomdp2.num_states());
    for i in 0..copies {
        pr.extend(p.iter().map(|&q| if q == 2 * i { 0 } else if q == 2 * i + 1 { 1 } else { 2 }));
    }
    Ok(ReductionOutput { pomdp: pomdp2, objective: Objective::Parity(pr.clone()), priorities: pr, origin, d })
}

/// Parity with priorities `{0, 1, 2}` to coBüchi. The input states keep their indices and
/// one absorbing state with a fresh observation is appended.
pub fn three_to_cobuchi(pomdp: &Pomdp, p: &[u32]) -> Result<ReductionOutput> {
    Objective::Parity(p.to_vec()).check(pomdp.num_states())?;
    if let Some(&bad) = p.iter().find(|&&x| x > 2) {
        return Err(crate::Error::Contract(format!("priority {bad} outside {{0,1,2}}")));
    }
    let n = pomdp.num_states() as u32;
    let mut b = skeleton(pomdp);
    let taken: HashSet<String> = pomdp.state_names().iter().cloned().collect();
    for s in 0..n {
        let id = b.add_state(pomdp.state_name(s).to_string());
        b.set_observation(id, pomdp.obs(s));
    }
    let rec = b.add_state(fresh_name("rec", &taken));
    let obs_taken: HashSet<String> = pomdp.obs_names().iter().cloned().collect();
    let rec_obs = b.add_observation(fresh_name("rec", &obs_taken));
    b.set_observation(rec, rec_obs);
    b.set_available(rec_obs, (0..pomdp.num_actions() as u32).collect());
    b.set_initial(pomdp.initial());
    let h = half();
    for s in 0..n {
        for a in 0..pomdp.num_actions() as u32 {
            let Some(dist) = pomdp.transition(s, a) else { continue };
            let new = if p[s as usize] == 0 {
                Dist::from_accumulated(dist.scaled(&h).chain([(rec, h.clone())]))
            } else {
                dist.clone()
            };
            b.set_transition(s, a, new);
        }
    }
    for a in 0..pomdp.num_actions() as u32 {
        b.set_transition(rec, a, Dist::point(rec));
    }
    let pomdp2 = b.build()?;
    let mut pr: Vec<u32> = p.iter().map(|&x| if x == 0 { 2 } else { x }).collect();
    pr.push(2);
    let target = sets::set_of(pr.len(), (0..pr.len() as u32).filter(|&s| pr[s as usize] == 2));
    let mut origin: Vec<Origin> = (0..n).map(|s| Origin::Copy { state: s, copy: 0 }).collect();
    origin.push(Origin::FreshRecurrent);
    Ok(ReductionOutput { pomdp: pomdp2, objective: Objective::CoBuchi(target), priorities: pr, origin, d: 0 })
}

/// [`parity_to_three`] followed by [`three_to_cobuchi`], with origins composed.
pub fn almost_parity_to_cobuchi(pomdp: &Pomdp, p: &[u32]) -> Result<ReductionOutput> {
    let three = parity_to_three(pomdp, p)?;
    let mut out = three_to_cobuchi(&three.pomdp, &three.priorities)?;
    out.origin = out
        .origin
        .iter()
        .map(|o| match *o {
            Origin::Copy { state, .. } => three.origin[state as usize],
            other => other,
        })
        .collect();
    out.d = three.d;
    Ok(out)
}

/// The same strategy on a reduced model: fresh observations keep the memory unchanged.
pub fn lift_strategy(reduced: &ReductionOutput, sigma: &FiniteMemoryStrategy) -> FiniteMemoryStrategy {
    sigma.extend_observations(reduced.pomdp.num_observations())
}

/// A strategy on a reduced model viewed on the input model, whose observations are a prefix.
pub fn restrict_strategy(input: &Pomdp, sigma: &FiniteMemoryStrategy) -> FiniteMemoryStrategy {
    sigma.restrict_observations(input.num_observations())
}
