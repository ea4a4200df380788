//! POMDPs, objectives and belief updates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::sets::{self, ColorSet, StateSet};

pub type Weight = BigRational;

/// A finite distribution given by its support and exact weights, sorted by target.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dist(Vec<(u32, Weight)>);

impl Dist {
    /// Builds a distribution from `(target, weight)` pairs. Targets must be distinct.
    /// Weights are not checked here; see [`Pomdp::validate`].
    pub fn new(mut entries: Vec<(u32, Weight)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid(format!("duplicate target {} in distribution", w[0].0)));
        }
        Ok(Dist(entries))
    }

    pub fn point(target: u32) -> Self {
        Dist(vec![(target, Weight::one())])
    }

    /// Uniform distribution over a non-empty support.
    pub fn uniform(support: impl IntoIterator<Item = u32>) -> Self {
        let mut targets: Vec<u32> = support.into_iter().collect();
        targets.sort_unstable();
        targets.dedup();
        assert!(!targets.is_empty(), "uniform distribution over an empty support");
        let w = Weight::new(1.into(), (targets.len() as i64).into());
        Dist(targets.into_iter().map(|t| (t, w.clone())).collect())
    }

    pub fn entries(&self) -> &[(u32, Weight)] {
        &self.0
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().filter(|e| e.1.is_positive()).map(|e| e.0)
    }

    pub fn total(&self) -> Weight {
        self.0.iter().fold(Weight::zero(), |acc, e| acc + &e.1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn scaled(&self, factor: &Weight) -> impl Iterator<Item = (u32, Weight)> + '_ {
        let factor = factor.clone();
        self.0.iter().map(move |(t, w)| (*t, w * &factor))
    }

    /// Sums weights of repeated targets.
    pub(crate) fn from_accumulated(entries: impl IntoIterator<Item = (u32, Weight)>) -> Self {
        let mut acc: Vec<(u32, Weight)> = Vec::new();
        for (t, w) in entries {
            match acc.iter_mut().find(|e| e.0 == t) {
                Some(e) => e.1 += w,
                None => acc.push((t, w)),
            }
        }
        acc.sort_by_key(|e| e.0);
        Dist(acc)
    }
}

#[derive(Clone, Debug)]
pub struct Pomdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    obs_names: Vec<String>,
    obs_of: Vec<u32>,
    trans: Vec<Option<Dist>>,
    initial: u32,
    available: Vec<Vec<u32>>,
    obs_states: Vec<Vec<u32>>,
    supp: Vec<Vec<u32>>,
}

/// Incremental construction of a [`Pomdp`]. `build` performs structural checks only;
/// the semantic invariants are reported by [`Pomdp::validate`].
#[derive(Clone, Debug, Default)]
pub struct PomdpBuilder {
    state_names: Vec<String>,
    action_names: Vec<String>,
    obs_names: Vec<String>,
    obs_of: Vec<Option<u32>>,
    trans: HashMap<(u32, u32), Dist>,
    initial: Option<u32>,
    available: HashMap<u32, Vec<u32>>,
}

impl PomdpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> u32 {
        self.state_names.push(name.into());
        self.obs_of.push(None);
        (self.state_names.len() - 1) as u32
    }

    pub fn add_action(&mut self, name: impl Into<String>) -> u32 {
        self.action_names.push(name.into());
        (self.action_names.len() - 1) as u32
    }

    pub fn add_observation(&mut self, name: impl Into<String>) -> u32 {
        self.obs_names.push(name.into());
        (self.obs_names.len() - 1) as u32
    }

    pub fn set_observation(&mut self, state: u32, obs: u32) -> &mut Self {
        self.obs_of[state as usize] = Some(obs);
        self
    }

    pub fn set_initial(&mut self, state: u32) -> &mut Self {
        self.initial = Some(state);
        self
    }

    pub fn set_transition(&mut self, state: u32, action: u32, dist: Dist) -> &mut Self {
        self.trans.insert((state, action), dist);
        self
    }

    pub fn set_available(&mut self, obs: u32, mut actions: Vec<u32>) -> &mut Self {
        actions.sort_unstable();
        actions.dedup();
        self.available.insert(obs, actions);
        self
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn build(self) -> Result<Pomdp> {
        let n = self.state_names.len();
        let na = self.action_names.len();
        let no = self.obs_names.len();
        if n == 0 {
            return Err(Error::Invalid("no states".into()));
        }
        if na == 0 {
            return Err(Error::Invalid("no actions".into()));
        }
        for (kind, names) in [
            ("state", &self.state_names),
            ("action", &self.action_names),
            ("observation", &self.obs_names),
        ] {
            let mut seen = HashMap::new();
            for (i, name) in names.iter().enumerate() {
                if name.is_empty() {
                    return Err(Error::Invalid(format!("empty {kind} name")));
                }
                if seen.insert(name.as_str(), i).is_some() {
                    return Err(Error::Invalid(format!("duplicate {kind} name `{name}`")));
                }
            }
        }
        let mut obs_of = Vec::with_capacity(n);
        for (s, o) in self.obs_of.iter().enumerate() {
            match o {
                Some(o) if (*o as usize) < no => obs_of.push(*o),
                Some(o) => return Err(Error::Invalid(format!("observation index {o} out of range"))),
                None => {
                    return Err(Error::Invalid(format!(
                        "state `{}` has no observation",
                        self.state_names[s]
                    )))
                }
            }
        }
        let initial = self.initial.ok_or_else(|| Error::Invalid("no initial state".into()))?;
        if initial as usize >= n {
            return Err(Error::Invalid("initial state out of range".into()));
        }
        let mut available = vec![(0..na as u32).collect::<Vec<_>>(); no];
        for (o, acts) in self.available {
            if o as usize >= no || acts.iter().any(|&a| a as usize >= na) {
                return Err(Error::Invalid("available-action entry out of range".into()));
            }
            available[o as usize] = acts;
        }
        let mut trans = vec![None; n * na];
        for ((s, a), d) in self.trans {
            if s as usize >= n || a as usize >= na {
                return Err(Error::Invalid("transition index out of range".into()));
            }
            if d.entries().iter().any(|e| e.0 as usize >= n) {
                return Err(Error::Invalid("transition target out of range".into()));
            }
            trans[s as usize * na + a as usize] = Some(d);
        }
        let mut obs_states = vec![Vec::new(); no];
        for (s, &o) in obs_of.iter().enumerate() {
            obs_states[o as usize].push(s as u32);
        }
        let supp = trans
            .iter()
            .map(|d| d.as_ref().map(|d| d.support().collect()).unwrap_or_default())
            .collect();
        Ok(Pomdp {
            state_names: self.state_names,
            action_names: self.action_names,
            obs_names: self.obs_names,
            obs_of,
            trans,
            initial,
            available,
            obs_states,
            supp,
        })
    }
}

/// One broken model invariant. Indices refer to the model the report was made for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    WeightSum { state: u32, action: u32, sum: Weight },
    NonPositiveWeight { state: u32, action: u32, target: u32 },
    MissingTransition { state: u32, action: u32 },
    UnavailableTransition { state: u32, action: u32 },
    SharedInitialObservation { observation: u32, count: usize },
    EmptyObservation { observation: u32 },
    NoAvailableActions { observation: u32 },
}

impl Violation {
    /// A shared initial observation does not affect any algorithm here (beliefs always
    /// start from `{s0}`), and the almost-sure copy construction produces one by design.
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::SharedInitialObservation { .. })
    }

    pub fn describe(&self, m: &Pomdp) -> String {
        match self {
            Violation::WeightSum { state, action, sum } => format!(
                "weights of ({}, {}) sum to {}, not 1",
                m.state_name(*state),
                m.action_name(*action),
                sum
            ),
            Violation::NonPositiveWeight { state, action, target } => format!(
                "non-positive weight on ({}, {}) -> {}",
                m.state_name(*state),
                m.action_name(*action),
                m.state_name(*target)
            ),
            Violation::MissingTransition { state, action } => format!(
                "no transition for ({}, {}) although {} is available",
                m.state_name(*state),
                m.action_name(*action),
                m.action_name(*action)
            ),
            Violation::UnavailableTransition { state, action } => format!(
                "transition given for ({}, {}) but {} is not available in observation {}",
                m.state_name(*state),
                m.action_name(*action),
                m.action_name(*action),
                m.obs_name(m.obs(*state))
            ),
            Violation::SharedInitialObservation { observation, count } => format!(
                "initial observation {} is shared by {} states",
                m.obs_name(*observation),
                count
            ),
            Violation::EmptyObservation { observation } => {
                format!("observation {} has no states", m.obs_name(*observation))
            }
            Violation::NoAvailableActions { observation } => {
                format!("observation {} has no available actions", m.obs_name(*observation))
            }
        }
    }
}

impl Pomdp {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn num_observations(&self) -> usize {
        self.obs_names.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn obs(&self, s: u32) -> u32 {
        self.obs_of[s as usize]
    }

    pub fn obs_states(&self, o: u32) -> &[u32] {
        &self.obs_states[o as usize]
    }

    pub fn available(&self, o: u32) -> &[u32] {
        &self.available[o as usize]
    }

    pub fn is_available(&self, o: u32, a: u32) -> bool {
        self.available[o as usize].binary_search(&a).is_ok()
    }

    pub fn transition(&self, s: u32, a: u32) -> Option<&Dist> {
        self.trans[s as usize * self.num_actions() + a as usize].as_ref()
    }

    /// `Supp(δ(s, a))`, empty when the transition is undefined.
    pub fn support(&self, s: u32, a: u32) -> &[u32] {
        &self.supp[s as usize * self.num_actions() + a as usize]
    }

    pub fn state_name(&self, s: u32) -> &str {
        &self.state_names[s as usize]
    }

    pub fn action_name(&self, a: u32) -> &str {
        &self.action_names[a as usize]
    }

    pub fn obs_name(&self, o: u32) -> &str {
        &self.obs_names[o as usize]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn obs_names(&self) -> &[String] {
        &self.obs_names
    }

    pub fn state_id(&self, name: &str) -> Option<u32> {
        self.state_names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn action_id(&self, name: &str) -> Option<u32> {
        self.action_names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn obs_id(&self, name: &str) -> Option<u32> {
        self.obs_names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::with_capacity(self.num_states())
    }

    /// Whether every observation is a single state.
    pub fn is_perfect_observation(&self) -> bool {
        self.obs_states.iter().all(|s| s.len() == 1)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for o in 0..self.num_observations() as u32 {
            if self.obs_states(o).is_empty() {
                out.push(Violation::EmptyObservation { observation: o });
            }
            if self.available(o).is_empty() {
                out.push(Violation::NoAvailableActions { observation: o });
            }
        }
        let o0 = self.obs(self.initial);
        if self.obs_states(o0).len() > 1 {
            out.push(Violation::SharedInitialObservation {
                observation: o0,
                count: self.obs_states(o0).len(),
            });
        }
        for s in 0..self.num_states() as u32 {
            let o = self.obs(s);
            for a in 0..self.num_actions() as u32 {
                let avail = self.is_available(o, a);
                match (self.transition(s, a), avail) {
                    (None, true) => out.push(Violation::MissingTransition { state: s, action: a }),
                    (Some(_), false) => {
                        out.push(Violation::UnavailableTransition { state: s, action: a })
                    }
                    (Some(d), true) => {
                        for (t, w) in d.entries() {
                            if !w.is_positive() {
                                out.push(Violation::NonPositiveWeight {
                                    state: s,
                                    action: a,
                                    target: *t,
                                });
                            }
                        }
                        let sum = d.total();
                        if !sum.is_one() {
                            out.push(Violation::WeightSum { state: s, action: a, sum });
                        }
                    }
                    (None, false) => {}
                }
            }
        }
        out
    }

    /// `⋃_{s∈Y} Supp(δ(s, a))`.
    pub fn post(&self, y: &StateSet, a: u32) -> StateSet {
        let mut out = self.empty_set();
        for s in y.ones() {
            for &t in self.support(s as u32, a) {
                out.insert(t as usize);
            }
        }
        out
    }

    /// The belief after playing `a` in belief `y` and observing `o`. May be empty when `o`
    /// cannot be observed next.
    pub fn belief_update(&self, y: &StateSet, a: u32, o: u32) -> Result<StateSet> {
        let mut it = y.ones();
        let first = it
            .next()
            .ok_or_else(|| Error::MalformedBelief("empty belief".into()))?;
        let oy = self.obs(first as u32);
        if let Some(s) = it.find(|&s| self.obs(s as u32) != oy) {
            return Err(Error::MalformedBelief(format!(
                "states {} and {} have different observations",
                self.state_name(first as u32),
                self.state_name(s as u32)
            )));
        }
        if !self.is_available(oy, a) {
            return Err(Error::MalformedBelief(format!(
                "action {} is not available in observation {}",
                self.action_name(a),
                self.obs_name(oy)
            )));
        }
        if o as usize >= self.num_observations() {
            return Err(Error::MalformedBelief(format!("unknown observation index {o}")));
        }
        Ok(self.restrict_to_obs(self.post(y, a), o))
    }

    pub(crate) fn restrict_to_obs(&self, mut set: StateSet, o: u32) -> StateSet {
        let mut keep = self.empty_set();
        for &s in self.obs_states(o) {
            keep.insert(s as usize);
        }
        set.intersect_with(&keep);
        set
    }

    /// A copy in which every state of `set` loops on itself under every available action.
    pub fn with_absorbing(&self, set: &StateSet) -> Pomdp {
        let mut m = self.clone();
        let na = self.num_actions();
        for s in set.ones() {
            let o = self.obs(s as u32);
            for &a in self.available(o) {
                m.trans[s * na + a as usize] = Some(Dist::point(s as u32));
                m.supp[s * na + a as usize] = vec![s as u32];
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    Reach(StateSet),
    /// Stay inside the given set forever.
    Safe(StateSet),
    Buchi(StateSet),
    CoBuchi(StateSet),
    Parity(Vec<u32>),
    /// `colors[s]` is the color of state `s`; `accepting` lists the accepted color sets.
    Muller {
        colors: Vec<u32>,
        accepting: Vec<ColorSet>,
    },
}

impl Objective {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Objective::Reach(_) => "reach",
            Objective::Safe(_) => "safe",
            Objective::Buchi(_) => "buchi",
            Objective::CoBuchi(_) => "cobuchi",
            Objective::Parity(_) => "parity",
            Objective::Muller { .. } => "muller",
        }
    }

    pub fn check(&self, num_states: usize) -> Result<()> {
        let ok = match self {
            Objective::Reach(t) | Objective::Safe(t) | Objective::Buchi(t) | Objective::CoBuchi(t) => {
                t.len() == num_states
            }
            Objective::Parity(p) => p.len() == num_states,
            Objective::Muller { colors, .. } => {
                colors.len() == num_states && colors.iter().all(|&c| c < 64)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "{} objective does not match the {} states of the model",
                self.kind_name(),
                num_states
            )))
        }
    }

    /// Whether a recurrent class whose first projection is `states` satisfies the
    /// objective. Reach and Safe need absorbing targets and must be converted first.
    pub fn class_wins(&self, states: &[u32]) -> Result<bool> {
        Ok(match self {
            Objective::Buchi(t) => states.iter().any(|&s| t.contains(s as usize)),
            Objective::CoBuchi(t) => states.iter().all(|&s| t.contains(s as usize)),
            Objective::Parity(p) => {
                let min = states.iter().map(|&s| p[s as usize]).min();
                matches!(min, Some(m) if m % 2 == 0)
            }
            Objective::Muller { colors, accepting } => {
                let mask = states
                    .iter()
                    .fold(0, |acc, &s| acc | sets::color_bit(colors[s as usize]));
                accepting.contains(&mask)
            }
            Objective::Reach(_) | Objective::Safe(_) => {
                return Err(Error::Unsupported(
                    "reach/safe objectives are evaluated after conversion to parity".into(),
                ))
            }
        })
    }

    /// The color of each state, as used by the recurrence functions.
    pub fn colors(&self, num_states: usize) -> Result<Vec<u32>> {
        match self {
            Objective::Parity(p) => Ok(p.clone()),
            Objective::Muller { colors, .. } => Ok(colors.clone()),
            Objective::Buchi(t) => Ok((0..num_states).map(|s| u32::from(!t.contains(s))).collect()),
            Objective::CoBuchi(t) => {
                Ok((0..num_states).map(|s| if t.contains(s) { 2 } else { 1 }).collect())
            }
            Objective::Reach(_) | Objective::Safe(_) => Err(Error::Unsupported(
                "reach/safe objectives are evaluated after conversion to parity".into(),
            )),
        }
    }
}

/// Rewrites the objective as a parity objective. Reach and Safe return a modified copy of
/// the model in which the target (respectively the unsafe) states are absorbing.
pub fn objective_as_parity(pomdp: &Pomdp, obj: &Objective) -> Result<(Pomdp, Vec<u32>)> {
    obj.check(pomdp.num_states())?;
    let n = pomdp.num_states();
    match obj {
        Objective::Parity(p) => Ok((pomdp.clone(), p.clone())),
        Objective::Buchi(_) | Objective::CoBuchi(_) => Ok((pomdp.clone(), obj.colors(n)?)),
        Objective::Reach(t) => {
            let p = (0..n).map(|s| u32::from(!t.contains(s))).collect();
            Ok((pomdp.with_absorbing(t), p))
        }
        Objective::Safe(t) => {
            let mut bad = t.clone();
            bad.toggle_range(..);
            let p = (0..n).map(|s| if t.contains(s) { 2 } else { 1 }).collect();
            Ok((pomdp.with_absorbing(&bad), p))
        }
        Objective::Muller { .. } => Err(Error::Unsupported(
            "Muller objectives have no parity conversion here".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WinningMode {
    AlmostSure,
    Positive,
}

impl fmt::Display for WinningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WinningMode::AlmostSure => "almost",
            WinningMode::Positive => "positive",
        })
    }
}

impl FromStr for WinningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "almost" | "almost-sure" => Ok(WinningMode::AlmostSure),
            "positive" => Ok(WinningMode::Positive),
            _ => Err(Error::Invalid(format!("unknown winning mode `{s}`"))),
        }
    }
}
