//! Observation-level set operators, the safety and Büchi fixpoints on belief-observation
//! models, the two-priority decision pipelines, and the parity decision procedure.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Range;
use std::time::Instant;

use fixedbitset::FixedBitSet;

use crate::beliefobs::{
    ActionKind, BeliefObsGame, BuildOptions, ObsKind, RedKind, INIT_OBS, INIT_STATE, SINK_STATE,
};
use crate::chain;
use crate::error::{Error, Result};
use crate::model::{objective_as_parity, Dist, Objective, Pomdp, WinningMode};
use crate::reduce;
use crate::sets::StateSet;
use crate::strategy::FiniteMemoryStrategy;

/// Set of observations, as a bit set over observation ids.
pub type ObsSet = FixedBitSet;

/// A finite model whose observations own contiguous blocks of states and whose actions
/// are numbered per observation. Only supports of transitions are visible.
pub trait QualModel {
    fn num_states(&self) -> usize;
    fn num_obs(&self) -> usize;
    fn obs_of(&self, s: u32) -> u32;
    fn obs_states(&self, o: u32) -> Range<u32>;
    fn num_actions(&self, o: u32) -> usize;
    /// Appends the support of action index `a` at state `s` to `out`.
    fn successors(&self, s: u32, a: u32, out: &mut Vec<u32>);
    fn initial(&self) -> u32;
}

/// A [`Pomdp`] relabeled so that each observation owns a contiguous block of states.
/// Action index `i` at observation `o` is the `i`-th available action of `o`.
#[derive(Clone, Debug)]
pub struct ExplicitModel {
    to_model: Vec<u32>,
    to_pomdp: Vec<u32>,
    obs_of: Vec<u32>,
    obs_start: Vec<u32>,
    actions: Vec<Vec<u32>>,
    succ: Vec<Vec<Vec<u32>>>,
    initial: u32,
}

impl ExplicitModel {
    pub fn from_pomdp(pomdp: &Pomdp) -> Self {
        let n = pomdp.num_states();
        let mut to_model = vec![0; n];
        let mut to_pomdp = Vec::with_capacity(n);
        let mut obs_start = Vec::new();
        for o in 0..pomdp.num_observations() as u32 {
            obs_start.push(to_pomdp.len() as u32);
            for &s in pomdp.obs_states(o) {
                to_model[s as usize] = to_pomdp.len() as u32;
                to_pomdp.push(s);
            }
        }
        obs_start.push(n as u32);
        let obs_of = to_pomdp.iter().map(|&s| pomdp.obs(s)).collect();
        let actions: Vec<Vec<u32>> = (0..pomdp.num_observations() as u32)
            .map(|o| pomdp.available(o).to_vec())
            .collect();
        let succ = to_pomdp
            .iter()
            .map(|&s| {
                actions[pomdp.obs(s) as usize]
                    .iter()
                    .map(|&a| pomdp.support(s, a).iter().map(|&t| to_model[t as usize]).collect())
                    .collect()
            })
            .collect();
        ExplicitModel { initial: to_model[pomdp.initial() as usize], to_model, to_pomdp, obs_of, obs_start, actions, succ }
    }

    pub fn model_state(&self, pomdp_state: u32) -> u32 {
        self.to_model[pomdp_state as usize]
    }

    pub fn pomdp_state(&self, s: u32) -> u32 {
        self.to_pomdp[s as usize]
    }

    pub fn pomdp_action(&self, o: u32, idx: u32) -> u32 {
        self.actions[o as usize][idx as usize]
    }
}

impl QualModel for ExplicitModel {
    fn num_states(&self) -> usize {
        self.obs_of.len()
    }

    fn num_obs(&self) -> usize {
        self.actions.len()
    }

    fn obs_of(&self, s: u32) -> u32 {
        self.obs_of[s as usize]
    }

    fn obs_states(&self, o: u32) -> Range<u32> {
        self.obs_start[o as usize]..self.obs_start[o as usize + 1]
    }

    fn num_actions(&self, o: u32) -> usize {
        self.actions[o as usize].len()
    }

    fn successors(&self, s: u32, a: u32, out: &mut Vec<u32>) {
        out.extend_from_slice(&self.succ[s as usize][a as usize]);
    }

    fn initial(&self) -> u32 {
        self.initial
    }
}

/// Restrictions applied on top of a [`QualModel`].
#[derive(Clone, Debug, Default)]
pub struct ArenaOptions {
    /// Only these states count; observations with no relevant state are ignored.
    pub relevant: Option<StateSet>,
    /// These states loop on themselves under every action.
    pub absorbing: Option<StateSet>,
    /// Per observation, the enabled action indices. Missing means all.
    pub enabled: Option<Vec<Vec<u32>>>,
}

/// A model together with [`ArenaOptions`] and a reverse edge index.
pub struct Arena<'a, Q: QualModel> {
    model: &'a Q,
    relevant: Option<StateSet>,
    absorbing: Option<StateSet>,
    act_off: Vec<u32>,
    enabled: FixedBitSet,
    /// Observations with at least one relevant state.
    domain: ObsSet,
    rev_off: Vec<u32>,
    /// `(predecessor, flat action)` per target state.
    rev: Vec<(u32, u32)>,
}

/// Result of a fixpoint computation.
#[derive(Clone, Debug)]
pub struct Fixpoint {
    pub obs: ObsSet,
    /// Per observation in `obs`, the action indices of the uniform witness strategy.
    pub strategy: Vec<Vec<u32>>,
    pub iterations: usize,
}

/// Incrementally maintained `Allow(·, Z)` for a shrinking observation set `Z`.
struct AllowTracker {
    bad: FixedBitSet,
    good: Vec<u32>,
}

impl<'a, Q: QualModel> Arena<'a, Q> {
    pub fn new(model: &'a Q, opts: ArenaOptions) -> Self {
        let no = model.num_obs();
        let mut act_off = Vec::with_capacity(no + 1);
        let mut total = 0u32;
        for o in 0..no as u32 {
            act_off.push(total);
            total += model.num_actions(o) as u32;
        }
        act_off.push(total);
        let mut enabled = FixedBitSet::with_capacity(total as usize);
        match &opts.enabled {
            Some(lists) => {
                for (o, list) in lists.iter().enumerate() {
                    for &a in list {
                        enabled.insert((act_off[o] + a) as usize);
                    }
                }
            }
            None => enabled.insert_range(..),
        }
        let mut arena = Arena {
            model,
            relevant: opts.relevant,
            absorbing: opts.absorbing,
            act_off,
            enabled,
            domain: ObsSet::with_capacity(no),
            rev_off: Vec::new(),
            rev: Vec::new(),
        };
        for o in 0..no as u32 {
            if arena.states(o).next().is_some() {
                arena.domain.insert(o as usize);
            }
        }
        arena.build_reverse();
        arena
    }

    fn build_reverse(&mut self) {
        let n = self.model.num_states();
        let mut count = vec![0u32; n + 1];
        let mut buf = Vec::new();
        let mut edges: Vec<(u32, u32, u32)> = Vec::new();
        for o in self.domain.ones() {
            let o = o as u32;
            for a in self.actions(o).collect::<Vec<_>>() {
                let fa = self.act_off[o as usize] + a;
                for s in self.states(o).collect::<Vec<_>>() {
                    buf.clear();
                    self.succ(s, a, &mut buf);
                    buf.sort_unstable();
                    buf.dedup();
                    for &t in &buf {
                        count[t as usize] += 1;
                        edges.push((t, s, fa));
                    }
                }
            }
        }
        let mut off = vec![0u32; n + 1];
        for i in 0..n {
            off[i + 1] = off[i] + count[i];
        }
        let mut fill = off.clone();
        let mut rev = vec![(0, 0); edges.len()];
        for (t, s, fa) in edges {
            rev[fill[t as usize] as usize] = (s, fa);
            fill[t as usize] += 1;
        }
        self.rev_off = off;
        self.rev = rev;
    }

    pub fn model(&self) -> &Q {
        self.model
    }

    pub fn is_relevant(&self, s: u32) -> bool {
        self.relevant.as_ref().is_none_or(|r| r.contains(s as usize))
    }

    /// Relevant states of an observation.
    pub fn states(&self, o: u32) -> impl Iterator<Item = u32> + '_ {
        self.model.obs_states(o).filter(move |&s| self.is_relevant(s))
    }

    /// Enabled action indices of an observation.
    pub fn actions(&self, o: u32) -> impl Iterator<Item = u32> + '_ {
        let base = self.act_off[o as usize];
        (0..self.model.num_actions(o) as u32).filter(move |&a| self.enabled.contains((base + a) as usize))
    }

    pub fn succ(&self, s: u32, a: u32, out: &mut Vec<u32>) {
        if self.absorbing.as_ref().is_some_and(|t| t.contains(s as usize)) {
            out.push(s);
        } else {
            self.model.successors(s, a, out);
        }
    }

    /// Observations with at least one relevant state.
    pub fn domain(&self) -> &ObsSet {
        &self.domain
    }

    pub fn empty_obs(&self) -> ObsSet {
        ObsSet::with_capacity(self.model.num_obs())
    }

    pub fn empty_states(&self) -> StateSet {
        StateSet::with_capacity(self.model.num_states())
    }

    /// Relevant states whose observation is in `obs`.
    pub fn states_of(&self, obs: &ObsSet) -> StateSet {
        let mut out = self.empty_states();
        for o in obs.ones() {
            for s in self.states(o as u32) {
                out.insert(s as usize);
            }
        }
        out
    }

    /// `Allow(o, O)`: enabled actions whose successors from every relevant state of `o`
    /// have their observation in `O`.
    pub fn allow(&self, o: u32, obs: &ObsSet) -> Vec<u32> {
        let mut buf = Vec::new();
        self.actions(o)
            .filter(|&a| {
                self.states(o).all(|s| {
                    buf.clear();
                    self.succ(s, a, &mut buf);
                    buf.iter().all(|&t| obs.contains(self.model.obs_of(t) as usize))
                })
            })
            .collect()
    }

    /// `Pre(O)`: observations of `O` with a non-empty `Allow(o, O)`.
    pub fn pre(&self, obs: &ObsSet) -> ObsSet {
        let mut out = self.empty_obs();
        for o in obs.ones() {
            if !self.allow(o as u32, obs).is_empty() {
                out.insert(o);
            }
        }
        out
    }

    /// `Apre(Y, X)`: relevant states with observation in `Y` having an action of
    /// `Allow(o, Y)` that reaches `X` with positive probability. Requires `X ⊆ γ⁻¹(Y)`.
    pub fn apre(&self, y: &ObsSet, x: &StateSet) -> Result<StateSet> {
        if x.ones().any(|s| !y.contains(self.model.obs_of(s as u32) as usize)) {
            return Err(Error::Contract("apre: X is not contained in the states of Y".into()));
        }
        let mut out = self.empty_states();
        let mut buf = Vec::new();
        for o in y.ones() {
            let allowed = self.allow(o as u32, y);
            for s in self.states(o as u32) {
                let hit = allowed.iter().any(|&a| {
                    buf.clear();
                    self.succ(s, a, &mut buf);
                    buf.iter().any(|&t| x.contains(t as usize))
                });
                if hit {
                    out.insert(s as usize);
                }
            }
        }
        Ok(out)
    }

    /// `ObsCover(U)`: observations of the domain whose relevant states all lie in `U`.
    pub fn obs_cover(&self, u: &StateSet) -> ObsSet {
        let mut out = self.empty_obs();
        for o in self.domain.ones() {
            if self.states(o as u32).all(|s| u.contains(s as usize)) {
                out.insert(o);
            }
        }
        out
    }

    fn tracker(&self, inset: &ObsSet) -> AllowTracker {
        let mut bad = FixedBitSet::with_capacity(self.enabled.len());
        let mut good = vec![0u32; self.model.num_obs()];
        let mut buf = Vec::new();
        for o in 0..self.model.num_obs() as u32 {
            for a in self.actions(o) {
                let fa = (self.act_off[o as usize] + a) as usize;
                let ok = inset.contains(o as usize)
                    && self.states(o).all(|s| {
                        buf.clear();
                        self.succ(s, a, &mut buf);
                        buf.iter().all(|&t| inset.contains(self.model.obs_of(t) as usize))
                    });
                if ok {
                    good[o as usize] += 1;
                } else {
                    bad.insert(fa);
                }
            }
        }
        AllowTracker { bad, good }
    }

    /// Marks every action leading into `o` as disallowed; returns observations whose
    /// allowed set became empty.
    fn remove_obs(&self, tr: &mut AllowTracker, o: u32, emptied: &mut Vec<u32>) {
        for s in self.states(o) {
            let (lo, hi) = (self.rev_off[s as usize], self.rev_off[s as usize + 1]);
            for &(p, fa) in &self.rev[lo as usize..hi as usize] {
                if !tr.bad.contains(fa as usize) {
                    tr.bad.insert(fa as usize);
                    let op = self.model.obs_of(p) as usize;
                    tr.good[op] -= 1;
                    if tr.good[op] == 0 {
                        emptied.push(op as u32);
                    }
                }
            }
        }
    }

    fn allowed_now(&self, tr: &AllowTracker, o: u32) -> Vec<u32> {
        let base = self.act_off[o as usize];
        self.actions(o).filter(|&a| !tr.bad.contains((base + a) as usize)).collect()
    }

    fn strategy_for(&self, tr: &AllowTracker, obs: &ObsSet) -> Vec<Vec<u32>> {
        (0..self.model.num_obs() as u32)
            .map(|o| if obs.contains(o as usize) { self.allowed_now(tr, o) } else { Vec::new() })
            .collect()
    }

    /// `Almost(Safe(F))`: the greatest `Y ⊆ ObsCover(F)` with `Pre(Y) = Y`, and the
    /// strategy playing `Allow(o, Y)` uniformly.
    pub fn almost_safe(&self, f: &StateSet) -> Fixpoint {
        let mut y = self.obs_cover(f);
        let mut tr = self.tracker(&y);
        let mut layer: Vec<u32> = y.ones().filter(|&o| tr.good[o] == 0).map(|o| o as u32).collect();
        let mut iterations = 1;
        while !layer.is_empty() {
            iterations += 1;
            let mut next = Vec::new();
            for o in layer {
                if y.contains(o as usize) {
                    y.set(o as usize, false);
                    self.remove_obs(&mut tr, o, &mut next);
                }
            }
            next.retain(|&o| y.contains(o as usize));
            layer = next;
        }
        Fixpoint { strategy: self.strategy_for(&tr, &y), obs: y, iterations }
    }

    /// `Almost(Büchi(T))`: `νZ. ObsCover(μX. (T ∩ γ⁻¹(Z) ∩ γ⁻¹(Pre(Z))) ∪ Apre(Z, X))`, and
    /// the strategy playing `Allow(o, Z)` uniformly.
    pub fn almost_buchi(&self, t: &StateSet) -> Fixpoint {
        let mut z = self.domain.clone();
        let mut tr = self.tracker(&z);
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mut x = self.empty_states();
            let mut queue = VecDeque::new();
            for o in z.ones() {
                if tr.good[o] == 0 {
                    continue;
                }
                for s in self.states(o as u32) {
                    if t.contains(s as usize) {
                        x.insert(s as usize);
                        queue.push_back(s);
                    }
                }
            }
            while let Some(s) = queue.pop_front() {
                let (lo, hi) = (self.rev_off[s as usize], self.rev_off[s as usize + 1]);
                for &(p, fa) in &self.rev[lo as usize..hi as usize] {
                    if x.contains(p as usize)
                        || tr.bad.contains(fa as usize)
                        || !z.contains(self.model.obs_of(p) as usize)
                    {
                        continue;
                    }
                    x.insert(p as usize);
                    queue.push_back(p);
                }
            }
            let mut cover = self.obs_cover(&x);
            cover.intersect_with(&z);
            if cover == z {
                break;
            }
            let mut dropped = z.clone();
            dropped.difference_with(&cover);
            let mut sink = Vec::new();
            for o in dropped.ones() {
                z.set(o, false);
                self.remove_obs(&mut tr, o as u32, &mut sink);
            }
        }
        Fixpoint { strategy: self.strategy_for(&tr, &z), obs: z, iterations }
    }
}

/// `Almost(Reach(T))`: `T` becomes absorbing, then `Almost(Büchi(T))`.
pub fn almost_reach<Q: QualModel>(model: &Q, mut opts: ArenaOptions, t: &StateSet) -> Fixpoint {
    let mut abs = opts.absorbing.take().unwrap_or_else(|| StateSet::with_capacity(model.num_states()));
    abs.union_with(t);
    opts.absorbing = Some(abs);
    Arena::new(model, opts).almost_buchi(t)
}

/// Stage at which the initial observation was lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Safety,
    Reachability,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Safety => "safety",
            Stage::Reachability => "reachability",
        })
    }
}

/// Which pipeline produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// The two-priority solver ran directly on the input.
    Direct,
    /// The input went through the objective reductions.
    Reduced,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub states: usize,
    pub observations: usize,
    pub memories: usize,
    pub safe_obs: usize,
    pub win_obs: usize,
    pub iterations: usize,
    pub stage: Option<Stage>,
    pub route: Option<Route>,
    pub wall_ms: u128,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: bool,
    pub mode: WinningMode,
    /// On a yes, a strategy on the input model that passed chain verification.
    pub witness: Option<FiniteMemoryStrategy>,
    pub diagnostics: Diagnostics,
}

impl Decision {
    /// Single-line `key=value` summary.
    pub fn summary(&self) -> String {
        let d = &self.diagnostics;
        format!(
            "verdict={} mode={} states-constructed={} observations={} memories={} fixpoint-iterations={} stage={} witness-memories={} wall-time-ms={}",
            if self.verdict { "yes" } else { "no" },
            self.mode,
            d.states,
            d.observations,
            d.memories,
            d.iterations,
            d.stage.map_or("none".to_string(), |s| s.to_string()),
            self.witness.as_ref().map_or(0, |w| w.memory_names().len()),
            d.wall_ms,
        )
    }
}

/// Everything computed by a two-priority pipeline, for inspection by tests.
pub struct PipelineRun {
    pub game: BeliefObsGame,
    pub safe: Fixpoint,
    pub win: Option<Fixpoint>,
    /// Per game observation, the action indices played by the game strategy.
    pub game_strategy: Vec<Vec<u32>>,
    pub verdict: bool,
    pub stage: Option<Stage>,
}

/// Builds the belief-observation game and runs the fixpoints for one of the two
/// two-priority problems, without back-translation.
pub fn run_pipeline(pomdp: &Pomdp, pr: &[u32], kind: RedKind, opts: BuildOptions) -> Result<PipelineRun> {
    let game = BeliefObsGame::build(pomdp, pr, kind, opts)?;
    let ns = game.num_states();
    let full = Arena::new(&game, ArenaOptions::default());
    let mut not_sink = full.empty_states();
    not_sink.insert_range(..);
    not_sink.set(SINK_STATE as usize, false);
    let safe = full.almost_safe(&not_sink);
    drop(full);
    let mut game_strategy = vec![Vec::new(); game.num_obs()];
    if !safe.obs.contains(INIT_OBS as usize) {
        return Ok(PipelineRun { game, safe, win: None, game_strategy, verdict: false, stage: Some(Stage::Safety) });
    }
    let safe_states = {
        let mut s = StateSet::with_capacity(ns);
        for o in safe.obs.ones() {
            for x in game.obs_states(o as u32) {
                s.insert(x as usize);
            }
        }
        s
    };
    let wpr = {
        let mut w = StateSet::with_capacity(ns);
        for s in safe_states.ones() {
            if game.is_winning_pseudo_recurrent(s as u32) {
                w.insert(s);
            }
        }
        w
    };
    let (win, verdict) = match kind {
        RedKind::AlmostCoBuchi => {
            let opts = ArenaOptions {
                relevant: Some(safe_states.clone()),
                absorbing: None,
                enabled: Some(safe.strategy.clone()),
            };
            let win = almost_reach(&game, opts, &wpr);
            let verdict = win.obs.contains(INIT_OBS as usize);
            (win, verdict)
        }
        RedKind::PositiveBuchi => {
            let relevant = forward_closure(&game, &wpr, &safe.strategy);
            let mut t = StateSet::with_capacity(ns);
            for s in relevant.ones() {
                if game.priority(s as u32) == 0 {
                    t.insert(s);
                }
            }
            let opts = ArenaOptions { relevant: Some(relevant.clone()), absorbing: None, enabled: Some(safe.strategy.clone()) };
            let win = Arena::new(&game, opts).almost_buchi(&t);
            let mut strat = safe.strategy.clone();
            for o in win.obs.ones() {
                strat[o] = win.strategy[o].clone();
            }
            let reach = forward_closure(&game, &crate::sets::singleton(ns, INIT_STATE), &strat);
            let verdict = reach
                .ones()
                .any(|s| relevant.contains(s) && win.obs.contains(game.obs_of(s as u32) as usize));
            (win, verdict)
        }
    };
    if verdict {
        for o in safe.obs.ones() {
            game_strategy[o] = if win.obs.contains(o) { win.strategy[o].clone() } else { safe.strategy[o].clone() };
        }
    }
    let stage = (!verdict).then_some(Stage::Reachability);
    Ok(PipelineRun { game, safe, win: Some(win), game_strategy, verdict, stage })
}

/// States reachable from `start` when observation `o` plays the action indices `strat[o]`.
pub fn forward_closure<Q: QualModel>(model: &Q, start: &StateSet, strat: &[Vec<u32>]) -> StateSet {
    let mut seen = start.clone();
    let mut stack: Vec<u32> = start.ones().map(|s| s as u32).collect();
    let mut buf = Vec::new();
    while let Some(s) = stack.pop() {
        for &a in &strat[model.obs_of(s) as usize] {
            buf.clear();
            model.successors(s, a, &mut buf);
            for &t in &buf {
                if !seen.contains(t as usize) {
                    seen.insert(t as usize);
                    stack.push(t);
                }
            }
        }
    }
    seen
}

/// Turns a memoryless strategy of the game into a finite-memory strategy of the input
/// POMDP whose memories are the reachable memory elements.
pub fn back_translate(game: &BeliefObsGame, strat: &[Vec<u32>]) -> Result<FiniteMemoryStrategy> {
    let pomdp = game.input();
    let reach = forward_closure(game, &crate::sets::singleton(game.num_states(), INIT_STATE), strat);
    let mut reached_obs: Vec<u32> = reach.ones().map(|s| game.obs_of(s as u32)).collect();
    reached_obs.sort_unstable();
    reached_obs.dedup();
    let mems: Vec<u32> = reached_obs
        .iter()
        .filter_map(|&o| match game.obs_kind(o) {
            ObsKind::Act(m) => Some(m),
            _ => None,
        })
        .collect();
    let mut index = vec![u32::MAX; game.num_memories()];
    for (i, &m) in mems.iter().enumerate() {
        index[m as usize] = i as u32;
    }
    let init_choices: Vec<u32> = strat[INIT_OBS as usize]
        .iter()
        .map(|&i| match game.action_kind(INIT_OBS, i) {
            ActionKind::Memory(m) => m,
            _ => unreachable!(),
        })
        .collect();
    if init_choices.is_empty() {
        return Err(Error::Strategy("game strategy plays nothing at the initial observation".into()));
    }
    let aux = init_choices.len() > 1;
    let mut names: Vec<String> = (0..mems.len()).map(|i| format!("m{i}")).collect();
    if aux {
        names.push("m-init".into());
    }
    let initial = if aux { mems.len() as u32 } else { index[init_choices[0] as usize] };
    let no = pomdp.num_observations();
    let na = pomdp.num_actions();
    let mut out = FiniteMemoryStrategy::new(names, no, na, initial);

    let plays = |m: u32| -> Vec<u32> {
        let o = game.memory_obs(m);
        strat[o as usize]
            .iter()
            .map(|&i| match game.action_kind(o, i) {
                ActionKind::Play(a) => a,
                _ => unreachable!(),
            })
            .collect()
    };
    let updates = |m: u32, a: u32, o: u32| -> Option<Vec<u32>> {
        let q = game.sel_for(m, a, o)?;
        let qo = game.sel_obs_id(q);
        let next: Vec<u32> = strat[qo as usize]
            .iter()
            .filter_map(|&i| match game.action_kind(qo, i) {
                ActionKind::Memory(m2) => Some(index[m2 as usize]),
                _ => None,
            })
            .collect();
        (!next.is_empty()).then_some(next)
    };
    for &m in &mems {
        let acts = plays(m);
        if acts.is_empty() {
            return Err(Error::Strategy(format!("game strategy plays nothing at memory {}", game.memory_name(m))));
        }
        let im = index[m as usize];
        out.set_select(im, Dist::uniform(acts.iter().copied()));
        for &a in &acts {
            for o in 0..no as u32 {
                if let Some(next) = updates(m, a, o) {
                    out.set_update(im, o, a, Dist::uniform(next));
                }
            }
        }
    }
    if aux {
        let mut acts: Vec<u32> = init_choices.iter().flat_map(|&m| plays(m)).collect();
        acts.sort_unstable();
        acts.dedup();
        out.set_select(initial, Dist::uniform(acts.iter().copied()));
        for &a in &acts {
            for o in 0..no as u32 {
                let mut next: Vec<u32> = init_choices
                    .iter()
                    .filter(|&&m| plays(m).contains(&a))
                    .filter_map(|&m| updates(m, a, o))
                    .flatten()
                    .collect();
                next.sort_unstable();
                next.dedup();
                if !next.is_empty() {
                    out.set_update(initial, o, a, Dist::uniform(next));
                }
            }
        }
    } else {
        out.set_elements(mems.iter().map(|&m| game.element(m)).collect());
    }
    Ok(out)
}

fn decide_two(pomdp: &Pomdp, pr: &[u32], kind: RedKind, opts: BuildOptions) -> Result<(bool, Option<FiniteMemoryStrategy>, Diagnostics)> {
    let run = run_pipeline(pomdp, pr, kind, opts)?;
    let mut diag = Diagnostics {
        states: run.game.num_states(),
        observations: run.game.num_obs(),
        memories: run.game.num_memories(),
        safe_obs: run.safe.obs.count_ones(..),
        win_obs: run.win.as_ref().map_or(0, |w| w.obs.count_ones(..)),
        iterations: run.safe.iterations + run.win.as_ref().map_or(0, |w| w.iterations),
        stage: run.stage,
        ..Default::default()
    };
    if !run.verdict {
        return Ok((false, None, diag));
    }
    let witness = back_translate(&run.game, &run.game_strategy)?;
    diag.stage = None;
    Ok((true, Some(witness), diag))
}

/// Almost-sure coBüchi with priorities `{1, 2}`.
pub fn solve_almost_cobuchi_fm(pomdp: &Pomdp, pr: &[u32], opts: BuildOptions) -> Result<Decision> {
    finish(pomdp, pr, WinningMode::AlmostSure, Route::Direct, Instant::now(), |p, q| {
        decide_two(p, q, RedKind::AlmostCoBuchi, opts)
    })
}

/// Positive Büchi with priorities `{0, 1}`.
pub fn solve_positive_buchi_fm(pomdp: &Pomdp, pr: &[u32], opts: BuildOptions) -> Result<Decision> {
    finish(pomdp, pr, WinningMode::Positive, Route::Direct, Instant::now(), |p, q| {
        decide_two(p, q, RedKind::PositiveBuchi, opts)
    })
}

/// Runs `inner` and checks any witness on `(pomdp, Parity(pr))`.
fn finish(
    pomdp: &Pomdp,
    pr: &[u32],
    mode: WinningMode,
    route: Route,
    start: Instant,
    inner: impl FnOnce(&Pomdp, &[u32]) -> Result<(bool, Option<FiniteMemoryStrategy>, Diagnostics)>,
) -> Result<Decision> {
    let (verdict, witness, mut diag) = inner(pomdp, pr)?;
    if let Some(w) = &witness {
        let obj = Objective::Parity(pr.to_vec());
        if !chain::verify(pomdp, w, &obj, mode)? {
            return Err(Error::Unverified(format!("{mode} parity witness rejected by the chain evaluator")));
        }
    }
    diag.route = Some(route);
    diag.wall_ms = start.elapsed().as_millis();
    Ok(Decision { verdict, mode, witness, diagnostics: diag })
}

/// Decides whether a finite-memory strategy wins `Parity(p)` in the given mode.
///
/// Two-priority inputs go straight to the belief-observation pipelines; others pass through
/// the objective reductions and the witness is carried back with the same memory.
pub fn solve_parity_fm(pomdp: &Pomdp, p: &[u32], mode: WinningMode, opts: BuildOptions) -> Result<Decision> {
    Objective::Parity(p.to_vec()).check(pomdp.num_states())?;
    let start = Instant::now();
    let within = |lo: u32, hi: u32| p.iter().all(|&c| c == lo || c == hi);
    match mode {
        WinningMode::AlmostSure if within(1, 2) => finish(pomdp, p, mode, Route::Direct, start, |g, q| {
            decide_two(g, q, RedKind::AlmostCoBuchi, opts)
        }),
        WinningMode::Positive if within(0, 1) => finish(pomdp, p, mode, Route::Direct, start, |g, q| {
            decide_two(g, q, RedKind::PositiveBuchi, opts)
        }),
        WinningMode::AlmostSure => finish(pomdp, p, mode, Route::Reduced, start, |g, q| {
            let red = reduce::almost_parity_to_cobuchi(g, q)?;
            let (v, w, d) = decide_two(&red.pomdp, &red.priorities, RedKind::AlmostCoBuchi, opts)?;
            Ok((v, w.map(|w| reduce::restrict_strategy(g, &w)), d))
        }),
        WinningMode::Positive => finish(pomdp, p, mode, Route::Reduced, start, |g, q| {
            let red = reduce::positive_parity_to_buchi(g, q)?;
            let (v, w, d) = decide_two(&red.pomdp, &red.priorities, RedKind::PositiveBuchi, opts)?;
            Ok((v, w.map(|w| reduce::restrict_strategy(g, &w)), d))
        }),
    }
}

/// [`solve_parity_fm`] for any objective with a parity form. Reach and Safe objectives are
/// decided on the model with absorbing targets, and the witness refers to that model.
pub fn solve(pomdp: &Pomdp, obj: &Objective, mode: WinningMode, opts: BuildOptions) -> Result<Decision> {
    let (model, p) = objective_as_parity(pomdp, obj)?;
    solve_parity_fm(&model, &p, mode, opts)
}
