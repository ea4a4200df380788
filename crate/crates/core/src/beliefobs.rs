//! The belief-observation game built from a two-priority POMDP, its allowed-action
//! predicates, and a checker for the belief-observation property.
//!
//! States of the game are `Init`, `Sink`, action-selection states `(s, m)` and
//! memory-selection states `(s', (Y', m, a))`, where `m = (Y, B, L)` is a memory element.
//! The game is built lazily by forward closure from `Init`. Each observation owns a
//! contiguous block of state ids, ordered by the rank of the underlying state in the belief.
//!
//! `L(s)` is stored as a 4-bit mask over the subsets of the two priorities `{lo, hi}`:
//! bit `k` stands for the color set containing `lo` iff `k & 1` and `hi` iff `k & 2`.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{Dist, Pomdp, PomdpBuilder};
use crate::sets::{self, ColorSet, StateSet};
use crate::solve::QualModel;
use crate::strategy::MemoryElement;

/// Which of the two constructions to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RedKind {
    /// Priorities `{1, 2}`, almost-sure coBüchi.
    AlmostCoBuchi,
    /// Priorities `{0, 1}`, positive Büchi.
    PositiveBuchi,
}

impl RedKind {
    fn colors(self) -> (u32, u32) {
        match self {
            RedKind::AlmostCoBuchi => (1, 2),
            RedKind::PositiveBuchi => (0, 1),
        }
    }
}

/// Range of the `B` and `L` components of memory elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MemoryDomain {
    /// `B` and `L` are defined on the belief only; outside it they are `0` and `∅`.
    /// Memory-action conditions are checked on states of the beliefs only.
    #[default]
    Local,
    /// `B` and `L` range over all states and the memory-action conditions are checked
    /// over all states. Only feasible for very small models.
    Verbatim,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub domain: MemoryDomain,
    /// Maximum number of constructed states.
    pub budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { domain: MemoryDomain::Local, budget: 1_000_000 }
    }
}

/// `{{hi}}` as an `L` mask.
const HI_ONLY: u8 = 1 << 2;
/// `{{lo, hi}}` as an `L` mask.
const BOTH: u8 = 1 << 3;
const FULL: u8 = 0xF;

/// Memory element in packed form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mem {
    pub y: StateSet,
    pub b: StateSet,
    pub l: Vec<u8>,
}

/// A memory-selection observation `(Y', m, a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelObs {
    pub y: StateSet,
    pub mem: u32,
    pub action: u32,
    /// Allowed memory actions; the bottom action leading to `Sink` comes after them.
    pub next: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObsKind {
    Init,
    Sink,
    Act(u32),
    Sel(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Init,
    Sink,
    Act { state: u32, mem: u32 },
    Sel { state: u32, sel: u32 },
}

/// Meaning of a per-observation action index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    /// Choose this memory element (at `Init` and at memory-selection observations).
    Memory(u32),
    /// Play this action of the input POMDP.
    Play(u32),
    /// The disallowed memory actions, all leading to `Sink`.
    Bottom,
    /// The self-loop of `Sink`.
    Loop,
}

pub const INIT_STATE: u32 = 0;
pub const SINK_STATE: u32 = 1;
pub const INIT_OBS: u32 = 0;
pub const SINK_OBS: u32 = 1;

#[derive(Clone, Debug)]
pub struct BeliefObsGame {
    pomdp: Pomdp,
    pr: Vec<u32>,
    kind: RedKind,
    domain: MemoryDomain,
    lo: u32,
    hi: u32,
    mems: Vec<Mem>,
    mem_ids: HashMap<Mem, u32>,
    mem_obs: Vec<u32>,
    sels: Vec<SelObs>,
    sel_ids: HashMap<(u32, u32, u32), u32>,
    sel_obs: Vec<u32>,
    obs_kind: Vec<ObsKind>,
    obs_start: Vec<u32>,
    obs_members: Vec<Vec<u32>>,
    state_obs: Vec<u32>,
    /// Per memory element and action index: `None` if the action is not allowed,
    /// otherwise the memory-selection observation for each reachable observation of `G`.
    moves: Vec<Vec<Option<Vec<(u32, u32)>>>>,
    init_mems: Vec<u32>,
    budget: usize,
}

impl BeliefObsGame {
    /// Builds the reachable part of the game. `pr` must use only the two priorities of `kind`.
    pub fn build(pomdp: &Pomdp, pr: &[u32], kind: RedKind, opts: BuildOptions) -> Result<Self> {
        let (lo, hi) = kind.colors();
        if pr.len() != pomdp.num_states() {
            return Err(Error::Invalid("priority vector does not match the model".into()));
        }
        if let Some(&bad) = pr.iter().find(|&&c| c != lo && c != hi) {
            return Err(Error::Contract(format!("priority {bad} outside {{{lo},{hi}}}")));
        }
        let mut g = BeliefObsGame {
            pomdp: pomdp.clone(),
            pr: pr.to_vec(),
            kind,
            domain: opts.domain,
            lo,
            hi,
            mems: Vec::new(),
            mem_ids: HashMap::new(),
            mem_obs: Vec::new(),
            sels: Vec::new(),
            sel_ids: HashMap::new(),
            sel_obs: Vec::new(),
            obs_kind: Vec::new(),
            obs_start: Vec::new(),
            obs_members: Vec::new(),
            state_obs: Vec::new(),
            moves: Vec::new(),
            init_mems: Vec::new(),
            budget: opts.budget,
        };
        g.add_obs(ObsKind::Init, vec![u32::MAX])?;
        g.add_obs(ObsKind::Sink, vec![u32::MAX])?;
        for mem in g.initial_memories()? {
            let id = g.intern_mem(mem)?;
            g.init_mems.push(id);
        }
        let mut next = 2;
        while next < g.obs_kind.len() {
            match g.obs_kind[next] {
                ObsKind::Act(m) => g.expand_act(m)?,
                ObsKind::Sel(q) => g.expand_sel(q)?,
                ObsKind::Init | ObsKind::Sink => unreachable!(),
            }
            next += 1;
        }
        Ok(g)
    }

    fn add_obs(&mut self, kind: ObsKind, members: Vec<u32>) -> Result<u32> {
        let o = self.obs_kind.len() as u32;
        let start = self.state_obs.len();
        let reached = start + members.len();
        if reached > self.budget {
            return Err(Error::Budget { budget: self.budget, reached });
        }
        self.obs_kind.push(kind);
        self.obs_start.push(start as u32);
        self.state_obs.extend(std::iter::repeat_n(o, members.len()));
        self.obs_members.push(members);
        Ok(o)
    }

    fn intern_mem(&mut self, mem: Mem) -> Result<u32> {
        if let Some(&id) = self.mem_ids.get(&mem) {
            return Ok(id);
        }
        let id = self.mems.len() as u32;
        let o = self.add_obs(ObsKind::Act(id), sets::members(&mem.y))?;
        self.mem_ids.insert(mem.clone(), id);
        self.mems.push(mem);
        self.mem_obs.push(o);
        self.moves.push(Vec::new());
        Ok(id)
    }

    fn intern_sel(&mut self, mem: u32, action: u32, obs: u32, y: StateSet) -> Result<u32> {
        if let Some(&id) = self.sel_ids.get(&(mem, action, obs)) {
            return Ok(id);
        }
        let id = self.sels.len() as u32;
        let o = self.add_obs(ObsKind::Sel(id), sets::members(&y))?;
        self.sel_ids.insert((mem, action, obs), id);
        self.sels.push(SelObs { y, mem, action, next: Vec::new() });
        self.sel_obs.push(o);
        Ok(id)
    }

    fn expand_act(&mut self, m: u32) -> Result<()> {
        let y = self.mems[m as usize].y.clone();
        let o = self.pomdp.obs(y.minimum().expect("beliefs are non-empty") as u32);
        let actions = self.pomdp.available(o).to_vec();
        let mut moves = Vec::with_capacity(actions.len());
        for a in actions {
            if !self.allowed(&self.mems[m as usize], a) {
                moves.push(None);
                continue;
            }
            let post = self.pomdp.post(&y, a);
            let mut targets: Vec<u32> = post.ones().map(|s| self.pomdp.obs(s as u32)).collect();
            targets.sort_unstable();
            targets.dedup();
            let mut list = Vec::with_capacity(targets.len());
            for o2 in targets {
                let y2 = self.pomdp.restrict_to_obs(post.clone(), o2);
                let q = self.intern_sel(m, a, o2, y2)?;
                list.push((o2, q));
            }
            moves.push(Some(list));
        }
        self.moves[m as usize] = moves;
        Ok(())
    }

    fn expand_sel(&mut self, q: u32) -> Result<()> {
        let options = self.memory_action_options(q);
        let y2 = self.sels[q as usize].y.clone();
        let mems = self.product(&y2, options)?;
        let mut next = Vec::with_capacity(mems.len());
        for mem in mems {
            next.push(self.intern_mem(mem)?);
        }
        self.sels[q as usize].next = next;
        Ok(())
    }

    fn contains_color(&self, k: u32, c: u32) -> bool {
        (c == self.lo && k & 1 != 0) || (c == self.hi && k & 2 != 0)
    }

    /// The action-allowance predicate on packed memory elements.
    fn allowed(&self, m: &Mem, a: u32) -> bool {
        for s in m.y.ones() {
            let l = m.l[s];
            if !m.b.contains(s) || l.count_ones() != 1 {
                continue;
            }
            let k = l.trailing_zeros();
            if !self.contains_color(k, self.pr[s]) {
                continue;
            }
            if self.pomdp.support(s as u32, a).iter().any(|&t| !self.contains_color(k, self.pr[t as usize])) {
                return false;
            }
        }
        true
    }

    /// Per-state `(B, L)` choices for the initial memory elements.
    fn initial_memories(&self) -> Result<Vec<Mem>> {
        let n = self.pomdp.num_states();
        let s0 = self.pomdp.initial() as usize;
        let y = sets::singleton(n, s0 as u32);
        let mut options = vec![vec![(false, 0u8)]; n];
        match self.domain {
            MemoryDomain::Local => {
                options[s0] = self.local_options(s0, false);
            }
            MemoryDomain::Verbatim => {
                for (s, opt) in options.iter_mut().enumerate() {
                    let masks: Vec<u8> = match (s == s0, self.kind) {
                        (true, RedKind::AlmostCoBuchi) => vec![HI_ONLY],
                        (true, RedKind::PositiveBuchi) => (1..=FULL).collect(),
                        (false, _) => (0..=FULL).collect(),
                    };
                    *opt = masks.iter().flat_map(|&l| [(false, l), (true, l)]).collect();
                }
            }
        }
        self.product(&y, options)
    }

    /// Local-domain choices for a belief state; `forced` means `B` must be 1.
    fn local_options(&self, s: usize, forced: bool) -> Vec<(bool, u8)> {
        match self.kind {
            RedKind::AlmostCoBuchi => {
                if self.pr[s] == self.hi {
                    if forced {
                        vec![(true, HI_ONLY)]
                    } else {
                        vec![(false, HI_ONLY), (true, HI_ONLY)]
                    }
                } else if forced {
                    Vec::new()
                } else {
                    vec![(false, HI_ONLY)]
                }
            }
            RedKind::PositiveBuchi => {
                if forced {
                    vec![(true, BOTH)]
                } else {
                    vec![(false, FULL), (true, BOTH)]
                }
            }
        }
    }

    /// Per-state `(B', L')` choices of the allowed memory actions at a memory-selection
    /// observation. An empty option list for some state means no memory action is allowed.
    fn memory_action_options(&self, q: u32) -> Vec<Vec<(bool, u8)>> {
        let n = self.pomdp.num_states();
        let sel = &self.sels[q as usize];
        let m = &self.mems[sel.mem as usize];
        let a = sel.action;
        let mut forced = self.pomdp.empty_set();
        for s in m.y.ones() {
            if m.b.contains(s) {
                for &t in self.pomdp.support(s as u32, a) {
                    forced.insert(t as usize);
                }
            }
        }
        match self.domain {
            MemoryDomain::Local => (0..n)
                .map(|s| {
                    if sel.y.contains(s) {
                        self.local_options(s, forced.contains(s))
                    } else {
                        vec![(false, 0)]
                    }
                })
                .collect(),
            MemoryDomain::Verbatim => {
                let mut cap = vec![FULL; n];
                for s in 0..n as u32 {
                    for &t in self.pomdp.support(s, a) {
                        cap[t as usize] &= m.l[s as usize];
                    }
                }
                (0..n)
                    .map(|s| {
                        let masks = (0..=FULL).filter(|&l| l & !cap[s] == 0 && (l != 0 || !sel.y.contains(s)));
                        let bs: &[bool] = if forced.contains(s) { &[true] } else { &[false, true] };
                        masks.flat_map(|l| bs.iter().map(move |&b| (b, l))).collect()
                    })
                    .collect()
            }
        }
    }

    fn product(&self, y: &StateSet, options: Vec<Vec<(bool, u8)>>) -> Result<Vec<Mem>> {
        let count = options.iter().try_fold(1usize, |acc, o| acc.checked_mul(o.len()));
        match count {
            Some(c) if c <= self.budget => {}
            _ => {
                return Err(Error::Budget { budget: self.budget, reached: self.state_obs.len() });
            }
        }
        let n = options.len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        if options.iter().any(|o| o.is_empty()) {
            return Ok(out);
        }
        loop {
            let mut b = StateSet::with_capacity(n);
            let mut l = vec![0u8; n];
            for s in 0..n {
                let (bit, mask) = options[s][idx[s]];
                b.set(s, bit);
                l[s] = mask;
            }
            out.push(Mem { y: y.clone(), b, l });
            let mut s = 0;
            loop {
                if s == n {
                    return Ok(out);
                }
                idx[s] += 1;
                if idx[s] < options[s].len() {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
        }
    }

    pub fn kind(&self) -> RedKind {
        self.kind
    }

    pub fn domain(&self) -> MemoryDomain {
        self.domain
    }

    pub fn input(&self) -> &Pomdp {
        &self.pomdp
    }

    pub fn input_priorities(&self) -> &[u32] {
        &self.pr
    }

    pub fn num_memories(&self) -> usize {
        self.mems.len()
    }

    pub fn memory(&self, m: u32) -> &Mem {
        &self.mems[m as usize]
    }

    pub fn memory_obs(&self, m: u32) -> u32 {
        self.mem_obs[m as usize]
    }

    pub fn sel(&self, q: u32) -> &SelObs {
        &self.sels[q as usize]
    }

    pub fn sel_obs_id(&self, q: u32) -> u32 {
        self.sel_obs[q as usize]
    }

    /// The memory-selection observation reached from memory `m` by action `a` when `G`
    /// emits observation `o`.
    pub fn sel_for(&self, m: u32, a: u32, o: u32) -> Option<u32> {
        self.sel_ids.get(&(m, a, o)).copied()
    }

    pub fn initial_memories_ids(&self) -> &[u32] {
        &self.init_mems
    }

    pub fn obs_kind(&self, o: u32) -> ObsKind {
        self.obs_kind[o as usize]
    }

    pub fn state_kind(&self, s: u32) -> StateKind {
        let o = self.state_obs[s as usize];
        let orig = self.obs_members[o as usize][(s - self.obs_start[o as usize]) as usize];
        match self.obs_kind[o as usize] {
            ObsKind::Init => StateKind::Init,
            ObsKind::Sink => StateKind::Sink,
            ObsKind::Act(mem) => StateKind::Act { state: orig, mem },
            ObsKind::Sel(sel) => StateKind::Sel { state: orig, sel },
        }
    }

    pub fn action_kind(&self, o: u32, idx: u32) -> ActionKind {
        match self.obs_kind[o as usize] {
            ObsKind::Init => ActionKind::Memory(self.init_mems[idx as usize]),
            ObsKind::Sink => ActionKind::Loop,
            ObsKind::Act(m) => {
                let ob = self.pomdp.obs(self.mems[m as usize].y.minimum().unwrap() as u32);
                ActionKind::Play(self.pomdp.available(ob)[idx as usize])
            }
            ObsKind::Sel(q) => match self.sels[q as usize].next.get(idx as usize) {
                Some(&m) => ActionKind::Memory(m),
                None => ActionKind::Bottom,
            },
        }
    }

    /// Whether the action index at an action-selection observation is allowed.
    pub fn is_allowed_play(&self, m: u32, idx: u32) -> bool {
        self.moves[m as usize][idx as usize].is_some()
    }

    /// Priority in the game: `p(s)` on action- and memory-selection states, `hi` at `Init`,
    /// and 1 at `Sink`.
    pub fn priority(&self, s: u32) -> u32 {
        match self.state_kind(s) {
            StateKind::Init => self.hi,
            StateKind::Sink => 1,
            StateKind::Act { state, .. } | StateKind::Sel { state, .. } => self.pr[state as usize],
        }
    }

    /// Action-selection states `(s, (Y, B, L))` with `B(s) = 1`, `L(s) = {Z}`, `p(s) ∈ Z`,
    /// and `Z` even-winning: `Z = {2}` for coBüchi, `0 ∈ Z` for Büchi.
    pub fn is_winning_pseudo_recurrent(&self, s: u32) -> bool {
        let StateKind::Act { state, mem } = self.state_kind(s) else { return false };
        let m = &self.mems[mem as usize];
        let st = state as usize;
        let l = m.l[st];
        if !m.b.contains(st) || l.count_ones() != 1 {
            return false;
        }
        let k = l.trailing_zeros();
        let even = match self.kind {
            RedKind::AlmostCoBuchi => k == 2,
            RedKind::PositiveBuchi => k & 1 != 0,
        };
        even && self.contains_color(k, self.pr[st])
    }

    /// The memory element in unpacked form.
    pub fn element(&self, m: u32) -> MemoryElement {
        let mem = &self.mems[m as usize];
        let srec = mem
            .l
            .iter()
            .map(|&mask| {
                let mut v: Vec<ColorSet> = (0..4u32)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| {
                        let mut c = 0;
                        if k & 1 != 0 {
                            c |= sets::color_bit(self.lo);
                        }
                        if k & 2 != 0 {
                            c |= sets::color_bit(self.hi);
                        }
                        c
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        MemoryElement { belief: mem.y.clone(), brec: mem.b.clone(), srec }
    }

    fn fmt_set(&self, s: &StateSet) -> String {
        let names: Vec<&str> = s.ones().map(|i| self.pomdp.state_name(i as u32)).collect();
        names.join(".")
    }

    /// Deterministic name `[Y|B|L]` of a memory element, where `L` lists `state=mask`.
    pub fn memory_name(&self, m: u32) -> String {
        let mem = &self.mems[m as usize];
        let l: Vec<String> = mem
            .l
            .iter()
            .enumerate()
            .filter(|(s, &mask)| mask != 0 || mem.y.contains(*s))
            .map(|(s, mask)| format!("{}={:x}", self.pomdp.state_name(s as u32), mask))
            .collect();
        format!("[{}|{}|{}]", self.fmt_set(&mem.y), self.fmt_set(&mem.b), l.join("."))
    }

    pub fn obs_name(&self, o: u32) -> String {
        match self.obs_kind[o as usize] {
            ObsKind::Init => "init".into(),
            ObsKind::Sink => "sink".into(),
            ObsKind::Act(m) => self.memory_name(m),
            ObsKind::Sel(q) => {
                let sel = &self.sels[q as usize];
                format!(
                    "<{}|{}|{}>",
                    self.fmt_set(&sel.y),
                    self.pomdp.action_name(sel.action),
                    self.memory_name(sel.mem)
                )
            }
        }
    }

    pub fn state_name(&self, s: u32) -> String {
        match self.state_kind(s) {
            StateKind::Init => "init".into(),
            StateKind::Sink => "sink".into(),
            StateKind::Act { state, .. } | StateKind::Sel { state, .. } => {
                format!("{}@{}", self.pomdp.state_name(state), self.obs_name(self.state_obs[s as usize]))
            }
        }
    }

    /// The game as an explicit POMDP with uniform weights, for inspection and serialization.
    /// Its alphabet is the input actions, one action per memory element, `bot` and `loop`.
    pub fn to_pomdp(&self) -> Result<Pomdp> {
        let mut b = PomdpBuilder::new();
        let na = self.pomdp.num_actions() as u32;
        for a in self.pomdp.action_names() {
            b.add_action(format!("play:{a}"));
        }
        for m in 0..self.mems.len() as u32 {
            b.add_action(format!("mem:{}", self.memory_name(m)));
        }
        let bot = b.add_action("bot");
        let lp = b.add_action("loop");
        for o in 0..self.obs_kind.len() as u32 {
            b.add_observation(self.obs_name(o));
        }
        for s in 0..self.state_obs.len() as u32 {
            let id = b.add_state(self.state_name(s));
            b.set_observation(id, self.state_obs[s as usize]);
        }
        b.set_initial(INIT_STATE);
        let global = |o: u32, idx: u32| match self.action_kind(o, idx) {
            ActionKind::Play(a) => a,
            ActionKind::Memory(m) => na + m,
            ActionKind::Bottom => bot,
            ActionKind::Loop => lp,
        };
        let mut succ = Vec::new();
        for o in 0..self.obs_kind.len() as u32 {
            let k = self.num_actions(o) as u32;
            b.set_available(o, (0..k).map(|i| global(o, i)).collect());
            for s in self.obs_states(o) {
                for i in 0..k {
                    succ.clear();
                    self.successors(s, i, &mut succ);
                    b.set_transition(s, global(o, i), Dist::uniform(succ.iter().copied()));
                }
            }
        }
        b.build()
    }

    fn rank_in(&self, o: u32, state: u32) -> u32 {
        let members = &self.obs_members[o as usize];
        let r = members.binary_search(&state).expect("state belongs to the belief");
        self.obs_start[o as usize] + r as u32
    }
}

impl QualModel for BeliefObsGame {
    fn num_states(&self) -> usize {
        self.state_obs.len()
    }

    fn num_obs(&self) -> usize {
        self.obs_kind.len()
    }

    fn obs_of(&self, s: u32) -> u32 {
        self.state_obs[s as usize]
    }

    fn obs_states(&self, o: u32) -> Range<u32> {
        let start = self.obs_start[o as usize];
        start..start + self.obs_members[o as usize].len() as u32
    }

    fn num_actions(&self, o: u32) -> usize {
        match self.obs_kind[o as usize] {
            ObsKind::Init => self.init_mems.len(),
            ObsKind::Sink => 1,
            ObsKind::Act(m) => self.moves[m as usize].len(),
            ObsKind::Sel(q) => self.sels[q as usize].next.len() + 1,
        }
    }

    fn successors(&self, s: u32, a: u32, out: &mut Vec<u32>) {
        match self.state_kind(s) {
            StateKind::Init => {
                let m = self.init_mems[a as usize];
                out.push(self.obs_start[self.mem_obs[m as usize] as usize]);
            }
            StateKind::Sink => out.push(SINK_STATE),
            StateKind::Act { state, mem } => match &self.moves[mem as usize][a as usize] {
                None => out.push(SINK_STATE),
                Some(list) => {
                    let o = self.obs_of(s);
                    let ObsKind::Act(_) = self.obs_kind[o as usize] else { unreachable!() };
                    let act = self.action_kind(o, a);
                    let ActionKind::Play(act) = act else { unreachable!() };
                    for &t in self.pomdp.support(state, act) {
                        let to = self.pomdp.obs(t);
                        let q = list.iter().find(|e| e.0 == to).expect("target observation was expanded").1;
                        out.push(self.rank_in(self.sel_obs[q as usize], t));
                    }
                }
            },
            StateKind::Sel { sel, .. } => {
                let o = self.obs_of(s);
                let r = s - self.obs_start[o as usize];
                match self.sels[sel as usize].next.get(a as usize) {
                    Some(&m) => out.push(self.obs_start[self.mem_obs[m as usize] as usize] + r),
                    None => out.push(SINK_STATE),
                }
            }
        }
    }

    fn initial(&self) -> u32 {
        INIT_STATE
    }
}

/// Whether `a` is allowed in the memory element: for every `s ∈ Y` with `B(s) = 1`,
/// `L(s) = {Z}` and `p(s) ∈ Z`, every successor of `s` under `a` has its priority in `Z`.
pub fn action_allowed(mem: &MemoryElement, a: u32, pomdp: &Pomdp, p: &[u32]) -> bool {
    mem.belief.ones().all(|s| {
        let z = &mem.srec[s];
        if !mem.brec.contains(s) || z.len() != 1 || z[0] & sets::color_bit(p[s]) == 0 {
            return true;
        }
        pomdp.support(s as u32, a).iter().all(|&t| z[0] & sets::color_bit(p[t as usize]) != 0)
    })
}

/// Whether `next` (with belief `Y'`) is an allowed memory action at `(Y', mem, a)`:
/// (i) `B(s) = 1` for `s ∈ Y` forces `B'(s') = 1` on successors, and (ii) `L'(s') ⊆ L(s)`
/// for every successor `s'` of `s`. In the local domain both conditions only range over
/// `s ∈ Y` and `s' ∈ Y'`; in the verbatim domain (ii) ranges over all states.
pub fn memory_action_allowed(
    next: &MemoryElement,
    mem: &MemoryElement,
    a: u32,
    pomdp: &Pomdp,
    domain: MemoryDomain,
) -> bool {
    let local = domain == MemoryDomain::Local;
    let in_next = |t: u32| !local || next.belief.contains(t as usize);
    for s in mem.belief.ones() {
        if mem.brec.contains(s) {
            for &t in pomdp.support(s as u32, a) {
                if in_next(t) && !next.brec.contains(t as usize) {
                    return false;
                }
            }
        }
    }
    let sources: Vec<usize> = if local {
        mem.belief.ones().collect()
    } else {
        (0..pomdp.num_states()).collect()
    };
    for s in sources {
        let ls: HashSet<ColorSet> = mem.srec[s].iter().copied().collect();
        for &t in pomdp.support(s as u32, a) {
            if in_next(t) && next.srec[t as usize].iter().any(|z| !ls.contains(z)) {
                return false;
            }
        }
    }
    true
}

/// Checks that every reachable belief equals the full set of states of its observation.
/// Explores `(belief, observation)` pairs breadth-first up to `depth` steps and stops early
/// once no new pair appears, in which case the answer is exact.
pub fn is_belief_observation(pomdp: &Pomdp, depth: usize) -> bool {
    let full = |o: u32| sets::set_of(pomdp.num_states(), pomdp.obs_states(o).iter().copied());
    let start = sets::singleton(pomdp.num_states(), pomdp.initial());
    let mut seen: HashSet<StateSet> = HashSet::new();
    let mut frontier = vec![start];
    for _ in 0..=depth {
        let mut next = Vec::new();
        for y in frontier {
            if !seen.insert(y.clone()) {
                continue;
            }
            let o = pomdp.obs(y.minimum().unwrap() as u32);
            if y != full(o) {
                return false;
            }
            for &a in pomdp.available(o) {
                let post = pomdp.post(&y, a);
                let mut obs: Vec<u32> = post.ones().map(|s| pomdp.obs(s as u32)).collect();
                obs.sort_unstable();
                obs.dedup();
                for o2 in obs {
                    next.push(pomdp.restrict_to_obs(post.clone(), o2));
                }
            }
        }
        next.retain(|y| !seen.contains(y));
        if next.is_empty() {
            return true;
        }
        frontier = next;
    }
    true
}

/// [`is_belief_observation`] on an implicit model, exploring every reachable observation.
pub fn is_belief_observation_model<Q: QualModel>(g: &Q) -> bool {
    let n = g.num_states();
    let mut seen = vec![false; g.num_obs()];
    let init = g.initial();
    let o0 = g.obs_of(init);
    if g.obs_states(o0).len() != 1 {
        return false;
    }
    seen[o0 as usize] = true;
    let mut stack = vec![o0];
    let mut succ = Vec::new();
    let mut mark = vec![false; n];
    while let Some(o) = stack.pop() {
        for a in 0..g.num_actions(o) as u32 {
            let mut hit: HashMap<u32, usize> = HashMap::new();
            for s in g.obs_states(o) {
                succ.clear();
                g.successors(s, a, &mut succ);
                for &t in &succ {
                    if !mark[t as usize] {
                        mark[t as usize] = true;
                        *hit.entry(g.obs_of(t)).or_default() += 1;
                    }
                }
            }
            for s in g.obs_states(o) {
                succ.clear();
                g.successors(s, a, &mut succ);
                for &t in &succ {
                    mark[t as usize] = false;
                }
            }
            for (o2, count) in hit {
                if count != g.obs_states(o2).len() {
                    return false;
                }
                if !seen[o2 as usize] {
                    seen[o2 as usize] = true;
                    stack.push(o2);
                }
            }
        }
    }
    true
}
