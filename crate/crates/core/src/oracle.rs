//! Brute-force cross-checks: enumeration of support-level strategies with bounded memory,
//! evaluated on the product chain, and a memoryless enumeration on observation-block models.
//!
//! Only supports are enumerated. Each candidate fixes the action support of a memory and
//! the update support of `(memory, observation, action)` only where the product chain from
//! `(s0, m0)` actually reaches them, so candidates that differ on unreachable arguments are
//! never produced twice. Memories are numbered by first appearance, and among labelings
//! that only differ in the order of memories introduced by the same update, the least one
//! is kept. That last check tries every renaming, so it is skipped above
//! [`SYMMETRY_LIMIT`] memories, where symmetric duplicates may then appear.

use std::collections::{BTreeMap, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;

use crate::chain::{self, reachable_bottoms, scc_decomposition, Digraph};
use crate::error::Result;
use crate::model::{Dist, Objective, Pomdp, WinningMode};
use crate::sets::StateSet;
use crate::solve::{ObsSet, QualModel};
use crate::strategy::{memory_bound, BoundKind, FiniteMemoryStrategy, StrategySupport};

/// A strategy given only by its supports. Memory `0` is initial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupportStrategy {
    /// Action support per memory. `None` while undecided during enumeration.
    actions: Vec<Option<Vec<u32>>>,
    /// Update support per `(memory, observation, action)`.
    updates: BTreeMap<(u32, u32, u32), Vec<u32>>,
}

impl SupportStrategy {
    fn fresh() -> Self {
        SupportStrategy { actions: vec![None], updates: BTreeMap::new() }
    }

    /// Builds a support strategy from explicit parts; memory `0` is initial.
    pub fn from_parts(actions: Vec<Vec<u32>>, updates: BTreeMap<(u32, u32, u32), Vec<u32>>) -> Self {
        SupportStrategy { actions: actions.into_iter().map(Some).collect(), updates }
    }

    pub fn actions(&self, m: u32) -> &[u32] {
        self.actions[m as usize].as_deref().unwrap_or(&[])
    }

    pub fn updates(&self) -> &BTreeMap<(u32, u32, u32), Vec<u32>> {
        &self.updates
    }

    /// The strategy with uniform weights on every support; memories are named `m0`, `m1`, ...
    pub fn to_strategy(&self, pomdp: &Pomdp) -> FiniteMemoryStrategy {
        let names = (0..self.actions.len()).map(|m| format!("m{m}")).collect();
        let mut out = FiniteMemoryStrategy::new(names, pomdp.num_observations(), pomdp.num_actions(), 0);
        for m in 0..self.actions.len() as u32 {
            out.set_select(m, Dist::uniform(self.actions(m).iter().copied()));
        }
        for (&(m, o, a), supp) in &self.updates {
            out.set_update(m, o, a, Dist::uniform(supp.iter().copied()));
        }
        out
    }

    fn relabel(&self, perm: &[u32]) -> Self {
        let mut actions = vec![None; self.actions.len()];
        for (m, acts) in self.actions.iter().enumerate() {
            actions[perm[m] as usize] = acts.clone();
        }
        let updates = self
            .updates
            .iter()
            .map(|(&(m, o, a), supp)| {
                let mut s: Vec<u32> = supp.iter().map(|&x| perm[x as usize]).collect();
                s.sort_unstable();
                ((perm[m as usize], o, a), s)
            })
            .collect();
        SupportStrategy { actions, updates }
    }
}

impl StrategySupport for SupportStrategy {
    fn num_memories(&self) -> usize {
        self.actions.len()
    }

    fn initial_memory(&self) -> u32 {
        0
    }

    fn action_support(&self, m: u32) -> &[u32] {
        self.actions(m)
    }

    fn update_support(&self, m: u32, o: u32, a: u32) -> Option<&[u32]> {
        self.updates.get(&(m, o, a)).map(Vec::as_slice)
    }
}

/// The first argument the exploration needs that the partial strategy leaves open.
enum Explored {
    Complete,
    /// The candidate plays an unavailable action somewhere it is reached.
    Invalid,
    NeedActions { m: u32, obs: u32 },
    NeedUpdate { m: u32, o: u32, a: u32 },
}

/// Explores the product chain in a fixed order (breadth first, actions and successors
/// ascending) and reports the first undecided argument.
fn explore(pomdp: &Pomdp, st: &SupportStrategy) -> Explored {
    let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert((pomdp.initial(), 0), ());
    queue.push_back((pomdp.initial(), 0u32));
    while let Some((s, m)) = queue.pop_front() {
        let obs = pomdp.obs(s);
        let Some(acts) = &st.actions[m as usize] else { return Explored::NeedActions { m, obs } };
        for &a in acts {
            if !pomdp.is_available(obs, a) {
                return Explored::Invalid;
            }
            for &t in pomdp.support(s, a) {
                let o = pomdp.obs(t);
                let Some(upd) = st.updates.get(&(m, o, a)) else { return Explored::NeedUpdate { m, o, a } };
                for &m2 in upd {
                    if seen.insert((t, m2), ()).is_none() {
                        queue.push_back((t, m2));
                    }
                }
            }
        }
    }
    Explored::Complete
}

/// The relabeling that numbers memories by first appearance, with ties inside one update
/// support broken by the current ids.
fn first_appearance(pomdp: &Pomdp, st: &SupportStrategy) -> Vec<u32> {
    let n = st.actions.len();
    let mut perm = vec![u32::MAX; n];
    perm[0] = 0;
    let mut next = 1;
    let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert((pomdp.initial(), 0), ());
    queue.push_back((pomdp.initial(), 0u32));
    while let Some((s, m)) = queue.pop_front() {
        for &a in st.actions(m) {
            for &t in pomdp.support(s, a) {
                let Some(upd) = st.updates.get(&(m, pomdp.obs(t), a)) else { continue };
                for &m2 in upd {
                    if perm[m2 as usize] == u32::MAX {
                        perm[m2 as usize] = next;
                        next += 1;
                    }
                    if seen.insert((t, m2), ()).is_none() {
                        queue.push_back((t, m2));
                    }
                }
            }
        }
    }
    for p in perm.iter_mut().filter(|p| **p == u32::MAX) {
        *p = next;
        next += 1;
    }
    perm
}

/// Drops arguments the product chain never reaches and memories it never uses.
fn trim(pomdp: &Pomdp, st: &SupportStrategy) -> SupportStrategy {
    let chain = match chain::build_product_chain(pomdp, st) {
        Ok(c) => c,
        Err(_) => return st.clone(),
    };
    let mut used = vec![false; st.actions.len()];
    let mut updates = BTreeMap::new();
    for &(s, m) in chain.nodes() {
        used[m as usize] = true;
        for &a in st.actions(m) {
            for &t in pomdp.support(s, a) {
                let key = (m, pomdp.obs(t), a);
                if let Some(u) = st.updates.get(&key) {
                    updates.insert(key, u.clone());
                }
            }
        }
    }
    let keep = used.iter().rposition(|&u| u).map_or(1, |i| i + 1);
    let actions = st.actions[..keep].to_vec();
    SupportStrategy { actions, updates }
}

/// The canonical representative of `st` up to memory renaming and unreachable arguments.
pub fn canonicalize(pomdp: &Pomdp, st: &SupportStrategy) -> SupportStrategy {
    let perm = first_appearance(pomdp, st);
    let base = trim(pomdp, &st.relabel(&perm));
    least_labeling(pomdp, &base)
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    // Memory 0 is fixed; the rest is permuted.
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..n as u32).collect();
    fn rec(k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k >= cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(1, &mut cur, &mut out);
    out
}

/// Largest memory count for which symmetric duplicates are removed.
pub const SYMMETRY_LIMIT: usize = 6;

fn least_labeling(pomdp: &Pomdp, st: &SupportStrategy) -> SupportStrategy {
    let mut best = st.clone();
    if st.actions.len() > SYMMETRY_LIMIT {
        return best;
    }
    for perm in permutations(st.actions.len()) {
        let moved = st.relabel(&perm);
        let cand = moved.relabel(&first_appearance(pomdp, &moved));
        if cand < best {
            best = cand;
        }
    }
    best
}

fn nonempty_subsets(items: &[u32]) -> Vec<Vec<u32>> {
    (1u64..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect())
        .collect()
}

/// Non-empty update supports over memories `0..k`, where ids at or above `used` are fresh
/// and may only be taken as a prefix block `used, used+1, ...`.
fn update_options(used: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for mask in 1u64..1 << k {
        let fresh = mask >> used;
        if fresh & (fresh + 1) != 0 {
            continue;
        }
        out.push((0..k).filter(|i| mask >> i & 1 == 1).collect());
    }
    out
}

struct Frame {
    base: SupportStrategy,
    hole: Hole,
    options: Vec<Vec<u32>>,
    next: usize,
}

#[derive(Clone, Copy)]
enum Hole {
    Actions(u32),
    Update(u32, u32, u32),
}

/// Lazy, duplicate-free stream of support strategies with at most `k` memories, in
/// lexicographic order of the decisions taken along the exploration.
pub struct StrategyStream<'a> {
    pomdp: &'a Pomdp,
    k: u32,
    stack: Vec<Frame>,
    pending: Option<SupportStrategy>,
    raw_count: u64,
}

impl<'a> StrategyStream<'a> {
    pub fn new(pomdp: &'a Pomdp, k: u32) -> Self {
        assert!(k >= 1, "memory bound must be at least 1");
        StrategyStream { pomdp, k, stack: Vec::new(), pending: Some(SupportStrategy::fresh()), raw_count: 0 }
    }

    /// Completed candidates seen so far, before symmetric duplicates were dropped.
    pub fn raw_count(&self) -> u64 {
        self.raw_count
    }

    /// Explores `st`; returns it when complete and pushes a frame when a choice is needed.
    fn step(&mut self, st: SupportStrategy) -> Option<SupportStrategy> {
        match explore(self.pomdp, &st) {
            Explored::Complete => Some(st),
            Explored::Invalid => None,
            Explored::NeedActions { m, obs } => {
                let options = nonempty_subsets(self.pomdp.available(obs));
                self.stack.push(Frame { base: st, hole: Hole::Actions(m), options, next: 0 });
                None
            }
            Explored::NeedUpdate { m, o, a } => {
                let used = st.actions.len() as u32;
                let options = update_options(used, self.k);
                self.stack.push(Frame { base: st, hole: Hole::Update(m, o, a), options, next: 0 });
                None
            }
        }
    }
}

impl Iterator for StrategyStream<'_> {
    type Item = SupportStrategy;

    fn next(&mut self) -> Option<SupportStrategy> {
        loop {
            let st = if let Some(p) = self.pending.take() {
                p
            } else {
                let top = self.stack.last_mut()?;
                if top.next == top.options.len() {
                    self.stack.pop();
                    continue;
                }
                let choice = top.options[top.next].clone();
                top.next += 1;
                let mut st = top.base.clone();
                match top.hole {
                    Hole::Actions(m) => st.actions[m as usize] = Some(choice),
                    Hole::Update(m, o, a) => {
                        let top_id = choice.iter().copied().max().unwrap_or(0) as usize;
                        if top_id >= st.actions.len() {
                            st.actions.resize(top_id + 1, None);
                        }
                        st.updates.insert((m, o, a), choice);
                    }
                }
                st
            };
            if let Some(done) = self.step(st) {
                self.raw_count += 1;
                if least_labeling(self.pomdp, &done) == done {
                    return Some(done);
                }
            }
        }
    }
}

/// Shorthand for [`StrategyStream::new`].
pub fn enumerate_strategies(pomdp: &Pomdp, k: u32) -> StrategyStream<'_> {
    StrategyStream::new(pomdp, k)
}

/// Every support strategy with exactly `k` memories and every argument defined, without
/// any renaming or trimming. Candidates playing unavailable actions are skipped. Meant for
/// spot checks on tiny signatures only.
pub fn enumerate_raw(pomdp: &Pomdp, k: u32) -> Vec<SupportStrategy> {
    let all: Vec<u32> = (0..pomdp.num_actions() as u32).collect();
    let act_opts = nonempty_subsets(&all);
    let mem_opts = nonempty_subsets(&(0..k).collect::<Vec<_>>());
    let mut out = Vec::new();
    let mut acts = vec![0usize; k as usize];
    loop {
        let actions: Vec<Vec<u32>> = acts.iter().map(|&i| act_opts[i].clone()).collect();
        let keys: Vec<(u32, u32, u32)> = (0..k)
            .flat_map(|m| {
                let acts = actions[m as usize].clone();
                (0..pomdp.num_observations() as u32).flat_map(move |o| acts.clone().into_iter().map(move |a| (m, o, a)))
            })
            .collect();
        let mut upd = vec![0usize; keys.len()];
        loop {
            let updates = keys.iter().zip(&upd).map(|(&key, &i)| (key, mem_opts[i].clone())).collect();
            let st = SupportStrategy::from_parts(actions.clone(), updates);
            if chain::build_product_chain(pomdp, &st).is_ok() {
                out.push(st);
            }
            if !advance(&mut upd, mem_opts.len()) {
                break;
            }
        }
        if !advance(&mut acts, act_opts.len()) {
            break;
        }
    }
    out
}

/// Odometer increment; false once every digit wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Outcome of [`oracle_decide`].
#[derive(Clone, Debug)]
pub enum OracleVerdict {
    /// The first winning candidate in enumeration order.
    Yes { witness: FiniteMemoryStrategy, examined: u64 },
    /// No candidate with at most `k` memories wins. `definitive` is set when `k` reaches
    /// the memory bound for the objective, so the answer is a plain no.
    NoUpToK { k: u32, definitive: bool, examined: u64 },
    /// The candidate budget ran out first.
    Inconclusive { examined: u64 },
}

impl OracleVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, OracleVerdict::Yes { .. })
    }

    pub fn examined(&self) -> u64 {
        match self {
            OracleVerdict::Yes { examined, .. }
            | OracleVerdict::NoUpToK { examined, .. }
            | OracleVerdict::Inconclusive { examined } => *examined,
        }
    }
}

/// The memory size beyond which more memory cannot help for `obj` on `pomdp`.
pub fn objective_memory_bound(pomdp: &Pomdp, obj: &Objective) -> Result<BigUint> {
    let n = pomdp.num_states();
    let colors = obj.colors(n)?;
    let top = colors.iter().copied().max().unwrap_or(0);
    Ok(match obj {
        Objective::Muller { .. } => {
            let distinct = (0..=top).filter(|c| colors.contains(c)).count() as u32;
            memory_bound(n, distinct, BoundKind::Muller)
        }
        _ => memory_bound(n, top / 2 + 1, BoundKind::Parity),
    })
}

/// Searches the stream for a strategy with at most `k` memories that wins `obj` in `mode`,
/// examining at most `budget` candidates.
pub fn oracle_decide(
    pomdp: &Pomdp,
    obj: &Objective,
    mode: WinningMode,
    k: u32,
    budget: u64,
) -> Result<OracleVerdict> {
    obj.check(pomdp.num_states())?;
    let mut examined = 0;
    for cand in enumerate_strategies(pomdp, k) {
        if examined == budget {
            return Ok(OracleVerdict::Inconclusive { examined });
        }
        examined += 1;
        let ch = chain::build_product_chain(pomdp, &cand)?;
        if chain::evaluate_qualitative(&ch, obj, mode)? {
            return Ok(OracleVerdict::Yes { witness: cand.to_strategy(pomdp), examined });
        }
    }
    let definitive = BigUint::from(k) >= objective_memory_bound(pomdp, obj)?;
    Ok(OracleVerdict::NoUpToK { k, definitive, examined })
}

/// The strategy whose memory is the last observation and which plays `supports[o]`
/// uniformly in memory `o`.
pub fn observation_memoryless(pomdp: &Pomdp, supports: &[Vec<u32>]) -> FiniteMemoryStrategy {
    let no = pomdp.num_observations();
    let names = pomdp.obs_names().to_vec();
    let mut out = FiniteMemoryStrategy::new(names, no, pomdp.num_actions(), pomdp.obs(pomdp.initial()));
    for o in 0..no as u32 {
        out.set_select(o, Dist::uniform(supports[o as usize].iter().copied()));
        for &a in &supports[o as usize] {
            for o2 in 0..no as u32 {
                out.set_update(o, o2, a, Dist::point(o2));
            }
        }
    }
    out
}

/// Every assignment of a non-empty subset of available actions to each observation.
pub fn observation_supports(pomdp: &Pomdp) -> Vec<Vec<Vec<u32>>> {
    let opts: Vec<Vec<Vec<u32>>> =
        (0..pomdp.num_observations() as u32).map(|o| nonempty_subsets(pomdp.available(o))).collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; opts.len()];
    loop {
        out.push(digits.iter().enumerate().map(|(o, &i)| opts[o][i].clone()).collect());
        if !odometer(&mut digits, &opts) {
            break;
        }
    }
    out
}

/// Decides `obj` over strategies that see only the current observation, by enumeration.
/// On perfect-observation models these are the memoryless strategies.
pub fn memoryless_decide(pomdp: &Pomdp, obj: &Objective, mode: WinningMode) -> Result<Option<FiniteMemoryStrategy>> {
    for supp in observation_supports(pomdp) {
        let sigma = observation_memoryless(pomdp, &supp);
        if chain::verify(pomdp, &sigma, obj, mode)? {
            return Ok(Some(sigma));
        }
    }
    Ok(None)
}

/// Objectives for [`memoryless_winning_obs`].
#[derive(Clone, Debug)]
pub enum MemorylessGoal {
    /// Stay in the set forever.
    Safe(StateSet),
    /// Visit the set infinitely often.
    Buchi(StateSet),
}

/// The observations `o` from which some stationary choice of action indices per observation
/// wins the goal almost surely from every state of `o`.
pub fn memoryless_winning_obs<Q: QualModel>(model: &Q, goal: &MemorylessGoal) -> ObsSet {
    let no = model.num_obs();
    let n = model.num_states();
    let opts: Vec<Vec<Vec<u32>>> = (0..no as u32)
        .map(|o| nonempty_subsets(&(0..model.num_actions(o) as u32).collect::<Vec<_>>()))
        .collect();
    let mut win = FixedBitSet::with_capacity(no);
    if opts.iter().any(|v| v.is_empty()) {
        return win;
    }
    let mut digits = vec![0usize; no];
    let mut buf = Vec::new();
    loop {
        let adj: Vec<Vec<u32>> = (0..n as u32)
            .map(|s| {
                buf.clear();
                for &a in &opts[model.obs_of(s) as usize][digits[model.obs_of(s) as usize]] {
                    model.successors(s, a, &mut buf);
                }
                let mut v = buf.clone();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let g = Digraph::from_adjacency(adj);
        let good_state: Vec<bool> = match goal {
            MemorylessGoal::Safe(f) => {
                (0..n as u32).map(|s| chain::reachable(&g, [s]).ones().all(|t| f.contains(t))).collect()
            }
            MemorylessGoal::Buchi(t) => {
                let dec = scc_decomposition(&g);
                let bottoms = reachable_bottoms(&g, &dec);
                let good_comp: Vec<bool> =
                    dec.components.iter().map(|c| c.iter().any(|&v| t.contains(v as usize))).collect();
                (0..n)
                    .map(|s| bottoms[dec.component[s] as usize].ones().all(|c| good_comp[c]))
                    .collect()
            }
        };
        for o in 0..no as u32 {
            if model.obs_states(o).all(|s| good_state[s as usize]) {
                win.insert(o as usize);
            }
        }
        if !odometer(&mut digits, &opts) {
            break;
        }
    }
    win
}

fn odometer(digits: &mut [usize], opts: &[Vec<Vec<u32>>]) -> bool {
    for (o, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < opts[o].len() {
            return true;
        }
        *d = 0;
    }
    false
}
