//! Finite-memory strategies, the projection graph and the projected strategy.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed};

use crate::chain::compute_rec_functions;
use crate::error::{Error, Result};
use crate::model::{Dist, Pomdp};
use crate::sets::{self, ColorSet, StateSet};

/// Support-level view of a strategy; all qualitative analysis goes through this.
pub trait StrategySupport {
    fn num_memories(&self) -> usize;
    fn initial_memory(&self) -> u32;
    fn action_support(&self, m: u32) -> &[u32];
    /// `None` when the update is left undefined.
    fn update_support(&self, m: u32, o: u32, a: u32) -> Option<&[u32]>;
}

/// `(σu, σn, M, m0)` with explicit rational weights. Updates are indexed by
/// `(memory, observation, action)` and may be left undefined where they are unreachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMemoryStrategy {
    memory_names: Vec<String>,
    num_obs: usize,
    num_actions: usize,
    select: Vec<Dist>,
    update: Vec<Option<Dist>>,
    initial: u32,
    elements: Option<Vec<MemoryElement>>,
    select_supp: Vec<Vec<u32>>,
    update_supp: Vec<Option<Vec<u32>>>,
}

impl FiniteMemoryStrategy {
    /// A strategy with the given memories and no selections or updates yet.
    pub fn new(memory_names: Vec<String>, num_obs: usize, num_actions: usize, initial: u32) -> Self {
        let nm = memory_names.len();
        FiniteMemoryStrategy {
            memory_names,
            num_obs,
            num_actions,
            select: vec![Dist::new(Vec::new()).unwrap(); nm],
            update: vec![None; nm * num_obs * num_actions],
            initial,
            elements: None,
            select_supp: vec![Vec::new(); nm],
            update_supp: vec![None; nm * num_obs * num_actions],
        }
    }

    /// The memoryless strategy playing `actions` uniformly everywhere.
    pub fn memoryless(pomdp: &Pomdp, actions: &[u32]) -> Self {
        let mut s = Self::new(vec!["m".into()], pomdp.num_observations(), pomdp.num_actions(), 0);
        s.set_select(0, Dist::uniform(actions.iter().copied()));
        for o in 0..pomdp.num_observations() as u32 {
            for &a in actions {
                s.set_update(0, o, a, Dist::point(0));
            }
        }
        s
    }

    fn slot(&self, m: u32, o: u32, a: u32) -> usize {
        (m as usize * self.num_obs + o as usize) * self.num_actions + a as usize
    }

    pub fn set_select(&mut self, m: u32, dist: Dist) {
        self.select_supp[m as usize] = dist.support().collect();
        self.select[m as usize] = dist;
    }

    pub fn set_update(&mut self, m: u32, o: u32, a: u32, dist: Dist) {
        let i = self.slot(m, o, a);
        self.update_supp[i] = Some(dist.support().collect());
        self.update[i] = Some(dist);
    }

    pub fn set_elements(&mut self, elements: Vec<MemoryElement>) {
        self.elements = Some(elements);
    }

    pub fn memory_names(&self) -> &[String] {
        &self.memory_names
    }

    pub fn memory_name(&self, m: u32) -> &str {
        &self.memory_names[m as usize]
    }

    pub fn num_observations(&self) -> usize {
        self.num_obs
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn select(&self, m: u32) -> &Dist {
        &self.select[m as usize]
    }

    pub fn update(&self, m: u32, o: u32, a: u32) -> Option<&Dist> {
        self.update[self.slot(m, o, a)].as_ref()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    /// Memory-element annotations, present on projected strategies and solver witnesses.
    pub fn elements(&self) -> Option<&[MemoryElement]> {
        self.elements.as_deref()
    }

    /// Checks names, index ranges and that every given distribution is a distribution.
    pub fn check(&self) -> Result<()> {
        let nm = self.memory_names.len();
        if nm == 0 || self.initial as usize >= nm {
            return Err(Error::Strategy("no memories or initial memory out of range".into()));
        }
        let mut seen = HashMap::new();
        for n in &self.memory_names {
            if n.is_empty() || seen.insert(n.as_str(), ()).is_some() {
                return Err(Error::Strategy(format!("empty or duplicate memory name `{n}`")));
            }
        }
        let check_dist = |d: &Dist, bound: usize, what: &str| -> Result<()> {
            if d.is_empty() {
                return Err(Error::Strategy(format!("empty {what} distribution")));
            }
            if d.entries().iter().any(|e| e.0 as usize >= bound || !e.1.is_positive()) {
                return Err(Error::Strategy(format!("bad entry in {what} distribution")));
            }
            if !d.total().is_one() {
                return Err(Error::Strategy(format!("{what} weights do not sum to 1")));
            }
            Ok(())
        };
        for d in &self.select {
            check_dist(d, self.num_actions, "action selection")?;
        }
        for d in self.update.iter().flatten() {
            check_dist(d, nm, "memory update")?;
        }
        Ok(())
    }

    /// The same strategy on a model with `num_obs >= self.num_observations()` observations;
    /// memories stay unchanged on the added observations.
    pub fn extend_observations(&self, num_obs: usize) -> Self {
        let mut out = Self::new(self.memory_names.clone(), num_obs, self.num_actions, self.initial);
        for m in 0..self.num_memories() as u32 {
            out.set_select(m, self.select(m).clone());
            for o in 0..num_obs as u32 {
                for a in 0..self.num_actions as u32 {
                    if (o as usize) < self.num_obs {
                        if let Some(d) = self.update(m, o, a) {
                            out.set_update(m, o, a, d.clone());
                        }
                    } else {
                        out.set_update(m, o, a, Dist::point(m));
                    }
                }
            }
        }
        out.elements = self.elements.clone();
        out
    }

    /// The same strategy with the observations `num_obs..` dropped.
    pub fn restrict_observations(&self, num_obs: usize) -> Self {
        let mut out = Self::new(self.memory_names.clone(), num_obs, self.num_actions, self.initial);
        for m in 0..self.num_memories() as u32 {
            out.set_select(m, self.select(m).clone());
            for o in 0..num_obs.min(self.num_obs) as u32 {
                for a in 0..self.num_actions as u32 {
                    if let Some(d) = self.update(m, o, a) {
                        out.set_update(m, o, a, d.clone());
                    }
                }
            }
        }
        out.elements = self.elements.clone();
        out
    }
}

impl StrategySupport for FiniteMemoryStrategy {
    fn num_memories(&self) -> usize {
        self.memory_names.len()
    }

    fn initial_memory(&self) -> u32 {
        self.initial
    }

    fn action_support(&self, m: u32) -> &[u32] {
        &self.select_supp[m as usize]
    }

    fn update_support(&self, m: u32, o: u32, a: u32) -> Option<&[u32]> {
        if o as usize >= self.num_obs || a as usize >= self.num_actions {
            return None;
        }
        self.update_supp[self.slot(m, o, a)].as_deref()
    }
}

/// `(Y, B, L)`: a belief, the `BoolRec` vector and the `SetRec` vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoryElement {
    pub belief: StateSet,
    pub brec: StateSet,
    /// Per state, the sorted color sets.
    pub srec: Vec<Vec<ColorSet>>,
}

impl MemoryElement {
    /// `|Z(x)| = 1`, `col(x) ∈ Z∞` and `C(x) = 1`.
    pub fn is_pseudo_recurrent(&self, x: u32, col: &[u32]) -> bool {
        let z = &self.srec[x as usize];
        self.brec.contains(x as usize)
            && z.len() == 1
            && z[0] & sets::color_bit(col[x as usize]) != 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionGraph {
    pub vertices: Vec<MemoryElement>,
    /// `(from, action, to)`, sorted and deduplicated.
    pub edges: Vec<(u32, u32, u32)>,
    pub initial: u32,
}

/// Forward closure of the projection graph from `({s0}, BoolRec(m0), SetRec(m0))`.
///
/// A vertex `(U, B, L)` gets the edges generated by every memory `m` whose recurrence
/// vectors are `(B, L)`, not only by the memories it was reached with.
pub fn build_projection_graph<S: StrategySupport>(pomdp: &Pomdp, sigma: &S, col: &[u32]) -> Result<ProjectionGraph> {
    let n = pomdp.num_states();
    let nm = sigma.num_memories();
    let rec = compute_rec_functions(pomdp, sigma, col);

    let mut label_ids: HashMap<(StateSet, Vec<Vec<ColorSet>>), u32> = HashMap::new();
    let mut labels: Vec<(StateSet, Vec<Vec<ColorSet>>)> = Vec::new();
    let mut label_of = Vec::with_capacity(nm);
    let mut members: Vec<Vec<u32>> = Vec::new();
    for m in 0..nm as u32 {
        let b = sets::set_of(n, (0..n as u32).filter(|&s| rec.bool_rec(m, s)));
        let l: Vec<Vec<ColorSet>> = (0..n as u32).map(|s| rec.set_rec(m, s).to_vec()).collect();
        let key = (b, l);
        let id = match label_ids.get(&key) {
            Some(&id) => id,
            None => {
                let id = labels.len() as u32;
                label_ids.insert(key.clone(), id);
                labels.push(key);
                members.push(Vec::new());
                id
            }
        };
        members[id as usize].push(m);
        label_of.push(id);
    }

    let mut vertex_ids: HashMap<(StateSet, u32), u32> = HashMap::new();
    let mut vertices: Vec<(StateSet, u32)> = Vec::new();
    let mut intern = |u: StateSet, l: u32, vertices: &mut Vec<(StateSet, u32)>| -> u32 {
        *vertex_ids.entry((u.clone(), l)).or_insert_with(|| {
            vertices.push((u, l));
            (vertices.len() - 1) as u32
        })
    };
    let start = sets::singleton(n, pomdp.initial());
    intern(start, label_of[sigma.initial_memory() as usize], &mut vertices);
    let mut edges = Vec::new();
    let mut next = 0;
    while next < vertices.len() {
        let (u, l) = vertices[next].clone();
        let ou = pomdp.obs(u.minimum().expect("beliefs are non-empty") as u32);
        for &m in &members[l as usize] {
            for &a in sigma.action_support(m) {
                if !pomdp.is_available(ou, a) {
                    continue;
                }
                let ubar = pomdp.post(&u, a);
                let mut obs: Vec<u32> = ubar.ones().map(|s| pomdp.obs(s as u32)).collect();
                obs.sort_unstable();
                obs.dedup();
                for o in obs {
                    let Some(upd) = sigma.update_support(m, o, a) else { continue };
                    let u2 = pomdp.restrict_to_obs(ubar.clone(), o);
                    for &m2 in upd {
                        let v2 = intern(u2.clone(), label_of[m2 as usize], &mut vertices);
                        edges.push((next as u32, a, v2));
                    }
                }
            }
        }
        next += 1;
    }
    edges.sort_unstable();
    edges.dedup();
    let vertices = vertices
        .into_iter()
        .map(|(belief, l)| {
            let (brec, srec) = labels[l as usize].clone();
            MemoryElement { belief, brec, srec }
        })
        .collect();
    Ok(ProjectionGraph { vertices, edges, initial: 0 })
}

/// The projected strategy of a projection graph: memories are vertices, actions are played
/// uniformly over the outgoing edge labels, and updates are uniform over matching edges.
pub fn projected_from_graph(pomdp: &Pomdp, pg: &ProjectionGraph) -> Result<FiniteMemoryStrategy> {
    let nv = pg.vertices.len();
    let names = (0..nv).map(|i| format!("v{i}")).collect();
    let mut out = FiniteMemoryStrategy::new(names, pomdp.num_observations(), pomdp.num_actions(), pg.initial);
    let mut acts: Vec<Vec<u32>> = vec![Vec::new(); nv];
    let mut targets: HashMap<(u32, u32, u32), Vec<u32>> = HashMap::new();
    for &(v, a, v2) in &pg.edges {
        acts[v as usize].push(a);
        let u2 = &pg.vertices[v2 as usize].belief;
        let o = pomdp.obs(u2.minimum().expect("beliefs are non-empty") as u32);
        targets.entry((v, o, a)).or_default().push(v2);
    }
    for (v, a) in acts.into_iter().enumerate() {
        if a.is_empty() {
            return Err(Error::Strategy(format!("projection vertex v{v} has no outgoing edge")));
        }
        out.set_select(v as u32, Dist::uniform(a));
    }
    for ((v, o, a), t) in targets {
        out.set_update(v, o, a, Dist::uniform(t));
    }
    out.set_elements(pg.vertices.clone());
    Ok(out)
}

pub fn project_strategy<S: StrategySupport>(pomdp: &Pomdp, sigma: &S, col: &[u32]) -> Result<FiniteMemoryStrategy> {
    let pg = build_projection_graph(pomdp, sigma, col)?;
    projected_from_graph(pomdp, &pg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `d` is the number of colors.
    Muller,
    /// Priorities in `{0, …, 2d}` or `{0, …, 2d+1}`.
    Parity,
}

/// `2^{2|S|}·(2^{2^d})^{|S|}` for Muller and `2^{3d|S|}` for parity.
pub fn memory_bound(num_states: usize, d: u32, kind: BoundKind) -> BigUint {
    let one = BigUint::one();
    match kind {
        BoundKind::Muller => {
            let exp = 2 * num_states as u64 + (1u64 << d) * num_states as u64;
            one << exp
        }
        BoundKind::Parity => one << (3 * d as u64 * num_states as u64),
    }
}
