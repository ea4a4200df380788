//! The Markov chain induced by a finite-memory strategy, its recurrent classes, and the
//! recurrence functions `SetRec` / `BoolRec`.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use petgraph::csr::Csr;
use petgraph::Directed;

use crate::error::{Error, Result};
use crate::model::{Objective, Pomdp, WinningMode};
use crate::sets::{self, ColorSet};
use crate::strategy::StrategySupport;

/// A directed graph in compressed adjacency form with sorted, deduplicated successors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Digraph {
    pub fn from_adjacency(adj: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut succ in adj {
            succ.sort_unstable();
            succ.dedup();
            targets.extend(succ);
            offsets.push(targets.len() as u32);
        }
        Digraph { offsets, targets }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, v: u32) -> &[u32] {
        &self.targets[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_nodes() as u32).flat_map(move |v| self.successors(v).iter().map(move |&t| (v, t)))
    }
}

/// Strongly connected components, listed in reverse topological order (sinks first).
#[derive(Clone, Debug)]
pub struct SccDecomposition {
    pub component: Vec<u32>,
    pub components: Vec<Vec<u32>>,
    pub bottom: Vec<bool>,
}

pub fn scc_decomposition(g: &Digraph) -> SccDecomposition {
    let n = g.num_nodes();
    let edges: Vec<(u32, u32)> = g.edges().collect();
    let mut csr: Csr<(), (), Directed, u32> = Csr::from_sorted_edges(&edges).expect("edges are sorted");
    while csr.node_count() < n {
        csr.add_node(());
    }
    let mut components: Vec<Vec<u32>> = petgraph::algo::tarjan_scc(&csr)
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    components.retain(|c| !c.is_empty());
    let mut component = vec![0u32; n];
    for (i, c) in components.iter().enumerate() {
        for &v in c {
            component[v as usize] = i as u32;
        }
    }
    let bottom = components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.iter()
                .all(|&v| g.successors(v).iter().all(|&t| component[t as usize] == i as u32))
        })
        .collect();
    SccDecomposition { component, components, bottom }
}

/// Bottom SCCs, each sorted, ordered by their minimal node.
pub fn bottom_sccs(g: &Digraph) -> Vec<Vec<u32>> {
    let dec = scc_decomposition(g);
    let mut out: Vec<Vec<u32>> = dec
        .components
        .into_iter()
        .zip(dec.bottom)
        .filter_map(|(c, b)| b.then_some(c))
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

pub fn reachable(g: &Digraph, sources: impl IntoIterator<Item = u32>) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(g.num_nodes());
    let mut stack: Vec<u32> = Vec::new();
    for s in sources {
        if !seen.put(s as usize) {
            stack.push(s);
        }
    }
    while let Some(v) = stack.pop() {
        for &t in g.successors(v) {
            if !seen.put(t as usize) {
                stack.push(t);
            }
        }
    }
    seen
}

/// For every component, the set of bottom components reachable from it (as component ids).
pub fn reachable_bottoms(g: &Digraph, dec: &SccDecomposition) -> Vec<FixedBitSet> {
    let nc = dec.components.len();
    let mut rec: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(nc); nc];
    // Components come sinks first, so successors are always finished before use.
    for (i, c) in dec.components.iter().enumerate() {
        if dec.bottom[i] {
            rec[i].insert(i);
            continue;
        }
        let mut acc = FixedBitSet::with_capacity(nc);
        for &v in c {
            for &t in g.successors(v) {
                let tc = dec.component[t as usize] as usize;
                if tc != i {
                    acc.union_with(&rec[tc]);
                }
            }
        }
        rec[i] = acc;
    }
    rec
}

/// The reachable fragment of `G↾σ` from `(s0, m0)`.
#[derive(Clone, Debug)]
pub struct ProductChain {
    nodes: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), u32>,
    graph: Digraph,
    bottom: Vec<Vec<u32>>,
}

impl ProductChain {
    /// Nodes as `(state, memory)` pairs; node 0 is `(s0, m0)`.
    pub fn nodes(&self) -> &[(u32, u32)] {
        &self.nodes
    }

    pub fn node_index(&self, state: u32, memory: u32) -> Option<u32> {
        self.index.get(&(state, memory)).copied()
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    /// Recurrent classes, each sorted, ordered by minimal node index.
    pub fn bottom_sccs(&self) -> &[Vec<u32>] {
        &self.bottom
    }

    /// For each node, the ids (positions in [`Self::bottom_sccs`]) of reachable classes.
    pub fn rec_of(&self) -> Vec<FixedBitSet> {
        let dec = scc_decomposition(&self.graph);
        let per_comp = reachable_bottoms(&self.graph, &dec);
        let mut comp_to_id = vec![usize::MAX; dec.components.len()];
        for (id, class) in self.bottom.iter().enumerate() {
            comp_to_id[dec.component[class[0] as usize] as usize] = id;
        }
        (0..self.nodes.len())
            .map(|v| {
                let mut out = FixedBitSet::with_capacity(self.bottom.len());
                for c in per_comp[dec.component[v] as usize].ones() {
                    out.insert(comp_to_id[c]);
                }
                out
            })
            .collect()
    }

    /// Sorted, deduplicated first projection of a class.
    pub fn class_states(&self, class: &[u32]) -> Vec<u32> {
        let mut states: Vec<u32> = class.iter().map(|&v| self.nodes[v as usize].0).collect();
        states.sort_unstable();
        states.dedup();
        states
    }

    /// Plain-text edge list and class listing with stable ordering.
    pub fn dump(&self, pomdp: &Pomdp, memory_names: &[String]) -> String {
        let name = |v: u32| {
            let (s, m) = self.nodes[v as usize];
            format!("({},{})", pomdp.state_name(s), memory_names[m as usize])
        };
        let mut out = String::new();
        for (v, t) in self.graph.edges() {
            let _ = writeln!(out, "{} -> {}", name(v), name(t));
        }
        for class in &self.bottom {
            let members: Vec<String> = class.iter().map(|&v| name(v)).collect();
            let _ = writeln!(out, "class {}", members.join(" "));
        }
        out
    }
}

fn check_action(pomdp: &Pomdp, s: u32, m: u32, a: u32) -> Result<()> {
    if a as usize >= pomdp.num_actions() || !pomdp.is_available(pomdp.obs(s), a) {
        return Err(Error::Strategy(format!(
            "memory {m} plays action {a}, which is not available in state {}",
            pomdp.state_name(s)
        )));
    }
    Ok(())
}

pub fn build_product_chain<S: StrategySupport>(pomdp: &Pomdp, sigma: &S) -> Result<ProductChain> {
    let nm = sigma.num_memories();
    let m0 = sigma.initial_memory();
    if m0 as usize >= nm {
        return Err(Error::Strategy("initial memory out of range".into()));
    }
    let mut nodes = vec![(pomdp.initial(), m0)];
    let mut index = HashMap::new();
    index.insert((pomdp.initial(), m0), 0u32);
    let mut adj: Vec<Vec<u32>> = Vec::new();
    let mut next = 0;
    while next < nodes.len() {
        let (s, m) = nodes[next];
        let mut succ = Vec::new();
        let acts = sigma.action_support(m);
        if acts.is_empty() {
            return Err(Error::Strategy(format!("memory {m} selects no action")));
        }
        for &a in acts {
            check_action(pomdp, s, m, a)?;
            for &t in pomdp.support(s, a) {
                let o = pomdp.obs(t);
                let upd = sigma.update_support(m, o, a).ok_or_else(|| {
                    Error::Strategy(format!(
                        "no memory update for memory {m}, observation {}, action {}",
                        pomdp.obs_name(o),
                        pomdp.action_name(a)
                    ))
                })?;
                if upd.is_empty() {
                    return Err(Error::Strategy(format!(
                        "empty memory update for memory {m}, observation {}, action {}",
                        pomdp.obs_name(o),
                        pomdp.action_name(a)
                    )));
                }
                for &m2 in upd {
                    if m2 as usize >= nm {
                        return Err(Error::Strategy("memory update target out of range".into()));
                    }
                    let id = *index.entry((t, m2)).or_insert_with(|| {
                        nodes.push((t, m2));
                        (nodes.len() - 1) as u32
                    });
                    succ.push(id);
                }
            }
        }
        adj.push(succ);
        next += 1;
    }
    let graph = Digraph::from_adjacency(adj);
    let bottom = bottom_sccs(&graph);
    Ok(ProductChain { nodes, index, graph, bottom })
}

/// Qualitative evaluation: almost-sure iff every reachable class wins, positive iff
/// some reachable class wins.
pub fn evaluate_qualitative(chain: &ProductChain, obj: &Objective, mode: WinningMode) -> Result<bool> {
    let mut verdicts = chain
        .bottom_sccs()
        .iter()
        .map(|c| obj.class_wins(&chain.class_states(c)));
    match mode {
        WinningMode::AlmostSure => {
            for v in verdicts.by_ref() {
                if !v? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        WinningMode::Positive => {
            for v in verdicts.by_ref() {
                if v? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Builds the chain and evaluates it.
pub fn verify<S: StrategySupport>(pomdp: &Pomdp, sigma: &S, obj: &Objective, mode: WinningMode) -> Result<bool> {
    let chain = build_product_chain(pomdp, sigma)?;
    evaluate_qualitative(&chain, obj, mode)
}

/// `SetRec_σ` and `BoolRec_σ` over all pairs in `S × M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecFunctions {
    num_states: usize,
    set_rec: Vec<Vec<ColorSet>>,
    bool_rec: FixedBitSet,
}

impl RecFunctions {
    /// Sorted color sets of the classes reachable from `(s, m)`.
    pub fn set_rec(&self, m: u32, s: u32) -> &[ColorSet] {
        &self.set_rec[m as usize * self.num_states + s as usize]
    }

    pub fn bool_rec(&self, m: u32, s: u32) -> bool {
        self.bool_rec.contains(m as usize * self.num_states + s as usize)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }
}

/// Computes the recurrence functions on the full product graph over `S × M`. Updates the
/// strategy leaves undefined (only possible for pairs unreachable from `(s0, m0)`) and
/// actions unavailable at a state contribute no edges there.
pub fn compute_rec_functions<S: StrategySupport>(pomdp: &Pomdp, sigma: &S, col: &[u32]) -> RecFunctions {
    let n = pomdp.num_states();
    let nm = sigma.num_memories();
    let node = |s: u32, m: u32| m * n as u32 + s;
    let mut adj = vec![Vec::new(); n * nm];
    for m in 0..nm as u32 {
        for s in 0..n as u32 {
            let o = pomdp.obs(s);
            let succ = &mut adj[node(s, m) as usize];
            for &a in sigma.action_support(m) {
                if !pomdp.is_available(o, a) {
                    continue;
                }
                for &t in pomdp.support(s, a) {
                    if let Some(upd) = sigma.update_support(m, pomdp.obs(t), a) {
                        succ.extend(upd.iter().map(|&m2| node(t, m2)));
                    }
                }
            }
        }
    }
    let graph = Digraph::from_adjacency(adj);
    let dec = scc_decomposition(&graph);
    let per_comp = reachable_bottoms(&graph, &dec);
    let comp_colors: Vec<ColorSet> = dec
        .components
        .iter()
        .map(|c| {
            c.iter()
                .fold(0, |acc, &v| acc | sets::color_bit(col[v as usize % n]))
        })
        .collect();
    let mut set_rec = Vec::with_capacity(n * nm);
    let mut bool_rec = FixedBitSet::with_capacity(n * nm);
    for v in 0..n * nm {
        let c = dec.component[v] as usize;
        let mut colors: Vec<ColorSet> = per_comp[c].ones().map(|b| comp_colors[b]).collect();
        colors.sort_unstable();
        colors.dedup();
        set_rec.push(colors);
        if dec.bottom[c] {
            bool_rec.insert(v);
        }
    }
    RecFunctions { num_states: n, set_rec, bool_rec }
}
