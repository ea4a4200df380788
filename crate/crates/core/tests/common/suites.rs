//! Randomized suites shared by the per-module tests and the acceptance run. Each suite
//! generates its instances from a seed, checks them against independent references, and
//! returns a report instead of panicking so that the acceptance run can print a verdict
//! per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use pomdp_finmem::beliefobs::BuildOptions;
use pomdp_finmem::chain::{self, build_product_chain, evaluate_qualitative};
use pomdp_finmem::model::{Objective, Pomdp, WinningMode};
use pomdp_finmem::oracle::{self, enumerate_strategies, memoryless_winning_obs, MemorylessGoal};
use pomdp_finmem::reduce::{self, lift_strategy, Origin, ReductionOutput};
use pomdp_finmem::sets::{self, ColorSet};
use pomdp_finmem::solve::{self, Arena, ArenaOptions, Decision, ExplicitModel, QualModel};
use pomdp_finmem::strategy::{
    build_projection_graph, memory_bound, projected_from_graph, BoundKind, FiniteMemoryStrategy, StrategySupport,
};
use rand::Rng;

use super::*;

/// Outcome of one suite run.
#[derive(Debug, Default)]
pub struct Report {
    pub instances: usize,
    /// Individual checks performed, for instance strategies times reductions.
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl Report {
    pub fn fail(&mut self, what: String) {
        if self.failures.len() < 20 {
            self.failures.push(what);
        } else if self.failures.len() == 20 {
            self.failures.push("further failures omitted".into());
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn assert_ok(&self) {
        assert!(self.ok(), "{} failures:\n{}", self.failures.len(), self.failures.join("\n"));
    }
}

/// Record of every yes decision seen by the suites, re-verified independently.
#[derive(Debug, Default)]
pub struct Certificates {
    pub yes: usize,
    pub failures: Vec<String>,
}

impl Certificates {
    /// Re-checks a yes decision on the original model by building its chain afresh.
    pub fn check(&mut self, label: &str, pomdp: &Pomdp, obj: &Objective, d: &Decision) {
        if !d.verdict {
            return;
        }
        self.yes += 1;
        let Some(w) = &d.witness else {
            self.failures.push(format!("{label}: yes without witness"));
            return;
        };
        let verdict = build_product_chain(pomdp, w).and_then(|ch| evaluate_qualitative(&ch, obj, d.mode));
        match verdict {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("{label}: witness loses")),
            Err(e) => self.failures.push(format!("{label}: witness error {e}")),
        }
    }
}

/// Product graph over all `(s, m)` pairs, node `s·|M| + m`, built directly from the
/// transition supports and the strategy supports.
pub fn full_product(pomdp: &Pomdp, sigma: &FiniteMemoryStrategy) -> Vec<Vec<u32>> {
    let nm = sigma.memory_names().len();
    let mut adj = vec![Vec::new(); pomdp.num_states() * nm];
    for s in 0..pomdp.num_states() as u32 {
        for m in 0..nm as u32 {
            let v = &mut adj[s as usize * nm + m as usize];
            for (a, _) in sigma.select(m).entries() {
                if !pomdp.is_available(pomdp.obs(s), *a) {
                    continue;
                }
                for &t in pomdp.support(s, *a) {
                    if let Some(upd) = sigma.update(m, pomdp.obs(t), *a) {
                        for m2 in upd.support() {
                            v.push(t * nm as u32 + m2);
                        }
                    }
                }
            }
            v.sort_unstable();
            v.dedup();
        }
    }
    adj
}

/// `(BoolRec, SetRec)` over all pairs by closure, indexed `[m][s]`.
pub fn reference_rec(pomdp: &Pomdp, sigma: &FiniteMemoryStrategy, col: &[u32]) -> Vec<Vec<(bool, Vec<ColorSet>)>> {
    let nm = sigma.memory_names().len();
    let adj = full_product(pomdp, sigma);
    let node_col: Vec<u32> = (0..adj.len()).map(|v| col[v / nm]).collect();
    let setrec = closure_set_rec(&adj, &node_col);
    let bottoms = closure_bottom_sccs(&adj);
    let in_bottom: BTreeSet<u32> = bottoms.iter().flatten().copied().collect();
    (0..nm)
        .map(|m| {
            (0..pomdp.num_states())
                .map(|s| {
                    let v = s * nm + m;
                    (in_bottom.contains(&(v as u32)), setrec[v].iter().copied().collect())
                })
                .collect()
        })
        .collect()
}

fn random_projection_instance(r: &mut TestRng) -> (Pomdp, FiniteMemoryStrategy, Vec<u32>) {
    let n = r.gen_range(1..=4);
    let a = r.gen_range(1..=2);
    let o = r.gen_range(1..=n);
    let p = random_pomdp(r, n, a, o);
    let m = r.gen_range(1..=3);
    let sigma = random_strategy(r, &p, m);
    let col = random_priorities(r, n, 4);
    (p, sigma, col)
}

/// Projection suite. The first report covers recurrence and winner preservation and the
/// memory bound; the second covers the edge-wise and node-wise invariants of the
/// projection graph and the projected strategy's chain.
pub fn projection_suite(seed: u64, count: usize) -> (Report, Report) {
    let start = Instant::now();
    let mut pres = Report::default();
    let mut inv = Report::default();
    let mut r = rng(seed);
    for i in 0..count {
        let (p, sigma, col) = random_projection_instance(&mut r);
        pres.instances += 1;
        inv.instances += 1;
        let tag = format!("instance {i} (seed {seed})");
        let pg = match build_projection_graph(&p, &sigma, &col) {
            Ok(pg) => pg,
            Err(e) => {
                pres.fail(format!("{tag}: projection graph error {e}"));
                continue;
            }
        };
        let proj = match projected_from_graph(&p, &pg) {
            Ok(s) => s,
            Err(e) => {
                pres.fail(format!("{tag}: projected strategy error {e}"));
                continue;
            }
        };
        check_preservation(&mut pres, &tag, &p, &sigma, &proj, &col);
        check_projection_edges(&mut inv, &tag, &p, &sigma, &col, &pg);
        check_projected_chain(&mut inv, &tag, &p, &proj, &col);
    }
    pres.elapsed = start.elapsed();
    inv.elapsed = start.elapsed();
    (pres, inv)
}

fn check_preservation(
    rep: &mut Report,
    tag: &str,
    p: &Pomdp,
    sigma: &FiniteMemoryStrategy,
    proj: &FiniteMemoryStrategy,
    col: &[u32],
) {
    let ours = reference_rec(p, sigma, col);
    let theirs = reference_rec(p, proj, col);
    let s0 = p.initial() as usize;
    rep.checks += 1;
    let before = &ours[sigma.initial() as usize][s0].1;
    let after = &theirs[proj.initial() as usize][s0].1;
    if before != after {
        rep.fail(format!("{tag}: SetRec at the start changed from {before:?} to {after:?}"));
    }
    let obj = Objective::Parity(col.to_vec());
    for mode in [WinningMode::AlmostSure, WinningMode::Positive] {
        rep.checks += 1;
        let a = chain::verify(p, sigma, &obj, mode).unwrap();
        let b = chain::verify(p, proj, &obj, mode).unwrap();
        if a != b {
            rep.fail(format!("{tag}: {mode} verdict {a} became {b}"));
        }
    }
    let ncolors = col.iter().copied().max().unwrap_or(0) + 1;
    let bound = memory_bound(p.num_states(), ncolors, BoundKind::Muller);
    rep.checks += 1;
    if num_bigint::BigUint::from(proj.memory_names().len()) > bound {
        rep.fail(format!("{tag}: {} memories exceed the bound {bound}", proj.memory_names().len()));
    }
    // Projecting again keeps the recurrence data at the start.
    rep.checks += 1;
    match pomdp_finmem::strategy::project_strategy(p, proj, col) {
        Ok(twice) => {
            let again = reference_rec(p, &twice, col);
            if &again[twice.initial() as usize][s0].1 != after {
                rep.fail(format!("{tag}: second projection changed SetRec at the start"));
            }
        }
        Err(e) => rep.fail(format!("{tag}: second projection error {e}")),
    }
}

fn check_projection_edges(
    rep: &mut Report,
    tag: &str,
    p: &Pomdp,
    sigma: &FiniteMemoryStrategy,
    col: &[u32],
    pg: &pomdp_finmem::strategy::ProjectionGraph,
) {
    let rec = reference_rec(p, sigma, col);
    let nm = sigma.memory_names().len();
    let label = |m: usize| -> (Vec<bool>, Vec<Vec<ColorSet>>) {
        (rec[m].iter().map(|x| x.0).collect(), rec[m].iter().map(|x| x.1.clone()).collect())
    };
    let vlabel = |v: u32| -> (Vec<bool>, Vec<Vec<ColorSet>>) {
        let e = &pg.vertices[v as usize];
        ((0..p.num_states()).map(|s| e.brec.contains(s)).collect(), e.srec.clone())
    };
    let first = &pg.vertices[pg.initial as usize];
    rep.checks += 1;
    if sets::members(&first.belief) != vec![p.initial()] || vlabel(pg.initial) != label(sigma.initial() as usize) {
        rep.fail(format!("{tag}: initial vertex mismatch"));
    }
    for &(v, a, v2) in &pg.edges {
        rep.checks += 1;
        let from = &pg.vertices[v as usize];
        let to = &pg.vertices[v2 as usize];
        // Independent recomputation of the successor belief.
        let mut ubar = BTreeSet::new();
        for s in from.belief.ones() {
            ubar.extend(p.support(s as u32, a).iter().copied());
        }
        let Some(&any) = to.belief.ones().next().map(|s| s as u32).as_ref() else {
            rep.fail(format!("{tag}: empty belief at v{v2}"));
            continue;
        };
        let o = p.obs(any);
        let expect: Vec<u32> = ubar.iter().copied().filter(|&s| p.obs(s) == o).collect();
        if sets::members(&to.belief) != expect {
            rep.fail(format!("{tag}: edge v{v} -{a}-> v{v2} belief {:?} expected {expect:?}", sets::members(&to.belief)));
        }
        // Some pair of memories with these labels generates the edge.
        let generated = (0..nm).any(|m| {
            label(m) == vlabel(v)
                && sigma.select(m as u32).support().any(|b| b == a)
                && sigma
                    .update(m as u32, o, a)
                    .is_some_and(|d| d.support().any(|m2| label(m2 as usize) == vlabel(v2)))
        });
        if !generated {
            rep.fail(format!("{tag}: edge v{v} -{a}-> v{v2} has no generating memories"));
        }
        // Recurrence membership is kept and the color sets shrink along the edge.
        for s in 0..p.num_states() as u32 {
            if !p.is_available(p.obs(s), a) {
                continue;
            }
            for &t in p.support(s, a) {
                if p.obs(t) != o {
                    continue;
                }
                if from.brec.contains(s as usize) && !to.brec.contains(t as usize) {
                    rep.fail(format!("{tag}: edge v{v} -{a}-> v{v2} drops recurrence at {t}"));
                }
                let (big, small) = (&from.srec[s as usize], &to.srec[t as usize]);
                if !small.iter().all(|z| big.contains(z)) {
                    rep.fail(format!("{tag}: edge v{v} -{a}-> v{v2} grows SetRec at {t}"));
                }
            }
        }
    }
}

fn check_projected_chain(rep: &mut Report, tag: &str, p: &Pomdp, proj: &FiniteMemoryStrategy, col: &[u32]) {
    let elems = proj.elements().expect("projected strategies carry elements");
    let ch = match build_product_chain(p, proj) {
        Ok(c) => c,
        Err(e) => {
            rep.fail(format!("{tag}: projected chain error {e}"));
            return;
        }
    };
    let nodes = ch.nodes();
    let adj: Vec<Vec<u32>> = (0..nodes.len() as u32).map(|v| ch.graph().successors(v).to_vec()).collect();
    let reach = closure(&adj);
    let z = |v: usize| &elems[nodes[v].1 as usize].srec[nodes[v].0 as usize];
    let c = |v: usize| elems[nodes[v].1 as usize].brec.contains(nodes[v].0 as usize);
    let pseudo: Vec<bool> =
        (0..nodes.len()).map(|v| elems[nodes[v].1 as usize].is_pseudo_recurrent(nodes[v].0, col)).collect();
    for v in 0..nodes.len() {
        rep.checks += 1;
        if z(v).is_empty() {
            rep.fail(format!("{tag}: node {v} has an empty Z"));
        }
        if c(v) && z(v).len() != 1 {
            rep.fail(format!("{tag}: node {v} has C = 1 but |Z| = {}", z(v).len()));
        }
        for &w in &adj[v] {
            let w = w as usize;
            if !z(w).iter().all(|x| z(v).contains(x)) {
                rep.fail(format!("{tag}: Z grows from node {v} to {w}"));
            }
            if c(v) && !c(w) {
                rep.fail(format!("{tag}: C = 1 is left from node {v} to {w}"));
            }
            if c(v) && z(v).len() == 1 && z(v)[0] & sets::color_bit(col[nodes[w].0 as usize]) == 0 {
                rep.fail(format!("{tag}: color of node {w} outside Z after C = 1"));
            }
        }
        // Some pseudo-recurrent node is reachable.
        if !(0..nodes.len()).any(|w| reach[v][w] && pseudo[w]) {
            rep.fail(format!("{tag}: node {v} reaches no pseudo-recurrent node"));
        }
        if pseudo[v] {
            for w in 0..nodes.len() {
                if reach[v][w] && (!pseudo[w] || z(w) != z(v)) {
                    rep.fail(format!("{tag}: pseudo-recurrence lost from node {v} to {w}"));
                }
            }
            for color in sets::colors_of(z(v)[0]) {
                if !(0..nodes.len()).any(|w| reach[v][w] && col[nodes[w].0 as usize] == color) {
                    rep.fail(format!("{tag}: color {color} of Z at node {v} is never seen"));
                }
            }
        }
    }
}

/// Verdicts of a strategy on a model and of its lift on a reduction, in one mode.
fn transfer(
    input: &Pomdp,
    input_obj: &Objective,
    red: &ReductionOutput,
    sigma: &FiniteMemoryStrategy,
    mode: WinningMode,
) -> Result<(bool, bool), String> {
    let before = chain::verify(input, sigma, input_obj, mode).map_err(|e| e.to_string())?;
    let lifted = lift_strategy(red, sigma);
    let after = chain::verify(&red.pomdp, &lifted, &red.objective, mode).map_err(|e| e.to_string())?;
    Ok((before, after))
}

fn check_reduction_shape(rep: &mut Report, tag: &str, input: &Pomdp, red: &ReductionOutput, positive: bool) {
    rep.checks += 1;
    for (s, o) in red.origin.iter().enumerate() {
        match *o {
            Origin::Copy { state, .. } => {
                if red.pomdp.obs(s as u32) != input.obs(state)
                    || red.pomdp.obs_name(red.pomdp.obs(s as u32)) != input.obs_name(input.obs(state))
                {
                    rep.fail(format!("{tag}: copy of {state} is observed differently"));
                }
            }
            Origin::FreshInitial => {
                // The fresh start is seen like the original start so strategies transfer.
                if red.pomdp.obs(s as u32) != input.obs(input.initial()) {
                    rep.fail(format!("{tag}: fresh initial state is not observed like the start"));
                }
            }
            _ => {
                if (red.pomdp.obs(s as u32) as usize) < input.num_observations()
                    || red.pomdp.obs_states(red.pomdp.obs(s as u32)).len() != 1
                {
                    rep.fail(format!("{tag}: fresh state {s} shares an observation"));
                }
            }
        }
    }
    for s in 0..red.pomdp.num_states() as u32 {
        for a in 0..red.pomdp.num_actions() as u32 {
            for &t in red.pomdp.support(s, a) {
                if let (Origin::Copy { copy: i, .. }, Origin::Copy { copy: j, .. }) =
                    (red.origin[s as usize], red.origin[t as usize])
                {
                    if (positive && i != j) || (!positive && j > i) {
                        rep.fail(format!("{tag}: edge from copy {i} to copy {j}"));
                    }
                }
            }
        }
    }
}

fn random_reduction_instance(r: &mut TestRng) -> Pomdp {
    let n = r.gen_range(1..=3);
    let a = r.gen_range(1..=2);
    let o = r.gen_range(1..=n.min(2));
    random_pomdp(r, n, a, o)
}

/// Reduction suite: every support strategy with at most two memories keeps its verdict
/// across each reduction, and the reductions have the stated sizes and structure.
pub fn reduction_suite(seed: u64, count: usize) -> Report {
    let start = Instant::now();
    let mut rep = Report::default();
    let mut r = rng(seed);
    for i in 0..count {
        let p = random_reduction_instance(&mut r);
        let n = p.num_states();
        let pos_pr = random_priorities(&mut r, n, 4);
        let as_pr = random_priorities(&mut r, n, 5);
        rep.instances += 1;
        let tag = format!("instance {i} (seed {seed})");

        let pos = reduce::positive_parity_to_buchi(&p, &pos_pr).unwrap();
        let three = reduce::parity_to_three(&p, &as_pr).unwrap();
        let cob = reduce::three_to_cobuchi(&three.pomdp, &three.priorities).unwrap();
        let composed = reduce::almost_parity_to_cobuchi(&p, &as_pr).unwrap();

        rep.checks += 1;
        let dp = reduce::positive_copies(&pos_pr) as usize;
        let da = reduce::almost_copies(&as_pr) as usize;
        if pos.pomdp.num_states() != n * (dp + 1) + 2 || composed.pomdp.num_states() != n * (da + 1) + 1 {
            rep.fail(format!("{tag}: reduction sizes"));
        }
        if three.pomdp.num_states() != n * (da + 1) || three.priorities.iter().any(|&q| q > 2) {
            rep.fail(format!("{tag}: three-priority reduction shape"));
        }
        check_reduction_shape(&mut rep, &tag, &p, &pos, true);
        check_reduction_shape(&mut rep, &tag, &p, &three, false);

        let pos_obj = Objective::Parity(pos_pr.clone());
        let as_obj = Objective::Parity(as_pr.clone());
        let three_obj = Objective::Parity(three.priorities.clone());
        for cand in enumerate_strategies(&p, 2) {
            let sigma = cand.to_strategy(&p);
            let pairs = [
                ("positive", transfer(&p, &pos_obj, &pos, &sigma, WinningMode::Positive)),
                ("three", transfer(&p, &as_obj, &three, &sigma, WinningMode::AlmostSure)),
                ("cobuchi", transfer(&three.pomdp, &three_obj, &cob, &lift_strategy(&three, &sigma), WinningMode::AlmostSure)),
                ("composed", transfer(&p, &as_obj, &composed, &sigma, WinningMode::AlmostSure)),
            ];
            for (what, res) in pairs {
                rep.checks += 1;
                match res {
                    Ok((a, b)) if a == b => {}
                    Ok((a, b)) => rep.fail(format!("{tag}: {what} reduction turns {a} into {b} for {cand:?}")),
                    Err(e) => rep.fail(format!("{tag}: {what} reduction error {e}")),
                }
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Fixpoint suite: on random belief-observation models, the safety and Büchi fixpoints
/// equal the winning observations of stationary observation-based strategies.
pub fn fixpoint_suite(seed: u64, count: usize) -> Report {
    let start = Instant::now();
    let mut rep = Report::default();
    let mut r = rng(seed);
    for i in 0..count {
        let no = r.gen_range(1..=3);
        let na = r.gen_range(1..=2);
        let p = random_belief_obs_pomdp(&mut r, no, na, 2);
        let g = ExplicitModel::from_pomdp(&p);
        rep.instances += 1;
        let tag = format!("instance {i} (seed {seed})");
        rep.checks += 1;
        if !pomdp_finmem::beliefobs::is_belief_observation(&p, usize::MAX) {
            rep.fail(format!("{tag}: generator produced a model without the belief property"));
            continue;
        }
        let arena = Arena::new(&g, ArenaOptions::default());
        for _ in 0..3 {
            let f = random_set(&mut r, g.num_states(), 0.7);
            let t = random_set(&mut r, g.num_states(), 0.4);
            let safe = arena.almost_safe(&f);
            let want = memoryless_winning_obs(&g, &MemorylessGoal::Safe(f.clone()));
            rep.checks += 1;
            if safe.obs != want {
                rep.fail(format!("{tag}: safety {:?} vs {:?}", safe.obs.ones().collect::<Vec<_>>(), want.ones().collect::<Vec<_>>()));
            }
            for o in safe.obs.ones() {
                if safe.strategy[o].is_empty() {
                    rep.fail(format!("{tag}: safety strategy empty at {o}"));
                }
            }
            let buchi = arena.almost_buchi(&t);
            let want = memoryless_winning_obs(&g, &MemorylessGoal::Buchi(t.clone()));
            rep.checks += 1;
            if buchi.obs != want {
                rep.fail(format!("{tag}: Büchi {:?} vs {:?}", buchi.obs.ones().collect::<Vec<_>>(), want.ones().collect::<Vec<_>>()));
            }
            // Reachability: the target made absorbing, then Büchi on the same arena. Stationary
            // enumeration is only a reference while the absorbed model keeps the belief property.
            let reach = solve::almost_reach(&g, ArenaOptions::default(), &t);
            let abs = p.with_absorbing(&sets::set_of(p.num_states(), t.ones().map(|s| g.pomdp_state(s as u32))));
            if !every_observation_closed(&abs) {
                continue;
            }
            let ga = ExplicitModel::from_pomdp(&abs);
            let ta = sets::set_of(ga.num_states(), t.ones().map(|s| ga.model_state(g.pomdp_state(s as u32))));
            let want = memoryless_winning_obs(&ga, &MemorylessGoal::Buchi(ta));
            rep.checks += 1;
            if reach.obs != want {
                rep.fail(format!("{tag}: reachability {:?} vs {:?}", reach.obs.ones().collect::<Vec<_>>(), want.ones().collect::<Vec<_>>()));
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Every full observation block maps onto full observation blocks under every action, whether or
/// not the block is reachable from the initial state.
fn every_observation_closed(p: &Pomdp) -> bool {
    (0..p.num_observations() as u32).all(|o| {
        let y = sets::set_of(p.num_states(), p.obs_states(o).iter().copied());
        p.available(o).iter().all(|&a| {
            let post = p.post(&y, a);
            post.ones().all(|t| {
                let o2 = p.obs(t as u32);
                p.obs_states(o2).iter().all(|&u| post.contains(u as usize))
            })
        })
    })
}

/// Perfect-observation suite: the solver and stationary enumeration agree in both modes.
pub fn perfect_observation_suite(seed: u64, count: usize, certs: &mut Certificates) -> Report {
    let start = Instant::now();
    let mut rep = Report::default();
    let mut r = rng(seed);
    for i in 0..count {
        let n = r.gen_range(1..=4);
        let na = r.gen_range(1..=2);
        let p = random_mdp(&mut r, n, na);
        let pr = random_priorities(&mut r, n, 2);
        let obj = Objective::Parity(pr.clone());
        rep.instances += 1;
        let tag = format!("instance {i} (seed {seed})");
        for mode in [WinningMode::AlmostSure, WinningMode::Positive] {
            rep.checks += 1;
            let want = oracle::memoryless_decide(&p, &obj, mode).unwrap().is_some();
            match solve::solve_parity_fm(&p, &pr, mode, BuildOptions::default()) {
                Ok(d) => {
                    certs.check(&tag, &p, &obj, &d);
                    if d.verdict != want {
                        rep.fail(format!("{tag}: {mode} solver {} stationary {want} priorities {pr:?}", d.verdict));
                    }
                }
                Err(e) => rep.fail(format!("{tag}: {mode} solver error {e}")),
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Solver against bounded enumeration on small partially observable models: an oracle
/// winner forces a solver yes, and every solver yes is certified.
pub fn solver_oracle_suite(seed: u64, count: usize, k: u32, certs: &mut Certificates) -> Report {
    let start = Instant::now();
    let mut rep = Report::default();
    let mut r = rng(seed);
    for i in 0..count {
        let n = r.gen_range(1..=3);
        let na = r.gen_range(1..=2);
        let no = r.gen_range(1..=n);
        let p = random_pomdp(&mut r, n, na, no);
        let tag = format!("instance {i} (seed {seed})");
        rep.instances += 1;
        for mode in [WinningMode::AlmostSure, WinningMode::Positive] {
            let pr = match mode {
                WinningMode::AlmostSure => random_priorities(&mut r, n, 1).into_iter().map(|q| q + 1).collect::<Vec<_>>(),
                WinningMode::Positive => random_priorities(&mut r, n, 1),
            };
            let obj = Objective::Parity(pr.clone());
            rep.checks += 1;
            let o = oracle::oracle_decide(&p, &obj, mode, k, 20_000).unwrap();
            match solve::solve_parity_fm(&p, &pr, mode, BuildOptions::default()) {
                Ok(d) => {
                    certs.check(&tag, &p, &obj, &d);
                    if o.is_yes() && !d.verdict {
                        rep.fail(format!("{tag}: {mode} oracle yes at k={k} but solver no, priorities {pr:?}"));
                    }
                }
                Err(e) => rep.fail(format!("{tag}: {mode} solver error {e}")),
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Completion within the default state budget: the fixtures and random models with up to
/// four states and priorities up to four, in both modes.
pub fn budget_suite(seed: u64, count: usize, certs: &mut Certificates) -> Report {
    let start = Instant::now();
    let mut rep = Report::default();
    let run = |rep: &mut Report, certs: &mut Certificates, tag: String, p: &Pomdp, obj: &Objective| {
        for mode in [WinningMode::AlmostSure, WinningMode::Positive] {
            rep.checks += 1;
            match solve::solve(p, obj, mode, BuildOptions::default()) {
                Ok(d) => certs.check(&tag, p, obj, &d),
                Err(e) => rep.fail(format!("{tag}: {mode} {e}")),
            }
        }
    };
    for name in ["EX1.pomdp", "EX2.pomdp"] {
        let (p, obj) = fixture(name);
        rep.instances += 1;
        run(&mut rep, certs, name.to_string(), &p, &obj);
    }
    let mut r = rng(seed);
    for i in 0..count {
        let n = r.gen_range(1..=4);
        let na = r.gen_range(1..=2);
        let no = r.gen_range(1..=n);
        let p = random_pomdp(&mut r, n, na, no);
        let obj = Objective::Parity(random_priorities(&mut r, n, 4));
        rep.instances += 1;
        run(&mut rep, certs, format!("instance {i} (seed {seed})"), &p, &obj);
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Distinct support patterns of a strategy, for comparing enumeration streams.
pub fn support_key(s: &oracle::SupportStrategy) -> (Vec<Vec<u32>>, BTreeMap<(u32, u32, u32), Vec<u32>>) {
    let k = s.num_memories();
    ((0..k as u32).map(|m| s.actions(m).to_vec()).collect(), s.updates().clone())
}
