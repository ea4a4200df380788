//! Plain-text formats for models (`.pomdp`) and strategies (`.strat`).
//!
//! Both formats are line based. A line holding a single section keyword opens a section;
//! `init <state>` and `initial <memory>` are one-line sections. Tokens are separated by
//! whitespace; `,` is always a token of its own and `#` at the start of a token begins a
//! comment. Weights are integers, fractions `p/q`, or decimals, all parsed exactly.
//!
//! ```text
//! states
//!   s0 X Y
//! actions
//!   a b
//! observations
//!   o0 oU
//! obs
//!   s0 : o0
//!   X : oU
//!   Y : oU
//! init s0
//! transitions
//!   s0 a -> X 1/2, Y 1/2
//!   ...
//! objective cobuchi
//!   X
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Dist, Objective, Pomdp, PomdpBuilder, Weight};
use crate::sets::{self, ColorSet};
use crate::strategy::{FiniteMemoryStrategy, MemoryElement, StrategySupport};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

impl Token {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line, self.column, message)
    }
}

/// Splits a line into tokens with 1-based columns, dropping comments.
fn tokenize(line: &str, line_no: usize) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let flush = |cur: &mut String, start: usize, out: &mut Vec<Token>| {
        if !cur.is_empty() {
            out.push(Token { text: std::mem::take(cur), line: line_no, column: start });
        }
    };
    for (i, ch) in line.chars().enumerate() {
        let col = i + 1;
        if ch.is_whitespace() {
            flush(&mut cur, start, &mut out);
        } else if ch == ',' {
            flush(&mut cur, start, &mut out);
            out.push(Token { text: ",".into(), line: line_no, column: col });
        } else if ch == '#' && cur.is_empty() {
            break;
        } else {
            if cur.is_empty() {
                start = col;
            }
            cur.push(ch);
        }
    }
    flush(&mut cur, start, &mut out);
    out
}

/// A section header and the token lines that follow it.
struct Section {
    header: Vec<Token>,
    lines: Vec<Vec<Token>>,
}

fn sections(text: &str, keywords: &[&str], one_line: &[&str]) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks = tokenize(line, i + 1);
        let Some(first) = toks.first() else { continue };
        let is_header = (keywords.contains(&first.text.as_str()) && (toks.len() == 1 || first.text == "objective"))
            || (one_line.contains(&first.text.as_str()) && toks.len() == 2);
        if is_header {
            out.push(Section { header: toks, lines: Vec::new() });
        } else {
            match out.last_mut() {
                Some(sec) if !one_line.contains(&sec.header[0].text.as_str()) => sec.lines.push(toks),
                _ => return Err(first.err(format!("expected a section keyword, found `{}`", first.text))),
            }
        }
    }
    Ok(out)
}

/// Parses `n`, `p/q`, or a decimal `i.f` exactly.
pub fn parse_weight(text: &str) -> Option<Weight> {
    let int = |s: &str| -> Option<BigInt> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    };
    if let Some((p, q)) = text.split_once('/') {
        let (p, q) = (int(p)?, int(q)?);
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((i, f)) = text.split_once('.') {
        let i = if i.is_empty() { BigInt::zero() } else { int(i)? };
        let scale = BigInt::from(10).pow(f.len() as u32);
        let f = int(f)?;
        return Some(BigRational::new(i * &scale + f, scale));
    }
    Some(BigRational::from_integer(int(text)?))
}

fn parse_color_set(tok: &Token) -> Result<ColorSet> {
    let t = &tok.text;
    let inner = t
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| tok.err(format!("expected a color set like {{0,1}}, found `{t}`")))?;
    let mut mask = 0;
    for part in inner.split(';').filter(|p| !p.is_empty()) {
        let c: u32 = part.parse().map_err(|_| tok.err(format!("bad color `{part}`")))?;
        if c >= 64 {
            return Err(tok.err("colors are limited to 0..64"));
        }
        mask |= sets::color_bit(c);
    }
    Ok(mask)
}

fn fmt_color_set(mask: ColorSet) -> String {
    let items: Vec<String> = sets::colors_of(mask).map(|c| c.to_string()).collect();
    format!("{{{}}}", items.join(";"))
}

struct Names<'a> {
    what: &'static str,
    ids: HashMap<&'a str, u32>,
}

impl<'a> Names<'a> {
    fn new(what: &'static str, names: &'a [String]) -> Self {
        Names { what, ids: names.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect() }
    }

    fn get(&self, tok: &Token) -> Result<u32> {
        self.ids
            .get(tok.text.as_str())
            .copied()
            .ok_or_else(|| tok.err(format!("unknown {} `{}`", self.what, tok.text)))
    }
}

fn expect(tok: Option<&Token>, text: &str, after: &Token) -> Result<()> {
    match tok {
        Some(t) if t.text == text => Ok(()),
        Some(t) => Err(t.err(format!("expected `{text}`, found `{}`", t.text))),
        None => Err(after.err(format!("expected `{text}` after `{}`", after.text))),
    }
}

fn name_list(sec: &Section, what: &str) -> Result<Vec<String>> {
    let names: Vec<String> = sec.lines.iter().flatten().map(|t| t.text.clone()).collect();
    if names.is_empty() {
        return Err(sec.header[0].err(format!("empty {what} section")));
    }
    if let Some(t) = sec.lines.iter().flatten().find(|t| t.text == "," || t.text == ":" || t.text == "->") {
        return Err(t.err(format!("`{}` is not a valid name", t.text)));
    }
    let mut seen = HashMap::new();
    for t in sec.lines.iter().flatten() {
        if seen.insert(t.text.as_str(), ()).is_some() {
            return Err(t.err(format!("duplicate name `{}`", t.text)));
        }
    }
    Ok(names)
}

/// Parses a model without running [`Pomdp::validate`].
pub fn parse_model_unchecked(text: &str) -> Result<(Pomdp, Objective)> {
    let keywords = ["states", "actions", "observations", "obs", "transitions", "available", "objective"];
    let secs = sections(text, &keywords, &["init"])?;
    let find = |k: &str| -> Result<Option<&Section>> {
        let mut it = secs.iter().filter(|s| s.header[0].text == k);
        let first = it.next();
        if let Some(dup) = it.next() {
            return Err(dup.header[0].err(format!("duplicate `{k}` section")));
        }
        Ok(first)
    };
    let missing = |k: &str| Error::parse(text.lines().count().max(1), 1, format!("missing `{k}` section"));
    let states = name_list(find("states")?.ok_or_else(|| missing("states"))?, "states")?;
    let actions = name_list(find("actions")?.ok_or_else(|| missing("actions"))?, "actions")?;
    let observations = name_list(find("observations")?.ok_or_else(|| missing("observations"))?, "observations")?;
    let sn = Names::new("state", &states);
    let an = Names::new("action", &actions);
    let on = Names::new("observation", &observations);

    let mut b = PomdpBuilder::new();
    for s in &states {
        b.add_state(s.clone());
    }
    for a in &actions {
        b.add_action(a.clone());
    }
    for o in &observations {
        b.add_observation(o.clone());
    }

    let obs_sec = find("obs")?.ok_or_else(|| missing("obs"))?;
    let mut obs_set = vec![false; states.len()];
    for line in &obs_sec.lines {
        let s = sn.get(&line[0])?;
        expect(line.get(1), ":", &line[0])?;
        let o_tok = line.get(2).ok_or_else(|| line[1].err("expected an observation"))?;
        let o = on.get(o_tok)?;
        if let Some(extra) = line.get(3) {
            return Err(extra.err("unexpected token"));
        }
        if obs_set[s as usize] {
            return Err(line[0].err(format!("observation of `{}` given twice", line[0].text)));
        }
        obs_set[s as usize] = true;
        b.set_observation(s, o);
    }
    if let Some(s) = obs_set.iter().position(|x| !x) {
        return Err(obs_sec.header[0].err(format!("state `{}` has no observation", states[s])));
    }

    let init = find("init")?.ok_or_else(|| missing("init"))?;
    b.set_initial(sn.get(&init.header[1])?);

    if let Some(av) = find("available")? {
        let mut seen = vec![false; observations.len()];
        for line in &av.lines {
            let o = on.get(&line[0])?;
            expect(line.get(1), ":", &line[0])?;
            if seen[o as usize] {
                return Err(line[0].err(format!("available actions of `{}` given twice", line[0].text)));
            }
            seen[o as usize] = true;
            let acts = line[2..].iter().map(|t| an.get(t)).collect::<Result<Vec<_>>>()?;
            if acts.is_empty() {
                return Err(line[1].err("an observation needs at least one available action"));
            }
            b.set_available(o, acts);
        }
    }

    let tr = find("transitions")?.ok_or_else(|| missing("transitions"))?;
    let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
    for line in &tr.lines {
        let s = sn.get(&line[0])?;
        let a_tok = line.get(1).ok_or_else(|| line[0].err("expected an action"))?;
        let a = an.get(a_tok)?;
        expect(line.get(2), "->", a_tok)?;
        if seen.insert((s, a), ()).is_some() {
            return Err(line[0].err(format!("transition of ({}, {}) given twice", line[0].text, a_tok.text)));
        }
        let mut entries = Vec::new();
        let mut rest = &line[3..];
        loop {
            let t_tok = rest.first().ok_or_else(|| line[2].err("expected a target state"))?;
            let t = sn.get(t_tok)?;
            let w_tok = rest.get(1).ok_or_else(|| t_tok.err("expected a weight"))?;
            let w = parse_weight(&w_tok.text).ok_or_else(|| w_tok.err(format!("bad weight `{}`", w_tok.text)))?;
            if entries.iter().any(|e: &(u32, Weight)| e.0 == t) {
                return Err(t_tok.err(format!("target `{}` repeated", t_tok.text)));
            }
            entries.push((t, w));
            match rest.get(2) {
                None => break,
                Some(c) if c.text == "," => rest = &rest[3..],
                Some(c) => return Err(c.err(format!("expected `,`, found `{}`", c.text))),
            }
        }
        b.set_transition(s, a, Dist::new(entries)?);
    }
    let pomdp = b.build()?;

    let obj_sec = find("objective")?.ok_or_else(|| missing("objective"))?;
    let objective = parse_objective(obj_sec, &sn, states.len())?;
    Ok((pomdp, objective))
}

fn parse_objective(sec: &Section, sn: &Names, n: usize) -> Result<Objective> {
    let kind_tok = sec.header.get(1).ok_or_else(|| sec.header[0].err("expected an objective kind"))?;
    if let Some(extra) = sec.header.get(2) {
        return Err(extra.err("unexpected token"));
    }
    let targets = || -> Result<crate::sets::StateSet> {
        let ids = sec.lines.iter().flatten().map(|t| sn.get(t)).collect::<Result<Vec<_>>>()?;
        Ok(sets::set_of(n, ids))
    };
    let assignments = |kind: &str| -> Result<Vec<u32>> {
        let mut val = vec![None; n];
        for line in &sec.lines {
            if kind == "muller" && line[0].text == "accept" && line.get(1).is_none_or(|t| t.text != ":") {
                continue;
            }
            let s = sn.get(&line[0])?;
            expect(line.get(1), ":", &line[0])?;
            let v_tok = line.get(2).ok_or_else(|| line[1].err("expected a number"))?;
            let v: u32 = v_tok.text.parse().map_err(|_| v_tok.err(format!("bad number `{}`", v_tok.text)))?;
            if val[s as usize].replace(v).is_some() {
                return Err(line[0].err(format!("`{}` assigned twice", line[0].text)));
            }
        }
        val.iter()
            .enumerate()
            .map(|(s, v)| v.ok_or_else(|| sec.header[0].err(format!("state #{s} has no {kind} value"))))
            .collect()
    };
    let obj = match kind_tok.text.as_str() {
        "reach" => Objective::Reach(targets()?),
        "safe" => Objective::Safe(targets()?),
        "buchi" => Objective::Buchi(targets()?),
        "cobuchi" => Objective::CoBuchi(targets()?),
        "parity" => Objective::Parity(assignments("parity")?),
        "muller" => {
            let colors = assignments("muller")?;
            let mut accepting = Vec::new();
            for line in &sec.lines {
                if line[0].text == "accept" && line.get(1).is_none_or(|t| t.text != ":") {
                    let mut mask = 0;
                    for t in &line[1..] {
                        let c: u32 = t.text.parse().map_err(|_| t.err(format!("bad color `{}`", t.text)))?;
                        if c >= 64 {
                            return Err(t.err("colors are limited to 0..64"));
                        }
                        mask |= sets::color_bit(c);
                    }
                    accepting.push(mask);
                }
            }
            accepting.sort_unstable();
            accepting.dedup();
            Objective::Muller { colors, accepting }
        }
        other => return Err(kind_tok.err(format!("unknown objective kind `{other}`"))),
    };
    if let Objective::Muller { colors, .. } = &obj {
        if colors.iter().any(|&c| c >= 64) {
            return Err(sec.header[0].err("colors are limited to 0..64"));
        }
    }
    Ok(obj)
}

/// Parses a model and rejects it if [`Pomdp::validate`] reports anything other than a
/// warning. Warnings are returned alongside.
pub fn parse_model(text: &str) -> Result<(Pomdp, Objective, Vec<String>)> {
    let (pomdp, obj) = parse_model_unchecked(text)?;
    let report = pomdp.validate();
    let (warnings, errors): (Vec<_>, Vec<_>) = report.iter().partition(|v| v.is_warning());
    if !errors.is_empty() {
        let msgs: Vec<String> = errors.iter().map(|v| v.describe(&pomdp)).collect();
        return Err(Error::Invalid(msgs.join("; ")));
    }
    let warnings = warnings.iter().map(|v| v.describe(&pomdp)).collect();
    Ok((pomdp, obj, warnings))
}

/// Canonical text of a model; [`parse_model_unchecked`] reads it back unchanged.
pub fn serialize_model(pomdp: &Pomdp, obj: &Objective) -> String {
    let mut out = String::new();
    let join = |v: &[String]| v.join(" ");
    let _ = writeln!(out, "states\n  {}", join(pomdp.state_names()));
    let _ = writeln!(out, "actions\n  {}", join(pomdp.action_names()));
    let _ = writeln!(out, "observations\n  {}", join(pomdp.obs_names()));
    out.push_str("obs\n");
    for s in 0..pomdp.num_states() as u32 {
        let _ = writeln!(out, "  {} : {}", pomdp.state_name(s), pomdp.obs_name(pomdp.obs(s)));
    }
    let _ = writeln!(out, "init {}", pomdp.state_name(pomdp.initial()));
    let all = pomdp.num_actions();
    if (0..pomdp.num_observations() as u32).any(|o| pomdp.available(o).len() != all) {
        out.push_str("available\n");
        for o in 0..pomdp.num_observations() as u32 {
            let acts: Vec<&str> = pomdp.available(o).iter().map(|&a| pomdp.action_name(a)).collect();
            let _ = writeln!(out, "  {} : {}", pomdp.obs_name(o), acts.join(" "));
        }
    }
    out.push_str("transitions\n");
    for s in 0..pomdp.num_states() as u32 {
        for a in 0..pomdp.num_actions() as u32 {
            if let Some(d) = pomdp.transition(s, a) {
                let items: Vec<String> =
                    d.entries().iter().map(|(t, w)| format!("{} {}", pomdp.state_name(*t), w)).collect();
                let _ = writeln!(out, "  {} {} -> {}", pomdp.state_name(s), pomdp.action_name(a), items.join(", "));
            }
        }
    }
    let _ = writeln!(out, "objective {}", obj.kind_name());
    let names = |t: &crate::sets::StateSet| -> String {
        t.ones().map(|s| pomdp.state_name(s as u32)).collect::<Vec<_>>().join(" ")
    };
    match obj {
        Objective::Reach(t) | Objective::Safe(t) | Objective::Buchi(t) | Objective::CoBuchi(t) => {
            if t.count_ones(..) > 0 {
                let _ = writeln!(out, "  {}", names(t));
            }
        }
        Objective::Parity(p) => {
            for (s, v) in p.iter().enumerate() {
                let _ = writeln!(out, "  {} : {}", pomdp.state_name(s as u32), v);
            }
        }
        Objective::Muller { colors, accepting } => {
            for (s, v) in colors.iter().enumerate() {
                let _ = writeln!(out, "  {} : {}", pomdp.state_name(s as u32), v);
            }
            for &mask in accepting {
                let cs: Vec<String> = sets::colors_of(mask).map(|c| c.to_string()).collect();
                if cs.is_empty() {
                    out.push_str("  accept\n");
                } else {
                    let _ = writeln!(out, "  accept {}", cs.join(" "));
                }
            }
        }
    }
    out
}

fn parse_dist(toks: &[Token], after: &Token, names: &Names) -> Result<Dist> {
    let mut entries = Vec::new();
    let mut rest = toks;
    loop {
        let t_tok = rest.first().ok_or_else(|| after.err("expected a target"))?;
        let t = names.get(t_tok)?;
        let w_tok = rest.get(1).ok_or_else(|| t_tok.err("expected a weight"))?;
        let w = parse_weight(&w_tok.text).ok_or_else(|| w_tok.err(format!("bad weight `{}`", w_tok.text)))?;
        if entries.iter().any(|e: &(u32, Weight)| e.0 == t) {
            return Err(t_tok.err(format!("target `{}` repeated", t_tok.text)));
        }
        entries.push((t, w));
        match rest.get(2) {
            None => break,
            Some(c) if c.text == "," => rest = &rest[3..],
            Some(c) => return Err(c.err(format!("expected `,`, found `{}`", c.text))),
        }
    }
    let total: Weight = entries.iter().map(|e| e.1.clone()).sum();
    if !total.is_one() {
        return Err(after.err(format!("weights sum to {total}, not 1")));
    }
    Dist::new(entries)
}

/// Parses a strategy for `pomdp`.
///
/// ```text
/// memories
///   ma mb
/// initial ma
/// select
///   ma -> a 1
/// update
///   ma oU a -> mb 1
/// elements
///   ma belief X Y
///   ma brec X
///   ma srec X {2}
/// ```
pub fn parse_strategy(text: &str, pomdp: &Pomdp) -> Result<FiniteMemoryStrategy> {
    let secs = sections(text, &["memories", "select", "update", "elements"], &["initial"])?;
    let find = |k: &str| -> Result<Option<&Section>> {
        let mut it = secs.iter().filter(|s| s.header[0].text == k);
        let first = it.next();
        if let Some(dup) = it.next() {
            return Err(dup.header[0].err(format!("duplicate `{k}` section")));
        }
        Ok(first)
    };
    let missing = |k: &str| Error::parse(text.lines().count().max(1), 1, format!("missing `{k}` section"));
    let mems = name_list(find("memories")?.ok_or_else(|| missing("memories"))?, "memories")?;
    let mn = Names::new("memory", &mems);
    let an = Names::new("action", pomdp.action_names());
    let on = Names::new("observation", pomdp.obs_names());
    let sn = Names::new("state", pomdp.state_names());
    let init = find("initial")?.ok_or_else(|| missing("initial"))?;
    let m0 = mn.get(&init.header[1])?;
    let mut out = FiniteMemoryStrategy::new(mems.clone(), pomdp.num_observations(), pomdp.num_actions(), m0);

    let sel = find("select")?.ok_or_else(|| missing("select"))?;
    let mut seen = vec![false; mems.len()];
    for line in &sel.lines {
        let m = mn.get(&line[0])?;
        expect(line.get(1), "->", &line[0])?;
        if std::mem::replace(&mut seen[m as usize], true) {
            return Err(line[0].err(format!("selection of `{}` given twice", line[0].text)));
        }
        out.set_select(m, parse_dist(&line[2..], &line[1], &an)?);
    }
    if let Some(m) = seen.iter().position(|x| !x) {
        return Err(sel.header[0].err(format!("memory `{}` has no action selection", mems[m])));
    }

    if let Some(upd) = find("update")? {
        let mut seen = HashMap::new();
        for line in &upd.lines {
            let m = mn.get(&line[0])?;
            let o_tok = line.get(1).ok_or_else(|| line[0].err("expected an observation"))?;
            let o = on.get(o_tok)?;
            let a_tok = line.get(2).ok_or_else(|| o_tok.err("expected an action"))?;
            let a = an.get(a_tok)?;
            expect(line.get(3), "->", a_tok)?;
            if seen.insert((m, o, a), ()).is_some() {
                return Err(line[0].err("update given twice"));
            }
            out.set_update(m, o, a, parse_dist(&line[4..], &line[3], &mn)?);
        }
    }

    if let Some(el) = find("elements")? {
        let n = pomdp.num_states();
        let mut elems: Vec<Option<MemoryElement>> = vec![None; mems.len()];
        for line in &el.lines {
            let m = mn.get(&line[0])? as usize;
            let field = line.get(1).ok_or_else(|| line[0].err("expected belief, brec or srec"))?;
            let e = elems[m].get_or_insert_with(|| MemoryElement {
                belief: sets::set_of(n, []),
                brec: sets::set_of(n, []),
                srec: vec![Vec::new(); n],
            });
            match field.text.as_str() {
                "belief" | "brec" => {
                    let ids = line[2..].iter().map(|t| sn.get(t)).collect::<Result<Vec<_>>>()?;
                    let set = sets::set_of(n, ids);
                    if field.text == "belief" {
                        e.belief = set;
                    } else {
                        e.brec = set;
                    }
                }
                "srec" => {
                    let s_tok = line.get(2).ok_or_else(|| field.err("expected a state"))?;
                    let s = sn.get(s_tok)? as usize;
                    let mut v = line[3..].iter().map(parse_color_set).collect::<Result<Vec<_>>>()?;
                    v.sort_unstable();
                    v.dedup();
                    e.srec[s] = v;
                }
                other => return Err(field.err(format!("unknown element field `{other}`"))),
            }
        }
        let all = elems
            .into_iter()
            .enumerate()
            .map(|(m, e)| e.ok_or_else(|| el.header[0].err(format!("memory `{}` has no element", mems[m]))))
            .collect::<Result<Vec<_>>>()?;
        out.set_elements(all);
    }
    out.check()?;
    Ok(out)
}

/// Canonical text of a strategy; [`parse_strategy`] reads it back unchanged.
pub fn serialize_strategy(sigma: &FiniteMemoryStrategy, pomdp: &Pomdp) -> String {
    let mut out = String::new();
    let mn = sigma.memory_names();
    let _ = writeln!(out, "memories\n  {}", mn.join(" "));
    let _ = writeln!(out, "initial {}", mn[sigma.initial() as usize]);
    let fmt = |d: &Dist, name: &dyn Fn(u32) -> String| -> String {
        d.entries().iter().map(|(t, w)| format!("{} {}", name(*t), w)).collect::<Vec<_>>().join(", ")
    };
    out.push_str("select\n");
    for m in 0..sigma.num_memories() as u32 {
        let _ = writeln!(out, "  {} -> {}", mn[m as usize], fmt(sigma.select(m), &|a| pomdp.action_name(a).to_string()));
    }
    out.push_str("update\n");
    for m in 0..sigma.num_memories() as u32 {
        for o in 0..sigma.num_observations() as u32 {
            for a in 0..sigma.num_actions() as u32 {
                if let Some(d) = sigma.update(m, o, a) {
                    let _ = writeln!(
                        out,
                        "  {} {} {} -> {}",
                        mn[m as usize],
                        pomdp.obs_name(o),
                        pomdp.action_name(a),
                        fmt(d, &|m2| mn[m2 as usize].clone())
                    );
                }
            }
        }
    }
    if let Some(elems) = sigma.elements() {
        out.push_str("elements\n");
        let names = |s: &crate::sets::StateSet| -> String {
            s.ones().map(|x| format!(" {}", pomdp.state_name(x as u32))).collect()
        };
        for (m, e) in elems.iter().enumerate() {
            let _ = writeln!(out, "  {} belief{}", mn[m], names(&e.belief));
            let _ = writeln!(out, "  {} brec{}", mn[m], names(&e.brec));
            for (s, z) in e.srec.iter().enumerate() {
                if !z.is_empty() {
                    let cs: Vec<String> = z.iter().map(|&c| fmt_color_set(c)).collect();
                    let _ = writeln!(out, "  {} srec {} {}", mn[m], pomdp.state_name(s as u32), cs.join(" "));
                }
            }
        }
    }
    out
}
