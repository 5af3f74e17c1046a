//! Shared generators and reference implementations for integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tsmon::model::Destination;
use tsmon::wellformed::TransitionSet;
use tsmon::ProtocolSpec;

fn state_name(i: usize) -> String {
    format!("S{i}")
}

/// Renders a random protocol of at most six states.
///
/// With `well_formed` the result satisfies every rule: each state is
/// reached through a tree of edges, and when a terminal state exists every
/// other state has an edge to a higher-numbered one so it stays productive.
/// Without it the graph is arbitrary and ratios are all unmonitored.
pub fn gen_spec(seed: u64, well_formed: bool) -> String {
    gen_spec_with(seed, well_formed, 6)
}

pub fn gen_spec_with(seed: u64, well_formed: bool, max_states: usize) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_states);
    let terminal = well_formed && k > 1 && rng.gen_bool(0.5);

    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); k];
    if well_formed {
        for i in 1..k {
            let parent = rng.gen_range(0..i);
            if !(terminal && parent == k - 1) {
                targets[parent].push(i);
            }
        }
        for (i, t) in targets.iter_mut().enumerate() {
            if terminal && i == k - 1 {
                continue;
            }
            if terminal {
                t.push(rng.gen_range(i + 1..k));
            }
            for _ in 0..rng.gen_range(0..=2) {
                t.push(rng.gen_range(0..k));
            }
            if t.is_empty() {
                t.push(rng.gen_range(0..k));
            }
        }
    } else {
        for t in targets.iter_mut() {
            for _ in 0..rng.gen_range(0..=3) {
                t.push(rng.gen_range(0..k));
            }
        }
    }

    let mut out = String::new();
    let n_vars = rng.gen_range(0..=2);
    let n_consts = rng.gen_range(0..=2);
    for c in 0..n_consts {
        writeln!(out, "const c{c} = {};", rng.gen_range(-3..10)).unwrap();
    }
    for v in 0..n_vars {
        writeln!(out, "var v{v} = {};", rng.gen_range(0..5)).unwrap();
    }
    let mut assigns = Vec::new();
    let mut preds = Vec::new();
    if n_vars > 0 {
        for a in 0..rng.gen_range(1..=3) {
            let v = rng.gen_range(0..n_vars);
            let rhs = match rng.gen_range(0..3) {
                0 => format!("v{v} + 1"),
                1 => format!("v{v} * 2 - {}", rng.gen_range(0..3)),
                _ => "0".to_string(),
            };
            writeln!(out, "assign A{a}: v{v} <- {rhs};").unwrap();
            assigns.push(format!("A{a}"));
        }
        for p in 0..rng.gen_range(1..=2) {
            let v = rng.gen_range(0..n_vars);
            let rhs = if n_consts > 0 {
                format!("c{}", rng.gen_range(0..n_consts))
            } else {
                "2".into()
            };
            let op = ["==", "!=", "<", "<=", ">", ">="][rng.gen_range(0..6)];
            writeln!(out, "pred P{p}: v{v} {op} {rhs};").unwrap();
            preds.push(format!("P{p}"));
        }
    }
    let uses_enum = rng.gen_bool(0.5);
    if uses_enum {
        writeln!(out, "enum E {{ x, y, z }}").unwrap();
    }

    for (i, t) in targets.iter().enumerate() {
        if t.is_empty() {
            writeln!(out, "state {} = end", state_name(i)).unwrap();
            continue;
        }
        let epsilon_only = !well_formed || rng.gen_bool(0.3);
        let weights: Vec<Option<u32>> = t
            .iter()
            .enumerate()
            .map(|(j, _)| (!epsilon_only && (j == 0 || rng.gen_bool(0.8))).then(|| rng.gen_range(1..=4)))
            .collect();
        let total: u32 = weights.iter().flatten().sum();
        let mut sides: [Vec<String>; 2] = [Vec::new(), Vec::new()];
        for (j, (&to, w)) in t.iter().zip(&weights).enumerate() {
            let ratio = match w {
                Some(w) => format!("{}", *w as f64 / total as f64),
                None => "_".into(),
            };
            let pick = |rng: &mut StdRng, pool: &[String]| -> String {
                if pool.is_empty() || rng.gen_bool(0.5) {
                    String::new()
                } else {
                    pool[rng.gen_range(0..pool.len())].clone()
                }
            };
            let (pre, pred, post) = (
                pick(&mut rng, &assigns),
                pick(&mut rng, &preds),
                pick(&mut rng, &assigns),
            );
            let kind = rng.gen_range(0..if uses_enum { 3 } else { 2 });
            let (ret, dest) = match kind {
                0 => ("void".to_string(), state_name(to)),
                1 => (
                    "boolean".to_string(),
                    format!("<true: {}, false: {}>", state_name(to), state_name(rng.gen_range(0..k))),
                ),
                _ => (
                    "E".to_string(),
                    format!(
                        "<x: {}, y: {}, z: {}>",
                        state_name(to),
                        state_name(rng.gen_range(0..k)),
                        state_name(rng.gen_range(0..k))
                    ),
                ),
            };
            let branch = format!("{ret} m{j}(Bit) [{ratio}; [{pre}]; [{pred}]] : {dest} [{post}]");
            sides[rng.gen_range(0..2)].push(branch);
        }
        let rendered: Vec<String> = sides
            .iter()
            .zip(["!", "?"])
            .filter(|(s, _)| !s.is_empty())
            .map(|(s, sigil)| format!("{sigil}{{ {} }}", s.join(", ")))
            .collect();
        writeln!(out, "state {} = {}", state_name(i), rendered.join(" + ")).unwrap();
    }
    out
}

/// Number of transition tuples implied by the branches: one per plain
/// branch and one per decision outcome.
pub fn expected_tuple_count(spec: &ProtocolSpec) -> usize {
    spec.typestate()
        .states()
        .flat_map(|(_, body)| body.branches())
        .map(|(_, b)| match &b.dest {
            Destination::Plain(_) => 1,
            Destination::Decision(map) => map.len(),
        })
        .sum()
}

/// Forward closure from `start`, iterated to a fixpoint.
pub fn fixpoint_reachable(trs: &TransitionSet, start: &str) -> BTreeSet<String> {
    let mut set = BTreeSet::from([start.to_string()]);
    loop {
        let before = set.len();
        for t in trs.iter() {
            if set.contains(&t.from) {
                set.insert(t.to.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// States from which a state without successors can be reached.
pub fn fixpoint_productive(trs: &TransitionSet, states: &[String]) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = states
        .iter()
        .filter(|s| trs.iter().all(|t| &t.from != *s))
        .cloned()
        .collect();
    loop {
        let before = set.len();
        for t in trs.iter() {
            if set.contains(&t.to) {
                set.insert(t.from.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}
