//! Random δ-dense instances, optionally with a planted solution.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::csp::{CnfFormula, Literal};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::binomial;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GraphDensity,
    PlantedCut,
    RandomKsat,
    PlantedKsat,
}

impl Family {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "graph-density" => Ok(Family::GraphDensity),
            "planted-cut" => Ok(Family::PlantedCut),
            "random-ksat" => Ok(Family::RandomKsat),
            "planted-ksat" => Ok(Family::PlantedKsat),
            other => Err(Error::config(format!("unknown family `{other}`"))),
        }
    }

    fn code(self) -> u64 {
        match self {
            Family::GraphDensity => 1,
            Family::PlantedCut => 2,
            Family::RandomKsat => 3,
            Family::PlantedKsat => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub delta: f64,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Graph(Graph),
    Cnf(CnfFormula),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub instance: Instance,
    /// Hidden assignment of planted families.
    pub planted: Option<Assignment>,
}

/// `round(n^{1+δ}/2)` capped at `C(n, 2)`.
pub fn graph_edge_target(n: usize, delta: f64) -> usize {
    let raw = ((n as f64).powf(1.0 + delta) / 2.0).round() as usize;
    raw.min(n * n.saturating_sub(1) / 2)
}

/// `round(n^{k−1+δ})`.
pub fn clause_target(n: usize, k: usize, delta: f64) -> usize {
    (n as f64).powf(k as f64 - 1.0 + delta).round() as usize
}

pub fn generate(spec: &GenSpec) -> Result<Generated> {
    if spec.n < 2 {
        return Err(Error::input("generation needs n ≥ 2"));
    }
    if !(spec.delta > 0.0 && spec.delta <= 1.0) {
        return Err(Error::input("delta must lie in (0, 1]"));
    }
    let mut g = rng::stream(spec.seed, &[rng::TAG_GENERATE, spec.family.code()]);
    let n = spec.n;
    match spec.family {
        Family::GraphDensity => {
            let pairs = all_pairs(n);
            let m = graph_edge_target(n, spec.delta);
            let edges = pick(pairs, m, &mut g);
            Ok(Generated {
                instance: Instance::Graph(Graph::new(n, edges)?),
                planted: None,
            })
        }
        Family::PlantedCut => {
            let mut sides: Vec<bool> = (0..n).map(|_| g.gen_bool(0.5)).collect();
            if sides.iter().all(|&s| s) || sides.iter().all(|&s| !s) {
                let v = g.gen_range(0..n);
                sides[v] = !sides[v];
            }
            let (crossing, inside): (Vec<_>, Vec<_>) =
                all_pairs(n).into_iter().partition(|&(u, v)| sides[u] != sides[v]);
            let m = graph_edge_target(n, spec.delta);
            let want_cross = ((0.8 * m as f64).ceil() as usize).min(crossing.len());
            let want_inside = (m - want_cross).min(inside.len());
            let mut edges = pick(crossing, want_cross, &mut g);
            edges.extend(pick(inside, want_inside, &mut g));
            edges.shuffle(&mut g);
            Ok(Generated {
                instance: Instance::Graph(Graph::new(n, edges)?),
                planted: Some(Assignment::from_bools(sides)),
            })
        }
        Family::RandomKsat | Family::PlantedKsat => {
            let k = spec.k;
            if k == 0 || k > n {
                return Err(Error::input(format!("clause width k = {k} must lie in 1..={n}")));
            }
            let m = clause_target(n, k, spec.delta);
            let planted = (spec.family == Family::PlantedKsat)
                .then(|| (0..n).map(|_| g.gen_bool(0.5)).collect::<Vec<bool>>());
            let per_set = if planted.is_some() { (1u64 << k) - 1 } else { 1u64 << k };
            let available = binomial(n, k).saturating_mul(per_set);
            if m as u64 > available {
                return Err(Error::input(format!(
                    "{m} distinct clauses requested but only {available} exist"
                )));
            }
            let satisfied = |c: &[Literal]| match &planted {
                Some(x) => c.iter().any(|l| x[l.var] != l.negated),
                None => true,
            };
            let clauses = if 2 * m as u64 > available {
                let all: Vec<Vec<Literal>> = all_clauses(n, k).into_iter().filter(|c| satisfied(c)).collect();
                pick(all, m, &mut g)
            } else {
                let mut seen = BTreeSet::new();
                let mut out = Vec::with_capacity(m);
                while out.len() < m {
                    let mut vars = rand::seq::index::sample(&mut g, n, k).into_vec();
                    vars.sort_unstable();
                    let clause: Vec<Literal> = vars
                        .into_iter()
                        .map(|var| Literal { var, negated: g.gen_bool(0.5) })
                        .collect();
                    if satisfied(&clause) && seen.insert(clause.clone()) {
                        out.push(clause);
                    }
                }
                out
            };
            Ok(Generated {
                instance: Instance::Cnf(CnfFormula::new(n, clauses)?),
                planted: planted.map(Assignment::from_bools),
            })
        }
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

fn all_clauses(n: usize, k: usize) -> Vec<Vec<Literal>> {
    let mut out = Vec::new();
    let mut vars = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, vars: &mut Vec<usize>, out: &mut Vec<Vec<Literal>>) {
        if vars.len() == k {
            for signs in 0..1usize << k {
                out.push(
                    vars.iter()
                        .enumerate()
                        .map(|(i, &var)| Literal { var, negated: signs >> i & 1 == 1 })
                        .collect(),
                );
            }
            return;
        }
        for v in start..n {
            vars.push(v);
            rec(v + 1, n, k, vars, out);
            vars.pop();
        }
    }
    rec(0, n, k, &mut vars, &mut out);
    out
}

/// `count` distinct items chosen uniformly, in random order.
fn pick<T, R: Rng>(mut items: Vec<T>, count: usize, rng: &mut R) -> Vec<T> {
    let count = count.min(items.len());
    // rand 0.8 moves the chosen elements to the tail of the slice.
    items.partial_shuffle(rng, count);
    items.split_off(items.len() - count)
}

/// Answer file: one line `v 1 -2 3 … 0`, positive literal for a true variable.
pub fn answer_to_text(x: &Assignment) -> String {
    let mut out = String::from("v");
    for (i, &b) in x.bits().iter().enumerate() {
        let v = i as i64 + 1;
        let _ = write!(out, " {}", if b == 1 { v } else { -v });
    }
    out.push_str(" 0\n");
    out
}

pub fn parse_answer(text: &str, n: usize) -> Result<Assignment> {
    let mut bits: Vec<Option<u8>> = vec![None; n];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut parts = line.split_whitespace();
        if parts.next() != Some("v") {
            return Err(Error::parse(line_no, "expected `v` line"));
        }
        for tok in parts {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid literal `{tok}`")))?;
            if lit == 0 {
                continue;
            }
            let var = lit.unsigned_abs() as usize;
            if var > n {
                return Err(Error::parse(line_no, format!("variable {var} out of range 1..={n}")));
            }
            bits[var - 1] = Some(u8::from(lit > 0));
        }
    }
    let bits: Option<Vec<u8>> = bits.into_iter().collect();
    Assignment::from_bits(bits.ok_or_else(|| Error::input("answer does not assign every variable"))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, n: usize, delta: f64, k: usize) -> GenSpec {
        GenSpec { family, n, delta, k, seed: 7 }
    }

    #[test]
    fn edge_and_clause_targets() {
        assert_eq!(graph_edge_target(16, 1.0), 120);
        assert_eq!(clause_target(14, 2, 0.5), 52);
    }

    #[test]
    fn density_graph_count() {
        let out = generate(&spec(Family::GraphDensity, 16, 1.0, 0)).unwrap();
        let Instance::Graph(g) = out.instance else { panic!() };
        assert_eq!(g.m(), 120);
    }

    #[test]
    fn planted_cut_crossing_fraction() {
        let out = generate(&spec(Family::PlantedCut, 10, 0.5, 0)).unwrap();
        let Instance::Graph(g) = out.instance else { panic!() };
        let sides = out.planted.unwrap();
        assert!(g.cut_value(sides.bits()) as f64 >= 0.8 * g.m() as f64);
    }

    #[test]
    fn random_ksat_distinct() {
        let out = generate(&spec(Family::RandomKsat, 14, 0.5, 2)).unwrap();
        let Instance::Cnf(f) = out.instance else { panic!() };
        assert_eq!(f.m(), 52);
        let set: BTreeSet<_> = f.clauses().iter().cloned().collect();
        assert_eq!(set.len(), 52);
    }

    #[test]
    fn planted_ksat_is_satisfied() {
        let out = generate(&spec(Family::PlantedKsat, 10, 0.5, 3)).unwrap();
        let Instance::Cnf(f) = out.instance else { panic!() };
        let x = out.planted.unwrap();
        assert_eq!(f.count_satisfied(&x).unwrap(), f.m());
    }

    #[test]
    fn infeasible_target() {
        assert!(generate(&spec(Family::RandomKsat, 3, 1.0, 3)).is_err());
    }

    #[test]
    fn answer_roundtrip() {
        let x = Assignment::from_bits(vec![1, 0, 1, 1]).unwrap();
        assert_eq!(answer_to_text(&x), "v 1 -2 3 4 0\n");
        assert_eq!(parse_answer(&answer_to_text(&x), 4).unwrap(), x);
    }
}
