//! Multilinear polynomials over binary variables.
//!
//! Coefficients are exact 64-bit rationals. Every polynomial derived from a
//! graph or a CSP has integer coefficients, so evaluation is exact and the
//! decomposition identities can be checked with `==`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub type Coeff = Rational64;

pub fn coeff_to_f64(c: &Coeff) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    vars: Vec<usize>,
    coeff: Coeff,
}

impl Monomial {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn coeff(&self) -> Coeff {
        self.coeff
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }
}

/// A multilinear polynomial `c + Σ t · Π x_i` in sparse monomial form.
///
/// Monomials have distinct, strictly increasing variable sets and nonzero
/// coefficients; they are stored in lexicographic order of their variable sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothPolynomial {
    n: usize,
    degree: usize,
    constant: Coeff,
    monomials: Vec<Monomial>,
}

impl SmoothPolynomial {
    /// Builds a polynomial from arbitrary terms, merging like terms exactly.
    /// Terms with an empty variable list are added to the constant.
    pub fn from_terms<I>(n: usize, constant: Coeff, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Coeff)>,
    {
        let mut merged: BTreeMap<Vec<usize>, Coeff> = BTreeMap::new();
        let mut constant = constant;
        for (mut vars, coeff) in terms {
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input(format!(
                    "monomial repeats a variable: {:?}",
                    vars
                )));
            }
            if let Some(&v) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::input(format!(
                    "variable index {} out of range for n = {}",
                    v + 1,
                    n
                )));
            }
            if vars.is_empty() {
                constant = checked_add(constant, coeff)?;
                continue;
            }
            let slot = merged.entry(vars).or_insert_with(Coeff::zero);
            *slot = checked_add(*slot, coeff)?;
        }
        let monomials: Vec<Monomial> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(vars, coeff)| Monomial { vars, coeff })
            .collect();
        let degree = monomials.iter().map(Monomial::degree).max().unwrap_or(0);
        Ok(SmoothPolynomial {
            n,
            degree,
            constant,
            monomials,
        })
    }

    pub fn constant_poly(n: usize, constant: Coeff) -> Self {
        SmoothPolynomial {
            n,
            degree: 0,
            constant,
            monomials: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn constant(&self) -> Coeff {
        self.constant
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_constant(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Exact value at a binary point.
    pub fn evaluate(&self, x: &Assignment) -> Result<Coeff> {
        self.check_len(x.len())?;
        let bits = x.bits();
        let mut acc = self.constant;
        for m in &self.monomials {
            if m.vars.iter().all(|&v| bits[v] == 1) {
                acc = checked_add(acc, m.coeff)?;
            }
        }
        Ok(acc)
    }

    /// Value of the multilinear extension at a point of `[0,1]^n`.
    pub fn evaluate_fractional(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y.len())?;
        Ok(self.constant_f64()
            + self
                .monomials
                .iter()
                .map(|m| coeff_to_f64(&m.coeff) * m.vars.iter().map(|&v| y[v]).product::<f64>())
                .sum::<f64>())
    }

    pub fn constant_f64(&self) -> f64 {
        coeff_to_f64(&self.constant)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::input(format!(
                "assignment has {} entries, polynomial has {} variables",
                len, self.n
            )));
        }
        Ok(())
    }

    /// Sum of absolute coefficient values per degree, index `ℓ = 0..=d`.
    pub fn degree_abs_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.degree + 1];
        sums[0] = coeff_to_f64(&self.constant.abs());
        for m in &self.monomials {
            sums[m.degree()] += coeff_to_f64(&m.coeff.abs());
        }
        sums
    }

    /// Debug dump: optional `p poly <n>` header, a `c <value>` line, then one
    /// `coeff i1 … iℓ` line per monomial with 1-indexed variables.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p poly {}", self.n);
        let _ = writeln!(out, "c {}", self.constant);
        for m in &self.monomials {
            let _ = write!(out, "{}", m.coeff);
            for v in &m.vars {
                let _ = write!(out, " {}", v + 1);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the debug dump. Without a header, `n` is the largest index seen.
    /// Lines starting with `#` are comments.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut constant = Coeff::zero();
        let mut terms = Vec::new();
        let mut max_index = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().unwrap_or_default();
            match first {
                "p" => {
                    if parts.next() != Some("poly") {
                        return Err(Error::parse(line_no, "expected `p poly <n>`"));
                    }
                    let value = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(line_no, "invalid variable count"))?;
                    n = Some(value);
                }
                "c" => {
                    let tok = parts
                        .next()
                        .ok_or_else(|| Error::parse(line_no, "missing constant value"))?;
                    constant = checked_add(constant, parse_rational(tok, line_no)?)?;
                }
                tok => {
                    let coeff = parse_rational(tok, line_no)?;
                    let mut vars = Vec::new();
                    for t in parts {
                        let v = t
                            .parse::<usize>()
                            .map_err(|_| Error::parse(line_no, format!("invalid index `{t}`")))?;
                        if v == 0 {
                            return Err(Error::parse(line_no, "indices are 1-based"));
                        }
                        if let Some(limit) = n {
                            if v > limit {
                                return Err(Error::parse(
                                    line_no,
                                    format!("index {v} exceeds n = {limit}"),
                                ));
                            }
                        }
                        max_index = max_index.max(v);
                        vars.push(v - 1);
                    }
                    terms.push((vars, coeff, line_no));
                }
            }
        }
        let n = n.unwrap_or(max_index);
        if let Some((_, _, line_no)) = terms.iter().find(|(vars, _, _)| vars.iter().any(|&v| v >= n)) {
            return Err(Error::parse(*line_no, "index exceeds declared n"));
        }
        SmoothPolynomial::from_terms(n, constant, terms.into_iter().map(|(v, c, _)| (v, c)))
    }
}

fn parse_rational(tok: &str, line: usize) -> Result<Coeff> {
    let bad = || Error::parse(line, format!("invalid coefficient `{tok}`"));
    match tok.split_once('/') {
        Some((a, b)) => {
            let num = a.parse::<i64>().map_err(|_| bad())?;
            let den = b.parse::<i64>().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Coeff::new(num, den))
        }
        None => Ok(Coeff::from_integer(tok.parse::<i64>().map_err(|_| bad())?)),
    }
}

pub(crate) fn checked_add(a: Coeff, b: Coeff) -> Result<Coeff> {
    a.checked_add(&b)
        .ok_or_else(|| Error::input("coefficient overflow in exact arithmetic"))
}

pub(crate) fn checked_mul(a: Coeff, b: Coeff) -> Result<Coeff> {
    a.checked_mul(&b)
        .ok_or_else(|| Error::input("coefficient overflow in exact arithmetic"))
}

/// Max-Cut objective `Σ_{ij∈E} (x_i + x_j − 2 x_i x_j)`.
pub fn from_graph_maxcut(g: &Graph) -> SmoothPolynomial {
    let mut terms = Vec::with_capacity(3 * g.m());
    for &(u, v) in g.edges() {
        terms.push((vec![u], Coeff::from_integer(1)));
        terms.push((vec![v], Coeff::from_integer(1)));
        terms.push((vec![u, v], Coeff::from_integer(-2)));
    }
    SmoothPolynomial::from_terms(g.n(), Coeff::zero(), terms)
        .expect("graph polynomial coefficients are bounded by n")
}

/// Induced-edge count `Σ_{ij∈E} x_i x_j`.
pub fn from_graph_kdense(g: &Graph) -> SmoothPolynomial {
    let terms = g
        .edges()
        .iter()
        .map(|&(u, v)| (vec![u, v], Coeff::from_integer(1)));
    SmoothPolynomial::from_terms(g.n(), Coeff::zero(), terms)
        .expect("graph polynomial coefficients are bounded by n")
}

/// Smoothness and density constants of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessCertificate {
    pub beta: f64,
    pub delta: f64,
    pub kappa: f64,
    pub degree: usize,
    pub n: usize,
}

impl SmoothnessCertificate {
    /// `n^{d-1+δ}`, the scale of the δ-bounded absolute sums.
    pub fn density_scale(&self) -> f64 {
        (self.n as f64).powf(self.degree as f64 - 1.0 + self.delta)
    }

    /// Rescans `p` and confirms both bounds hold.
    pub fn verify(&self, p: &SmoothPolynomial) -> bool {
        const SLACK: f64 = 1e-9;
        let n = self.n as f64;
        let d = self.degree as i32;
        if self.beta < 1.0 || self.kappa < 1.0 || !(self.delta > 0.0 && self.delta <= 1.0) {
            return false;
        }
        let coeff_ok = std::iter::once((0usize, p.constant()))
            .chain(p.monomials().iter().map(|m| (m.degree(), m.coeff())))
            .all(|(l, c)| {
                coeff_to_f64(&c.abs()) <= self.beta * n.powi(d - l as i32) * (1.0 + SLACK)
            });
        let bound = self.kappa * self.beta * self.density_scale();
        coeff_ok
            && p.degree_abs_sums()
                .iter()
                .all(|&s| s <= bound * (1.0 + SLACK))
    }
}

/// Smallest β ≥ 1 with `|t| ≤ β n^{d-ℓ}` for every degree-ℓ coefficient and
/// smallest κ ≥ 1 with every degree-ℓ absolute sum at most `κ β n^{d-1+δ}`.
pub fn certify(p: &SmoothPolynomial, delta: f64) -> Result<SmoothnessCertificate> {
    if p.is_constant() {
        return Err(Error::input("cannot certify a constant polynomial"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::input(format!("delta must lie in (0, 1], got {delta}")));
    }
    let n = p.n() as f64;
    let d = p.degree();
    let mut beta: f64 = 1.0;
    let ratio = |l: usize, c: &Coeff| coeff_to_f64(&c.abs()) / n.powi((d - l) as i32);
    beta = beta.max(ratio(0, &p.constant()));
    for m in p.monomials() {
        beta = beta.max(ratio(m.degree(), &m.coeff()));
    }
    let scale = beta * n.powf(d as f64 - 1.0 + delta);
    let kappa = p
        .degree_abs_sums()
        .iter()
        .map(|s| s / scale)
        .fold(1.0f64, f64::max);
    Ok(SmoothnessCertificate {
        beta,
        delta,
        kappa,
        degree: d,
        n: p.n(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Each monomial `x_{a1}…x_{aℓ}` (a1 < … < aℓ) pulls its smallest
    /// remaining index at every level.
    CanonicalLex,
    /// Degree-2 split: linear terms become node constants and every quadratic
    /// coefficient is shared equally by both endpoints, so the Max-Cut
    /// polynomial decomposes as `Σ_j x_j (deg(j) − Σ_{i∈N(j)} x_i)`.
    MaxCutSymmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChildTarget {
    Node(usize),
    Leaf(Coeff),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeChild {
    pub index: usize,
    pub target: ChildTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub tuple: Vec<usize>,
    /// Degree bound of this node's polynomial: `d − |tuple|`.
    pub level: usize,
    pub constant: Coeff,
    /// Sorted by `index`; absent indices denote the zero polynomial.
    pub children: Vec<TreeChild>,
}

/// The recursive `p = c + Σ_j x_j p_j` structure, materialized only over
/// tuples that occur in some monomial.
///
/// Node 0 is the root. Nodes are ordered by depth, so every child id is larger
/// than its parent's.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTree {
    n: usize,
    degree: usize,
    strategy: Strategy,
    nodes: Vec<TreeNode>,
}

impl DecompositionTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Node id for a tuple, if materialized.
    pub fn find(&self, tuple: &[usize]) -> Option<usize> {
        let mut id = 0;
        for &j in tuple {
            let node = &self.nodes[id];
            let pos = node.children.binary_search_by_key(&j, |c| c.index).ok()?;
            match node.children[pos].target {
                ChildTarget::Node(child) => id = child,
                ChildTarget::Leaf(_) => return None,
            }
        }
        Some(id)
    }

    /// Exact evaluation through the tree: `c + Σ_j x_j · value(child j)`.
    pub fn evaluate(&self, x: &Assignment) -> Result<Coeff> {
        if x.len() != self.n {
            return Err(Error::input("assignment length does not match tree"));
        }
        self.evaluate_node(0, x.bits())
    }

    fn evaluate_node(&self, id: usize, bits: &[u8]) -> Result<Coeff> {
        let node = &self.nodes[id];
        let mut acc = node.constant;
        for child in &node.children {
            if bits[child.index] == 0 {
                continue;
            }
            let value = match child.target {
                ChildTarget::Leaf(c) => c,
                ChildTarget::Node(k) => self.evaluate_node(k, bits)?,
            };
            acc = checked_add(acc, value)?;
        }
        Ok(acc)
    }

    /// The polynomial rooted at node `id`, expanded back to monomial form.
    pub fn node_polynomial(&self, id: usize) -> Result<SmoothPolynomial> {
        let node = &self.nodes[id];
        let mut terms: Vec<(Vec<usize>, Coeff)> = Vec::new();
        for child in &node.children {
            match child.target {
                ChildTarget::Leaf(c) => terms.push((vec![child.index], c)),
                ChildTarget::Node(k) => {
                    let sub = self.node_polynomial(k)?;
                    if !sub.constant().is_zero() {
                        terms.push((vec![child.index], sub.constant()));
                    }
                    for m in sub.monomials() {
                        let mut vars: BTreeSet<usize> = m.vars().iter().copied().collect();
                        vars.insert(child.index);
                        terms.push((vars.into_iter().collect(), m.coeff()));
                    }
                }
            }
        }
        SmoothPolynomial::from_terms(self.n, node.constant, terms)
    }
}

/// Builds the decomposition tree of `p` under `strategy`.
pub fn decompose(p: &SmoothPolynomial, strategy: Strategy) -> Result<DecompositionTree> {
    match strategy {
        Strategy::CanonicalLex => Ok(decompose_canonical(p)),
        Strategy::MaxCutSymmetric => decompose_symmetric(p),
    }
}

fn decompose_canonical(p: &SmoothPolynomial) -> DecompositionTree {
    let d = p.degree();
    // Every proper prefix of length 1..min(ℓ, d-1) of a monomial is a node.
    let mut tuples: BTreeSet<Vec<usize>> = BTreeSet::new();
    for m in p.monomials() {
        let depth = m.degree().min(d.saturating_sub(1));
        for len in 1..=depth {
            tuples.insert(m.vars()[..len].to_vec());
        }
    }
    let mut ordered: Vec<Vec<usize>> = tuples.into_iter().collect();
    ordered.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut nodes = vec![TreeNode {
        tuple: Vec::new(),
        level: d,
        constant: p.constant(),
        children: Vec::new(),
    }];
    ids.insert(Vec::new(), 0);
    for t in ordered {
        let id = nodes.len();
        nodes.push(TreeNode {
            tuple: t.clone(),
            level: d - t.len(),
            constant: Coeff::zero(),
            children: Vec::new(),
        });
        let parent = ids[&t[..t.len() - 1]];
        nodes[parent].children.push(TreeChild {
            index: t[t.len() - 1],
            target: ChildTarget::Node(id),
        });
        ids.insert(t, id);
    }
    for m in p.monomials() {
        let vars = m.vars();
        if vars.len() == d {
            let parent = ids[&vars[..d - 1]];
            nodes[parent].children.push(TreeChild {
                index: vars[d - 1],
                target: ChildTarget::Leaf(m.coeff()),
            });
        } else {
            let id = ids[vars];
            nodes[id].constant = m.coeff();
        }
    }
    for node in &mut nodes {
        node.children.sort_by_key(|c| c.index);
    }
    DecompositionTree {
        n: p.n(),
        degree: d,
        strategy: Strategy::CanonicalLex,
        nodes,
    }
}

fn decompose_symmetric(p: &SmoothPolynomial) -> Result<DecompositionTree> {
    if p.degree() != 2 {
        return Err(Error::input(format!(
            "symmetric decomposition needs a degree-2 polynomial, got degree {}",
            p.degree()
        )));
    }
    let half = Coeff::new(1, 2);
    let mut constants: BTreeMap<usize, Coeff> = BTreeMap::new();
    let mut leaves: BTreeMap<usize, Vec<(usize, Coeff)>> = BTreeMap::new();
    for m in p.monomials() {
        match *m.vars() {
            [j] => {
                constants.insert(j, m.coeff());
            }
            [i, j] => {
                let share = checked_mul(m.coeff(), half)?;
                leaves.entry(i).or_default().push((j, share));
                leaves.entry(j).or_default().push((i, share));
            }
            _ => unreachable!("degree checked above"),
        }
    }
    let vertices: BTreeSet<usize> = constants.keys().chain(leaves.keys()).copied().collect();
    let mut nodes = vec![TreeNode {
        tuple: Vec::new(),
        level: 2,
        constant: p.constant(),
        children: Vec::new(),
    }];
    for j in vertices {
        let id = nodes.len();
        let mut children: Vec<TreeChild> = leaves
            .remove(&j)
            .unwrap_or_default()
            .into_iter()
            .map(|(i, c)| TreeChild {
                index: i,
                target: ChildTarget::Leaf(c),
            })
            .collect();
        children.sort_by_key(|c| c.index);
        nodes.push(TreeNode {
            tuple: vec![j],
            level: 1,
            constant: constants.get(&j).copied().unwrap_or_else(Coeff::zero),
            children,
        });
        nodes[0].children.push(TreeChild {
            index: j,
            target: ChildTarget::Node(id),
        });
    }
    Ok(DecompositionTree {
        n: p.n(),
        degree: 2,
        strategy: Strategy::MaxCutSymmetric,
        nodes,
    })
}
