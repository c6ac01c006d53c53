//! Random samples, sample assignments and the recursive estimation procedure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::poly::{coeff_to_f64, ChildTarget, DecompositionTree, SmoothnessCertificate};
use crate::rng;

/// A multiset of variable indices drawn uniformly with replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    n: usize,
    indices: Vec<usize>,
}

impl Sample {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("sample must contain at least one index"));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= n) {
            return Err(Error::input(format!("sample index {j} out of range for n = {n}")));
        }
        Ok(Sample { n, indices })
    }

    /// The sample containing every index exactly once.
    pub fn full(n: usize) -> Result<Self> {
        Sample::new(n, (0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.indices.len()
    }

    /// Indices in draw order, with repetitions.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Sorted distinct indices.
    pub fn distinct(&self) -> Vec<usize> {
        let mut d = self.indices.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Occurrence count per variable, length `n`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n];
        for &j in &self.indices {
            counts[j] += 1;
        }
        counts
    }
}

pub fn draw_sample<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::input("cannot sample from zero variables"));
    }
    if r == 0 {
        return Err(Error::input("sample size must be at least 1"));
    }
    Sample::new(n, (0..r).map(|_| rng.gen_range(0..n)).collect())
}

fn finish_size(raw: f64, n: usize) -> usize {
    if !raw.is_finite() || raw >= n as f64 {
        return n.max(1);
    }
    (raw.ceil() as usize).clamp(1, n.max(1))
}

/// `ceil(γ · d(d−1)β / (ε1² ε2) · n^{1−δ} · ln n)`, capped at `n`.
pub fn sample_size(
    n: usize,
    delta: f64,
    eps1: f64,
    eps2: f64,
    gamma_scale: f64,
    d: usize,
    beta: f64,
) -> usize {
    let nf = n as f64;
    let dd = (d * d.saturating_sub(1)) as f64;
    let raw = gamma_scale * dd * beta / (eps1 * eps1 * eps2) * nf.powf(1.0 - delta) * nf.ln();
    finish_size(raw, n)
}

/// Max-Cut sample size `ceil(γ · n ln n / (Δ ε1² ε2))`, capped at `n`.
pub fn maxcut_sample_size(n: usize, avg_degree: f64, eps1: f64, eps2: f64, gamma_scale: f64) -> usize {
    let nf = n as f64;
    let raw = gamma_scale * nf * nf.ln() / (avg_degree * eps1 * eps1 * eps2);
    finish_size(raw, n)
}

/// k-Densest sample size `ceil(γ · n^{1−δ/3} ln n / (ε1² ε2))`, capped at `n`.
pub fn kdense_sample_size(n: usize, delta: f64, eps1: f64, eps2: f64, gamma_scale: f64) -> usize {
    let nf = n as f64;
    let raw = gamma_scale * nf.powf(1.0 - delta / 3.0) * nf.ln() / (eps1 * eps1 * eps2);
    finish_size(raw, n)
}

/// Bits for the distinct indices of a sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment {
    indices: Vec<usize>,
    bits: Vec<u8>,
}

impl PartialAssignment {
    /// `indices` must be sorted and distinct, `bits` binary and the same length.
    pub fn new(indices: Vec<usize>, bits: Vec<u8>) -> Result<Self> {
        if indices.len() != bits.len() {
            return Err(Error::input("partial assignment length mismatch"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("partial assignment indices must be sorted and distinct"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::input("partial assignment bits must be 0 or 1"));
        }
        Ok(PartialAssignment { indices, bits })
    }

    pub fn restrict(x: &Assignment, indices: &[usize]) -> Self {
        PartialAssignment {
            indices: indices.to_vec(),
            bits: indices.iter().map(|&j| x.bits()[j]).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> Option<u8> {
        self.indices
            .binary_search(&j)
            .ok()
            .map(|pos| self.bits[pos])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mode {
    /// Every assignment of the distinct sampled indices.
    Exhaustive,
    /// Only the restriction of a known assignment.
    Planted { x: Assignment },
    /// `count` seeded uniform assignments.
    Random { count: usize },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Planted { .. } => "planted",
            Mode::Random { .. } => "random",
        }
    }
}

/// Indexable sequence of sample assignments. Ordinal `i` always maps to the
/// same assignment, so workers can process ordinals in any order.
#[derive(Debug, Clone)]
pub struct AssignmentSource {
    indices: Vec<usize>,
    kind: SourceKind,
}

#[derive(Debug, Clone)]
enum SourceKind {
    Exhaustive,
    Planted(Vec<u8>),
    Random { count: usize, seed: u64 },
}

impl AssignmentSource {
    pub fn len(&self) -> u64 {
        match &self.kind {
            SourceKind::Exhaustive => 1u64 << self.indices.len(),
            SourceKind::Planted(_) => 1,
            SourceKind::Random { count, .. } => *count as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, ordinal: u64) -> PartialAssignment {
        let u = self.indices.len();
        let bits = match &self.kind {
            // First sampled index is the most significant bit: lexicographic order.
            SourceKind::Exhaustive => (0..u)
                .map(|i| ((ordinal >> (u - 1 - i)) & 1) as u8)
                .collect(),
            SourceKind::Planted(bits) => bits.clone(),
            SourceKind::Random { seed, .. } => {
                let mut g = rng::stream(*seed, &[rng::TAG_ASSIGNMENT, ordinal]);
                (0..u).map(|_| g.gen_range(0..2u8)).collect()
            }
        };
        PartialAssignment {
            indices: self.indices.clone(),
            bits,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = PartialAssignment> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Sequence of sample assignments for `mode`. Exhaustive mode fails when the
/// number of distinct sampled indices exceeds `cap`.
pub fn assignments(sample: &Sample, mode: &Mode, cap: usize, seed: u64) -> Result<AssignmentSource> {
    let indices = sample.distinct();
    let kind = match mode {
        Mode::Exhaustive => {
            if indices.len() > cap || indices.len() >= 63 {
                return Err(Error::config(format!(
                    "exhaustive mode needs 2^{} assignments, exceeding the exhaustion cap of {} distinct indices",
                    indices.len(),
                    cap
                )));
            }
            SourceKind::Exhaustive
        }
        Mode::Planted { x } => {
            if x.len() != sample.n() {
                return Err(Error::input(format!(
                    "planted assignment has {} entries, expected {}",
                    x.len(),
                    sample.n()
                )));
            }
            SourceKind::Planted(indices.iter().map(|&j| x.bits()[j]).collect())
        }
        Mode::Random { count } => SourceKind::Random {
            count: *count,
            seed,
        },
    };
    Ok(AssignmentSource { indices, kind })
}

/// Per-node estimations, indexed like [`DecompositionTree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTree {
    pub rho: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub t_bar: Vec<f64>,
}

impl EstimationTree {
    /// Estimation of child `pos` of node `id`: the leaf coefficient or the
    /// child node's `rho`.
    pub fn child_rho(&self, tree: &DecompositionTree, id: usize, pos: usize) -> f64 {
        match &tree.node(id).children[pos].target {
            ChildTarget::Leaf(c) => coeff_to_f64(c),
            ChildTarget::Node(k) => self.rho[*k],
        }
    }

    /// Sum of `t_bar` over the root's children.
    pub fn root_children_t_bar(&self, tree: &DecompositionTree) -> f64 {
        tree.root()
            .children
            .iter()
            .map(|c| match c.target {
                ChildTarget::Node(k) => self.t_bar[k],
                ChildTarget::Leaf(_) => 0.0,
            })
            .sum()
    }
}

/// Runs the recursive estimation bottom-up.
///
/// A node's estimation is `c_T + (n/r) Σ_{j∈R} s_j ρ_{Tj}` with the sum over the
/// sample multiset, clamped to `c_T + [Σ_j min(0, ρ_{Tj}), Σ_j max(0, ρ_{Tj})]`,
/// the range the node polynomial can actually take given its children's
/// estimations. `rho_bar` is `Σ_j |ρ_{Tj}|` over all children.
pub fn estimate(
    tree: &DecompositionTree,
    sample: &Sample,
    s: &PartialAssignment,
) -> Result<EstimationTree> {
    let n = tree.n();
    if sample.n() != n {
        return Err(Error::input("sample and tree disagree on variable count"));
    }
    let scale = n as f64 / sample.r() as f64;
    let mut weight = vec![0.0f64; n];
    for &j in sample.indices() {
        match s.get(j) {
            Some(1) => weight[j] += scale,
            Some(_) => {}
            None => {
                return Err(Error::input(format!(
                    "sampled index {} has no assigned bit",
                    j + 1
                )))
            }
        }
    }

    let count = tree.nodes().len();
    let mut rho = vec![0.0; count];
    let mut rho_bar = vec![0.0; count];
    let mut t_bar = vec![0.0; count];
    // Children always have larger ids than their parents.
    for id in (0..count).rev() {
        let node = tree.node(id);
        let c = coeff_to_f64(&node.constant);
        let mut raw = c;
        let mut lo = c;
        let mut hi = c;
        let mut abs_sum = 0.0;
        let mut below = 0.0;
        for child in &node.children {
            let child_rho = match &child.target {
                ChildTarget::Leaf(a) => coeff_to_f64(a),
                ChildTarget::Node(k) => {
                    below += t_bar[*k];
                    rho[*k]
                }
            };
            raw += weight[child.index] * child_rho;
            abs_sum += child_rho.abs();
            if child_rho < 0.0 {
                lo += child_rho;
            } else {
                hi += child_rho;
            }
        }
        rho[id] = raw.clamp(lo, hi);
        rho_bar[id] = abs_sum;
        t_bar[id] = if node.level <= 1 { abs_sum } else { abs_sum + below };
    }
    Ok(EstimationTree { rho, rho_bar, t_bar })
}

/// Checks the per-level and cumulative aggregate bounds that the clamped
/// estimations satisfy on a certified polynomial:
/// `Σ_{level ℓ} ρ̄ ≤ κ ℓ β n^{d−1+δ}` and `Σ_j t̄_j ≤ κ d(d−1) β n^{d−1+δ} / 2`.
pub fn check_aggregate_bounds(
    tree: &DecompositionTree,
    est: &EstimationTree,
    cert: &SmoothnessCertificate,
) -> Result<()> {
    let d = tree.degree();
    let scale = cert.kappa * cert.beta * cert.density_scale();
    let slack = |bound: f64| bound * (1.0 + 1e-9) + 1e-9;
    let mut per_level = vec![0.0; d + 1];
    for (id, node) in tree.nodes().iter().enumerate().skip(1) {
        per_level[node.level] += est.rho_bar[id];
    }
    for (level, &sum) in per_level.iter().enumerate().take(d).skip(1) {
        let bound = level as f64 * scale;
        if sum > slack(bound) {
            return Err(Error::Invariant(format!(
                "level-{level} absolute estimations sum to {sum}, above {bound}"
            )));
        }
    }
    let total = est.root_children_t_bar(tree);
    let bound = scale * (d * d.saturating_sub(1)) as f64 / 2.0;
    if total > slack(bound) {
        return Err(Error::Invariant(format!(
            "cumulative estimations sum to {total}, above {bound}"
        )));
    }
    Ok(())
}

/// For a level-1 node whose leaves share one coefficient `a` (the symmetric
/// graph decompositions), recovers the estimate of `Σ_{i∈N(j)} x_i` from the
/// node estimate `c + a Σ x_i`.
pub fn neighbor_estimate(tree: &DecompositionTree, est: &EstimationTree, id: usize) -> Option<f64> {
    let node = tree.node(id);
    let first = match node.children.first()?.target {
        ChildTarget::Leaf(a) => a,
        ChildTarget::Node(_) => return None,
    };
    if node
        .children
        .iter()
        .any(|c| c.target != ChildTarget::Leaf(first))
    {
        return None;
    }
    Some((est.rho[id] - coeff_to_f64(&node.constant)) / coeff_to_f64(&first))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::poly::{decompose, from_graph_maxcut, Coeff, SmoothPolynomial, Strategy};

    #[test]
    fn single_index_population() {
        let mut g = rng::stream(1, &[]);
        let s = draw_sample(1, 5, &mut g).unwrap();
        assert_eq!(s.indices(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = draw_sample(4, 3, &mut rng::stream(9, &[1])).unwrap();
        let b = draw_sample(4, 3, &mut rng::stream(9, &[1])).unwrap();
        assert_eq!(a, b);
        assert!(a.indices().iter().all(|&j| j < 4));
    }

    #[test]
    fn sample_size_formula() {
        assert_eq!(sample_size(100, 1.0, 1.0, 1.0, 1.0, 2, 1.0), 10);
        assert_eq!(sample_size(100, 0.5, 0.01, 0.01, 1.0, 2, 1.0), 100);
        let mut prev = 0;
        for k in (1..=10).rev() {
            let r = sample_size(1_000_000, k as f64 / 10.0, 1.0, 1.0, 1.0, 2, 1.0);
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn multiplicity_counts_in_estimation() {
        let p = SmoothPolynomial::from_terms(
            4,
            Coeff::from_integer(0),
            (0..4).map(|j| (vec![j], Coeff::from_integer(1))),
        )
        .unwrap();
        let tree = decompose(&p, Strategy::CanonicalLex).unwrap();
        let sample = Sample::new(4, vec![0, 0, 2]).unwrap();
        let s = PartialAssignment::new(vec![0, 2], vec![1, 0]).unwrap();
        let est = estimate(&tree, &sample, &s).unwrap();
        assert!((est.rho[0] - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_neighbor_estimate() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let tree = decompose(&from_graph_maxcut(&g), Strategy::MaxCutSymmetric).unwrap();
        let sample = Sample::new(3, vec![1, 2]).unwrap();
        let s = PartialAssignment::new(vec![1, 2], vec![1, 0]).unwrap();
        let est = estimate(&tree, &sample, &s).unwrap();
        let id = tree.find(&[0]).unwrap();
        assert!((neighbor_estimate(&tree, &est, id).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn missing_bit_is_input_error() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let tree = decompose(&from_graph_maxcut(&g), Strategy::MaxCutSymmetric).unwrap();
        let sample = Sample::new(3, vec![1, 2]).unwrap();
        let s = PartialAssignment::new(vec![1], vec![1]).unwrap();
        assert!(matches!(estimate(&tree, &sample, &s), Err(Error::Input(_))));
    }

    #[test]
    fn exhaustive_order_and_planted_restriction() {
        let sample = Sample::new(4, vec![2, 0, 2]).unwrap();
        let src = assignments(&sample, &Mode::Exhaustive, 22, 0).unwrap();
        let all: Vec<Vec<u8>> = src.iter().map(|a| a.bits().to_vec()).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let x = Assignment::from_bits(vec![0, 1, 1, 0]).unwrap();
        let sample = Sample::new(4, vec![1, 3]).unwrap();
        let src = assignments(&sample, &Mode::Planted { x }, 22, 0).unwrap();
        assert_eq!(src.len(), 1);
        assert_eq!(src.get(0).bits(), &[1, 0]);
    }

    #[test]
    fn exhaustive_cap_enforced() {
        let sample = Sample::new(30, (0..25).collect()).unwrap();
        assert!(matches!(
            assignments(&sample, &Mode::Exhaustive, 20, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn random_mode_is_prefix_consistent() {
        let sample = Sample::new(10, (0..10).collect()).unwrap();
        let a = assignments(&sample, &Mode::Random { count: 3 }, 22, 5).unwrap();
        let b = assignments(&sample, &Mode::Random { count: 5 }, 22, 5).unwrap();
        for i in 0..3 {
            assert_eq!(a.get(i), b.get(i));
        }
    }
}
