//! End-to-end pipelines: sample, enumerate sample assignments, estimate,
//! relax, round and keep the best exactly evaluated point.

use std::time::Duration;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::csp::{arithmetize, CspInstance};
use crate::error::{Error, Result};
use crate::estimator::{
    assignments, check_aggregate_bounds, draw_sample, estimate, kdense_sample_size,
    maxcut_sample_size, sample_size, Mode, PartialAssignment, Sample,
};
use crate::graph::Graph;
use crate::oracle::{binomial, brute_force_kdense, brute_force_max, MAX_ENUMERATION_VARS};
use crate::poly::{
    certify, coeff_to_f64, decompose, from_graph_kdense, from_graph_maxcut, Coeff,
    DecompositionTree, SmoothPolynomial, SmoothnessCertificate, Strategy,
};
use crate::relaxation::{build_program, solve, Variant};
use crate::rounding::round_scored;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Target relative error, in (0, 1).
    pub eps: f64,
    /// Density exponent, in (0, 1].
    pub delta: f64,
    /// Multiplier on every sample-size formula.
    pub gamma_scale: f64,
    /// Fixed sample size instead of the formula (still capped at n).
    pub sample_override: Option<usize>,
    pub mode: Mode,
    /// Independent rounding trials per sample assignment.
    pub trials: usize,
    pub seed: u64,
    pub lp_tol: f64,
    /// Largest number of distinct sampled indices exhaustive mode accepts.
    pub cap: usize,
    pub oracle_compare: bool,
    /// Worker threads; 0 uses the default pool.
    pub threads: usize,
    /// How many times an infeasible relaxation is retried with doubled
    /// `ε1, ε2` before the sample assignment is skipped.
    pub widen_retries: u32,
    /// Largest `C(n, k)` solved by exact enumeration in k-Densest Subgraph.
    pub kdense_budget: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            eps: 0.2,
            delta: 1.0,
            gamma_scale: 1.0,
            sample_override: None,
            mode: Mode::Exhaustive,
            trials: 32,
            seed: 0,
            lp_tol: 1e-7,
            cap: 22,
            oracle_compare: false,
            threads: 0,
            widen_retries: 10,
            kdense_budget: 5_000_000,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::config(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.gamma_scale > 0.0) {
            return Err(Error::config("gamma_scale must be positive"));
        }
        if self.sample_override == Some(0) {
            return Err(Error::config("sample size must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::config("at least one rounding trial is required"));
        }
        if !(self.lp_tol > 0.0) {
            return Err(Error::config("LP tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitVariant {
    MaxCut,
    Generic,
    KDense,
}

/// Splits the target error into the relative and additive tolerances of the
/// estimation rows.
pub fn eps_split(eps: f64, d: usize, beta: f64, kappa: f64, variant: SplitVariant) -> Result<(f64, f64)> {
    match variant {
        SplitVariant::MaxCut => Ok((eps / 16.0, eps / 16.0)),
        SplitVariant::KDense => Ok((eps / 8.0, eps / 8.0)),
        SplitVariant::Generic => {
            if d < 2 {
                return Err(Error::input("the generic split needs degree ≥ 2"));
            }
            let df = d as f64;
            Ok((eps / (4.0 * df * (df - 1.0) * beta * kappa), eps / (8.0 * (df - 1.0))))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Assignments in the enumeration.
    pub assignments_total: u64,
    /// Assignments that went through the pipeline.
    pub assignments_tried: u64,
    /// Assignments whose relaxation stayed infeasible after every widening.
    pub lp_infeasible: u64,
    /// Assignments that needed at least one widening.
    pub widened: u64,
    pub solver_errors: u64,
    /// Candidates whose rounded point failed the deviation check.
    pub deviation_failures: u64,
}

impl Counters {
    fn add(&mut self, other: &Counters) {
        self.assignments_total += other.assignments_total;
        self.assignments_tried += other.assignments_tried;
        self.lp_infeasible += other.lp_infeasible;
        self.widened += other.widened;
        self.solver_errors += other.solver_errors;
        self.deviation_failures += other.deviation_failures;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspSummary {
    pub k: usize,
    pub m: usize,
    pub satisfied: usize,
    pub oracle_satisfied: Option<usize>,
    /// `1 − ε n^{d−1+δ} / (2^{−k} m)`: the ratio the additive guarantee implies
    /// through the trivial bound OPT ≥ 2^{−k} m. May be negative at small n.
    pub implied_ratio_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDenseSummary {
    pub k: usize,
    pub edges: usize,
    pub branch: String,
    pub subsets: u64,
    pub repair_moves: Option<usize>,
    /// Rounded cardinality before repair.
    pub rounded_size: Option<usize>,
    /// `n^{1−δ/3}`, the asymptotic switch point between the two branches.
    pub asymptotic_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub method: String,
    pub n: usize,
    pub degree: usize,
    pub certificate: Option<SmoothnessCertificate>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub sample_size: Option<usize>,
    pub distinct_sampled: Option<usize>,
    pub best: Assignment,
    /// `p(best)`, recomputed exactly.
    pub value: f64,
    pub value_exact: String,
    pub winning_ordinal: Option<u64>,
    pub fractional_objective: Option<f64>,
    pub rounded_objective: Option<f64>,
    pub deviation_pass: Option<bool>,
    /// Scale factor applied to `ε1, ε2` for the winning relaxation.
    pub winning_widening: Option<f64>,
    pub oracle_value: Option<f64>,
    pub ratio: Option<f64>,
    pub additive_gap: Option<f64>,
    /// `ε κ n^{d−1+δ}` for polynomial runs.
    pub additive_bound: Option<f64>,
    pub counters: Counters,
    pub csp: Option<CspSummary>,
    pub kdense: Option<KDenseSummary>,
    pub config: SchemeConfig,
    pub timings: Timings,
}

impl RunReport {
    /// Copy with timings zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: Timings { total_ms: 0.0 },
            ..self.clone()
        }
    }

    fn attach_oracle(&mut self, oracle: f64) {
        self.oracle_value = Some(oracle);
        self.additive_gap = Some(oracle - self.value);
        self.ratio = Some(if oracle == 0.0 {
            if self.value >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            self.value / oracle
        });
    }
}

#[cfg(not(target_arch = "wasm32"))]
struct Clock(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }

    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

#[cfg(target_arch = "wasm32")]
struct Clock;

#[cfg(target_arch = "wasm32")]
impl Clock {
    fn start() -> Self {
        Clock
    }

    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone)]
struct Candidate {
    ordinal: u64,
    z: Assignment,
    value: Coeff,
    fractional: f64,
    rounded: f64,
    deviation_pass: bool,
    widening: f64,
    repair_moves: Option<usize>,
    rounded_size: Option<usize>,
}

#[derive(Debug, Clone, Default)]
struct Summary {
    best: Option<Candidate>,
    counters: Counters,
    error: Option<(u64, Error)>,
}

impl Summary {
    fn merge(mut self, other: Summary) -> Summary {
        self.counters.add(&other.counters);
        self.best = match (self.best.take(), other.best) {
            (Some(a), Some(b)) => Some(if b.value > a.value || (b.value == a.value && b.ordinal < a.ordinal) {
                b
            } else {
                a
            }),
            (a, b) => a.or(b),
        };
        self.error = match (self.error.take(), other.error) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

struct Pipeline<'a> {
    poly: &'a SmoothPolynomial,
    tree: &'a DecompositionTree,
    cert: &'a SmoothnessCertificate,
    sample: &'a Sample,
    variant: Variant,
    eps1: f64,
    eps2: f64,
    cfg: &'a SchemeConfig,
    graph: Option<&'a Graph>,
}

impl Pipeline<'_> {
    fn run_one(&self, ordinal: u64, s: &PartialAssignment) -> Summary {
        let mut summary = Summary {
            counters: Counters {
                assignments_total: 1,
                assignments_tried: 1,
                ..Counters::default()
            },
            ..Summary::default()
        };
        match self.candidate(ordinal, s, &mut summary.counters) {
            Ok(c) => summary.best = c,
            Err(Error::Solver(_)) => summary.counters.solver_errors += 1,
            Err(e) => summary.error = Some((ordinal, e)),
        }
        summary
    }

    fn candidate(&self, ordinal: u64, s: &PartialAssignment, counters: &mut Counters) -> Result<Option<Candidate>> {
        let est = estimate(self.tree, self.sample, s)?;
        check_aggregate_bounds(self.tree, &est, self.cert)?;
        let mut solved = None;
        for attempt in 0..=self.cfg.widen_retries {
            let factor = f64::from(1u32 << attempt.min(30));
            let program = build_program(
                self.tree,
                &est,
                self.eps1 * factor,
                self.eps2 * factor,
                self.cfg.delta,
                self.variant,
            )?;
            let sol = solve(&program, self.cfg.lp_tol)?;
            if sol.is_optimal() {
                if attempt > 0 {
                    counters.widened += 1;
                }
                solved = Some((program, sol, factor));
                break;
            }
        }
        let Some((program, sol, factor)) = solved else {
            counters.lp_infeasible += 1;
            return Ok(None);
        };
        let mut g = rng::stream(self.cfg.seed, &[rng::TAG_ROUNDING, ordinal]);
        // Trials are ranked by the exact value of the point they lead to.
        let score = |z: &Assignment, _: f64| {
            let mut z = z.clone();
            if let (Variant::KDense { k }, Some(graph)) = (self.variant, self.graph) {
                repair(graph, &mut z, k);
            }
            self.poly.evaluate(&z).map_or(f64::NEG_INFINITY, |v| coeff_to_f64(&v))
        };
        let rounded = round_scored(&sol, &program, self.cfg.trials, &mut g, score)?;
        if !rounded.deviation.pass {
            counters.deviation_failures += 1;
        }
        let mut z = rounded.z;
        let (mut repair_moves, mut rounded_size) = (None, None);
        if let (Variant::KDense { k }, Some(graph)) = (self.variant, self.graph) {
            rounded_size = Some(z.ones());
            repair_moves = Some(repair(graph, &mut z, k));
        }
        let value = self.poly.evaluate(&z)?;
        Ok(Some(Candidate {
            ordinal,
            z,
            value,
            fractional: sol.objective_value,
            rounded: rounded.objective,
            deviation_pass: rounded.deviation.pass,
            widening: factor,
            repair_moves,
            rounded_size,
        }))
    }
}

/// Adds or removes vertices until exactly `k` are selected: removal takes the
/// selected vertex with the fewest selected neighbors, addition the outside
/// vertex with the most, ties to the lowest index. Returns the move count.
pub fn repair(g: &Graph, z: &mut Assignment, k: usize) -> usize {
    let n = g.n();
    let mut inside_deg: Vec<usize> = (0..n)
        .map(|v| g.neighbors(v).iter().filter(|&&u| z.get(u)).count())
        .collect();
    let mut moves = 0;
    let mut size = z.ones();
    while size != k {
        let adding = size < k;
        let pick = (0..n)
            .filter(|&v| z.get(v) != adding)
            .fold(None, |best: Option<usize>, v| match best {
                None => Some(v),
                Some(b) => {
                    let better = if adding {
                        inside_deg[v] > inside_deg[b]
                    } else {
                        inside_deg[v] < inside_deg[b]
                    };
                    Some(if better { v } else { b })
                }
            })
            .expect("a vertex on the needed side exists while size ≠ k");
        z.set(pick, adding);
        for &u in g.neighbors(pick) {
            if adding {
                inside_deg[u] += 1;
            } else {
                inside_deg[u] -= 1;
            }
        }
        size = if adding { size + 1 } else { size - 1 };
        moves += 1;
    }
    moves
}

fn run_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
            return Ok(pool.install(job));
        }
    }
    let _ = threads;
    Ok(job())
}

/// Fans the assignments out to workers and merges deterministically.
fn run_sampled(pipe: &Pipeline<'_>) -> Result<Summary> {
    let source = assignments(pipe.sample, &pipe.cfg.mode, pipe.cfg.cap, pipe.cfg.seed)?;
    let total = source.len();
    let work = || {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..total)
                .into_par_iter()
                .map(|i| pipe.run_one(i, &source.get(i)))
                .reduce(Summary::default, Summary::merge)
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..total)
                .map(|i| pipe.run_one(i, &source.get(i)))
                .fold(Summary::default(), Summary::merge)
        }
    };
    let summary = run_pool(pipe.cfg.threads, work)?;
    if let Some((_, e)) = summary.error {
        return Err(e);
    }
    Ok(summary)
}

struct Prepared {
    sample: Sample,
}

fn prepare_sample(n: usize, r_formula: usize, cfg: &SchemeConfig) -> Result<Prepared> {
    let sample = match cfg.sample_override {
        // A formula saturated at n takes every variable once; n draws with
        // replacement would see only about 63% of them.
        None if r_formula >= n => Sample::full(n)?,
        over => {
            let r = over.map_or(r_formula, |r| r.min(n)).max(1);
            draw_sample(n, r, &mut rng::stream(cfg.seed, &[rng::TAG_SAMPLE]))?
        }
    };
    // Fail before any work when exhaustive enumeration is out of reach.
    assignments(&sample, &cfg.mode, cfg.cap, cfg.seed)?;
    Ok(Prepared { sample })
}

#[allow(clippy::too_many_arguments)]
fn sampled_report(
    problem: &str,
    poly: &SmoothPolynomial,
    tree: &DecompositionTree,
    cert: SmoothnessCertificate,
    variant: Variant,
    (eps1, eps2): (f64, f64),
    r_formula: usize,
    graph: Option<&Graph>,
    cfg: &SchemeConfig,
    clock: &Clock,
) -> Result<(RunReport, Option<Candidate>)> {
    let prepared = prepare_sample(poly.n(), r_formula, cfg)?;
    let pipe = Pipeline {
        poly,
        tree,
        cert: &cert,
        sample: &prepared.sample,
        variant,
        eps1,
        eps2,
        cfg,
        graph,
    };
    let summary = run_sampled(&pipe)?;
    let best = summary.best.clone().ok_or_else(|| {
        Error::Solver(format!(
            "no sample assignment produced a feasible relaxation ({} infeasible, {} solver errors)",
            summary.counters.lp_infeasible, summary.counters.solver_errors
        ))
    })?;
    let report = RunReport {
        problem: problem.into(),
        method: "sampled".into(),
        n: poly.n(),
        degree: poly.degree(),
        certificate: Some(cert),
        eps1: Some(eps1),
        eps2: Some(eps2),
        sample_size: Some(prepared.sample.r()),
        distinct_sampled: Some(prepared.sample.distinct().len()),
        value: coeff_to_f64(&best.value),
        value_exact: best.value.to_string(),
        best: best.z.clone(),
        winning_ordinal: Some(best.ordinal),
        fractional_objective: Some(best.fractional),
        rounded_objective: Some(best.rounded),
        deviation_pass: Some(best.deviation_pass),
        winning_widening: Some(best.widening),
        oracle_value: None,
        ratio: None,
        additive_gap: None,
        additive_bound: None,
        counters: summary.counters,
        csp: None,
        kdense: None,
        config: cfg.clone(),
        timings: Timings {
            total_ms: ms(clock.elapsed()),
        },
    };
    Ok((report, Some(best)))
}

fn exact_report(problem: &str, method: &str, p: &SmoothPolynomial, z: Assignment, cfg: &SchemeConfig) -> Result<RunReport> {
    let value = p.evaluate(&z)?;
    Ok(RunReport {
        problem: problem.into(),
        method: method.into(),
        n: p.n(),
        degree: p.degree(),
        certificate: None,
        eps1: None,
        eps2: None,
        sample_size: None,
        distinct_sampled: None,
        best: z,
        value: coeff_to_f64(&value),
        value_exact: value.to_string(),
        winning_ordinal: None,
        fractional_objective: None,
        rounded_objective: None,
        deviation_pass: None,
        winning_widening: None,
        oracle_value: None,
        ratio: None,
        additive_gap: None,
        additive_bound: None,
        counters: Counters::default(),
        csp: None,
        kdense: None,
        config: cfg.clone(),
        timings: Timings { total_ms: 0.0 },
    })
}

fn oracle_value(p: &SmoothPolynomial) -> Result<f64> {
    if p.n() > MAX_ENUMERATION_VARS {
        return Err(Error::config(format!(
            "oracle comparison refuses n = {} (limit {MAX_ENUMERATION_VARS})",
            p.n()
        )));
    }
    Ok(coeff_to_f64(&brute_force_max(p)?.1))
}

pub fn approximate_maxcut(g: &Graph, cfg: &SchemeConfig) -> Result<RunReport> {
    cfg.validate()?;
    if g.m() == 0 {
        return Err(Error::input("Max-Cut needs at least one edge"));
    }
    let clock = Clock::start();
    let p = from_graph_maxcut(g);
    let cert = certify(&p, cfg.delta)?;
    let tree = decompose(&p, Strategy::MaxCutSymmetric)?;
    let split = eps_split(cfg.eps, 2, cert.beta, cert.kappa, SplitVariant::MaxCut)?;
    let r = maxcut_sample_size(g.n(), g.average_degree(), split.0, split.1, cfg.gamma_scale);
    let (mut report, _) = sampled_report("maxcut", &p, &tree, cert, Variant::MaxCut, split, r, None, cfg, &clock)?;
    if cfg.oracle_compare {
        report.attach_oracle(oracle_value(&p)?);
    }
    report.timings.total_ms = ms(clock.elapsed());
    Ok(report)
}

pub fn maximize_smooth(p: &SmoothPolynomial, cfg: &SchemeConfig) -> Result<RunReport> {
    cfg.validate()?;
    let clock = Clock::start();
    let mut report = if p.is_constant() {
        exact_report("smooth", "constant", p, Assignment::zeros(p.n()), cfg)?
    } else if p.degree() == 1 {
        let mut z = Assignment::zeros(p.n());
        for m in p.monomials() {
            if m.coeff() > Coeff::zero() {
                z.set(m.vars()[0], true);
            }
        }
        exact_report("smooth", "exact-linear", p, z, cfg)?
    } else {
        let cert = certify(p, cfg.delta)?;
        let d = p.degree();
        let tree = decompose(p, Strategy::CanonicalLex)?;
        let split = eps_split(cfg.eps, d, cert.beta, cert.kappa, SplitVariant::Generic)?;
        let r = sample_size(p.n(), cfg.delta, split.0, split.1, cfg.gamma_scale, d, cert.beta);
        let kappa = cert.kappa;
        let (mut report, _) =
            sampled_report("smooth", p, &tree, cert, Variant::Generic, split, r, None, cfg, &clock)?;
        report.additive_bound =
            Some(cfg.eps * kappa * (p.n() as f64).powf(d as f64 - 1.0 + cfg.delta));
        report
    };
    if cfg.oracle_compare {
        report.attach_oracle(oracle_value(p)?);
    }
    report.timings.total_ms = ms(clock.elapsed());
    Ok(report)
}

pub fn approximate_kcsp(inst: &CspInstance, cfg: &SchemeConfig) -> Result<RunReport> {
    let p = arithmetize(inst)?;
    let mut report = maximize_smooth(&p, cfg)?;
    report.problem = "kcsp".into();
    let satisfied = inst.count_satisfied(&report.best)?;
    if satisfied as f64 != report.value {
        return Err(Error::Invariant(format!(
            "arithmetized value {} disagrees with recount {satisfied}",
            report.value
        )));
    }
    let k = inst.k();
    let additive = cfg.eps * (p.n() as f64).powf(k as f64 - 1.0 + cfg.delta);
    let trivial = inst.m() as f64 / f64::from(1u32 << k);
    report.csp = Some(CspSummary {
        k,
        m: inst.m(),
        satisfied,
        oracle_satisfied: report.oracle_value.map(|v| v.round() as usize),
        implied_ratio_bound: 1.0 - additive / trivial,
    });
    Ok(report)
}

/// Exact densest `k`-subset by depth-first enumeration of index
/// combinations, excluding before including so the first optimum found is
/// the lexicographically smallest.
pub fn enumerate_kdense(g: &Graph, k: usize) -> (Assignment, usize) {
    struct Search<'a> {
        g: &'a Graph,
        k: usize,
        chosen: Vec<bool>,
        best: Option<(usize, Vec<bool>)>,
    }
    impl Search<'_> {
        fn go(&mut self, v: usize, size: usize, edges: usize) {
            let n = self.g.n();
            if size == self.k {
                if self.best.as_ref().is_none_or(|b| edges > b.0) {
                    self.best = Some((edges, self.chosen.clone()));
                }
                return;
            }
            if n - v < self.k - size {
                return;
            }
            self.go(v + 1, size, edges);
            let gain = self.g.neighbors(v).iter().filter(|&&u| self.chosen[u]).count();
            self.chosen[v] = true;
            self.go(v + 1, size + 1, edges + gain);
            self.chosen[v] = false;
        }
    }
    let mut s = Search {
        g,
        k,
        chosen: vec![false; g.n()],
        best: None,
    };
    s.go(0, 0, 0);
    let (edges, chosen) = s.best.expect("k ≤ n leaves at least one subset");
    (Assignment::from_bools(chosen), edges)
}

pub fn approximate_kdense(g: &Graph, k: usize, cfg: &SchemeConfig) -> Result<RunReport> {
    cfg.validate()?;
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::input(format!("k must lie in 1..={n}, got {k}")));
    }
    let clock = Clock::start();
    let p = from_graph_kdense(g);
    let subsets = binomial(n, k);
    let threshold = (n as f64).powf(1.0 - cfg.delta / 3.0);
    let mut report = if subsets <= cfg.kdense_budget || p.is_constant() {
        let (z, edges) = enumerate_kdense(g, k);
        let mut report = exact_report("kdense", "enumeration", &p, z, cfg)?;
        report.kdense = Some(KDenseSummary {
            k,
            edges,
            branch: "enumeration".into(),
            subsets,
            repair_moves: None,
            rounded_size: None,
            asymptotic_threshold: threshold,
        });
        report
    } else {
        let cert = certify(&p, cfg.delta)?;
        let tree = decompose(&p, Strategy::MaxCutSymmetric)?;
        let split = eps_split(cfg.eps, 2, cert.beta, cert.kappa, SplitVariant::KDense)?;
        let r = kdense_sample_size(n, cfg.delta, split.0, split.1, cfg.gamma_scale);
        let (mut report, best) = sampled_report(
            "kdense",
            &p,
            &tree,
            cert,
            Variant::KDense { k },
            split,
            r,
            Some(g),
            cfg,
            &clock,
        )?;
        let best = best.expect("sampled report carries its candidate");
        report.kdense = Some(KDenseSummary {
            k,
            edges: g.induced_edges(report.best.bits()),
            branch: "sampled".into(),
            subsets,
            repair_moves: best.repair_moves,
            rounded_size: best.rounded_size,
            asymptotic_threshold: threshold,
        });
        report
    };
    if cfg.oracle_compare {
        let (_, opt) = brute_force_kdense(g, k)?;
        report.attach_oracle(opt as f64);
    }
    report.timings.total_ms = ms(clock.elapsed());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn split_values() {
        let (a, b) = eps_split(0.16, 2, 2.0, 1.0, SplitVariant::MaxCut).unwrap();
        assert!((a - 0.01).abs() < 1e-15 && (b - 0.01).abs() < 1e-15);
        let (a, b) = eps_split(0.24, 3, 1.0, 1.0, SplitVariant::Generic).unwrap();
        assert!((a - 0.01).abs() < 1e-15 && (b - 0.015).abs() < 1e-15);
        let (a, b) = eps_split(0.8, 2, 1.0, 1.0, SplitVariant::KDense).unwrap();
        assert!((a - 0.1).abs() < 1e-15 && (b - 0.1).abs() < 1e-15);
        assert!(eps_split(0.2, 1, 1.0, 1.0, SplitVariant::Generic).is_err());
    }

    #[test]
    fn triangle_planted() {
        let x = Assignment::from_bits(vec![1, 0, 0]).unwrap();
        let cfg = SchemeConfig {
            mode: Mode::Planted { x },
            oracle_compare: true,
            seed: 1,
            ..SchemeConfig::default()
        };
        let report = approximate_maxcut(&triangle(), &cfg).unwrap();
        assert_eq!(report.value, 2.0);
        assert_eq!(report.ratio, Some(1.0));
    }

    #[test]
    fn single_edge_any_mode() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        for mode in [Mode::Exhaustive, Mode::Random { count: 3 }] {
            let cfg = SchemeConfig {
                mode,
                ..SchemeConfig::default()
            };
            assert_eq!(approximate_maxcut(&g, &cfg).unwrap().value, 1.0);
        }
    }

    #[test]
    fn linear_and_constant_polynomials() {
        let p = SmoothPolynomial::from_terms(
            3,
            Coeff::from_integer(1),
            [(vec![0], Coeff::from_integer(2)), (vec![1], Coeff::from_integer(-3)), (vec![2], Coeff::from_integer(1))],
        )
        .unwrap();
        let r = maximize_smooth(&p, &SchemeConfig::default()).unwrap();
        assert_eq!(r.best.bits(), &[1, 0, 1]);
        assert_eq!(r.method, "exact-linear");
        let c = SmoothPolynomial::constant_poly(2, Coeff::from_integer(5));
        assert_eq!(maximize_smooth(&c, &SchemeConfig::default()).unwrap().value, 5.0);
    }

    #[test]
    fn exhaustive_cap_fails_first() {
        let g = Graph::new(30, (0..29).map(|i| (i, i + 1))).unwrap();
        let cfg = SchemeConfig {
            cap: 4,
            ..SchemeConfig::default()
        };
        assert!(matches!(approximate_maxcut(&g, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn kdense_small_cases() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let cfg = SchemeConfig::default();
        let r = approximate_kdense(&g, 4, &cfg).unwrap();
        assert_eq!(r.kdense.unwrap().edges, 4);
        let r = approximate_kdense(&g, 1, &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(approximate_kdense(&g, 5, &cfg).is_err());
    }

    #[test]
    fn repair_reaches_k() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let mut z = Assignment::zeros(5);
        assert_eq!(repair(&g, &mut z, 3), 3);
        assert_eq!(z.ones(), 3);
        let mut z = Assignment::from_bits(vec![1; 5]).unwrap();
        assert_eq!(repair(&g, &mut z, 2), 3);
        assert_eq!(z.ones(), 2);
    }
}
