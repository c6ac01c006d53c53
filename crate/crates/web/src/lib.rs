//! Browser bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string so the page
//! needs no generated TypeScript types.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use smoothopt::estimator::Mode;
use smoothopt::generate::{generate, Family, GenSpec, Instance};
use smoothopt::oracle::{brute_force_kdense, brute_force_max, check_rounding_lemma, check_sampling_lemma, LemmaCheckParams};
use smoothopt::poly::{coeff_to_f64, from_graph_maxcut};
use smoothopt::scheme::{approximate_kdense, approximate_maxcut, SchemeConfig};
use smoothopt::{Graph, Result};

/// Largest instance the page solves exactly for comparison.
pub const ORACLE_LIMIT: usize = 18;

#[derive(Debug, Serialize)]
pub struct GraphView {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&Graph> for GraphView {
    fn from(g: &Graph) -> Self {
        GraphView { n: g.n(), edges: g.edges().to_vec() }
    }
}

#[derive(Debug, Serialize)]
pub struct MaxCutDemo {
    pub graph: GraphView,
    pub planted: Vec<u8>,
    pub planted_cut: usize,
    pub sides: Vec<u8>,
    pub cut: f64,
    pub fractional_objective: Option<f64>,
    pub optimum: Option<f64>,
    pub assignments_tried: u64,
}

/// Planted-cut graph solved from its hidden bipartition (`planted`) or from
/// a random sample of assignments.
pub fn maxcut_demo(n: usize, delta: f64, eps: f64, seed: u64, planted: bool) -> Result<MaxCutDemo> {
    let out = generate(&GenSpec { family: Family::PlantedCut, n, delta, k: 0, seed })?;
    let Instance::Graph(g) = out.instance else {
        unreachable!("planted-cut yields a graph")
    };
    let hidden = out.planted.expect("planted-cut records its bipartition");
    let mode = if planted {
        Mode::Planted { x: hidden.clone() }
    } else {
        Mode::Random { count: 32 }
    };
    let cfg = SchemeConfig { eps, delta, mode, seed, trials: 16, ..SchemeConfig::default() };
    let report = approximate_maxcut(&g, &cfg)?;
    let optimum = if n <= ORACLE_LIMIT {
        Some(coeff_to_f64(&brute_force_max(&from_graph_maxcut(&g))?.1))
    } else {
        None
    };
    Ok(MaxCutDemo {
        graph: GraphView::from(&g),
        planted_cut: g.cut_value(hidden.bits()),
        planted: hidden.bits().to_vec(),
        sides: report.best.bits().to_vec(),
        cut: report.value,
        fractional_objective: report.fractional_objective,
        optimum,
        assignments_tried: report.counters.assignments_tried,
    })
}

#[derive(Debug, Serialize)]
pub struct LemmaPoint {
    pub alpha: f64,
    pub sample_size: usize,
    pub sampling_rate: f64,
    pub rounding_rate: f64,
}

/// Violation rates of both concentration checks over a sweep of `alpha`
/// values (used for both `α1` and `α2`).
pub fn lemma_sweep(n: usize, delta: f64, alphas: &[f64], trials: usize, seed: u64) -> Result<Vec<LemmaPoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            let params = LemmaCheckParams::new(n, 0, delta, alpha, alpha, trials, seed);
            let s = check_sampling_lemma(&params)?;
            let r = check_rounding_lemma(&params)?;
            Ok(LemmaPoint {
                alpha,
                sample_size: s.sample_size.unwrap_or(0),
                sampling_rate: s.empirical_rate,
                rounding_rate: r.empirical_rate,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct KDenseDemo {
    pub graph: GraphView,
    pub k: usize,
    pub branch: String,
    pub selected: Vec<u8>,
    pub edges: usize,
    pub optimum: Option<usize>,
}

pub fn kdense_demo(n: usize, delta: f64, k: usize, eps: f64, seed: u64, force_sampled: bool) -> Result<KDenseDemo> {
    let out = generate(&GenSpec { family: Family::GraphDensity, n, delta, k: 0, seed })?;
    let Instance::Graph(g) = out.instance else {
        unreachable!("graph-density yields a graph")
    };
    let cfg = SchemeConfig {
        eps,
        delta,
        seed,
        trials: 16,
        mode: Mode::Random { count: 32 },
        kdense_budget: if force_sampled { 0 } else { 5_000_000 },
        ..SchemeConfig::default()
    };
    let report = approximate_kdense(&g, k, &cfg)?;
    let summary = report.kdense.expect("k-densest reports carry a summary");
    let optimum = if n <= ORACLE_LIMIT { Some(brute_force_kdense(&g, k)?.1) } else { None };
    Ok(KDenseDemo {
        graph: GraphView::from(&g),
        k,
        branch: summary.branch,
        selected: report.best.bits().to_vec(),
        edges: summary.edges,
        optimum,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    let value = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = maxcutDemo)]
pub fn maxcut_demo_js(n: usize, delta: f64, eps: f64, seed: u64, planted: bool) -> std::result::Result<String, JsValue> {
    to_js(maxcut_demo(n, delta, eps, seed, planted))
}

#[wasm_bindgen(js_name = lemmaSweep)]
pub fn lemma_sweep_js(n: usize, delta: f64, alphas: Vec<f64>, trials: usize, seed: u64) -> std::result::Result<String, JsValue> {
    to_js(lemma_sweep(n, delta, &alphas, trials, seed))
}

#[wasm_bindgen(js_name = kdenseDemo)]
pub fn kdense_demo_js(
    n: usize,
    delta: f64,
    k: usize,
    eps: f64,
    seed: u64,
    force_sampled: bool,
) -> std::result::Result<String, JsValue> {
    to_js(kdense_demo(n, delta, k, eps, seed, force_sampled))
}
